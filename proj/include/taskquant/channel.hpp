// SPDX-License-Identifier: Apache-2.0
//
// taskquant - task-based quantization for multi-user MIMO signal recovery
// Copyright (C) 2026 taskquant contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef TASKQUANT_CHANNEL_HPP
#define TASKQUANT_CHANNEL_HPP

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "taskquant/config.hpp"
#include "taskquant/rng.hpp"

namespace taskquant {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

/// One propagation path from a user to the array.
struct PathComponent {
  double angle_rad = 0.0;   // angle of arrival, in [-pi/2, pi/2]
  double distance_m = 0.0;  // user-to-array distance, > 0
  std::complex<double> gain{1.0, 0.0};
};

/// Per-user geometry; one path per user in the line-of-sight default,
/// several when the multipath extension is enabled.
struct UserGeometry {
  std::vector<std::vector<PathComponent>> users;
  int num_users() const { return static_cast<int>(users.size()); }
};

/// Uniform-linear-array response: entry n is exp(j*pi*n*sin(angle)).
inline Eigen::VectorXcd steering_vector(double angle_rad, int num_antennas) {
  if (num_antennas < 1) throw std::invalid_argument("num_antennas must be >= 1");
  if (!std::isfinite(angle_rad)) throw std::invalid_argument("angle must be finite");
  Eigen::VectorXcd a(num_antennas);
  const double s = std::sin(angle_rad);
  for (int n = 0; n < num_antennas; ++n)
    a(n) = std::polar(1.0, M_PI * n * s);
  return a;
}

/// Column k is the sum over paths of gain * exp(-j*2*pi*f_c*r/c) * a(theta),
/// scaled by 1/sqrt(paths) so multipath columns keep unit per-entry power.
inline Eigen::MatrixXcd generate_channel(const SystemConfig& config,
                                         const UserGeometry& geometry) {
  if (geometry.num_users() != config.num_users)
    throw std::invalid_argument("geometry has " +
                                std::to_string(geometry.num_users()) +
                                " users, config expects " +
                                std::to_string(config.num_users));
  const int n = config.num_antennas;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, config.num_users);
  for (int k = 0; k < config.num_users; ++k) {
    const auto& paths = geometry.users[k];
    if (paths.empty()) throw std::invalid_argument("user with no paths");
    const double norm = 1.0 / std::sqrt(static_cast<double>(paths.size()));
    for (const auto& p : paths) {
      const double phase =
          -2.0 * M_PI * config.carrier_freq_hz * p.distance_m / kSpeedOfLight;
      h.col(k) += norm * p.gain * std::polar(1.0, phase) *
                  steering_vector(p.angle_rad, n);
    }
  }
  return h;
}

/// Angles i.i.d. uniform on [-pi/3, pi/3], distances uniform on [10, 100] m.
/// Line-of-sight paths carry unit gain; extra multipath components get
/// i.i.d. standard complex Gaussian gains.
inline UserGeometry sample_geometry(const SystemConfig& config, RngStream& rng) {
  UserGeometry g;
  g.users.resize(config.num_users);
  for (int k = 0; k < config.num_users; ++k) {
    for (int p = 0; p < config.paths_per_user; ++p) {
      PathComponent pc;
      pc.angle_rad = rng.uniform(-M_PI / 3.0, M_PI / 3.0);
      pc.distance_m = rng.uniform(10.0, 100.0);
      pc.gain = (config.paths_per_user == 1) ? std::complex<double>(1.0, 0.0)
                                             : rng.complex_gaussian(1.0);
      g.users[k].push_back(pc);
    }
  }
  return g;
}

/// One batch of Monte Carlo draws; column t holds trial t.
struct SignalBatch {
  Eigen::MatrixXcd user_signals;  // K x T
  Eigen::MatrixXcd noise;         // N x T
  Eigen::MatrixXcd received;      // N x T
  double noise_variance = 0.0;
};

/// Draws unit-variance circular Gaussian user signals and noise with the
/// given variance, and forms received = H * s + v.
inline SignalBatch generate_received(const Eigen::MatrixXcd& channel,
                                     double noise_variance, int num_trials,
                                     RngStream& rng) {
  if (!(noise_variance > 0.0))
    throw std::invalid_argument("noise variance must be positive");
  const int n = static_cast<int>(channel.rows());
  const int k = static_cast<int>(channel.cols());
  SignalBatch batch;
  batch.noise_variance = noise_variance;
  batch.user_signals.resize(k, num_trials);
  batch.noise.resize(n, num_trials);
  for (int t = 0; t < num_trials; ++t) {
    for (int i = 0; i < k; ++i)
      batch.user_signals(i, t) = rng.complex_gaussian(1.0);
    for (int i = 0; i < n; ++i)
      batch.noise(i, t) = rng.complex_gaussian(noise_variance);
  }
  batch.received = channel * batch.user_signals + batch.noise;
  return batch;
}

/// Covariance of the received signal for unit-variance users:
/// H * H^H + noise_variance * I.
inline Eigen::MatrixXcd received_covariance(const Eigen::MatrixXcd& channel,
                                            double noise_variance) {
  if (!(noise_variance > 0.0))
    throw std::invalid_argument("noise variance must be positive");
  const int n = static_cast<int>(channel.rows());
  return channel * channel.adjoint() +
         noise_variance * Eigen::MatrixXcd::Identity(n, n);
}

}  // namespace taskquant

#endif  // TASKQUANT_CHANNEL_HPP
