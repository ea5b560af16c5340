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

#ifndef TASKQUANT_CONFIG_HPP
#define TASKQUANT_CONFIG_HPP

#include <cmath>
#include <cstdint>
#include <string>

#include "taskquant/errors.hpp"

namespace taskquant {

/// How quantizer inputs are dithered.
///  - None: plain mid-rise quantization.
///  - Subtractive: uniform dither on [-spacing/2, spacing/2], subtracted
///    after quantization; in-range error is white with variance spacing^2/12
///    per real dimension.
///  - Triangular: non-subtractive triangular dither (sum of two uniforms);
///    total error variance spacing^2/4 per real dimension, the additive-noise
///    statistics assumed by the combiner/digital-matrix design.
enum class DitherMode { None, Subtractive, Triangular };

inline const char* to_string(DitherMode m) {
  switch (m) {
    case DitherMode::None: return "none";
    case DitherMode::Subtractive: return "subtractive";
    case DitherMode::Triangular: return "triangular";
  }
  return "?";
}

/// All scenario knobs for one experiment.
struct SystemConfig {
  int num_antennas = 16;           // N, base-station array size
  int num_users = 2;               // K, single-antenna user terminals
  int total_levels_log2 = 10;      // log2 of the total quantization levels M
  double overload_constant = 2.0;  // dynamic-range headroom factor
  double snr_db = 2.0;
  double carrier_freq_hz = 2.3e9;
  int num_trials = 2000;
  std::uint64_t master_seed = 1;
  DitherMode dither = DitherMode::Subtractive;
  int paths_per_user = 1;          // 1 = line-of-sight only
};

/// Levels available to each scalar quantizer when the M total levels are
/// split across K streams: floor(M^(1/K)).
inline int per_quantizer_levels(int total_levels_log2, int num_users) {
  if (num_users <= 0) throw ConfigError("num_users must be positive");
  if (total_levels_log2 % num_users == 0)
    return 1 << (total_levels_log2 / num_users);
  // 2^(p/q) is irrational for q not dividing p, so the floor is safe against
  // rounding of exp2.
  return static_cast<int>(std::floor(std::exp2(
      static_cast<double>(total_levels_log2) / num_users)));
}

/// Noise variance for a given SNR, with unit-power users and unit-modulus
/// channel gains: sigma^2 = 10^(-snr_db/10).
inline double snr_to_noise_variance(double snr_db) {
  if (!std::isfinite(snr_db)) throw ConfigError("snr_db must be finite");
  return std::pow(10.0, -snr_db / 10.0);
}

/// Throws ConfigError naming the violated invariant.
inline void validate_config(const SystemConfig& c) {
  if (c.num_antennas < 1) throw ConfigError("num_antennas must be >= 1");
  if (c.num_users < 1) throw ConfigError("num_users must be >= 1");
  if (c.num_users > c.num_antennas)
    throw ConfigError("invariant K <= N violated: num_users (" +
                      std::to_string(c.num_users) + ") exceeds num_antennas (" +
                      std::to_string(c.num_antennas) + ")");
  if (c.total_levels_log2 < 1)
    throw ConfigError("total_levels_log2 must be >= 1");
  const int levels = per_quantizer_levels(c.total_levels_log2, c.num_users);
  if (levels < 2)
    throw ConfigError(
        "invariant floor(M^(1/K)) >= 2 violated: total_levels_log2 " +
        std::to_string(c.total_levels_log2) + " with " +
        std::to_string(c.num_users) + " users gives " +
        std::to_string(levels) + " level(s) per quantizer");
  if (!(c.overload_constant > 0.0))
    throw ConfigError("overload_constant must be positive");
  const double eta2 = c.overload_constant * c.overload_constant;
  if (!(eta2 < 1.5 * levels * levels))
    throw ConfigError(
        "invariant eta^2 < 3*levels^2/2 violated: overload_constant " +
        std::to_string(c.overload_constant) + " with " +
        std::to_string(levels) + " levels per quantizer");
  if (!std::isfinite(c.snr_db)) throw ConfigError("snr_db must be finite");
  if (!(c.carrier_freq_hz > 0.0))
    throw ConfigError("carrier_freq_hz must be positive");
  if (c.num_trials < 1) throw ConfigError("num_trials must be >= 1");
  if (c.paths_per_user < 1) throw ConfigError("paths_per_user must be >= 1");
}

}  // namespace taskquant

#endif  // TASKQUANT_CONFIG_HPP
