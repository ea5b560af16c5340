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
//
// Joint design of the analog combiner, quantizer dynamic range and digital
// recovery matrix that minimize the task MSE for a hardware-limited
// quantization front end. The chain is:
//
//   lmmse_matrix -> whitened_decomposition -> kappa_p -> solve_waterfilling
//   -> equal_diagonal_unitary -> assemble_combiner -> dynamic_range
//   -> digital_matrix -> analytic_excess_distortion
//
// wrapped end to end by design_pipeline().

#ifndef TASKQUANT_DESIGN_HPP
#define TASKQUANT_DESIGN_HPP

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "taskquant/channel.hpp"
#include "taskquant/config.hpp"
#include "taskquant/linalg.hpp"

namespace taskquant {

/// LMMSE estimation matrix for unit-variance users:
/// H^H (H H^H + noise_variance I)^{-1}.
/// Throws if the received covariance is conditioned worse than 1e12.
inline Eigen::MatrixXcd lmmse_matrix(const Eigen::MatrixXcd& channel,
                                     double noise_variance) {
  if (!(noise_variance > 0.0))
    throw std::invalid_argument("lmmse_matrix: noise variance must be positive");
  const Eigen::MatrixXcd cov = received_covariance(channel, noise_variance);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(cov);
  const double cond = es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
  if (cond > 1e12)
    throw std::runtime_error(
        "lmmse_matrix: received covariance condition number " +
        std::to_string(cond) + " exceeds 1e12");
  return cov.ldlt().solve(channel).adjoint();
}

/// SVD of the whitened task matrix lmmse * cov^{1/2}: the right singular
/// basis carries the directions worth spending quantizer gain on.
struct WhitenedTaskDecomposition {
  Eigen::MatrixXcd lmmse;                   // K x N
  Eigen::MatrixXcd whitened_task;           // K x N
  Eigen::MatrixXcd right_singular_vectors;  // N x N unitary
  Eigen::VectorXd singular_values;          // K, descending
  HermitianSqrt covariance_sqrt;
};

inline WhitenedTaskDecomposition whitened_decomposition(
    const Eigen::MatrixXcd& lmmse, const Eigen::MatrixXcd& received_cov) {
  if (lmmse.cols() != received_cov.rows())
    throw std::invalid_argument("whitened_decomposition: shape mismatch");
  WhitenedTaskDecomposition d;
  d.lmmse = lmmse;
  d.covariance_sqrt = hermitian_sqrt(received_cov);
  d.whitened_task = lmmse * d.covariance_sqrt.sqrt;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(
      d.whitened_task, Eigen::ComputeFullV | Eigen::ComputeThinU);
  d.right_singular_vectors = svd.matrixV();
  d.singular_values = svd.singularValues();  // descending by construction
  return d;
}

/// Overload coefficient eta^2 / (1 - 2 eta^2 / (3 levels^2)); the denominator
/// budgets the dither power inside the dynamic range.
inline double kappa_p(double overload_constant, int levels) {
  if (levels < 2) throw std::invalid_argument("kappa_p: levels must be >= 2");
  const double eta2 = overload_constant * overload_constant;
  const double denom = 1.0 - 2.0 * eta2 / (3.0 * levels * levels);
  if (!(denom > 0.0))
    throw std::invalid_argument(
        "kappa_p: eta^2 < 3*levels^2/2 violated (denominator " +
        std::to_string(denom) + ")");
  return eta2 / denom;
}

/// Water-filling over the whitened-task singular values.
struct WaterfillingSolution {
  double level = 0.0;      // threshold zeta
  Eigen::VectorXd gains;   // K combiner gains, sqrt(c*(zeta*sv - 1)^+)
  int active_modes = 0;
};

/// Solves (2 kappa / (levels^2 K)) * sum_i (zeta*sv_i - 1)^+ = 1 for zeta.
///
/// The left side is piecewise linear and nondecreasing in zeta, so the
/// solution is found exactly by scanning the breakpoints 1/sv_i: with the
/// top m modes active, zeta = (target + m) / sum_{i<=m} sv_i, accepted when
/// it is consistent with exactly those m modes being active.
/// Singular values below 1e-12 * sv_max are treated as zero.
inline WaterfillingSolution solve_waterfilling(
    const Eigen::VectorXd& singular_values, double kappa, int levels,
    int num_users) {
  const int k = num_users;
  if (singular_values.size() < k)
    throw std::invalid_argument("solve_waterfilling: need K singular values");
  const double sv_max = singular_values.size() ? singular_values.maxCoeff() : 0.0;
  if (!(sv_max > 0.0))
    throw std::invalid_argument(
        "solve_waterfilling: all singular values are zero, no finite level exists");
  const double floor_sv = 1e-12 * sv_max;
  const double coeff = 2.0 * kappa / (static_cast<double>(levels) * levels * k);
  const double target = 1.0 / coeff;  // required sum of (zeta*sv_i - 1)^+

  WaterfillingSolution out;
  double running_sum = 0.0;
  for (int m = 1; m <= k; ++m) {
    const double sv = singular_values(m - 1);
    if (sv <= floor_sv) break;
    running_sum += sv;
    const double zeta = (target + m) / running_sum;
    const bool lower_ok = zeta * sv >= 1.0;
    const bool upper_ok = m == k || singular_values(m) <= floor_sv ||
                          zeta * singular_values(m) <= 1.0;
    if (lower_ok && upper_ok) {
      out.level = zeta;
      out.active_modes = m;
      break;
    }
  }
  if (out.active_modes == 0)
    throw std::runtime_error("solve_waterfilling: breakpoint scan failed");

  out.gains.resize(k);
  for (int i = 0; i < k; ++i) {
    const double sv = singular_values(i) > floor_sv ? singular_values(i) : 0.0;
    const double excess = std::max(out.level * sv - 1.0, 0.0);
    out.gains(i) = std::sqrt(coeff * excess);
  }
  return out;
}

/// Normalized DFT matrix; for any diagonal D, every diagonal entry of
/// F D F^H equals trace(D)/n, which is exactly the equal-diagonal property
/// the combiner needs.
inline Eigen::MatrixXcd equal_diagonal_unitary(int n) {
  if (n < 1) throw std::invalid_argument("equal_diagonal_unitary: n >= 1");
  Eigen::MatrixXcd f(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      f(r, c) = scale * std::polar(1.0, -2.0 * M_PI * r * c / n);
  return f;
}

/// mixing * [diag(gains) | 0] * V^H * cov^{-1/2}.
inline Eigen::MatrixXcd assemble_combiner(
    const WhitenedTaskDecomposition& decomp, const Eigen::VectorXd& gains,
    const Eigen::MatrixXcd& mixing) {
  const int k = static_cast<int>(gains.size());
  if (mixing.rows() != k || mixing.cols() != k)
    throw std::invalid_argument("assemble_combiner: mixing must be K x K");
  if (decomp.right_singular_vectors.rows() < k)
    throw std::invalid_argument("assemble_combiner: shape mismatch");
  return mixing * gains.asDiagonal() *
         decomp.right_singular_vectors.leftCols(k).adjoint() *
         decomp.covariance_sqrt.inv_sqrt;
}

/// Quantizer dynamic range: gamma = sqrt(kappa_p / K).
inline double dynamic_range(double overload_constant, int num_users, int levels) {
  if (num_users < 1) throw std::invalid_argument("dynamic_range: K >= 1");
  return std::sqrt(kappa_p(overload_constant, levels) / num_users);
}

/// MSE-optimal digital recovery matrix for a given combiner:
/// lmmse * cov * A^H * (A cov A^H + (2 gamma^2 / (levels^2 K)) I)^{-1}.
inline Eigen::MatrixXcd digital_matrix(const Eigen::MatrixXcd& combiner,
                                       const Eigen::MatrixXcd& lmmse,
                                       const Eigen::MatrixXcd& received_cov,
                                       double dyn_range, int levels,
                                       int num_users) {
  if (!(dyn_range > 0.0))
    throw std::invalid_argument("digital_matrix: dynamic range must be positive");
  const int k = num_users;
  if (combiner.rows() != k || lmmse.rows() != k)
    throw std::invalid_argument("digital_matrix: shape mismatch");
  const double reg =
      2.0 * dyn_range * dyn_range / (static_cast<double>(levels) * levels * k);
  const Eigen::MatrixXcd gram = combiner * received_cov * combiner.adjoint() +
                                reg * Eigen::MatrixXcd::Identity(k, k);
  // B = lmmse cov A^H gram^{-1}; solve on the Hermitian gram from the right.
  return gram.ldlt().solve(combiner * received_cov * lmmse.adjoint()).adjoint();
}

/// Minimal excess distortion over the LMMSE floor predicted for the
/// designed system: sum_i sv_i^2 / ((zeta*sv_i - 1)^+ + 1).
inline double analytic_excess_distortion(const Eigen::VectorXd& singular_values,
                                         double waterfilling_level) {
  double total = 0.0;
  for (int i = 0; i < singular_values.size(); ++i) {
    const double sv = singular_values(i);
    const double excess = std::max(waterfilling_level * sv - 1.0, 0.0);
    total += sv * sv / (excess + 1.0);
  }
  return total;
}

/// Everything the receiver needs, plus the intermediates for inspection.
struct TaskQuantDesign {
  Eigen::MatrixXcd analog_combiner;  // K x N
  Eigen::MatrixXcd digital;          // K x K recovery matrix
  Eigen::MatrixXcd mixing_unitary;   // K x K
  Eigen::VectorXd combiner_gains;    // K water-filling gains
  double waterfilling_level = 0.0;
  double overload_coefficient = 0.0;
  double range = 0.0;    // quantizer dynamic range
  double spacing = 0.0;  // 2 * range / levels
  int levels = 0;        // per-quantizer levels
  double predicted_excess_distortion = 0.0;
  WhitenedTaskDecomposition decomposition;
};

/// Runs the full Theorem-1/Theorem-2 chain; errors from any stage are
/// rethrown with the stage name prefixed.
inline TaskQuantDesign design_pipeline(const Eigen::MatrixXcd& channel,
                                       double noise_variance,
                                       const SystemConfig& config) {
  validate_config(config);
  const int k = config.num_users;
  const int levels = per_quantizer_levels(config.total_levels_log2, k);
  auto stage = [](const char* name, auto&& fn) {
    try {
      return fn();
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string(name) + ": " + e.what());
    }
  };

  TaskQuantDesign d;
  d.levels = levels;
  const Eigen::MatrixXcd cov = received_covariance(channel, noise_variance);
  const Eigen::MatrixXcd lmmse = stage(
      "lmmse_matrix", [&] { return lmmse_matrix(channel, noise_variance); });
  d.decomposition = stage("whitened_decomposition",
                          [&] { return whitened_decomposition(lmmse, cov); });
  d.overload_coefficient = stage(
      "kappa_p", [&] { return kappa_p(config.overload_constant, levels); });
  const WaterfillingSolution wf = stage("solve_waterfilling", [&] {
    return solve_waterfilling(d.decomposition.singular_values,
                              d.overload_coefficient, levels, k);
  });
  d.waterfilling_level = wf.level;
  d.combiner_gains = wf.gains;
  d.mixing_unitary = equal_diagonal_unitary(k);
  d.analog_combiner = stage("assemble_combiner", [&] {
    return assemble_combiner(d.decomposition, wf.gains, d.mixing_unitary);
  });
  d.range = stage("dynamic_range", [&] {
    return dynamic_range(config.overload_constant, k, levels);
  });
  d.spacing = 2.0 * d.range / levels;
  d.digital = stage("digital_matrix", [&] {
    return digital_matrix(d.analog_combiner, lmmse, cov, d.range, levels, k);
  });
  d.predicted_excess_distortion =
      analytic_excess_distortion(d.decomposition.singular_values, wf.level);
  return d;
}

}  // namespace taskquant

#endif  // TASKQUANT_DESIGN_HPP
