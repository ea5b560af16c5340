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
// Self-check suite behind the `validate` CLI subcommand: re-runs the core
// design identities and statistical properties at reduced trial counts and
// reports a pass/fail table.

#ifndef TASKQUANT_VALIDATION_HPP
#define TASKQUANT_VALIDATION_HPP

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "taskquant/baselines.hpp"
#include "taskquant/design.hpp"
#include "taskquant/harness.hpp"
#include "taskquant/quantizer.hpp"

namespace taskquant {

struct ValidationOptions {
  bool quick = false;
  std::uint64_t seed = 20260810;
  // Debug fault injection: scales the water-filling level before the
  // residual check so the check's sensitivity can be demonstrated.
  double zeta_fault_factor = 1.0;
};

struct ValidationReport {
  struct Item {
    std::string name;
    bool passed = false;
    std::string detail;
  };
  std::vector<Item> items;

  bool all_passed() const {
    for (const auto& i : items)
      if (!i.passed) return false;
    return true;
  }
};

namespace detail {

inline Eigen::MatrixXcd random_channel_instance(RngStream& rng, int& k_out,
                                                int& n_out, double& noise_out) {
  static const int ks[] = {1, 2, 4, 8};
  static const int ns[] = {4, 8, 16, 60, 120};
  int k = ks[rng.uniform_index(4)];
  int n = ns[rng.uniform_index(5)];
  while (k > n) n = ns[rng.uniform_index(5)];
  SystemConfig cfg;
  cfg.num_users = k;
  cfg.num_antennas = n;
  UserGeometry geo = sample_geometry(cfg, rng);
  k_out = k;
  n_out = n;
  noise_out = snr_to_noise_variance(rng.uniform(0.0, 12.0));
  return generate_channel(cfg, geo);
}

}  // namespace detail

inline ValidationReport run_validation(const ValidationOptions& opt) {
  ValidationReport report;
  auto add = [&](const std::string& name, bool ok, const std::string& detail) {
    report.items.push_back({name, ok, detail});
  };
  RngStream rng(opt.seed);

  // Design identities over random instances.
  {
    const int instances = opt.quick ? 100 : 400;
    double worst_residual = 0.0, worst_gain = 0.0, worst_diag = 0.0;
    for (int i = 0; i < instances; ++i) {
      int k = 0, n = 0;
      double noise = 0.0;
      const Eigen::MatrixXcd h = detail::random_channel_instance(rng, k, n, noise);
      const int levels = 2 << rng.uniform_index(5);  // 2..32
      const double kappa = kappa_p(2.0, levels);
      const Eigen::MatrixXcd cov = received_covariance(h, noise);
      const auto decomp = whitened_decomposition(lmmse_matrix(h, noise), cov);
      WaterfillingSolution wf =
          solve_waterfilling(decomp.singular_values, kappa, levels, k);
      wf.level *= opt.zeta_fault_factor;
      const double coeff = 2.0 * kappa / (static_cast<double>(levels) * levels * k);
      double sum = 0.0;
      for (int m = 0; m < k; ++m)
        sum += std::max(wf.level * decomp.singular_values(m) - 1.0, 0.0);
      worst_residual = std::max(worst_residual, std::abs(coeff * sum - 1.0));
      // Gains re-derived from the (possibly faulted) level.
      Eigen::VectorXd gains(k);
      for (int m = 0; m < k; ++m)
        gains(m) = std::sqrt(
            coeff * std::max(wf.level * decomp.singular_values(m) - 1.0, 0.0));
      worst_gain = std::max(worst_gain,
                            std::abs(gains.squaredNorm() - 1.0));
      const Eigen::MatrixXcd a =
          assemble_combiner(decomp, gains, equal_diagonal_unitary(k));
      const Eigen::MatrixXcd asa = a * cov * a.adjoint();
      for (int m = 0; m < k; ++m)
        worst_diag =
            std::max(worst_diag, std::abs(asa(m, m).real() - 1.0 / k));
    }
    std::ostringstream d;
    d << "max residual " << worst_residual << " over " << instances
      << " instances";
    add("water-filling residual <= 1e-9", worst_residual <= 1e-9, d.str());
    add("combiner gain normalization == 1 (1e-9)", worst_gain <= 1e-9,
        "max deviation " + format_double(worst_gain));
    add("equal-diagonal output power == 1/K (1e-8)", worst_diag <= 1e-8,
        "max deviation " + format_double(worst_diag));
  }

  // Steering vectors and covariance definiteness.
  {
    bool ok = true;
    for (int i = 0; i < 50; ++i) {
      const Eigen::VectorXcd a =
          steering_vector(rng.uniform(-M_PI / 2, M_PI / 2), 8);
      for (int n = 0; n < a.size(); ++n)
        ok = ok && std::abs(std::abs(a(n)) - 1.0) < 1e-12;
      int k = 0, n = 0;
      double noise = 0.0;
      const Eigen::MatrixXcd h = detail::random_channel_instance(rng, k, n, noise);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
          received_covariance(h, noise));
      ok = ok && es.eigenvalues()(0) >= noise * (1.0 - 1e-9);
    }
    add("steering modulus / covariance definiteness", ok, "50 instances");
  }

  // Dithered error statistics.
  {
    QuantizerSpec q{1.5, 8, DitherMode::Subtractive};
    const double delta = q.spacing();
    RngStream drng(opt.seed ^ 0xD17);
    const long n = opt.quick ? 200000 : 1000000;
    double sum = 0.0, sum2 = 0.0;
    for (long i = 0; i < n; ++i) {
      const double x = drng.uniform(-q.range + delta / 2, q.range - delta / 2);
      const double w = drng.uniform(-delta / 2, delta / 2);
      const double err = (quantize_scalar(q, x + w) - w) - x;
      sum += err;
      sum2 += err * err;
    }
    const double var = sum2 / n;
    const double rel = std::abs(var - delta * delta / 12.0) / (delta * delta / 12.0);
    add("subtractive dither error variance Delta^2/12 (2%)", rel < 0.02,
        "relative deviation " + format_double(rel));
  }

  // Orthogonality decomposition on a small sweep point.
  {
    SweepSpec spec;
    spec.base.num_trials = opt.quick ? 300 : 800;
    spec.base.master_seed = opt.seed;
    spec.grid = {8.0};
    spec.curves = {CurveKind::TaskBased};
    const auto data = run_point(spec, 0, false);
    std::vector<double> diffs(data.records.size());
    for (std::size_t t = 0; t < diffs.size(); ++t)
      diffs[t] = data.records[t].total_sq_error -
                 data.records[t].floor_sq_error -
                 data.records[t].excess_sq_error;
    const Aggregate a = aggregate(diffs);
    const double limit = 5.0 * a.standard_error.value_or(0.0);
    add("orthogonality decomposition (5 SEs)", std::abs(a.mean) <= limit,
        "mean " + format_double(a.mean) + " vs " + format_double(limit));
  }

  // Excess distortion vs the closed form. With subtractive dither the
  // measured excess sits well below the closed form (noise model gap, see
  // README); the triangular mode tracks it.
  {
    SystemConfig cfg;
    cfg.total_levels_log2 = 8;
    cfg.master_seed = opt.seed;
    RngStream geo(opt.seed ^ 0xC0FFEE);
    const Eigen::MatrixXcd h = generate_channel(cfg, sample_geometry(cfg, geo));
    const double noise = snr_to_noise_variance(cfg.snr_db);
    const TaskQuantDesign d = design_pipeline(h, noise, cfg);
    const int trials = opt.quick ? 4000 : 20000;
    auto measure = [&](DitherMode mode) {
      QuantizerSpec q{d.range, d.levels, mode};
      double sum = 0.0;
      RngStream trng(opt.seed ^ static_cast<std::uint64_t>(mode));
      for (int t = 0; t < trials; ++t)
        sum += run_trial(d, h, noise, q, trng).excess_sq_error;
      return sum / trials;
    };
    const double sub = measure(DitherMode::Subtractive) /
                       d.predicted_excess_distortion;
    const double tri = measure(DitherMode::Triangular) /
                       d.predicted_excess_distortion;
    add("subtractive excess / closed form in [0.25, 0.65]",
        sub > 0.25 && sub < 0.65, "ratio " + format_double(sub));
    add("triangular excess / closed form in [0.9, 1.2]",
        tri > 0.9 && tri < 1.2, "ratio " + format_double(tri));
  }

  // Scale covariance of the whitened design.
  {
    SystemConfig cfg;
    RngStream geo(opt.seed ^ 0xABCD);
    const Eigen::MatrixXcd h = generate_channel(cfg, sample_geometry(cfg, geo));
    const double noise = snr_to_noise_variance(cfg.snr_db);
    const double c = 3.7;
    const TaskQuantDesign d1 = design_pipeline(h, noise, cfg);
    const TaskQuantDesign d2 = design_pipeline(c * h, c * c * noise, cfg);
    const double dv = (d1.decomposition.singular_values -
                       d2.decomposition.singular_values)
                          .cwiseAbs()
                          .maxCoeff();
    const double dz =
        std::abs(d1.waterfilling_level - d2.waterfilling_level) /
        d1.waterfilling_level;
    const double dd = std::abs(d1.predicted_excess_distortion -
                               d2.predicted_excess_distortion) /
                      std::max(d1.predicted_excess_distortion, 1e-300);
    const bool ok = dv <= 1e-9 && dz <= 1e-9 && dd <= 1e-9;
    add("scale covariance (1e-9)", ok,
        "dsv " + format_double(dv) + ", dzeta " + format_double(dz) +
            ", ddist " + format_double(dd));
  }

  // Trained VQ cannot beat the rate-distortion bound.
  {
    SystemConfig cfg;
    cfg.num_antennas = 8;
    cfg.total_levels_log2 = 4;
    cfg.master_seed = opt.seed;
    RngStream geo(opt.seed ^ 0x5151);
    const Eigen::MatrixXcd h = generate_channel(cfg, sample_geometry(cfg, geo));
    const double noise = snr_to_noise_variance(cfg.snr_db);
    RngStream vrng(opt.seed ^ 0x77);
    Eigen::MatrixXd train_y(1600, 16), train_s(1600, 4);
    for (int i = 0; i < 1600; ++i) {
      const SignalBatch b = generate_received(h, noise, 1, vrng);
      train_y.row(i) = real_stack(b.received.col(0));
      train_s.row(i) = real_stack(b.user_signals.col(0));
    }
    RngStream cbrng(opt.seed ^ 0x88);
    const VqTaskModel model = fit_vq_task_model(train_y, train_s, 16, cbrng);
    const int trials = opt.quick ? 1500 : 4000;
    std::vector<double> errs(trials);
    for (int t = 0; t < trials; ++t) {
      const SignalBatch b = generate_received(h, noise, 1, vrng);
      const int m = nearest_codeword(model.codebook, real_stack(b.received.col(0)));
      errs[t] = (model.task_table.row(m).transpose() -
                 real_stack(b.user_signals.col(0)))
                    .squaredNorm();
    }
    const Aggregate a = aggregate(errs);
    const double bound = task_ignorant_mse_analytic(h, noise, 4.0);
    const bool ok = a.mean >= bound - 3.0 * a.standard_error.value_or(0.0);
    add("trained VQ >= rate-distortion bound - 3 SEs", ok,
        "vq " + format_double(a.mean) + " vs bound " + format_double(bound));
  }

  return report;
}

inline void print_validation(const ValidationReport& report, std::ostream& os) {
  for (const auto& item : report.items)
    os << (item.passed ? "PASS" : "FAIL") << "  " << std::left << std::setw(52)
       << item.name << ' ' << item.detail << '\n';
  os << (report.all_passed() ? "all properties passed"
                             : "one or more properties FAILED")
     << '\n';
}

}  // namespace taskquant

#endif  // TASKQUANT_VALIDATION_HPP
