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
// Monte Carlo sweep orchestration. Per-trial random streams are derived from
// (master seed, grid point, trial, role), and reductions run over indexed
// per-trial storage, so results are byte-identical for any worker count.

#ifndef TASKQUANT_HARNESS_HPP
#define TASKQUANT_HARNESS_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "taskquant/baselines.hpp"
#include "taskquant/channel.hpp"
#include "taskquant/config.hpp"
#include "taskquant/design.hpp"
#include "taskquant/quantizer.hpp"
#include "taskquant/rng.hpp"

namespace taskquant {

inline constexpr const char* kToolVersion = "0.1.0";

enum class SweepMode { BitsSweep, SnrSweep };
enum class ChannelMode { FreshPerTrial, Fixed };
enum class CurveKind {
  TaskBased,
  TaskBasedAnalytic,
  TaskIgnorantAnalytic,
  TaskIgnorantVq,
  Unquantized,
};

inline const char* to_string(SweepMode m) {
  return m == SweepMode::BitsSweep ? "bits_sweep" : "snr_sweep";
}
inline const char* to_string(ChannelMode m) {
  return m == ChannelMode::FreshPerTrial ? "fresh" : "fixed";
}
inline const char* to_string(CurveKind c) {
  switch (c) {
    case CurveKind::TaskBased: return "task_based";
    case CurveKind::TaskBasedAnalytic: return "task_based_analytic";
    case CurveKind::TaskIgnorantAnalytic: return "task_ignorant_analytic";
    case CurveKind::TaskIgnorantVq: return "task_ignorant_vq";
    case CurveKind::Unquantized: return "unquantized";
  }
  return "?";
}

inline CurveKind curve_from_string(const std::string& s) {
  for (CurveKind c : {CurveKind::TaskBased, CurveKind::TaskBasedAnalytic,
                      CurveKind::TaskIgnorantAnalytic, CurveKind::TaskIgnorantVq,
                      CurveKind::Unquantized})
    if (s == to_string(c)) return c;
  throw ConfigError("unknown curve: " + s);
}

/// A sweep over total bits (fixed SNR) or over SNR (fixed total bits).
struct SweepSpec {
  SweepMode mode = SweepMode::BitsSweep;
  std::vector<double> grid;  // log2 M values or SNR dB values
  SystemConfig base;         // carries the fixed parameter
  std::vector<CurveKind> curves = {
      CurveKind::TaskBased, CurveKind::TaskBasedAnalytic,
      CurveKind::TaskIgnorantAnalytic, CurveKind::Unquantized};
  ChannelMode channel_mode = ChannelMode::FreshPerTrial;
  int num_workers = 0;          // 0 = hardware concurrency
  int vq_max_levels_log2 = 12;  // trained-VQ tractability cap
};

/// Config for one grid point (bits or SNR substituted into the base).
inline SystemConfig resolve_point(const SweepSpec& spec, double grid_value) {
  SystemConfig c = spec.base;
  if (spec.mode == SweepMode::BitsSweep) {
    const int bits = static_cast<int>(std::lround(grid_value));
    if (std::abs(grid_value - bits) > 1e-9)
      throw ConfigError("bits grid values must be integers");
    c.total_levels_log2 = bits;
  } else {
    c.snr_db = grid_value;
  }
  return c;
}

inline void validate_sweep(const SweepSpec& spec) {
  if (spec.grid.empty()) throw ConfigError("sweep grid is empty");
  for (std::size_t i = 1; i < spec.grid.size(); ++i)
    if (!(spec.grid[i] > spec.grid[i - 1]))
      throw ConfigError("sweep grid must be strictly increasing");
  if (spec.curves.empty()) throw ConfigError("no curves requested");
  for (double g : spec.grid) validate_config(resolve_point(spec, g));
}

/// Squared errors of one Monte Carlo trial.
struct TrialRecord {
  long trial_index = 0;
  double total_sq_error = 0.0;   // |s - s_hat|^2
  double floor_sq_error = 0.0;   // |s - s_tilde|^2
  double excess_sq_error = 0.0;  // |s_tilde - s_hat|^2
  long overload_count = 0;
  std::uint64_t channel_id = 0;
};

/// Draws one (signal, noise, dither) realization through the designed
/// receiver. The stream is consumed in a fixed order (user signals, noise,
/// dither), so a given stream always reproduces the same record.
inline TrialRecord run_trial(const TaskQuantDesign& design,
                             const Eigen::MatrixXcd& channel,
                             double noise_variance, const QuantizerSpec& qspec,
                             RngStream& rng) {
  const int k = static_cast<int>(design.analog_combiner.rows());
  const int n = static_cast<int>(design.analog_combiner.cols());
  if (channel.rows() != n || channel.cols() != k)
    throw std::invalid_argument("run_trial: channel shape mismatch");
  Eigen::VectorXcd s(k), v(n);
  for (int i = 0; i < k; ++i) s(i) = rng.complex_gaussian(1.0);
  for (int i = 0; i < n; ++i) v(i) = rng.complex_gaussian(noise_variance);
  const Eigen::VectorXcd y = channel * s + v;
  const Eigen::VectorXcd s_tilde = design.decomposition.lmmse * y;
  const Eigen::VectorXcd z = design.analog_combiner * y;
  const Eigen::VectorXd dither = make_dither(qspec, rng, 2 * k);
  const auto [z_q, report] = quantize_complex_vector(qspec, z, dither);
  const Eigen::VectorXcd s_hat = design.digital * z_q;

  TrialRecord rec;
  rec.total_sq_error = (s - s_hat).squaredNorm();
  rec.floor_sq_error = (s - s_tilde).squaredNorm();
  rec.excess_sq_error = (s_tilde - s_hat).squaredNorm();
  rec.overload_count = report.overload_count;
  return rec;
}

/// Mean and standard error of a sample; the standard error is absent for a
/// single observation.
struct Aggregate {
  double mean = 0.0;
  std::optional<double> standard_error;
};

inline Aggregate aggregate(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("aggregate: empty input");
  Aggregate a;
  const long n = static_cast<long>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  a.mean = sum / n;
  if (n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.standard_error = std::sqrt(ss / (n - 1)) / std::sqrt(double(n));
  }
  return a;
}

struct CurveStats {
  double mse_mean = 0.0;
  std::optional<double> mse_se;
  double nmse_mean = 0.0;
  std::optional<double> nmse_se;
  long trials = 0;
  double overload_rate = 0.0;  // meaningful on the task_based curve
};

struct SweepPoint {
  double grid_value = 0.0;
  std::vector<std::pair<CurveKind, CurveStats>> curves;

  const CurveStats* find(CurveKind k) const {
    for (const auto& [c, s] : curves)
      if (c == k) return &s;
    return nullptr;
  }
};

struct SweepResult {
  SweepMode mode = SweepMode::BitsSweep;
  ChannelMode channel_mode = ChannelMode::FreshPerTrial;
  SystemConfig base;
  std::vector<CurveKind> curves;
  std::vector<double> grid;
  std::vector<SweepPoint> points;
  int vq_max_levels_log2 = 12;
  std::string tool_version = kToolVersion;
  std::string started_at;
  std::string finished_at;
};

namespace detail {

inline void parallel_for(long count, int num_workers,
                         const std::function<void(long)>& body) {
  int workers = num_workers > 0
                    ? num_workers
                    : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = static_cast<int>(std::min<long>(workers, count));
  if (workers <= 1) {
    for (long i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<long> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  for (int t = 0; t < workers; ++t)
    pool.emplace_back([&] {
      for (long i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        if (failed.load()) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!failed.exchange(true)) error = std::current_exception();
          return;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (failed.load()) std::rethrow_exception(error);
}

/// Per-trial working data for one grid point.
struct PointData {
  std::vector<TrialRecord> records;
  std::vector<double> floor_analytic;
  std::vector<double> task_ignorant_analytic;
  std::vector<double> predicted_excess;
  std::vector<Eigen::VectorXcd> received;
  std::vector<Eigen::VectorXcd> task_signal;
  long overloads = 0;
};

}  // namespace detail

/// Runs every trial of one grid point. Channel handling follows the spec:
/// fresh geometry per trial by default, or one shared draw in Fixed mode.
inline detail::PointData run_point(const SweepSpec& spec, std::size_t point_idx,
                                   bool keep_draws) {
  const SystemConfig cfg = resolve_point(spec, spec.grid[point_idx]);
  const double noise_var = snr_to_noise_variance(cfg.snr_db);
  const int trials = cfg.num_trials;
  const bool need_ti =
      std::count(spec.curves.begin(), spec.curves.end(),
                 CurveKind::TaskIgnorantAnalytic) > 0;

  detail::PointData data;
  data.records.resize(trials);
  data.floor_analytic.resize(trials);
  data.task_ignorant_analytic.assign(trials, 0.0);
  data.predicted_excess.resize(trials);
  if (keep_draws) {
    data.received.resize(trials);
    data.task_signal.resize(trials);
  }

  // Fixed mode designs once from the point's geometry stream.
  Eigen::MatrixXcd fixed_channel;
  TaskQuantDesign fixed_design;
  if (spec.channel_mode == ChannelMode::Fixed) {
    RngStream geo = RngStream::derive(cfg.master_seed, point_idx, 0,
                                      StreamRole::Geometry);
    fixed_channel = generate_channel(cfg, sample_geometry(cfg, geo));
    fixed_design = design_pipeline(fixed_channel, noise_var, cfg);
  }

  detail::parallel_for(trials, spec.num_workers, [&](long t) {
    Eigen::MatrixXcd channel;
    const TaskQuantDesign* design = nullptr;
    TaskQuantDesign fresh_design;
    if (spec.channel_mode == ChannelMode::FreshPerTrial) {
      RngStream geo = RngStream::derive(cfg.master_seed, point_idx,
                                        static_cast<std::uint64_t>(t),
                                        StreamRole::Geometry);
      channel = generate_channel(cfg, sample_geometry(cfg, geo));
      fresh_design = design_pipeline(channel, noise_var, cfg);
      design = &fresh_design;
    } else {
      channel = fixed_channel;
      design = &fixed_design;
    }

    QuantizerSpec qspec{design->range, design->levels, cfg.dither};
    RngStream trial_rng = RngStream::derive(cfg.master_seed, point_idx,
                                            static_cast<std::uint64_t>(t),
                                            StreamRole::Trial);
    try {
      // Keep the draw order stable: signals and dither come from trial_rng
      // inside run_trial.
      Eigen::VectorXcd s, y;
      if (keep_draws) {
        // run_trial draws internally; replicate its draws for the stored
        // copies by re-deriving the same stream.
        RngStream replay = RngStream::derive(cfg.master_seed, point_idx,
                                             static_cast<std::uint64_t>(t),
                                             StreamRole::Trial);
        const int k = cfg.num_users;
        const int n = cfg.num_antennas;
        s.resize(k);
        Eigen::VectorXcd v(n);
        for (int i = 0; i < k; ++i) s(i) = replay.complex_gaussian(1.0);
        for (int i = 0; i < n; ++i) v(i) = replay.complex_gaussian(noise_var);
        y = channel * s + v;
        data.received[t] = y;
        data.task_signal[t] = s;
      }
      TrialRecord rec = run_trial(*design, channel, noise_var, qspec, trial_rng);
      rec.trial_index = t;
      data.records[t] = rec;
    } catch (const std::exception& e) {
      throw std::runtime_error("grid value " +
                               std::to_string(spec.grid[point_idx]) +
                               ", trial " + std::to_string(t) + ": " + e.what());
    }
    data.floor_analytic[t] = unquantized_mse(channel, noise_var);
    data.predicted_excess[t] = design->predicted_excess_distortion;
    if (need_ti)
      data.task_ignorant_analytic[t] =
          task_ignorant_mse_analytic(channel, noise_var, cfg.total_levels_log2);
  });

  for (const TrialRecord& r : data.records) data.overloads += r.overload_count;
  return data;
}

namespace detail {

/// Trains the task-agnostic VQ for one grid point and evaluates it on the
/// point's stored per-trial draws.
inline std::vector<double> vq_curve(const SweepSpec& spec,
                                    std::size_t point_idx,
                                    const PointData& data) {
  const SystemConfig cfg = resolve_point(spec, spec.grid[point_idx]);
  const double noise_var = snr_to_noise_variance(cfg.snr_db);
  const int codebook_size = 1 << cfg.total_levels_log2;
  const long n_train = std::max<long>(50L * codebook_size, 8000L);
  const int dim_y = 2 * cfg.num_antennas;
  const int dim_s = 2 * cfg.num_users;

  Eigen::MatrixXd train_y(n_train, dim_y), train_s(n_train, dim_s);
  Eigen::MatrixXcd fixed_channel;
  if (spec.channel_mode == ChannelMode::Fixed) {
    RngStream geo = RngStream::derive(cfg.master_seed, point_idx, 0,
                                      StreamRole::Geometry);
    fixed_channel = generate_channel(cfg, sample_geometry(cfg, geo));
  }
  parallel_for(n_train, spec.num_workers, [&](long i) {
    RngStream rng = RngStream::derive(cfg.master_seed, point_idx,
                                      static_cast<std::uint64_t>(i),
                                      StreamRole::VqTraining);
    Eigen::MatrixXcd channel = fixed_channel;
    if (spec.channel_mode == ChannelMode::FreshPerTrial)
      channel = generate_channel(cfg, sample_geometry(cfg, rng));
    const SignalBatch b = generate_received(channel, noise_var, 1, rng);
    train_y.row(i) = real_stack(b.received.col(0));
    train_s.row(i) = real_stack(b.user_signals.col(0));
  });

  RngStream train_rng = RngStream::derive(cfg.master_seed, point_idx, 0,
                                          StreamRole::VqEvaluation);
  int workers = spec.num_workers > 0
                    ? spec.num_workers
                    : static_cast<int>(std::thread::hardware_concurrency());
  const VqTaskModel model =
      fit_vq_task_model(train_y, train_s, codebook_size, train_rng, workers);

  std::vector<double> errors(data.records.size());
  parallel_for(static_cast<long>(errors.size()), spec.num_workers, [&](long t) {
    const int m =
        nearest_codeword(model.codebook, real_stack(data.received[t]));
    errors[t] = (model.task_table.row(m).transpose() -
                 real_stack(data.task_signal[t]))
                    .squaredNorm();
  });
  return errors;
}

inline CurveStats stats_from(const std::vector<double>& values, int num_users) {
  const Aggregate a = aggregate(values);
  CurveStats s;
  s.mse_mean = a.mean;
  s.nmse_mean = a.mean / num_users;
  if (a.standard_error) {
    s.mse_se = *a.standard_error;
    s.nmse_se = *a.standard_error / num_users;
  }
  s.trials = static_cast<long>(values.size());
  return s;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

}  // namespace detail

/// Runs the whole sweep. Deterministic for a fixed master seed: the worker
/// count never changes any emitted number.
inline SweepResult run_sweep(const SweepSpec& spec) {
  validate_sweep(spec);
  SweepResult result;
  result.mode = spec.mode;
  result.channel_mode = spec.channel_mode;
  result.base = spec.base;
  result.curves = spec.curves;
  result.grid = spec.grid;
  result.vq_max_levels_log2 = spec.vq_max_levels_log2;
  result.started_at = detail::utc_timestamp();

  const bool want_vq = std::count(spec.curves.begin(), spec.curves.end(),
                                  CurveKind::TaskIgnorantVq) > 0;

  for (std::size_t p = 0; p < spec.grid.size(); ++p) {
    const SystemConfig cfg = resolve_point(spec, spec.grid[p]);
    const bool vq_here =
        want_vq && cfg.total_levels_log2 <= spec.vq_max_levels_log2;
    const detail::PointData data = run_point(spec, p, vq_here);

    SweepPoint point;
    point.grid_value = spec.grid[p];
    std::vector<double> buf(data.records.size());
    for (CurveKind curve : spec.curves) {
      switch (curve) {
        case CurveKind::TaskBased: {
          for (std::size_t t = 0; t < buf.size(); ++t)
            buf[t] = data.records[t].total_sq_error;
          CurveStats s = detail::stats_from(buf, cfg.num_users);
          s.overload_rate = static_cast<double>(data.overloads) /
                            (static_cast<double>(buf.size()) * 2 * cfg.num_users);
          point.curves.emplace_back(curve, s);
          break;
        }
        case CurveKind::TaskBasedAnalytic: {
          for (std::size_t t = 0; t < buf.size(); ++t)
            buf[t] = data.floor_analytic[t] + data.predicted_excess[t];
          point.curves.emplace_back(curve,
                                    detail::stats_from(buf, cfg.num_users));
          break;
        }
        case CurveKind::TaskIgnorantAnalytic: {
          point.curves.emplace_back(
              curve,
              detail::stats_from(data.task_ignorant_analytic, cfg.num_users));
          break;
        }
        case CurveKind::Unquantized: {
          point.curves.emplace_back(
              curve, detail::stats_from(data.floor_analytic, cfg.num_users));
          break;
        }
        case CurveKind::TaskIgnorantVq: {
          if (!vq_here) break;  // beyond the tractability cap, curve omitted
          const std::vector<double> errors = detail::vq_curve(spec, p, data);
          point.curves.emplace_back(curve,
                                    detail::stats_from(errors, cfg.num_users));
          break;
        }
      }
    }
    result.points.push_back(std::move(point));
  }
  result.finished_at = detail::utc_timestamp();
  return result;
}

}  // namespace taskquant

#endif  // TASKQUANT_HARNESS_HPP
