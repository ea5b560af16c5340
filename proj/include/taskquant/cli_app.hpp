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
// Command-line front end. Subcommands: design, sweep-bits, sweep-snr,
// validate, vq-train. Exit codes: 0 ok, 1 failed validation properties,
// 2 usage, 3 invalid configuration, 4 runtime failure, 5 I/O failure.

#ifndef TASKQUANT_CLI_APP_HPP
#define TASKQUANT_CLI_APP_HPP

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "taskquant/baselines.hpp"
#include "taskquant/harness.hpp"
#include "taskquant/io.hpp"
#include "taskquant/validation.hpp"

namespace taskquant {

namespace cli_detail {

struct CommonFlags {
  SystemConfig config;
  std::vector<double> snr_db;  // scalar for most commands, grid for sweep-snr
  std::string dither = "on";
  std::string out_dir;
  std::string format = "csv";
  std::string channel_mode = "fresh";
  std::vector<std::string> curves;
  int threads = 0;
};

inline void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--users,-K", f.config.num_users,
                  "number of user terminals (task dimension)");
  cmd->add_option("--antennas,-N", f.config.num_antennas,
                  "number of base-station antennas");
  cmd->add_option("--snr-db", f.snr_db,
                  "signal-to-noise ratio [dB]; a comma list forms the grid "
                  "for sweep-snr")
      ->delimiter(',');
  cmd->add_option("--trials", f.config.num_trials,
                  "Monte Carlo trials per grid point");
  cmd->add_option("--seed", f.config.master_seed, "master random seed");
  cmd->add_option("--eta", f.config.overload_constant,
                  "dynamic-range headroom constant (dimensionless)");
  cmd->add_option("--carrier-freq", f.config.carrier_freq_hz,
                  "carrier frequency [Hz]");
  cmd->add_option("--paths", f.config.paths_per_user,
                  "propagation paths per user (1 = line of sight)");
  cmd->add_option("--dither", f.dither,
                  "dither mode: on|off|subtractive|none|triangular")
      ->check(CLI::IsMember(
          {"on", "off", "subtractive", "none", "triangular"}));
  cmd->add_option("--channel-mode", f.channel_mode,
                  "fresh (new channel per trial) or fixed")
      ->check(CLI::IsMember({"fresh", "fixed"}));
  cmd->add_option("--curves", f.curves,
                  "comma-separated curve list (task_based, "
                  "task_based_analytic, task_ignorant_analytic, "
                  "task_ignorant_vq, unquantized)")
      ->delimiter(',');
  cmd->add_option("--out-dir", f.out_dir,
                  "output directory (default: $TASKQUANT_OUT_DIR or .)");
  cmd->add_option("--format", f.format, "results file format")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--threads", f.threads, "worker threads (0 = all cores)");
  cmd->set_config("--config", "",
                  "flat key=value configuration file; command-line flags "
                  "override file values");
}

inline DitherMode parse_dither(const std::string& s) {
  if (s == "off" || s == "none") return DitherMode::None;
  if (s == "triangular") return DitherMode::Triangular;
  return DitherMode::Subtractive;  // "on" / "subtractive"
}

inline double scalar_snr(const CommonFlags& f) {
  if (f.snr_db.empty()) return f.config.snr_db;
  if (f.snr_db.size() > 1)
    throw ConfigError("this command takes a single --snr-db value");
  return f.snr_db.front();
}

inline std::string resolve_out_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("TASKQUANT_OUT_DIR"); env && *env)
    return env;
  return ".";
}

inline std::string ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory", dir);
  return dir;
}

inline std::vector<CurveKind> parse_curves(const std::vector<std::string>& names) {
  if (names.empty())
    return {CurveKind::TaskBased, CurveKind::TaskBasedAnalytic,
            CurveKind::TaskIgnorantAnalytic, CurveKind::Unquantized};
  std::vector<CurveKind> out;
  for (const auto& n : names) out.push_back(curve_from_string(n));
  return out;
}

inline int run_sweep_command(const CommonFlags& flags, SweepMode mode,
                             const std::vector<double>& grid) {
  SweepSpec spec;
  spec.mode = mode;
  spec.grid = grid;
  spec.base = flags.config;
  if (mode == SweepMode::BitsSweep) spec.base.snr_db = scalar_snr(flags);
  spec.base.dither = parse_dither(flags.dither);
  spec.channel_mode = flags.channel_mode == "fixed" ? ChannelMode::Fixed
                                                    : ChannelMode::FreshPerTrial;
  spec.curves = parse_curves(flags.curves);
  spec.num_workers = flags.threads;
  validate_sweep(spec);

  const SweepResult result = run_sweep(spec);

  const std::string dir = ensure_dir(resolve_out_dir(flags.out_dir));
  const std::string results_path =
      dir + (flags.format == "json" ? "/results.json" : "/results.csv");
  export_results(result, results_path,
                 flags.format == "json" ? ResultFormat::Json : ResultFormat::Csv);
  write_text_file(dir + "/run_manifest.json",
                  results_to_json(result)["manifest"].dump(2) + "\n");
  emit_plot_data(result, dir + "/plot.svg", dir + "/plot.dat");

  std::cout << "# resolved config: " << config_to_json(spec.base).dump()
            << "\n# channel_mode=" << to_string(spec.channel_mode)
            << " workers=" << spec.num_workers << "\n";
  std::cout << results_to_csv(result);
  std::cout << "wrote " << results_path << ", " << dir << "/plot.svg, " << dir
            << "/plot.dat\n";
  return 0;
}

}  // namespace cli_detail

/// Full CLI; returns the process exit status.
inline int cli_main(int argc, const char* const* argv) {
  using namespace cli_detail;
  CLI::App app{
      "taskquant: task-based quantization simulator for multi-user MIMO "
      "uplink signal recovery"};
  app.require_subcommand(1);

  CommonFlags design_flags, bits_flags, snr_flags, validate_flags, vq_flags;
  int design_bits = 10;
  std::vector<double> bits_grid = {4, 8, 12, 16, 20};
  int snr_fixed_bits = 4;
  bool validate_quick = false;
  bool inject_zeta_fault = false;
  int vq_bits = 8;
  long vq_samples = 0;

  CLI::App* design_cmd = app.add_subcommand(
      "design", "compute and dump the combiner/quantizer/digital design");
  add_common(design_cmd, design_flags);
  design_cmd->add_option("--bits", design_bits,
                         "total quantization levels as log2(M)");

  CLI::App* bits_cmd = app.add_subcommand(
      "sweep-bits", "Monte Carlo MSE versus total bits at fixed SNR");
  add_common(bits_cmd, bits_flags);
  bits_cmd->add_option("--bits", bits_grid, "grid of log2(M) values")
      ->delimiter(',');

  CLI::App* snr_cmd = app.add_subcommand(
      "sweep-snr", "Monte Carlo MSE versus SNR at fixed total bits");
  add_common(snr_cmd, snr_flags);
  snr_cmd->add_option("--bits", snr_fixed_bits, "fixed log2(M)");

  CLI::App* validate_cmd = app.add_subcommand(
      "validate", "run the invariant/property self-check suite");
  add_common(validate_cmd, validate_flags);
  validate_cmd->add_flag("--quick", validate_quick,
                         "reduced trial counts (completes in seconds)");
  validate_cmd->add_flag("--inject-zeta-fault", inject_zeta_fault,
                         "debug: corrupt the water-filling level by 1% to "
                         "demonstrate check sensitivity");

  CLI::App* vq_cmd = app.add_subcommand(
      "vq-train", "train and save a task-agnostic vector-quantizer codebook");
  add_common(vq_cmd, vq_flags);
  vq_cmd->add_option("--bits", vq_bits, "codebook size as log2(M), max 12");
  vq_cmd->add_option("--samples", vq_samples,
                     "training sample count (default 50 per codeword)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (design_cmd->parsed()) {
      SystemConfig cfg = design_flags.config;
      cfg.snr_db = scalar_snr(design_flags);
      cfg.total_levels_log2 = design_bits;
      cfg.dither = parse_dither(design_flags.dither);
      validate_config(cfg);
      const double noise = snr_to_noise_variance(cfg.snr_db);
      RngStream geo = RngStream::derive(cfg.master_seed, 0, 0,
                                        StreamRole::Geometry);
      const Eigen::MatrixXcd channel =
          generate_channel(cfg, sample_geometry(cfg, geo));
      const TaskQuantDesign d = design_pipeline(channel, noise, cfg);
      const std::string dir = ensure_dir(resolve_out_dir(design_flags.out_dir));
      const std::string path = dir + "/design.json";
      write_text_file(path, design_to_json(d, cfg).dump(2) + "\n");
      std::cout << "combiner " << d.analog_combiner.rows() << "x"
                << d.analog_combiner.cols() << ", digital "
                << d.digital.rows() << "x" << d.digital.cols()
                << ", dynamic range " << d.range << ", spacing " << d.spacing
                << ", levels " << d.levels << "\npredicted excess distortion "
                << d.predicted_excess_distortion << "\nwrote " << path << "\n";
      return 0;
    }
    if (bits_cmd->parsed())
      return run_sweep_command(bits_flags, SweepMode::BitsSweep, bits_grid);
    if (snr_cmd->parsed()) {
      CommonFlags flags = snr_flags;
      flags.config.total_levels_log2 = snr_fixed_bits;
      const std::vector<double> grid =
          flags.snr_db.empty() ? std::vector<double>{2, 4, 6, 8, 10}
                               : flags.snr_db;
      return run_sweep_command(flags, SweepMode::SnrSweep, grid);
    }
    if (validate_cmd->parsed()) {
      ValidationOptions opt;
      opt.quick = validate_quick;
      opt.seed = validate_flags.config.master_seed;
      if (inject_zeta_fault) opt.zeta_fault_factor = 1.01;
      const ValidationReport report = run_validation(opt);
      print_validation(report, std::cout);
      return report.all_passed() ? 0 : 1;
    }
    if (vq_cmd->parsed()) {
      SystemConfig cfg = vq_flags.config;
      cfg.snr_db = scalar_snr(vq_flags);
      cfg.total_levels_log2 = std::max(vq_bits, 1);
      validate_config(cfg);
      if (vq_bits > 12)
        throw ConfigError("vq-train: --bits beyond the 12-bit training cap");
      const int size = 1 << vq_bits;
      const long n = vq_samples > 0 ? vq_samples : 50L * size;
      const double noise = snr_to_noise_variance(cfg.snr_db);
      Eigen::MatrixXd samples(n, 2 * cfg.num_antennas);
      for (long i = 0; i < n; ++i) {
        RngStream rng = RngStream::derive(cfg.master_seed, 0,
                                          static_cast<std::uint64_t>(i),
                                          StreamRole::VqTraining);
        const Eigen::MatrixXcd channel =
            generate_channel(cfg, sample_geometry(cfg, rng));
        const SignalBatch b = generate_received(channel, noise, 1, rng);
        samples.row(i) = real_stack(b.received.col(0));
      }
      RngStream train_rng = RngStream::derive(cfg.master_seed, 0, 0,
                                              StreamRole::VqEvaluation);
      const int workers = vq_flags.threads > 0 ? vq_flags.threads : 4;
      VqCodebook cb = lloyd_vq_train(samples, size, train_rng, workers);
      cb.training_seed = cfg.master_seed;
      const std::string dir = ensure_dir(resolve_out_dir(vq_flags.out_dir));
      const std::string path = dir + "/codebook.json";
      save_codebook(cb, path);
      std::cout << "trained " << size << "-codeword codebook in "
                << cb.iterations << " iterations, distortion "
                << cb.final_distortion << "\nwrote " << path << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 2;
}

}  // namespace taskquant

#endif  // TASKQUANT_CLI_APP_HPP
