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
// Result serialization. The CSV layout is part of the tool contract
// (golden-file regressions compare it byte for byte); numbers are printed
// with 17 significant digits so values round-trip exactly.

#ifndef TASKQUANT_IO_HPP
#define TASKQUANT_IO_HPP

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "taskquant/errors.hpp"
#include "taskquant/harness.hpp"

namespace taskquant {

enum class ResultFormat { Csv, Json };

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// CSV columns:
/// mode,grid_value,curve,mse_mean,mse_se,nmse_mean,nmse_se,trials,overload_rate,seed
/// One row per (grid point, curve); an absent standard error prints empty.
inline std::string results_to_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "mode,grid_value,curve,mse_mean,mse_se,nmse_mean,nmse_se,trials,"
         "overload_rate,seed\n";
  for (const SweepPoint& p : result.points) {
    for (const auto& [curve, s] : p.curves) {
      out << to_string(result.mode) << ',' << format_double(p.grid_value) << ','
          << to_string(curve) << ',' << format_double(s.mse_mean) << ','
          << (s.mse_se ? format_double(*s.mse_se) : std::string()) << ','
          << format_double(s.nmse_mean) << ','
          << (s.nmse_se ? format_double(*s.nmse_se) : std::string()) << ','
          << s.trials << ',' << format_double(s.overload_rate) << ','
          << result.base.master_seed << '\n';
    }
  }
  return out.str();
}

inline nlohmann::json config_to_json(const SystemConfig& c) {
  return {
      {"num_antennas", c.num_antennas},
      {"num_users", c.num_users},
      {"total_levels_log2", c.total_levels_log2},
      {"overload_constant", c.overload_constant},
      {"snr_db", c.snr_db},
      {"carrier_freq_hz", c.carrier_freq_hz},
      {"num_trials", c.num_trials},
      {"master_seed", c.master_seed},
      {"dither", to_string(c.dither)},
      {"paths_per_user", c.paths_per_user},
  };
}

inline SystemConfig config_from_json(const nlohmann::json& j) {
  SystemConfig c;
  c.num_antennas = j.at("num_antennas").get<int>();
  c.num_users = j.at("num_users").get<int>();
  c.total_levels_log2 = j.at("total_levels_log2").get<int>();
  c.overload_constant = j.at("overload_constant").get<double>();
  c.snr_db = j.at("snr_db").get<double>();
  c.carrier_freq_hz = j.at("carrier_freq_hz").get<double>();
  c.num_trials = j.at("num_trials").get<int>();
  c.master_seed = j.at("master_seed").get<std::uint64_t>();
  const std::string d = j.at("dither").get<std::string>();
  c.dither = d == "none" ? DitherMode::None
             : d == "triangular" ? DitherMode::Triangular
                                 : DitherMode::Subtractive;
  c.paths_per_user = j.at("paths_per_user").get<int>();
  return c;
}

/// Full manifest plus all per-point statistics.
inline nlohmann::json results_to_json(const SweepResult& result) {
  nlohmann::json j;
  j["manifest"] = {
      {"tool_version", result.tool_version},
      {"started_at", result.started_at},
      {"finished_at", result.finished_at},
      {"mode", to_string(result.mode)},
      {"channel_mode", to_string(result.channel_mode)},
      {"grid", result.grid},
      {"vq_max_levels_log2", result.vq_max_levels_log2},
      {"config", config_to_json(result.base)},
  };
  nlohmann::json curves = nlohmann::json::array();
  for (CurveKind c : result.curves) curves.push_back(to_string(c));
  j["manifest"]["curves"] = curves;

  nlohmann::json points = nlohmann::json::array();
  for (const SweepPoint& p : result.points) {
    nlohmann::json jp;
    jp["grid_value"] = p.grid_value;
    nlohmann::json jc = nlohmann::json::object();
    for (const auto& [curve, s] : p.curves) {
      nlohmann::json js = {
          {"mse_mean", s.mse_mean},
          {"nmse_mean", s.nmse_mean},
          {"trials", s.trials},
          {"overload_rate", s.overload_rate},
      };
      js["mse_se"] = s.mse_se ? nlohmann::json(*s.mse_se) : nlohmann::json();
      js["nmse_se"] = s.nmse_se ? nlohmann::json(*s.nmse_se) : nlohmann::json();
      jc[to_string(curve)] = js;
    }
    jp["curves"] = jc;
    points.push_back(jp);
  }
  j["points"] = points;
  return j;
}

inline SweepResult results_from_json(const nlohmann::json& j) {
  SweepResult r;
  const auto& m = j.at("manifest");
  r.tool_version = m.at("tool_version").get<std::string>();
  r.started_at = m.at("started_at").get<std::string>();
  r.finished_at = m.at("finished_at").get<std::string>();
  r.mode = m.at("mode").get<std::string>() == "snr_sweep" ? SweepMode::SnrSweep
                                                          : SweepMode::BitsSweep;
  r.channel_mode = m.at("channel_mode").get<std::string>() == "fixed"
                       ? ChannelMode::Fixed
                       : ChannelMode::FreshPerTrial;
  r.grid = m.at("grid").get<std::vector<double>>();
  r.vq_max_levels_log2 = m.at("vq_max_levels_log2").get<int>();
  r.base = config_from_json(m.at("config"));
  for (const auto& c : m.at("curves"))
    r.curves.push_back(curve_from_string(c.get<std::string>()));

  for (const auto& jp : j.at("points")) {
    SweepPoint p;
    p.grid_value = jp.at("grid_value").get<double>();
    // Preserve the declared curve order.
    for (CurveKind curve : r.curves) {
      const auto& jc = jp.at("curves");
      const auto it = jc.find(to_string(curve));
      if (it == jc.end()) continue;
      CurveStats s;
      s.mse_mean = it->at("mse_mean").get<double>();
      s.nmse_mean = it->at("nmse_mean").get<double>();
      s.trials = it->at("trials").get<long>();
      s.overload_rate = it->at("overload_rate").get<double>();
      if (!it->at("mse_se").is_null()) s.mse_se = it->at("mse_se").get<double>();
      if (!it->at("nmse_se").is_null())
        s.nmse_se = it->at("nmse_se").get<double>();
      p.curves.emplace_back(curve, s);
    }
    r.points.push_back(std::move(p));
  }
  return r;
}

/// Complex matrix as {"rows", "cols", "data": [[re, im], ...]} row-major.
inline nlohmann::json complex_matrix_to_json(const Eigen::MatrixXcd& m) {
  nlohmann::json data = nlohmann::json::array();
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c)
      data.push_back({m(r, c).real(), m(r, c).imag()});
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

/// Matrix/scalar dump of a full receiver design, for inspection and
/// regression tests.
inline nlohmann::json design_to_json(const TaskQuantDesign& d,
                                     const SystemConfig& config) {
  nlohmann::json j;
  j["config"] = config_to_json(config);
  j["analog_combiner"] = complex_matrix_to_json(d.analog_combiner);
  j["digital_matrix"] = complex_matrix_to_json(d.digital);
  j["mixing_unitary"] = complex_matrix_to_json(d.mixing_unitary);
  j["lmmse_matrix"] = complex_matrix_to_json(d.decomposition.lmmse);
  j["dynamic_range"] = d.range;
  j["spacing"] = d.spacing;
  j["levels_per_quantizer"] = d.levels;
  j["waterfilling_level"] = d.waterfilling_level;
  j["overload_coefficient"] = d.overload_coefficient;
  j["predicted_excess_distortion"] = d.predicted_excess_distortion;
  std::vector<double> sv(d.decomposition.singular_values.data(),
                         d.decomposition.singular_values.data() +
                             d.decomposition.singular_values.size());
  j["singular_values"] = sv;
  std::vector<double> gains(d.combiner_gains.data(),
                            d.combiner_gains.data() + d.combiner_gains.size());
  j["combiner_gains"] = gains;
  return j;
}

inline void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing", path);
  out << body;
  if (!out) throw IoError("write failed", path);
}

/// Writes the results file in the requested format; returns the body that
/// was written (handy for byte-comparison tests).
inline std::string export_results(const SweepResult& result,
                                  const std::string& path, ResultFormat fmt) {
  const std::string body = fmt == ResultFormat::Csv
                               ? results_to_csv(result)
                               : results_to_json(result).dump(2) + "\n";
  write_text_file(path, body);
  return body;
}

inline SweepResult import_results_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open results file", path);
  nlohmann::json j;
  in >> j;
  return results_from_json(j);
}

namespace detail {

struct Series {
  CurveKind curve;
  std::vector<std::pair<double, double>> xy;
};

inline std::vector<Series> collect_series(const SweepResult& result) {
  std::vector<Series> all;
  for (CurveKind c : result.curves) {
    Series s{c, {}};
    for (const SweepPoint& p : result.points)
      if (const CurveStats* st = p.find(c))
        s.xy.emplace_back(p.grid_value, st->mse_mean);
    if (!s.xy.empty()) all.push_back(std::move(s));
  }
  return all;
}

}  // namespace detail

/// Whitespace-delimited table: grid value followed by one column per curve
/// (nan where a curve has no value at that point).
inline std::string plot_data_text(const SweepResult& result) {
  if (result.curves.empty() || result.points.empty())
    throw std::invalid_argument("plot data: empty result");
  std::ostringstream out;
  out << "# " << (result.mode == SweepMode::BitsSweep ? "total_bits" : "snr_db");
  for (CurveKind c : result.curves) out << ' ' << to_string(c);
  out << '\n';
  for (const SweepPoint& p : result.points) {
    out << format_double(p.grid_value);
    for (CurveKind c : result.curves) {
      const CurveStats* st = p.find(c);
      out << ' ' << (st ? format_double(st->mse_mean) : "nan");
    }
    out << '\n';
  }
  return out.str();
}

/// Minimal self-contained SVG line chart with a log-scale MSE axis, one
/// polyline plus circle markers per curve, and the sweep-appropriate x
/// label ("number of total bits" or "SNR [dB]").
inline std::string plot_svg(const SweepResult& result) {
  const std::vector<detail::Series> series = detail::collect_series(result);
  if (series.empty() || result.points.empty())
    throw std::invalid_argument("plot: empty curve set");

  const double width = 860, height = 560;
  const double ml = 80, mr = 220, mt = 40, mb = 70;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series)
    for (const auto& [x, y] : s.xy) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      if (y > 0.0) {
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
      }
    }
  if (!(ymin < ymax)) {
    ymin = ymin > 0 ? ymin * 0.5 : 1e-6;
    ymax = ymin * 4.0;
  }
  if (!(xmin < xmax)) {
    xmin -= 1.0;
    xmax += 1.0;
  }
  const double ly_min = std::log10(ymin) - 0.05, ly_max = std::log10(ymax) + 0.05;
  auto sx = [&](double x) {
    return ml + (x - xmin) / (xmax - xmin) * (width - ml - mr);
  };
  auto sy = [&](double y) {
    const double ly = std::log10(std::max(y, 1e-300));
    return height - mb - (ly - ly_min) / (ly_max - ly_min) * (height - mt - mb);
  };

  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e"};
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // Axes.
  out << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\""
      << width - mr << "\" y2=\"" << height - mb
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
      << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
  // Y ticks at powers of ten.
  for (int e = static_cast<int>(std::floor(ly_min)); e <= std::ceil(ly_max); ++e) {
    const double y = std::pow(10.0, e);
    const double py = sy(y);
    if (py < mt || py > height - mb) continue;
    out << "<line x1=\"" << ml - 5 << "\" y1=\"" << py << "\" x2=\"" << ml
        << "\" y2=\"" << py << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << ml - 10 << "\" y=\"" << py + 4
        << "\" font-size=\"12\" text-anchor=\"end\">1e" << e << "</text>\n";
  }
  // X ticks at the grid values.
  for (const SweepPoint& p : result.points) {
    const double px = sx(p.grid_value);
    out << "<line x1=\"" << px << "\" y1=\"" << height - mb << "\" x2=\"" << px
        << "\" y2=\"" << height - mb + 5 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << px << "\" y=\"" << height - mb + 20
        << "\" font-size=\"12\" text-anchor=\"middle\">" << p.grid_value
        << "</text>\n";
  }
  const char* xlabel = result.mode == SweepMode::BitsSweep
                           ? "number of total bits"
                           : "SNR [dB]";
  out << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 15
      << "\" font-size=\"14\" text-anchor=\"middle\">" << xlabel
      << "</text>\n";
  out << "<text x=\"20\" y=\"" << (mt + height - mb) / 2
      << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
      << (mt + height - mb) / 2 << ")\">MSE</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kColors[i % 5];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : series[i].xy) out << sx(x) << ',' << sy(y) << ' ';
    out << "\"/>\n";
    for (const auto& [x, y] : series[i].xy)
      out << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y)
          << "\" r=\"3.5\" fill=\"" << color << "\"/>\n";
    const double lyy = mt + 20 + 22 * static_cast<double>(i);
    out << "<line x1=\"" << width - mr + 15 << "\" y1=\"" << lyy << "\" x2=\""
        << width - mr + 45 << "\" y2=\"" << lyy << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << width - mr + 52 << "\" y=\"" << lyy + 4
        << "\" font-size=\"12\">" << to_string(series[i].curve) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

/// Writes the SVG chart and the companion plain-text data file.
inline void emit_plot_data(const SweepResult& result, const std::string& svg_path,
                           const std::string& dat_path) {
  write_text_file(svg_path, plot_svg(result));
  write_text_file(dat_path, plot_data_text(result));
}

}  // namespace taskquant

#endif  // TASKQUANT_IO_HPP
