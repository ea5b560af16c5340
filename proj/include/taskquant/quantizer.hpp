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

#ifndef TASKQUANT_QUANTIZER_HPP
#define TASKQUANT_QUANTIZER_HPP

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "taskquant/config.hpp"
#include "taskquant/rng.hpp"

namespace taskquant {

/// Uniform clipping quantizer applied per real dimension.
struct QuantizerSpec {
  double range = 1.0;  // saturation amplitude gamma
  int levels = 2;      // output alphabet size per real sample
  DitherMode dither_mode = DitherMode::Subtractive;

  double spacing() const { return 2.0 * range / levels; }

  void validate() const {
    if (!(range > 0.0)) throw std::invalid_argument("quantizer range must be > 0");
    if (levels < 2) throw std::invalid_argument("quantizer needs >= 2 levels");
  }
};

/// Mid-rise clipping quantizer.
///
/// Inside the dynamic range the output is the cell midpoint
/// spacing*(floor(x/spacing) + 1/2); inputs at or beyond +-range clip to the
/// outermost level sign(x)*(range - spacing/2) with sign(0) = +1. Implemented
/// by clamping the cell index, which is identical to the branch form for even
/// level counts and keeps the alphabet at exactly `levels` symmetric values
/// when the count is odd.
inline double quantize_scalar(const QuantizerSpec& spec, double x) {
  if (std::isnan(x)) throw std::invalid_argument("quantize_scalar: NaN input");
  const double delta = spec.spacing();
  double cell = std::floor((x + spec.range) / delta);
  if (cell < 0.0) cell = 0.0;
  if (cell > spec.levels - 1) cell = spec.levels - 1;
  return -spec.range + delta * (cell + 0.5);
}

/// True when the input would hit the clipping branch (|x| < range fails).
inline bool overloads(const QuantizerSpec& spec, double x) {
  return !(std::abs(x) < spec.range);
}

/// Per-call bookkeeping for overload diagnostics.
struct QuantizationReport {
  long overload_count = 0;
  long total_real_samples = 0;
};

/// Dither vector for `count` real samples.
///  - Subtractive: i.i.d. uniform on [-spacing/2, spacing/2].
///  - Triangular: sum of two such uniforms (support [-spacing, spacing]).
///  - None: empty.
inline Eigen::VectorXd make_dither(const QuantizerSpec& spec, RngStream& rng,
                                   int count) {
  spec.validate();
  if (count < 0) throw std::invalid_argument("make_dither: negative count");
  if (spec.dither_mode == DitherMode::None) return Eigen::VectorXd(0);
  const double half = spec.spacing() * 0.5;
  Eigen::VectorXd w(count);
  for (int i = 0; i < count; ++i) {
    double v = rng.uniform(-half, half);
    if (spec.dither_mode == DitherMode::Triangular) v += rng.uniform(-half, half);
    w(i) = v;
  }
  return w;
}

/// Quantizes the I and Q parts of each complex entry independently.
///
/// The dither vector holds 2K reals ordered [re_0, im_0, re_1, im_1, ...].
/// Subtractive mode computes q(x + w) - w; triangular mode adds the dither
/// without subtracting it, matching the additive-noise statistics the
/// digital-matrix design assumes. Overload counts the quantizer input
/// (signal plus dither) entering the clipping branch.
inline std::pair<Eigen::VectorXcd, QuantizationReport> quantize_complex_vector(
    const QuantizerSpec& spec, const Eigen::VectorXcd& z,
    const Eigen::VectorXd& dither) {
  spec.validate();
  const int k = static_cast<int>(z.size());
  const bool dithered = spec.dither_mode != DitherMode::None;
  if (dithered && dither.size() != 2 * k)
    throw std::invalid_argument("quantize_complex_vector: need 2K dither values");
  const double limit =
      spec.spacing() * (spec.dither_mode == DitherMode::Triangular ? 1.0 : 0.5);
  if (dithered && dither.size() > 0 &&
      dither.cwiseAbs().maxCoeff() > limit * (1.0 + 1e-12))
    throw std::invalid_argument("quantize_complex_vector: dither out of range");

  QuantizationReport report;
  report.total_real_samples = 2L * k;
  Eigen::VectorXcd out(k);
  const bool subtract = spec.dither_mode == DitherMode::Subtractive;
  auto one = [&](double x, int idx) {
    const double w = dithered ? dither(idx) : 0.0;
    const double u = x + w;
    if (overloads(spec, u)) ++report.overload_count;
    const double q = quantize_scalar(spec, u);
    return subtract ? q - w : q;
  };
  for (int i = 0; i < k; ++i)
    out(i) = {one(z(i).real(), 2 * i), one(z(i).imag(), 2 * i + 1)};
  return {out, report};
}

}  // namespace taskquant

#endif  // TASKQUANT_QUANTIZER_HPP
