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

#ifndef TASKQUANT_RNG_HPP
#define TASKQUANT_RNG_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace taskquant {

/// splitmix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Role tags so that geometry, payload signals, dither and codebook
/// training consume independent streams regardless of evaluation order.
enum class StreamRole : std::uint64_t {
  Geometry = 1,
  Trial = 2,
  Dither = 3,
  VqTraining = 4,
  VqEvaluation = 5,
  Generic = 6,
};

/// Deterministic random stream.
///
/// The engine is std::mt19937_64 (its sequence is fixed by the standard);
/// uniform and Gaussian variates are produced by our own transforms so that
/// results are reproducible bit-for-bit across library implementations.
/// Never change the derivation constants: committed golden files depend on
/// the exact sequences.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(mix64(seed)) {}

  /// Stream for (master seed, sweep point, trial, role). Streams with any
  /// differing coordinate are independent for all practical purposes.
  static RngStream derive(std::uint64_t master_seed, std::uint64_t point,
                          std::uint64_t trial, StreamRole role) {
    std::uint64_t h = mix64(master_seed);
    h = mix64(h ^ mix64(point + 0x700000001ULL));
    h = mix64(h ^ mix64(trial + 0x300000007ULL));
    h = mix64(h ^ (static_cast<std::uint64_t>(role) << 32));
    return RngStream(h);
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on [0, n); n must be positive.
  std::uint64_t uniform_index(std::uint64_t n) { return engine_() % n; }

  /// Standard normal via Box-Muller (pairwise, with a cached spare).
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0,1] so that log(u1) is finite.
    const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  /// Circularly symmetric complex Gaussian with E|x|^2 = variance
  /// (real and imaginary parts each carry variance/2).
  std::complex<double> complex_gaussian(double variance = 1.0) {
    const double s = std::sqrt(variance * 0.5);
    return {s * gaussian(), s * gaussian()};
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace taskquant

#endif  // TASKQUANT_RNG_HPP
