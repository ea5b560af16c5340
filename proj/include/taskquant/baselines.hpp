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
// Comparison curves: the unquantized LMMSE floor, the rate-distortion
// optimum for quantizers designed without task knowledge (realized through
// reverse water-filling over the received covariance), and a trained
// Lloyd/k-means vector quantizer as an empirical witness.

#ifndef TASKQUANT_BASELINES_HPP
#define TASKQUANT_BASELINES_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "taskquant/channel.hpp"
#include "taskquant/errors.hpp"
#include "taskquant/rng.hpp"

namespace taskquant {

/// Task MSE with no quantization at all:
/// trace(I_K - H^H (H H^H + noise I)^{-1} H).
inline double unquantized_mse(const Eigen::MatrixXcd& channel,
                              double noise_variance) {
  const int k = static_cast<int>(channel.cols());
  const Eigen::MatrixXcd cov = received_covariance(channel, noise_variance);
  const Eigen::MatrixXcd solved = cov.ldlt().solve(channel);  // cov^{-1} H
  return k - (channel.adjoint() * solved).trace().real();
}

/// Distortion allocation for compressing a Gaussian vector at a given rate.
struct RateAllocation {
  Eigen::VectorXd eigenvalues;           // source spectrum, as given
  Eigen::VectorXd per_mode_distortions;  // D_i = min(water_level, eig_i)
  double water_level = 0.0;
  double total_rate_bits = 0.0;
};

/// Reverse water-filling: choose the water level so that
/// sum_i log2(eig_i / min(level, eig_i)) equals the rate.
///
/// With the eigenvalues sorted descending and the top m modes active the
/// level is exp(mean(log eig_{1..m}) - rate*ln2/m); the level is found by
/// scanning m, exactly (no iteration).
inline RateAllocation reverse_waterfilling(const Eigen::VectorXd& eigenvalues,
                                           double rate_bits) {
  if (rate_bits < 0.0)
    throw std::invalid_argument("reverse_waterfilling: negative rate");
  std::vector<double> sorted(eigenvalues.data(),
                             eigenvalues.data() + eigenvalues.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  if (sorted.empty() || !(sorted[0] > 0.0))
    throw std::invalid_argument("reverse_waterfilling: all eigenvalues zero");

  const int n_pos = static_cast<int>(std::count_if(
      sorted.begin(), sorted.end(), [](double v) { return v > 0.0; }));
  double level = sorted[0];
  if (rate_bits > 0.0) {
    double log_sum = 0.0;
    for (int m = 1; m <= n_pos; ++m) {
      log_sum += std::log(sorted[m - 1]);
      const double cand =
          std::exp(log_sum / m - rate_bits * M_LN2 / m);
      const bool below = cand <= sorted[m - 1] * (1.0 + 1e-12);
      const bool above = m == n_pos || cand >= sorted[m];
      if (below && above) {
        level = cand;
        break;
      }
    }
  }

  RateAllocation out;
  out.eigenvalues = eigenvalues;
  out.water_level = level;
  out.total_rate_bits = rate_bits;
  out.per_mode_distortions =
      eigenvalues.unaryExpr([&](double v) { return std::min(level, v); });
  return out;
}

/// Task MSE of the best task-ignorant system: the received vector is
/// compressed at `rate_bits` through the Gaussian test channel implied by
/// reverse water-filling, then the task is estimated linearly from the
/// compressed representation.
///
/// In the covariance eigenbasis each mode is scaled by a_i = (eig_i - D_i) /
/// eig_i and the resulting MSE is K - sum_i p_i (eig_i - D_i) / eig_i^2 with
/// p_i the task energy (U^H H H^H U)_ii in that basis.
inline double task_ignorant_mse_analytic(const Eigen::MatrixXcd& channel,
                                         double noise_variance,
                                         double rate_bits) {
  const int k = static_cast<int>(channel.cols());
  const Eigen::MatrixXcd cov = received_covariance(channel, noise_variance);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(cov);
  const Eigen::VectorXd& eig = es.eigenvalues();
  const RateAllocation alloc = reverse_waterfilling(eig, rate_bits);
  const Eigen::MatrixXcd proj = es.eigenvectors().adjoint() * channel;  // N x K
  double recovered = 0.0;
  for (int i = 0; i < eig.size(); ++i) {
    const double p = proj.row(i).squaredNorm();
    recovered += p * (eig(i) - alloc.per_mode_distortions(i)) / (eig(i) * eig(i));
  }
  return k - recovered;
}

/// Trained vector-quantizer codebook over real-stacked received vectors.
struct VqCodebook {
  Eigen::MatrixXd codewords;  // size x dimension, row per codeword
  std::uint64_t training_seed = 0;
  int iterations = 0;
  double final_distortion = 0.0;

  int size() const { return static_cast<int>(codewords.rows()); }
  int dimension() const { return static_cast<int>(codewords.cols()); }
};

/// [Re(v); Im(v)] stacking used for all real-domain VQ work.
inline Eigen::VectorXd real_stack(const Eigen::VectorXcd& v) {
  Eigen::VectorXd r(2 * v.size());
  r.head(v.size()) = v.real();
  r.tail(v.size()) = v.imag();
  return r;
}

namespace detail {

/// Assigns each sample row to its nearest codeword. Fills `assign` and the
/// squared distances; processes fixed-size chunks (optionally on several
/// threads) and is deterministic regardless of thread count.
inline void vq_assign(const Eigen::MatrixXd& samples,
                      const Eigen::MatrixXd& codebook,
                      std::vector<int>& assign, std::vector<double>& sq_dist,
                      int num_workers) {
  const long n = samples.rows();
  const long chunk = 4096;
  const long n_chunks = (n + chunk - 1) / chunk;
  const Eigen::VectorXd half_norms = 0.5 * codebook.rowwise().squaredNorm();
  auto process = [&](long c) {
    const long lo = c * chunk;
    const long hi = std::min(lo + chunk, n);
    const Eigen::MatrixXd scores =
        samples.middleRows(lo, hi - lo) * codebook.transpose();
    for (long i = lo; i < hi; ++i) {
      int best = 0;
      double best_score = scores(i - lo, 0) - half_norms(0);
      for (int m = 1; m < codebook.rows(); ++m) {
        const double s = scores(i - lo, m) - half_norms(m);
        if (s > best_score) {
          best_score = s;
          best = m;
        }
      }
      assign[i] = best;
      sq_dist[i] = samples.row(i).squaredNorm() - 2.0 * best_score;
      if (sq_dist[i] < 0.0) sq_dist[i] = 0.0;
    }
  };
  if (num_workers <= 1 || n_chunks <= 1) {
    for (long c = 0; c < n_chunks; ++c) process(c);
  } else {
    std::vector<std::thread> pool;
    std::atomic<long> next{0};
    const int nt = std::min<long>(num_workers, n_chunks);
    for (int t = 0; t < nt; ++t)
      pool.emplace_back([&] {
        for (long c = next.fetch_add(1); c < n_chunks; c = next.fetch_add(1))
          process(c);
      });
    for (auto& th : pool) th.join();
  }
}

}  // namespace detail

/// Lloyd (k-means) training.
///
/// Initial codewords are `codebook_size` distinct random samples; iterations
/// stop when the relative distortion improvement drops below 1e-4 or after
/// 100 rounds. Empty clusters are re-seeded from the farthest samples, which
/// cannot increase the next distortion measurement. Guards: codebook_size <=
/// 4096 and at least 50 samples per codeword.
inline VqCodebook lloyd_vq_train(const Eigen::MatrixXd& samples,
                                 int codebook_size, RngStream& rng,
                                 int num_workers = 1) {
  const long n = samples.rows();
  if (codebook_size < 1) throw std::invalid_argument("lloyd_vq_train: size >= 1");
  if (codebook_size > 4096)
    throw std::invalid_argument("lloyd_vq_train: codebook size " +
                                std::to_string(codebook_size) +
                                " exceeds the 4096 training guard");
  if (n < 50L * codebook_size)
    throw std::invalid_argument(
        "lloyd_vq_train: need at least 50 samples per codeword (" +
        std::to_string(n) + " given for " + std::to_string(codebook_size) + ")");

  // Partial Fisher-Yates for distinct initial indices.
  std::vector<long> idx(n);
  std::iota(idx.begin(), idx.end(), 0L);
  for (int m = 0; m < codebook_size; ++m) {
    const long j = m + static_cast<long>(rng.uniform_index(n - m));
    std::swap(idx[m], idx[j]);
  }
  VqCodebook cb;
  cb.codewords.resize(codebook_size, samples.cols());
  for (int m = 0; m < codebook_size; ++m)
    cb.codewords.row(m) = samples.row(idx[m]);

  std::vector<int> assign(n);
  std::vector<double> sq_dist(n);
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 100; ++it) {
    detail::vq_assign(samples, cb.codewords, assign, sq_dist, num_workers);
    const double dist =
        std::accumulate(sq_dist.begin(), sq_dist.end(), 0.0) / n;
    cb.iterations = it + 1;
    cb.final_distortion = dist;
    if (dist > prev * (1.0 + 1e-12))
      throw std::logic_error("lloyd_vq_train: distortion increased");
    const bool converged =
        std::isfinite(prev) && (prev - dist) <= 1e-4 * std::max(prev, 1e-300);
    if (converged || dist == 0.0) break;
    prev = dist;

    // Centroid update.
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(codebook_size, samples.cols());
    std::vector<long> counts(codebook_size, 0);
    for (long i = 0; i < n; ++i) {
      sums.row(assign[i]) += samples.row(i);
      ++counts[assign[i]];
    }
    std::vector<int> empties;
    for (int m = 0; m < codebook_size; ++m) {
      if (counts[m] > 0)
        cb.codewords.row(m) = sums.row(m) / static_cast<double>(counts[m]);
      else
        empties.push_back(m);
    }
    if (!empties.empty()) {
      // Farthest samples (ties by index) re-seed the empty cells.
      std::vector<long> order(n);
      std::iota(order.begin(), order.end(), 0L);
      std::partial_sort(order.begin(), order.begin() + empties.size(),
                        order.end(), [&](long a, long b) {
                          if (sq_dist[a] != sq_dist[b])
                            return sq_dist[a] > sq_dist[b];
                          return a < b;
                        });
      for (std::size_t e = 0; e < empties.size(); ++e)
        cb.codewords.row(empties[e]) = samples.row(order[e]);
    }
  }
  return cb;
}

inline int nearest_codeword(const VqCodebook& cb, const Eigen::VectorXd& v) {
  int best = 0;
  double best_d = (cb.codewords.row(0).transpose() - v).squaredNorm();
  for (int m = 1; m < cb.size(); ++m) {
    const double d = (cb.codewords.row(m).transpose() - v).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = m;
    }
  }
  return best;
}

/// Codebook plus the linear task decoder folded into a per-codeword lookup
/// table (quantized input -> task estimate).
struct VqTaskModel {
  VqCodebook codebook;
  Eigen::MatrixXd task_table;  // size x task_dim
};

/// Trains the codebook on the stacked received samples and fits the task
/// decoder by least squares of the task samples on the quantized outputs.
inline VqTaskModel fit_vq_task_model(const Eigen::MatrixXd& train_received,
                                     const Eigen::MatrixXd& train_task,
                                     int codebook_size, RngStream& rng,
                                     int num_workers = 1) {
  if (train_received.rows() != train_task.rows())
    throw std::invalid_argument("fit_vq_task_model: sample count mismatch");
  VqTaskModel model;
  model.codebook =
      lloyd_vq_train(train_received, codebook_size, rng, num_workers);
  const long n = train_received.rows();
  std::vector<int> assign(n);
  std::vector<double> sq(n);
  detail::vq_assign(train_received, model.codebook.codewords, assign, sq,
                    num_workers);
  Eigen::MatrixXd quantized(n, train_received.cols());
  for (long i = 0; i < n; ++i)
    quantized.row(i) = model.codebook.codewords.row(assign[i]);
  // Minimum-norm least squares; the quantized design matrix is rank
  // deficient whenever few codewords are in use (e.g. size 1).
  const Eigen::MatrixXd decoder =
      quantized.completeOrthogonalDecomposition().solve(train_task);
  model.task_table = model.codebook.codewords * decoder;
  return model;
}

/// Task MSE of the trained task-agnostic VQ on a fixed channel: trains on
/// fresh draws from (H, noise), then evaluates on `trials` new draws.
inline double task_ignorant_mse_empirical(const VqCodebook& codebook,
                                          const Eigen::MatrixXcd& channel,
                                          double noise_variance, int trials,
                                          RngStream& rng) {
  const int n = static_cast<int>(channel.rows());
  const int k = static_cast<int>(channel.cols());
  const long n_fit = std::max<long>(16L * codebook.size(), 4000L);
  Eigen::MatrixXd fit_y(n_fit, 2 * n), fit_s(n_fit, 2 * k);
  for (long i = 0; i < n_fit; ++i) {
    const SignalBatch b = generate_received(channel, noise_variance, 1, rng);
    fit_y.row(i) = real_stack(b.received.col(0));
    fit_s.row(i) = real_stack(b.user_signals.col(0));
  }
  std::vector<int> assign(n_fit);
  std::vector<double> sq(n_fit);
  detail::vq_assign(fit_y, codebook.codewords, assign, sq, 1);
  Eigen::MatrixXd quantized(n_fit, 2 * n);
  for (long i = 0; i < n_fit; ++i)
    quantized.row(i) = codebook.codewords.row(assign[i]);
  const Eigen::MatrixXd decoder =
      quantized.completeOrthogonalDecomposition().solve(fit_s);
  const Eigen::MatrixXd table = codebook.codewords * decoder;

  double err = 0.0;
  for (int t = 0; t < trials; ++t) {
    const SignalBatch b = generate_received(channel, noise_variance, 1, rng);
    const int m = nearest_codeword(codebook, real_stack(b.received.col(0)));
    err += (table.row(m).transpose() - real_stack(b.user_signals.col(0)))
               .squaredNorm();
  }
  return err / trials;
}

/// Codebook file: {"dimension", "size", "codewords" (row-major),
/// "training_seed", "iterations", "final_distortion"}.
inline void save_codebook(const VqCodebook& cb, const std::string& path) {
  nlohmann::json j;
  j["dimension"] = cb.dimension();
  j["size"] = cb.size();
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(cb.size()) * cb.dimension());
  for (int r = 0; r < cb.size(); ++r)
    for (int c = 0; c < cb.dimension(); ++c) flat.push_back(cb.codewords(r, c));
  j["codewords"] = flat;
  j["training_seed"] = cb.training_seed;
  j["iterations"] = cb.iterations;
  j["final_distortion"] = cb.final_distortion;
  std::ofstream out(path);
  if (!out) throw IoError("cannot open codebook file for writing", path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("failed writing codebook file", path);
}

inline VqCodebook load_codebook(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open codebook file", path);
  nlohmann::json j;
  in >> j;
  VqCodebook cb;
  const int dim = j.at("dimension").get<int>();
  const int size = j.at("size").get<int>();
  const auto flat = j.at("codewords").get<std::vector<double>>();
  if (static_cast<long>(flat.size()) != static_cast<long>(dim) * size)
    throw IoError("codebook file has inconsistent dimensions", path);
  cb.codewords.resize(size, dim);
  for (int r = 0; r < size; ++r)
    for (int c = 0; c < dim; ++c) cb.codewords(r, c) = flat[r * dim + c];
  cb.training_seed = j.at("training_seed").get<std::uint64_t>();
  cb.iterations = j.value("iterations", 0);
  cb.final_distortion = j.value("final_distortion", 0.0);
  return cb;
}

}  // namespace taskquant

#endif  // TASKQUANT_BASELINES_HPP
