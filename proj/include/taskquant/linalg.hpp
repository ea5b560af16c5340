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

#ifndef TASKQUANT_LINALG_HPP
#define TASKQUANT_LINALG_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace taskquant {

/// Principal square root of a Hermitian positive definite matrix together
/// with its inverse and the eigenvalues (both factors come from a single
/// eigendecomposition, so sqrt * inv_sqrt = I to machine precision).
struct HermitianSqrt {
  Eigen::MatrixXcd sqrt;
  Eigen::MatrixXcd inv_sqrt;
  Eigen::VectorXd eigenvalues;  // ascending, all > 0
};

inline HermitianSqrt hermitian_sqrt(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("hermitian_sqrt: matrix must be square");
  const double scale = m.norm();
  if ((m - m.adjoint()).norm() > 1e-10 * std::max(scale, 1.0))
    throw std::invalid_argument("hermitian_sqrt: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("hermitian_sqrt: eigendecomposition failed");
  const Eigen::VectorXd& w = es.eigenvalues();
  if (w(0) <= 0.0)
    throw std::invalid_argument(
        "hermitian_sqrt: matrix is not positive definite (min eigenvalue " +
        std::to_string(w(0)) + ")");
  HermitianSqrt out;
  out.eigenvalues = w;
  const Eigen::MatrixXcd& v = es.eigenvectors();
  out.sqrt = v * w.cwiseSqrt().asDiagonal() * v.adjoint();
  out.inv_sqrt = v * w.cwiseSqrt().cwiseInverse().asDiagonal() * v.adjoint();
  return out;
}

/// Principal Hermitian PD square root (see HermitianSqrt for the bundle).
inline Eigen::MatrixXcd matrix_sqrt_hermitian(const Eigen::MatrixXcd& m) {
  return hermitian_sqrt(m).sqrt;
}

}  // namespace taskquant

#endif  // TASKQUANT_LINALG_HPP
