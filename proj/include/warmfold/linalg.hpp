/*
 * Copyright 2026 The warmfold Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>

#include "warmfold/data.hpp"

namespace warmfold {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Rank-d factors A ~= U diag(s) V^T with orthonormal columns in U and V and
/// s sorted descending.
struct TruncatedSvd {
  Matrix left;             // M x d
  Vector singular_values;  // d
  Matrix right;            // N x d
  /// Number of singular values above rank_tol * s_max. When it is below the
  /// requested rank the trailing factors span the null space and
  /// `rank_deficient` is set.
  std::size_t numerical_rank = 0;
  bool rank_deficient = false;
  int power_iterations = 0;
};

/// Randomized subspace iteration. `power_iterations` is the minimum number of
/// A^T A applications; iteration continues until the leading singular value
/// estimates move by less than `convergence_tol` (relative) or
/// `max_power_iterations` is reached.
struct SvdOptions {
  std::size_t oversampling = 8;
  int power_iterations = 4;
  int max_power_iterations = 200;
  double convergence_tol = 1e-12;
  double rank_tol = 1e-10;
};

TruncatedSvd truncated_svd(const InteractionMatrix& matrix, std::size_t rank,
                           std::uint64_t seed, const SvdOptions& options = {});

/// Moore-Penrose inverse of a tall-thin matrix V = A diag(s) B^T, kept both in
/// factored form and materialized as V+ = B diag(1/s) A^T.
struct PseudoInverse {
  std::size_t source_rows = 0;
  std::size_t source_cols = 0;
  Matrix left;             // A: N x r
  Vector singular_values;  // s: r, descending, all > rank_tol * s_max
  Matrix right;            // B: d x r
  Matrix materialized;     // d x N

  std::size_t rank() const {
    return static_cast<std::size_t>(singular_values.size());
  }
  bool is_zero() const { return rank() == 0; }
};

inline constexpr double kDefaultRankTol = 1e-10;

PseudoInverse pseudo_inverse(const Matrix& v,
                             double rank_tol = kDefaultRankTol);

/// Thin SVD of a dense matrix (QR first when tall). Singular values below
/// rank_tol * s_max are kept here; callers truncate.
struct DenseSvd {
  Matrix u;
  Vector s;
  Matrix v;
};
DenseSvd thin_svd(const Matrix& a);

/// Orthonormal basis of the column space via Householder QR (thin Q).
Matrix orthonormal_basis(const Matrix& a);

// Products. All of them check dimensions and throw DimensionError.
Vector matvec(const InteractionMatrix& a, const Vector& x);
Vector matvec_transpose(const InteractionMatrix& a, const Vector& x);
Vector matvec(const Matrix& a, const Vector& x);
Matrix multiply(const InteractionMatrix& a, const Matrix& x);
Matrix multiply_transpose(const InteractionMatrix& a, const Matrix& x);

/// Dense 0/1 copy, for tests and small-instance oracles.
Matrix to_dense(const InteractionMatrix& a);

}  // namespace warmfold
