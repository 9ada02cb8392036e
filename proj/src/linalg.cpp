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

#include "warmfold/linalg.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <string>

#include "warmfold/error.hpp"
#include "warmfold/random.hpp"

namespace warmfold {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw DimensionError(what);
}

std::string shape(Eigen::Index r, Eigen::Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

double max_relative_change(const Vector& now, const Vector& before) {
  double worst = 0.0;
  const double scale = std::max(now.size() > 0 ? now(0) : 0.0, 1e-300);
  for (Eigen::Index k = 0; k < now.size(); ++k) {
    worst = std::max(worst, std::abs(now(k) - before(k)) / scale);
  }
  return worst;
}

}  // namespace

Matrix orthonormal_basis(const Matrix& a) {
  Eigen::HouseholderQR<Matrix> qr(a);
  return qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
}

DenseSvd thin_svd(const Matrix& a) {
  DenseSvd out;
  if (a.rows() >= a.cols()) {
    Eigen::HouseholderQR<Matrix> qr(a);
    const Matrix r = qr.matrixQR()
                         .topRows(a.cols())
                         .template triangularView<Eigen::Upper>();
    Eigen::JacobiSVD<Matrix> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
    out.u = qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
    out.u = out.u * svd.matrixU();
    out.s = svd.singularValues();
    out.v = svd.matrixV();
  } else {
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.u = svd.matrixU();
    out.s = svd.singularValues();
    out.v = svd.matrixV();
  }
  return out;
}

TruncatedSvd truncated_svd(const InteractionMatrix& matrix, std::size_t rank,
                           std::uint64_t seed, const SvdOptions& options) {
  const std::size_t m = matrix.rows();
  const std::size_t n = matrix.cols();
  if (rank < 1 || rank > std::min(m, n)) {
    throw DimensionError("rank " + std::to_string(rank) + " outside [1, " +
                         std::to_string(std::min(m, n)) + "]");
  }
  const auto d = static_cast<Eigen::Index>(rank);
  const auto width = static_cast<Eigen::Index>(
      std::min(rank + options.oversampling, std::min(m, n)));

  Rng rng = make_rng(seed, "truncated_svd");
  NormalSampler normal;
  Matrix omega(static_cast<Eigen::Index>(n), width);
  for (Eigen::Index j = 0; j < width; ++j) {
    for (Eigen::Index i = 0; i < omega.rows(); ++i) omega(i, j) = normal(rng);
  }

  Matrix q = orthonormal_basis(multiply(matrix, omega));
  Vector previous = Vector::Zero(d);
  int iterations = 0;
  Matrix projected;  // A^T Q, N x width
  for (;;) {
    projected = multiply_transpose(matrix, q);
    Eigen::JacobiSVD<Matrix> probe(projected.transpose() * projected);
    const Vector estimate = probe.singularValues().head(d).cwiseSqrt();
    const bool converged =
        iterations >= options.power_iterations &&
        max_relative_change(estimate, previous) < options.convergence_tol;
    if (converged || iterations >= options.max_power_iterations) break;
    previous = estimate;
    q = orthonormal_basis(multiply(matrix, orthonormal_basis(projected)));
    ++iterations;
  }

  // B = Q^T A = projected^T, so B^T = projected = Vb S Ub^T.
  const DenseSvd small = thin_svd(projected);
  TruncatedSvd out;
  out.left = q * small.v.leftCols(d);
  out.singular_values = small.s.head(d);
  out.right = small.u.leftCols(d);
  out.power_iterations = iterations;
  const double cutoff = options.rank_tol * out.singular_values(0);
  out.numerical_rank = static_cast<std::size_t>(
      (out.singular_values.array() > cutoff).count());
  out.rank_deficient = out.numerical_rank < rank;
  return out;
}

PseudoInverse pseudo_inverse(const Matrix& v, double rank_tol) {
  require(v.rows() >= 1 && v.cols() >= 1, "pseudo-inverse of empty matrix");
  PseudoInverse p;
  p.source_rows = static_cast<std::size_t>(v.rows());
  p.source_cols = static_cast<std::size_t>(v.cols());

  const DenseSvd svd = thin_svd(v);
  const double s_max = svd.s.size() > 0 ? svd.s(0) : 0.0;
  Eigen::Index r = 0;
  if (s_max > 0.0) {
    while (r < svd.s.size() && svd.s(r) > rank_tol * s_max) ++r;
  }
  p.left = svd.u.leftCols(r);
  p.singular_values = svd.s.head(r);
  p.right = svd.v.leftCols(r);
  // V+ = B diag(1/s) A^T
  const Matrix scaled =
      p.right * p.singular_values.cwiseInverse().asDiagonal();
  p.materialized = scaled * p.left.transpose();
  if (r == 0) p.materialized = Matrix::Zero(v.cols(), v.rows());
  return p;
}

Vector matvec(const InteractionMatrix& a, const Vector& x) {
  require(static_cast<std::size_t>(x.size()) == a.cols(),
          "matvec: matrix has " + std::to_string(a.cols()) +
              " columns, vector has " + std::to_string(x.size()));
  Vector y(static_cast<Eigen::Index>(a.rows()));
  for (std::size_t u = 0; u < a.rows(); ++u) {
    double acc = 0.0;
    for (const auto i : a.row(static_cast<UserIndex>(u))) acc += x(i);
    y(static_cast<Eigen::Index>(u)) = acc;
  }
  return y;
}

Vector matvec_transpose(const InteractionMatrix& a, const Vector& x) {
  require(static_cast<std::size_t>(x.size()) == a.rows(),
          "matvec_transpose: matrix has " + std::to_string(a.rows()) +
              " rows, vector has " + std::to_string(x.size()));
  Vector y = Vector::Zero(static_cast<Eigen::Index>(a.cols()));
  for (std::size_t u = 0; u < a.rows(); ++u) {
    const double xu = x(static_cast<Eigen::Index>(u));
    for (const auto i : a.row(static_cast<UserIndex>(u))) y(i) += xu;
  }
  return y;
}

Vector matvec(const Matrix& a, const Vector& x) {
  require(a.cols() == x.size(), "matvec: " + shape(a.rows(), a.cols()) +
                                    " times vector of length " +
                                    std::to_string(x.size()));
  return a * x;
}

Matrix multiply(const InteractionMatrix& a, const Matrix& x) {
  require(static_cast<std::size_t>(x.rows()) == a.cols(),
          "multiply: " + shape(static_cast<Eigen::Index>(a.rows()),
                               static_cast<Eigen::Index>(a.cols())) +
              " times " + shape(x.rows(), x.cols()));
  const RowMatrix xr = x;
  RowMatrix y = RowMatrix::Zero(static_cast<Eigen::Index>(a.rows()), x.cols());
  for (std::size_t u = 0; u < a.rows(); ++u) {
    auto out = y.row(static_cast<Eigen::Index>(u));
    for (const auto i : a.row(static_cast<UserIndex>(u))) out += xr.row(i);
  }
  return y;
}

Matrix multiply_transpose(const InteractionMatrix& a, const Matrix& x) {
  require(static_cast<std::size_t>(x.rows()) == a.rows(),
          "multiply_transpose: " +
              shape(static_cast<Eigen::Index>(a.rows()),
                    static_cast<Eigen::Index>(a.cols())) +
              "^T times " + shape(x.rows(), x.cols()));
  const RowMatrix xr = x;
  RowMatrix y = RowMatrix::Zero(static_cast<Eigen::Index>(a.cols()), x.cols());
  for (std::size_t u = 0; u < a.rows(); ++u) {
    const auto src = xr.row(static_cast<Eigen::Index>(u));
    for (const auto i : a.row(static_cast<UserIndex>(u))) y.row(i) += src;
  }
  return y;
}

Matrix to_dense(const InteractionMatrix& a) {
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(a.rows()),
                            static_cast<Eigen::Index>(a.cols()));
  for (std::size_t u = 0; u < a.rows(); ++u) {
    for (const auto i : a.row(static_cast<UserIndex>(u))) {
      out(static_cast<Eigen::Index>(u), i) = 1.0;
    }
  }
  return out;
}

}  // namespace warmfold
