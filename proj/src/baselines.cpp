/*
 * Copyright 2026 the edgecache authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "edgecache/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace edgecache {

namespace {

// One-sided Jacobi on the columns of b (rows >= cols assumed by the caller):
// repeatedly rotates column pairs until all pairs are numerically orthogonal.
// Accumulates the rotations into v (cols x cols).
void jacobi_orthogonalize(Matrix& b, Matrix& v, int max_sweeps, double tol) {
  const std::size_t rows = b.rows(), cols = b.cols();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < cols; ++p) {
      for (std::size_t q = p + 1; q < cols; ++q) {
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
          const double bp = b(i, p), bq = b(i, q);
          app += bp * bp;
          aqq += bq * bq;
          apq += bp * bq;
        }
        if (std::abs(apq) <= tol * std::sqrt(app * aqq) || apq == 0.0) continue;
        rotated = true;

        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < rows; ++i) {
          const double bp = b(i, p), bq = b(i, q);
          b(i, p) = c * bp - s * bq;
          b(i, q) = s * bp + c * bq;
        }
        for (std::size_t i = 0; i < cols; ++i) {
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }
}

SvdResult svd_tall(const Matrix& a, int max_sweeps, double tol) {
  Matrix b = a;  // working copy; columns become sigma_j * u_j
  Matrix v = Matrix::identity(a.cols());
  jacobi_orthogonalize(b, v, max_sweeps, tol);

  const std::size_t r = a.cols();
  std::vector<double> sigma(r);
  for (std::size_t j = 0; j < r; ++j) {
    double norm = 0.0;
    for (std::size_t i = 0; i < b.rows(); ++i) norm += b(i, j) * b(i, j);
    sigma[j] = std::sqrt(norm);
  }
  std::vector<std::size_t> order(r);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  SvdResult out;
  out.u = Matrix(a.rows(), r);
  out.v = Matrix(a.cols(), r);
  out.singular_values.resize(r);
  for (std::size_t jj = 0; jj < r; ++jj) {
    const std::size_t j = order[jj];
    out.singular_values[jj] = sigma[j];
    if (sigma[j] > 0.0)
      for (std::size_t i = 0; i < b.rows(); ++i) out.u(i, jj) = b(i, j) / sigma[j];
    for (std::size_t i = 0; i < a.cols(); ++i) out.v(i, jj) = v(i, j);
  }
  return out;
}

}  // namespace

SvdResult svd_jacobi(const Matrix& a, int max_sweeps, double tol) {
  if (a.rows() == 0 || a.cols() == 0) throw ShapeError("svd_jacobi: empty matrix");
  if (a.rows() >= a.cols()) return svd_tall(a, max_sweeps, tol);
  // Wide matrix: factor the transpose and swap the factors.
  SvdResult t = svd_tall(transpose(a), max_sweeps, tol);
  SvdResult out;
  out.u = std::move(t.v);
  out.v = std::move(t.u);
  out.singular_values = std::move(t.singular_values);
  return out;
}

Matrix svd_truncated_reconstruction(const SvdResult& svd, std::size_t k) {
  const std::size_t r = svd.singular_values.size();
  if (k < 1 || k > r)
    throw ConfigError("svd rank k = " + std::to_string(k) + " out of range [1, " +
                      std::to_string(r) + "]");
  // U_k * diag(sigma_k) * V_k^T without forming the diagonal.
  Matrix us(svd.u.rows(), k);
  for (std::size_t i = 0; i < svd.u.rows(); ++i)
    for (std::size_t j = 0; j < k; ++j) us(i, j) = svd.u(i, j) * svd.singular_values[j];
  Matrix vk(svd.v.rows(), k);
  for (std::size_t i = 0; i < svd.v.rows(); ++i)
    for (std::size_t j = 0; j < k; ++j) vk(i, j) = svd.v(i, j);
  return matmul(us, transpose(vk));
}

Matrix svd_predict(const RatingMatrix& x, std::size_t k) {
  const Matrix dense = x.dense();
  const std::size_t max_rank = std::min(dense.rows(), dense.cols());
  if (k < 1 || k > max_rank)
    throw ConfigError("svd_predict: rank k = " + std::to_string(k) + " out of range [1, " +
                      std::to_string(max_rank) + "]");
  return svd_truncated_reconstruction(svd_jacobi(dense), k);
}

FactorPair nmf_factorize(const Matrix& v, std::size_t k, std::size_t iters, std::uint64_t seed,
                         std::vector<double>* objective_log) {
  if (k < 1) throw ConfigError("nmf: rank must be >= 1");
  for (double x : v.data())
    if (x < 0.0) throw DataError("nmf: negative input entry");

  constexpr double kDenomEps = 1e-12;
  RngStream rng = RngStream(seed).fork(fork_tag(stream_kind::baseline, 0));
  Matrix w = Matrix::random_uniform(v.rows(), k, 0.0, 1.0, rng);
  Matrix h = Matrix::random_uniform(k, v.cols(), 0.0, 1.0, rng);

  auto objective = [&](const Matrix& w_, const Matrix& h_) {
    const Matrix r = sub(v, matmul(w_, h_));
    double acc = 0.0;
    for (double x : r.data()) acc += x * x;
    return acc;
  };

  for (std::size_t it = 0; it < iters; ++it) {
    // H <- H .* (W^T V) ./ (W^T W H + eps)
    const Matrix wt = transpose(w);
    const Matrix wtv = matmul(wt, v);
    const Matrix wtwh = matmul(matmul(wt, w), h);
    for (std::size_t i = 0; i < h.size(); ++i)
      h.data()[i] *= wtv.data()[i] / (wtwh.data()[i] + kDenomEps);

    // W <- W .* (V H^T) ./ (W H H^T + eps)
    const Matrix ht = transpose(h);
    const Matrix vht = matmul(v, ht);
    const Matrix whht = matmul(w, matmul(h, ht));
    for (std::size_t i = 0; i < w.size(); ++i)
      w.data()[i] *= vht.data()[i] / (whht.data()[i] + kDenomEps);

    if (objective_log) objective_log->push_back(objective(w, h));
  }
  return {std::move(w), std::move(h), k};
}

Matrix nmf_predict(const RatingMatrix& x, std::size_t k, std::size_t iters, std::uint64_t seed) {
  const FactorPair f = nmf_factorize(x.dense(), k, iters, seed);
  return matmul(f.basis, f.coefficients);
}

}  // namespace edgecache
