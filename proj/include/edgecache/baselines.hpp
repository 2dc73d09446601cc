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

#ifndef EDGECACHE_BASELINES_HPP
#define EDGECACHE_BASELINES_HPP

#include <cstdint>
#include <vector>

#include "edgecache/data.hpp"
#include "edgecache/matrix.hpp"

namespace edgecache {

// Factorization result; for NMF both factors are elementwise >= 0.
struct FactorPair {
  Matrix basis;         // (users x k): U*Sigma, or W
  Matrix coefficients;  // (k x contents): V^T, or H
  std::size_t rank = 0;
};

struct SvdResult {
  Matrix u;                            // (rows x r), orthonormal columns
  std::vector<double> singular_values; // descending, length r = min(rows, cols)
  Matrix v;                            // (cols x r)
};

// Full SVD by one-sided Jacobi rotations; deterministic, no randomness.
SvdResult svd_jacobi(const Matrix& a, int max_sweeps = 60, double tol = 1e-13);

// Zero-fills the unobserved entries, truncates the SVD at rank k and returns
// the reconstruction as predicted popularity factors. Negative predictions
// are preserved.
Matrix svd_predict(const RatingMatrix& x, std::size_t k);
Matrix svd_truncated_reconstruction(const SvdResult& svd, std::size_t k);

// Multiplicative-update NMF on the zero-filled matrix under Frobenius loss.
// If objective_log is given it receives ||V - WH||_F^2 after every iteration.
FactorPair nmf_factorize(const Matrix& v, std::size_t k, std::size_t iters, std::uint64_t seed,
                         std::vector<double>* objective_log = nullptr);
Matrix nmf_predict(const RatingMatrix& x, std::size_t k, std::size_t iters,
                   std::uint64_t seed = 0);

}  // namespace edgecache

#endif  // EDGECACHE_BASELINES_HPP
