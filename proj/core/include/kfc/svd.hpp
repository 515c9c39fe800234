// Copyright 2026 The kronfc Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef KFC_SVD_HPP_
#define KFC_SVD_HPP_

#include <cstddef>
#include <vector>

#include "kfc/matrix.hpp"

namespace kfc {

// Thin singular value decomposition of an m x n matrix, m >= n after an
// internal transpose if needed: u is m x r, v is n x r, s holds r = min(m, n)
// singular values sorted descending. u * diag(s) * v^T reconstructs the input.
struct SvdResult {
  Matrix u;
  std::vector<double> s;
  Matrix v;
};

// Full decomposition by one-sided Jacobi rotations on column pairs.
// Deterministic: fixed sweep order, no randomness. Columns of u and v are
// orthonormal even for rank-deficient input; singular vectors paired with a
// zero singular value are completed canonically. The sign convention fixes
// the largest-magnitude entry of each left singular vector to be positive.
// Throws NumericError if convergence is not reached within the sweep cap.
SvdResult svd_full(const Matrix& m);

// Leading k singular triples by power iteration with deflation. k must be
// in [1, min(rows, cols)]. Start vectors come from a fixed internal seed so
// results are reproducible run to run. Iteration stops when the singular
// value estimate is stable to 1e-12 relative; throws NumericError if the cap
// of 10000 iterations is hit first.
SvdResult svd_truncated(const Matrix& m, std::size_t k);

}  // namespace kfc

#endif  // KFC_SVD_HPP_
