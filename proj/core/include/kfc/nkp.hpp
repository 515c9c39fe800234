// Copyright 2026 The kronfc Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef KFC_NKP_HPP_
#define KFC_NKP_HPP_

#include <cstddef>
#include <utility>
#include <vector>

#include "kfc/kfc_layer.hpp"
#include "kfc/kfc_spec.hpp"
#include "kfc/matrix.hpp"
#include "kfc/rng.hpp"

namespace kfc {

// Rank-k nearest-Kronecker-sum factorization of one matrix.
struct DecompResult {
  KfcWeights weights;                  // one group, k terms, zero bias
  std::vector<double> singular_values; // leading k values of the rearrangement
  double residual_fro = 0.0;           // Frobenius error of the sum
  double rel_residual = 0.0;           // residual_fro / |m|_F, 0 for m == 0
};

// Closest rank-k Kronecker sum to m for a two-factor shape, via truncated SVD
// of the rearranged matrix. Factors split each singular value symmetrically,
// so |A_i|_F == |B_i|_F per term. Three-factor shapes are not supported.
DecompResult nkp(const Matrix& m, const FactorShape& shape, std::size_t k);

// Replaces a dense layer (m: inputDim x K plus bias) with KFC weights for a
// single-group spec, handling the formulation IV row permutation and any
// declared zero padding. Multi-group specs are rejected; see
// compress_fc_fallback for the documented alternative.
KfcWeights compress_fc(const Matrix& m, const Matrix& bias, const KfcSpec& spec);

// compress_fc plus the decomposition diagnostics, for reporting.
struct CompressResult {
  KfcWeights weights;
  DecompResult decomp;
};
CompressResult compress_fc_detail(const Matrix& m, const Matrix& bias,
                                  const KfcSpec& spec);

// Multi-group fallback: group 1 from NKP, remaining groups random factors
// scaled by 1e-4 so fine-tuning starts near the single-group optimum.
KfcWeights compress_fc_fallback(const Matrix& m, const Matrix& bias,
                                const KfcSpec& spec, Rng& rng);

// Two-layer low-rank split of m: left = U sqrt(D), right = sqrt(D) V^T, the
// optimal rank-r product baseline.
std::pair<Matrix, Matrix> lowrank_init(const Matrix& m, std::size_t r);

}  // namespace kfc

#endif  // KFC_NKP_HPP_
