// Copyright 2026 The kronfc Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef KFC_KFC_LAYER_HPP_
#define KFC_KFC_LAYER_HPP_

#include <cstdint>
#include <vector>

#include "kfc/activation.hpp"
#include "kfc/kfc_spec.hpp"
#include "kfc/matrix.hpp"
#include "kfc/rng.hpp"

namespace kfc {

// One Kronecker term. c stays empty except for three-factor groups.
struct KfcTerm {
  Matrix a;
  Matrix b;
  Matrix c;
};

// Trainable state of a KFC layer: terms[group][rank index] plus a 1 x K bias.
struct KfcWeights {
  std::vector<std::vector<KfcTerm>> groups;
  Matrix bias;
};

// Throws ShapeError when the weights do not match the spec exactly.
void check_weights(const KfcSpec& spec, const KfcWeights& w);

// Every factor uniform in [-s, s] with s = sqrt(6 / (fanIn + fanOut)) scaled
// by 1/sqrt(total rank), fan dims taken from the materialized layer. Bias is
// zero. Draw order: groups, then rank terms, then factors a, b, c, row-major.
KfcWeights init_weights(const KfcSpec& spec, Rng& rng);

// Full inputDim x K weight matrix as a sum of Kronecker products, with the
// formulation IV row permutation applied and padded rows dropped. Test and
// compression oracle; the training path never calls it.
Matrix materialize(const KfcSpec& spec, const KfcWeights& w);

// y = act(x W + bias) evaluated per term via the small-factor chain; the full
// W is never formed. x is N x inputDim, the result N x K. When mac_counter is
// given it is advanced by the exact number of multiplies the factored path
// performs (bias adds and permutations are free).
Matrix kfc_forward(const KfcSpec& spec, const KfcWeights& w, const Matrix& x,
                   Activation act = Activation::kIdentity,
                   std::uint64_t* mac_counter = nullptr);

// Gradients of sum(pre_activation .* grad_out) for the pre-activation layer
// output. grad_w.bias carries the bias gradient (column sums of grad_out).
struct KfcBackward {
  KfcWeights grad_w;
  Matrix grad_x;
};

KfcBackward kfc_backward(const KfcSpec& spec, const KfcWeights& w,
                         const Matrix& x, const Matrix& grad_out);

// Row permutation taking the natural (c,h,w) flat index to the (c,w,h)-major
// index formulation IV factors over: perm[c*H*W + h*W + w] = (c*W + w)*H + h.
std::vector<std::size_t> formulation_iv_perm(std::size_t c, std::size_t h,
                                             std::size_t w);

}  // namespace kfc

#endif  // KFC_KFC_LAYER_HPP_
