// Copyright 2026 The kronfc Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef KFC_ACTIVATION_HPP_
#define KFC_ACTIVATION_HPP_

#include <cmath>

#include "kfc/matrix.hpp"

namespace kfc {

enum class Activation { kIdentity, kAbsTanh };

inline double abs_tanh(double x) { return std::abs(std::tanh(x)); }

// Subgradient 0 at the kink x == 0.
inline double abs_tanh_grad(double x) {
  if (x == 0.0) return 0.0;
  const double t = std::tanh(x);
  const double g = 1.0 - t * t;
  return x > 0.0 ? g : -g;
}

void apply_activation(Activation act, Matrix* m);

// Multiplies each grad entry by the activation derivative at the matching
// pre-activation entry.
void apply_activation_grad(Activation act, const Matrix& pre, Matrix* grad);

}  // namespace kfc

#endif  // KFC_ACTIVATION_HPP_
