// Copyright 2026 The kronfc Authors
// SPDX-License-Identifier: Apache-2.0

#include "kfc/activation.hpp"

#include "kfc/errors.hpp"

namespace kfc {

void apply_activation(Activation act, Matrix* m) {
  if (act == Activation::kIdentity) return;
  double* p = m->data();
  for (std::size_t i = 0; i < m->size(); ++i) p[i] = abs_tanh(p[i]);
}

void apply_activation_grad(Activation act, const Matrix& pre, Matrix* grad) {
  if (act == Activation::kIdentity) return;
  if (pre.rows() != grad->rows() || pre.cols() != grad->cols()) {
    throw ShapeError("activation grad: pre-activation and gradient shapes differ");
  }
  const double* xp = pre.data();
  double* gp = grad->data();
  for (std::size_t i = 0; i < pre.size(); ++i) gp[i] *= abs_tanh_grad(xp[i]);
}

}  // namespace kfc
