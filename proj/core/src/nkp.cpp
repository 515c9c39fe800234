// Copyright 2026 The kronfc Authors
// SPDX-License-Identifier: Apache-2.0

#include "kfc/nkp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "kfc/errors.hpp"
#include "kfc/kron.hpp"
#include "kfc/svd.hpp"

namespace kfc {
namespace {

// Lays m out for one group: appends declared zero padding and, for
// formulation IV, permutes rows into the (c,w,h)-major order the Kronecker
// grid assumes.
Matrix prepare_dense(const Matrix& m, const KfcSpec& spec,
                     const ShapeGroup& group) {
  const std::size_t pdim = spec.padded_dim();
  const std::size_t k = spec.output_dim;
  Matrix out(pdim, k);
  if (group.formulation == Formulation::kIV) {
    const auto perm = formulation_iv_perm(spec.channels, spec.height, spec.width);
    for (std::size_t j = 0; j < m.rows(); ++j) {
      std::memcpy(out.data() + perm[j] * k, m.data() + j * k, k * sizeof(double));
    }
  } else {
    std::memcpy(out.data(), m.data(), m.size() * sizeof(double));
  }
  return out;
}

void check_dense_shape(const Matrix& m, const Matrix& bias, const KfcSpec& spec) {
  if (m.rows() != spec.input_dim() || m.cols() != spec.output_dim) {
    throw ShapeError("compress_fc: dense layer is " + std::to_string(m.rows()) +
                     "x" + std::to_string(m.cols()) + ", spec wants " +
                     std::to_string(spec.input_dim()) + "x" +
                     std::to_string(spec.output_dim));
  }
  if (bias.rows() != 1 || bias.cols() != spec.output_dim) {
    throw ShapeError("compress_fc: bias is " + std::to_string(bias.rows()) + "x" +
                     std::to_string(bias.cols()) + ", expected 1x" +
                     std::to_string(spec.output_dim));
  }
}

}  // namespace

DecompResult nkp(const Matrix& m, const FactorShape& shape, std::size_t k) {
  if (shape.has_third()) {
    throw ArgumentError("nkp: three-factor shapes have no matrix-SVD form");
  }
  if (m.rows() != shape.rows_a * shape.rows_b ||
      m.cols() != shape.cols_a * shape.cols_b) {
    throw ShapeError("nkp: matrix " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()) + " does not factor as (" +
                     std::to_string(shape.rows_a) + "x" +
                     std::to_string(shape.cols_a) + ") kron (" +
                     std::to_string(shape.rows_b) + "x" +
                     std::to_string(shape.cols_b) + ")");
  }
  const Matrix r = rearrange(m, shape.rows_a, shape.cols_a, shape.rows_b,
                             shape.cols_b);
  const std::size_t rmax = std::min(r.rows(), r.cols());
  if (k < 1 || k > rmax) {
    throw ArgumentError("nkp: k must be in [1, " + std::to_string(rmax) +
                        "], got " + std::to_string(k));
  }
  const SvdResult svd = svd_truncated(r, k);

  DecompResult out;
  out.singular_values = svd.s;
  out.weights.groups.resize(1);
  auto& terms = out.weights.groups[0];
  terms.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double scale = std::sqrt(svd.s[i]);
    Matrix ucol(r.rows(), 1);
    Matrix vcol(r.cols(), 1);
    for (std::size_t j = 0; j < r.rows(); ++j) ucol(j, 0) = scale * svd.u(j, i);
    for (std::size_t j = 0; j < r.cols(); ++j) vcol(j, 0) = scale * svd.v(j, i);
    terms[i].a = unvec(ucol, shape.rows_a, shape.cols_a);
    terms[i].b = unvec(vcol, shape.rows_b, shape.cols_b);
  }
  out.weights.bias = Matrix(1, shape.output_dim());

  const double mnorm = frobenius_norm(m);
  double tail2 = mnorm * mnorm;
  for (double s : svd.s) tail2 -= s * s;
  out.residual_fro = std::sqrt(std::max(0.0, tail2));
  out.rel_residual = mnorm == 0.0 ? 0.0 : out.residual_fro / mnorm;
  return out;
}

CompressResult compress_fc_detail(const Matrix& m, const Matrix& bias,
                                  const KfcSpec& spec) {
  spec.validate();
  if (spec.groups.size() != 1) {
    throw ArgumentError(
        "compress_fc: multi-group specs have no closed-form decomposition; "
        "initialize group 1 by NKP and the remaining groups near zero "
        "(compress_fc_fallback)");
  }
  check_dense_shape(m, bias, spec);
  const ShapeGroup& g = spec.groups[0];
  if (g.shape.has_third()) {
    throw ArgumentError("compress_fc: formulation I has no matrix-SVD form");
  }
  const Matrix prepared = prepare_dense(m, spec, g);
  CompressResult out;
  out.decomp = nkp(prepared, g.shape, g.rank);
  out.weights = out.decomp.weights;
  out.weights.bias = bias;
  return out;
}

KfcWeights compress_fc(const Matrix& m, const Matrix& bias, const KfcSpec& spec) {
  return compress_fc_detail(m, bias, spec).weights;
}

KfcWeights compress_fc_fallback(const Matrix& m, const Matrix& bias,
                                const KfcSpec& spec, Rng& rng) {
  spec.validate();
  check_dense_shape(m, bias, spec);
  if (spec.groups[0].shape.has_third()) {
    throw ArgumentError("compress_fc_fallback: group 1 must be two-factor");
  }
  KfcWeights w = init_weights(spec, rng);
  for (std::size_t g = 1; g < w.groups.size(); ++g) {
    for (KfcTerm& t : w.groups[g]) {
      for (std::size_t i = 0; i < t.a.size(); ++i) t.a.data()[i] *= 1e-4;
      for (std::size_t i = 0; i < t.b.size(); ++i) t.b.data()[i] *= 1e-4;
      for (std::size_t i = 0; i < t.c.size(); ++i) t.c.data()[i] *= 1e-4;
    }
  }
  const Matrix prepared = prepare_dense(m, spec, spec.groups[0]);
  DecompResult d = nkp(prepared, spec.groups[0].shape, spec.groups[0].rank);
  w.groups[0] = std::move(d.weights.groups[0]);
  w.bias = bias;
  return w;
}

std::pair<Matrix, Matrix> lowrank_init(const Matrix& m, std::size_t r) {
  const std::size_t rmax = std::min(m.rows(), m.cols());
  if (r < 1 || r > rmax) {
    throw ArgumentError("lowrank_init: r must be in [1, " +
                        std::to_string(rmax) + "], got " + std::to_string(r));
  }
  const SvdResult svd = svd_truncated(m, r);
  Matrix left(m.rows(), r);
  Matrix right(r, m.cols());
  for (std::size_t i = 0; i < r; ++i) {
    const double scale = std::sqrt(svd.s[i]);
    for (std::size_t row = 0; row < m.rows(); ++row) {
      left(row, i) = svd.u(row, i) * scale;
    }
    for (std::size_t col = 0; col < m.cols(); ++col) {
      right(i, col) = svd.v(col, i) * scale;
    }
  }
  return {std::move(left), std::move(right)};
}

}  // namespace kfc
