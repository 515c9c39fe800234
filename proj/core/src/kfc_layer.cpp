// Copyright 2026 The kronfc Authors
// SPDX-License-Identifier: Apache-2.0

#include "kfc/kfc_layer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "kfc/errors.hpp"
#include "kfc/kron.hpp"

namespace kfc {
namespace {

// Small dense kernels on raw row-major buffers. Loop order is fixed (outer
// index, then the contraction, contiguous stores inside) so results are
// bit-reproducible. Each performs exactly the stated number of multiplies.

// t = a^T x: a is c1 x k1, x is c1 x c2, t is k1 x c2. c1*k1*c2 multiplies.
void gemm_at(const double* a, const double* x, std::size_t c1, std::size_t k1,
             std::size_t c2, double* t) {
  std::fill(t, t + k1 * c2, 0.0);
  for (std::size_t i = 0; i < c1; ++i) {
    const double* arow = a + i * k1;
    const double* xrow = x + i * c2;
    for (std::size_t j = 0; j < k1; ++j) {
      const double av = arow[j];
      double* trow = t + j * c2;
      for (std::size_t q = 0; q < c2; ++q) trow[q] += av * xrow[q];
    }
  }
}

// y += t b: t is k1 x c2, b is c2 x k2, y is k1 x k2. k1*c2*k2 multiplies.
void gemm_acc(const double* t, const double* b, std::size_t k1, std::size_t c2,
              std::size_t k2, double* y) {
  for (std::size_t i = 0; i < k1; ++i) {
    const double* trow = t + i * c2;
    double* yrow = y + i * k2;
    for (std::size_t q = 0; q < c2; ++q) {
      const double tv = trow[q];
      const double* brow = b + q * k2;
      for (std::size_t j = 0; j < k2; ++j) yrow[j] += tv * brow[j];
    }
  }
}

// c += a^T b: a is k x m, b is k x n, c is m x n.
void gemm_ta_acc(const double* a, const double* b, std::size_t m, std::size_t k,
                 std::size_t n, double* c) {
  for (std::size_t p = 0; p < k; ++p) {
    const double* arow = a + p * m;
    const double* brow = b + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double av = arow[i];
      double* crow = c + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// c += a b^T: a is m x p, b is n x p, c is m x n.
void gemm_tb_acc(const double* a, const double* b, std::size_t m, std::size_t p,
                 std::size_t n, double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * p;
    double* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double* brow = b + j * p;
      double acc = 0.0;
      for (std::size_t q = 0; q < p; ++q) acc += arow[q] * brow[q];
      crow[j] += acc;
    }
  }
}

struct Scratch {
  std::vector<double> xpad;    // padded input row
  std::vector<double> xperm;   // formulation IV gathered row
  std::vector<double> t;       // k1 x c2 (or k1 x c2*c3)
  std::vector<double> h1;      // backward temporaries
  std::vector<double> h2;
  std::vector<double> dt;      // formulation I chain gradient
  std::vector<double> dgroup;  // per-group input gradient, padded coords
  std::vector<double> dxp;     // per-sample input gradient, padded coords
};

Scratch make_scratch(const KfcSpec& spec, bool backward) {
  Scratch s;
  const std::size_t pdim = spec.padded_dim();
  std::size_t tmax = 0, h1max = 0, h2max = 0, dtmax = 0, inner = 0;
  bool any_iv = false;
  for (const auto& g : spec.groups) {
    const FactorShape& f = g.shape;
    if (g.formulation == Formulation::kIV) any_iv = true;
    if (f.has_third()) {
      tmax = std::max(tmax, f.cols_a * f.rows_b * f.rows_c);
      inner = std::max(inner, f.cols_b * f.rows_c);
      h1max = std::max(h1max, std::max(f.cols_b * f.rows_c, f.rows_b * f.cols_c));
      h2max = std::max(h2max, f.rows_b * f.cols_c);
      dtmax = std::max(dtmax, f.cols_a * f.rows_b * f.rows_c);
    } else {
      tmax = std::max(tmax, f.cols_a * f.rows_b);
      h1max = std::max(h1max, f.rows_a * f.cols_b);
      h2max = std::max(h2max, f.rows_a * f.cols_b);
    }
  }
  if (spec.pad_input > 0) s.xpad.resize(pdim);
  if (any_iv) s.xperm.resize(pdim);
  s.t.resize(tmax);
  if (backward) {
    s.h1.resize(h1max);
    s.h2.resize(h2max);
    if (dtmax > 0) s.dt.resize(dtmax);
    s.dgroup.resize(pdim);
    s.dxp.resize(pdim);
  } else if (inner > 0) {
    s.h1.resize(inner);  // three-factor forward stages k2 x c3 blocks here
  }
  return s;
}

void check_factor(const Matrix& m, std::size_t rows, std::size_t cols,
                  const char* which) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ShapeError(std::string("weights: factor ") + which + " is " +
                     std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                     ", spec wants " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  }
}

}  // namespace

std::vector<std::size_t> formulation_iv_perm(std::size_t c, std::size_t h,
                                             std::size_t w) {
  std::vector<std::size_t> perm(c * h * w);
  std::size_t j = 0;
  for (std::size_t ci = 0; ci < c; ++ci) {
    for (std::size_t hi = 0; hi < h; ++hi) {
      for (std::size_t wi = 0; wi < w; ++wi) {
        perm[j++] = (ci * w + wi) * h + hi;
      }
    }
  }
  return perm;
}

void check_weights(const KfcSpec& spec, const KfcWeights& w) {
  spec.validate();
  if (w.groups.size() != spec.groups.size()) {
    throw ShapeError("weights: " + std::to_string(w.groups.size()) +
                     " groups, spec wants " + std::to_string(spec.groups.size()));
  }
  for (std::size_t g = 0; g < spec.groups.size(); ++g) {
    const ShapeGroup& sg = spec.groups[g];
    if (w.groups[g].size() != sg.rank) {
      throw ShapeError("weights: group " + std::to_string(g) + " holds " +
                       std::to_string(w.groups[g].size()) + " terms, spec rank is " +
                       std::to_string(sg.rank));
    }
    for (const KfcTerm& t : w.groups[g]) {
      check_factor(t.a, sg.shape.rows_a, sg.shape.cols_a, "a");
      check_factor(t.b, sg.shape.rows_b, sg.shape.cols_b, "b");
      if (sg.shape.has_third()) {
        check_factor(t.c, sg.shape.rows_c, sg.shape.cols_c, "c");
      } else if (!t.c.empty()) {
        throw ShapeError("weights: unexpected third factor in a two-factor group");
      }
    }
  }
  if (w.bias.rows() != 1 || w.bias.cols() != spec.output_dim) {
    throw ShapeError("weights: bias is " + std::to_string(w.bias.rows()) + "x" +
                     std::to_string(w.bias.cols()) + ", spec wants 1x" +
                     std::to_string(spec.output_dim));
  }
}

KfcWeights init_weights(const KfcSpec& spec, Rng& rng) {
  spec.validate();
  const double fan_in = static_cast<double>(spec.input_dim());
  const double fan_out = static_cast<double>(spec.output_dim);
  const double s = std::sqrt(6.0 / (fan_in + fan_out)) /
                   std::sqrt(static_cast<double>(spec.total_rank()));
  KfcWeights w;
  w.groups.reserve(spec.groups.size());
  for (const auto& g : spec.groups) {
    std::vector<KfcTerm> terms;
    terms.reserve(g.rank);
    for (std::size_t r = 0; r < g.rank; ++r) {
      KfcTerm t;
      t.a = Matrix(g.shape.rows_a, g.shape.cols_a);
      t.b = Matrix(g.shape.rows_b, g.shape.cols_b);
      for (std::size_t i = 0; i < t.a.size(); ++i) t.a.data()[i] = rng.uniform(-s, s);
      for (std::size_t i = 0; i < t.b.size(); ++i) t.b.data()[i] = rng.uniform(-s, s);
      if (g.shape.has_third()) {
        t.c = Matrix(g.shape.rows_c, g.shape.cols_c);
        for (std::size_t i = 0; i < t.c.size(); ++i) t.c.data()[i] = rng.uniform(-s, s);
      }
      terms.push_back(std::move(t));
    }
    w.groups.push_back(std::move(terms));
  }
  w.bias = Matrix(1, spec.output_dim);
  return w;
}

Matrix materialize(const KfcSpec& spec, const KfcWeights& w) {
  check_weights(spec, w);
  const std::size_t pdim = spec.padded_dim();
  const std::size_t k = spec.output_dim;
  if (pdim > kMaxMatrixElements / k) {
    throw CapacityError("materialize: full matrix would exceed the element cap");
  }
  Matrix full(pdim, k);
  for (std::size_t g = 0; g < spec.groups.size(); ++g) {
    const ShapeGroup& sg = spec.groups[g];
    Matrix group_sum(pdim, k);
    for (const KfcTerm& t : w.groups[g]) {
      Matrix term = kron(t.a, t.b);
      if (sg.shape.has_third()) term = kron(term, t.c);
      group_sum += term;
    }
    if (sg.formulation == Formulation::kIV) {
      const auto perm = formulation_iv_perm(spec.channels, spec.height, spec.width);
      for (std::size_t j = 0; j < pdim; ++j) {
        const double* src = group_sum.data() + perm[j] * k;
        double* dst = full.data() + j * k;
        for (std::size_t q = 0; q < k; ++q) dst[q] += src[q];
      }
    } else {
      full += group_sum;
    }
  }
  if (spec.pad_input == 0) return full;
  Matrix trimmed(spec.input_dim(), k);
  std::memcpy(trimmed.data(), full.data(),
              trimmed.size() * sizeof(double));
  return trimmed;
}

Matrix kfc_forward(const KfcSpec& spec, const KfcWeights& w, const Matrix& x,
                   Activation act, std::uint64_t* mac_counter) {
  check_weights(spec, w);
  if (x.cols() != spec.input_dim()) {
    throw ShapeError("forward: input is " + std::to_string(x.rows()) + "x" +
                     std::to_string(x.cols()) + ", spec input dim is " +
                     std::to_string(spec.input_dim()));
  }
  const std::size_t n = x.rows();
  const std::size_t in_dim = spec.input_dim();
  const std::size_t k_out = spec.output_dim;
  Matrix y(n, k_out);
  Scratch s = make_scratch(spec, /*backward=*/false);
  std::vector<std::size_t> iv_perm;
  for (const auto& g : spec.groups) {
    if (g.formulation == Formulation::kIV && iv_perm.empty()) {
      iv_perm = formulation_iv_perm(spec.channels, spec.height, spec.width);
    }
  }
  std::uint64_t macs = 0;

  for (std::size_t i = 0; i < n; ++i) {
    const double* xrow = x.data() + i * in_dim;
    if (spec.pad_input > 0) {
      std::memcpy(s.xpad.data(), xrow, in_dim * sizeof(double));
      std::fill(s.xpad.begin() + in_dim, s.xpad.end(), 0.0);
      xrow = s.xpad.data();
    }
    double* yrow = y.data() + i * k_out;
    for (std::size_t g = 0; g < spec.groups.size(); ++g) {
      const ShapeGroup& sg = spec.groups[g];
      const FactorShape& f = sg.shape;
      const double* xin = xrow;
      if (sg.formulation == Formulation::kIV) {
        for (std::size_t j = 0; j < iv_perm.size(); ++j) {
          s.xperm[iv_perm[j]] = xrow[j];
        }
        xin = s.xperm.data();
      }
      for (const KfcTerm& t : w.groups[g]) {
        if (!f.has_third()) {
          const std::size_t c1 = f.rows_a, k1 = f.cols_a;
          const std::size_t c2 = f.rows_b, k2 = f.cols_b;
          gemm_at(t.a.data(), xin, c1, k1, c2, s.t.data());
          gemm_acc(s.t.data(), t.b.data(), k1, c2, k2, yrow);
          macs += static_cast<std::uint64_t>(k1) * c2 * (c1 + k2);
        } else {
          const std::size_t c1 = f.rows_a, k1 = f.cols_a;
          const std::size_t c2 = f.rows_b, k2 = f.cols_b;
          const std::size_t c3 = f.rows_c, k3 = f.cols_c;
          gemm_at(t.a.data(), xin, c1, k1, c2 * c3, s.t.data());
          macs += static_cast<std::uint64_t>(k1) * c1 * c2 * c3;
          // Each k1 slice of t is a c2 x c3 block fed through the inner pair.
          for (std::size_t j1 = 0; j1 < k1; ++j1) {
            const double* slice = s.t.data() + j1 * c2 * c3;
            gemm_at(t.b.data(), slice, c2, k2, c3, s.h1.data());
            gemm_acc(s.h1.data(), t.c.data(), k2, c3, k3, yrow + j1 * k2 * k3);
          }
          macs += static_cast<std::uint64_t>(k1) * k2 * c3 * (c2 + k3);
        }
      }
    }
    const double* bias = w.bias.data();
    for (std::size_t q = 0; q < k_out; ++q) yrow[q] += bias[q];
  }
  apply_activation(act, &y);
  if (mac_counter) *mac_counter += macs;
  return y;
}

KfcBackward kfc_backward(const KfcSpec& spec, const KfcWeights& w,
                         const Matrix& x, const Matrix& grad_out) {
  check_weights(spec, w);
  if (x.cols() != spec.input_dim()) {
    throw ShapeError("backward: input is " + std::to_string(x.rows()) + "x" +
                     std::to_string(x.cols()) + ", spec input dim is " +
                     std::to_string(spec.input_dim()));
  }
  if (grad_out.rows() != x.rows() || grad_out.cols() != spec.output_dim) {
    throw ShapeError("backward: output gradient is " +
                     std::to_string(grad_out.rows()) + "x" +
                     std::to_string(grad_out.cols()) + ", expected " +
                     std::to_string(x.rows()) + "x" +
                     std::to_string(spec.output_dim));
  }
  const std::size_t n = x.rows();
  const std::size_t in_dim = spec.input_dim();
  const std::size_t pdim = spec.padded_dim();
  const std::size_t k_out = spec.output_dim;

  KfcBackward out;
  out.grad_w.groups.reserve(spec.groups.size());
  for (const auto& g : spec.groups) {
    std::vector<KfcTerm> terms(g.rank);
    for (auto& t : terms) {
      t.a = Matrix(g.shape.rows_a, g.shape.cols_a);
      t.b = Matrix(g.shape.rows_b, g.shape.cols_b);
      if (g.shape.has_third()) t.c = Matrix(g.shape.rows_c, g.shape.cols_c);
    }
    out.grad_w.groups.push_back(std::move(terms));
  }
  out.grad_w.bias = Matrix(1, k_out);
  out.grad_x = Matrix(n, in_dim);

  Scratch s = make_scratch(spec, /*backward=*/true);
  std::vector<std::size_t> iv_perm;
  for (const auto& g : spec.groups) {
    if (g.formulation == Formulation::kIV && iv_perm.empty()) {
      iv_perm = formulation_iv_perm(spec.channels, spec.height, spec.width);
    }
  }

  double* gbias = out.grad_w.bias.data();
  for (std::size_t i = 0; i < n; ++i) {
    const double* xrow = x.data() + i * in_dim;
    if (spec.pad_input > 0) {
      std::memcpy(s.xpad.data(), xrow, in_dim * sizeof(double));
      std::fill(s.xpad.begin() + in_dim, s.xpad.end(), 0.0);
      xrow = s.xpad.data();
    }
    const double* grow = grad_out.data() + i * k_out;
    for (std::size_t q = 0; q < k_out; ++q) gbias[q] += grow[q];
    std::fill(s.dxp.begin(), s.dxp.end(), 0.0);

    for (std::size_t g = 0; g < spec.groups.size(); ++g) {
      const ShapeGroup& sg = spec.groups[g];
      const FactorShape& f = sg.shape;
      const double* xin = xrow;
      if (sg.formulation == Formulation::kIV) {
        for (std::size_t j = 0; j < iv_perm.size(); ++j) {
          s.xperm[iv_perm[j]] = xrow[j];
        }
        xin = s.xperm.data();
      }
      std::fill(s.dgroup.begin(), s.dgroup.end(), 0.0);

      for (std::size_t r = 0; r < sg.rank; ++r) {
        const KfcTerm& t = w.groups[g][r];
        KfcTerm& gt = out.grad_w.groups[g][r];
        if (!f.has_third()) {
          const std::size_t c1 = f.rows_a, k1 = f.cols_a;
          const std::size_t c2 = f.rows_b, k2 = f.cols_b;
          // dB += (A^T X)^T G
          gemm_at(t.a.data(), xin, c1, k1, c2, s.t.data());
          gemm_ta_acc(s.t.data(), grow, c2, k1, k2, gt.b.data());
          // dA += (X B) G^T
          std::fill(s.h1.begin(), s.h1.begin() + c1 * k2, 0.0);
          gemm_acc(xin, t.b.data(), c1, c2, k2, s.h1.data());
          gemm_tb_acc(s.h1.data(), grow, c1, k2, k1, gt.a.data());
          // dX += (A G) B^T
          std::fill(s.h2.begin(), s.h2.begin() + c1 * k2, 0.0);
          gemm_acc(t.a.data(), grow, c1, k1, k2, s.h2.data());
          gemm_tb_acc(s.h2.data(), t.b.data(), c1, k2, c2, s.dgroup.data());
        } else {
          const std::size_t c1 = f.rows_a, k1 = f.cols_a;
          const std::size_t c2 = f.rows_b, k2 = f.cols_b;
          const std::size_t c3 = f.rows_c, k3 = f.cols_c;
          gemm_at(t.a.data(), xin, c1, k1, c2 * c3, s.t.data());
          std::fill(s.dt.begin(), s.dt.begin() + k1 * c2 * c3, 0.0);
          for (std::size_t j1 = 0; j1 < k1; ++j1) {
            const double* xk = s.t.data() + j1 * c2 * c3;   // c2 x c3
            const double* gk = grow + j1 * k2 * k3;          // k2 x k3
            // dB += (Xk C) Gk^T
            std::fill(s.h1.begin(), s.h1.begin() + c2 * k3, 0.0);
            gemm_acc(xk, t.c.data(), c2, c3, k3, s.h1.data());
            gemm_tb_acc(s.h1.data(), gk, c2, k3, k2, gt.b.data());
            // shared: H2 = B Gk (c2 x k3)
            std::fill(s.h2.begin(), s.h2.begin() + c2 * k3, 0.0);
            gemm_acc(t.b.data(), gk, c2, k2, k3, s.h2.data());
            // dC += Xk^T H2
            gemm_ta_acc(xk, s.h2.data(), c3, c2, k3, gt.c.data());
            // dT slice = H2 C^T
            gemm_tb_acc(s.h2.data(), t.c.data(), c2, k3, c3,
                        s.dt.data() + j1 * c2 * c3);
          }
          // dA += X' dT^T; dX' += A dT
          gemm_tb_acc(xin, s.dt.data(), c1, c2 * c3, k1, gt.a.data());
          gemm_acc(t.a.data(), s.dt.data(), c1, k1, c2 * c3, s.dgroup.data());
        }
      }

      if (sg.formulation == Formulation::kIV) {
        for (std::size_t j = 0; j < iv_perm.size(); ++j) {
          s.dxp[j] += s.dgroup[iv_perm[j]];
        }
      } else {
        for (std::size_t j = 0; j < pdim; ++j) s.dxp[j] += s.dgroup[j];
      }
    }
    double* gxrow = out.grad_x.data() + i * in_dim;
    std::memcpy(gxrow, s.dxp.data(), in_dim * sizeof(double));
  }
  return out;
}

}  // namespace kfc
