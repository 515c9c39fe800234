// Copyright 2026 The kronfc Authors
// SPDX-License-Identifier: Apache-2.0

#include "kfc/svd.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "kfc/errors.hpp"
#include "kfc/rng.hpp"

namespace kfc {
namespace {

constexpr int kMaxJacobiSweeps = 100;
constexpr int kMaxPowerIters = 10000;
constexpr double kPowerTol = 1e-12;
// Column norms below this cannot be normalized safely; treat as exact zeros.
constexpr double kTinyNorm = 1e-290;

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, const std::vector<double>& x, std::vector<double>* y) {
  for (std::size_t i = 0; i < x.size(); ++i) (*y)[i] += alpha * x[i];
}

void scale_vec(double alpha, std::vector<double>* x) {
  for (double& v : *x) v *= alpha;
}

// Two Gram-Schmidt passes; one is not enough once vectors get nearly parallel.
void orth_against(const std::vector<std::vector<double>>& basis,
                  std::vector<double>* x) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& b : basis) axpy(-dot(b, *x), b, x);
  }
}

std::vector<double> mat_vec(const Matrix& a, const std::vector<double>& x) {
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* row = a.data() + i * a.cols();
    double acc = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
  return y;
}

std::vector<double> mat_t_vec(const Matrix& a, const std::vector<double>& x) {
  std::vector<double> y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* row = a.data() + i * a.cols();
    const double xi = x[i];
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] += row[j] * xi;
  }
  return y;
}

// Unit vector orthogonal to every column in cols, built from the canonical
// axis the columns cover least. Deterministic, so rank-deficient inputs get
// the same completed basis every run.
std::vector<double> complete_canonical(
    const std::vector<std::vector<double>>& cols, std::size_t dim) {
  std::size_t best = 0;
  double best_score = -1.0;
  for (std::size_t t = 0; t < dim; ++t) {
    double covered = 0.0;
    for (const auto& c : cols) covered += c[t] * c[t];
    const double score = 1.0 - covered;
    if (score > best_score) {
      best_score = score;
      best = t;
    }
  }
  std::vector<double> r(dim, 0.0);
  r[best] = 1.0;
  orth_against(cols, &r);
  const double n = norm2(r);
  if (n < 1e-8) {
    throw NumericError("svd: failed to complete an orthonormal basis");
  }
  scale_vec(1.0 / n, &r);
  return r;
}

struct ThinSvd {
  std::vector<std::vector<double>> u_cols;
  std::vector<double> s;
  std::vector<std::vector<double>> v_cols;
};

// One-sided Jacobi on a tall matrix (rows >= cols). Right rotations keep the
// working copy equal to A*V while driving its columns orthogonal; at
// convergence the column norms are the singular values.
ThinSvd jacobi_tall(const Matrix& a) {
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<std::vector<double>> w(n, std::vector<double>(m));
  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < m; ++i) w[j][i] = a(i, j);
    v[j][j] = 1.0;
  }

  const double eps = 1e-14;
  bool converged = (n <= 1);
  for (int sweep = 0; sweep < kMaxJacobiSweeps && !converged; ++sweep) {
    converged = true;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double alpha = dot(w[p], w[p]);
        const double beta = dot(w[q], w[q]);
        const double gamma = dot(w[p], w[q]);
        if (std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        converged = false;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double wp = w[p][i], wq = w[q][i];
          w[p][i] = c * wp - s * wq;
          w[q][i] = s * wp + c * wq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vp = v[p][i], vq = v[q][i];
          v[p][i] = c * vp - s * vq;
          v[q][i] = s * vp + c * vq;
        }
      }
    }
  }
  if (!converged) {
    throw NumericError("svd_full: no convergence within " +
                       std::to_string(kMaxJacobiSweeps) + " Jacobi sweeps");
  }

  std::vector<double> sig(n);
  for (std::size_t j = 0; j < n; ++j) sig[j] = norm2(w[j]);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sig[x] > sig[y]; });

  ThinSvd out;
  out.s.resize(n);
  out.u_cols.reserve(n);
  out.v_cols.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    if (sig[src] > kTinyNorm) {
      out.s[j] = sig[src];
      std::vector<double> col = std::move(w[src]);
      scale_vec(1.0 / sig[src], &col);
      out.u_cols.push_back(std::move(col));
    } else {
      // Numerically zero direction: the normalized column would be noise and
      // break orthonormality, so substitute a canonical completion.
      out.s[j] = 0.0;
      out.u_cols.push_back(complete_canonical(out.u_cols, m));
    }
    out.v_cols.push_back(std::move(v[src]));
  }
  return out;
}

// Largest-magnitude entry of each left singular vector made positive.
// Ties go to the lowest index. Applied to u and v together so the product
// u * diag(s) * v^T is unchanged.
void fix_signs(ThinSvd* t) {
  for (std::size_t j = 0; j < t->u_cols.size(); ++j) {
    auto& u = t->u_cols[j];
    std::size_t imax = 0;
    for (std::size_t i = 1; i < u.size(); ++i) {
      if (std::abs(u[i]) > std::abs(u[imax])) imax = i;
    }
    if (u[imax] < 0.0) {
      scale_vec(-1.0, &u);
      scale_vec(-1.0, &t->v_cols[j]);
    }
  }
}

// The power loop stops on singular value stagnation, and values converge
// about twice as fast as the vectors. That leaves the trailing vectors a few
// orders less accurate than the values, which shows up as reconstruction
// error at high ranks. Solving the problem exactly inside the subspace the
// iteration found repairs the vectors: every iterate lies in the row space of
// a, so at full rank the subspace is the whole row space and the polished
// result matches svd_full to roundoff. Cost is one m x k Jacobi pass.
void rayleigh_ritz_polish(const Matrix& a, ThinSvd* acc) {
  const std::size_t k = acc->s.size();
  std::vector<std::vector<double>> basis;
  basis.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<double> v = acc->v_cols[j];
    orth_against(basis, &v);
    const double n = norm2(v);
    if (n < 1e-8) {
      basis.push_back(complete_canonical(basis, v.size()));
    } else {
      scale_vec(1.0 / n, &v);
      basis.push_back(std::move(v));
    }
  }

  Matrix w(a.rows(), k);
  for (std::size_t j = 0; j < k; ++j) {
    const std::vector<double> col = mat_vec(a, basis[j]);
    for (std::size_t i = 0; i < a.rows(); ++i) w(i, j) = col[i];
  }

  ThinSvd small = jacobi_tall(w);
  acc->u_cols = std::move(small.u_cols);
  acc->s = std::move(small.s);
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<double> v(basis[0].size(), 0.0);
    for (std::size_t t = 0; t < k; ++t) axpy(small.v_cols[j][t], basis[t], &v);
    acc->v_cols[j] = std::move(v);
  }
}

SvdResult assemble(ThinSvd t, std::size_t m, std::size_t n) {
  const std::size_t r = t.s.size();
  SvdResult out{Matrix(m, r), std::move(t.s), Matrix(n, r)};
  for (std::size_t j = 0; j < r; ++j) {
    for (std::size_t i = 0; i < m; ++i) out.u(i, j) = t.u_cols[j][i];
    for (std::size_t i = 0; i < n; ++i) out.v(i, j) = t.v_cols[j][i];
  }
  return out;
}

}  // namespace

SvdResult svd_full(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) {
    throw ArgumentError("svd_full: matrix is empty");
  }
  const bool wide = m.rows() < m.cols();
  ThinSvd thin = jacobi_tall(wide ? transpose(m) : m);
  if (wide) thin.u_cols.swap(thin.v_cols);
  fix_signs(&thin);
  return assemble(std::move(thin), m.rows(), m.cols());
}

SvdResult svd_truncated(const Matrix& m, std::size_t k) {
  if (m.rows() == 0 || m.cols() == 0) {
    throw ArgumentError("svd_truncated: matrix is empty");
  }
  const std::size_t rmax = std::min(m.rows(), m.cols());
  if (k < 1 || k > rmax) {
    throw ArgumentError("svd_truncated: k must be in [1, " +
                        std::to_string(rmax) + "], got " + std::to_string(k));
  }
  const std::size_t nr = m.rows(), nc = m.cols();
  const double anorm = frobenius_norm(m);
  const double zero_tol = std::max(kTinyNorm, 1e-15 * anorm);

  ThinSvd acc;
  bool exhausted = (anorm == 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    if (exhausted) {
      acc.s.push_back(0.0);
      acc.u_cols.push_back(complete_canonical(acc.u_cols, nr));
      acc.v_cols.push_back(complete_canonical(acc.v_cols, nc));
      continue;
    }

    // Fixed per-triple seed keeps the whole decomposition reproducible.
    Rng rng(0x5eedULL * 2654435761ULL + i);
    std::vector<double> vcur(nc);
    for (double& x : vcur) x = rng.normal();
    orth_against(acc.v_cols, &vcur);
    double nv = norm2(vcur);
    if (nv < 1e-12) {
      vcur = complete_canonical(acc.v_cols, nc);
    } else {
      scale_vec(1.0 / nv, &vcur);
    }

    std::vector<double> ucur(nr, 0.0);
    double sigma = 0.0;
    double sigma_prev = -1.0;
    bool converged = false;
    for (int it = 0; it < kMaxPowerIters; ++it) {
      // p = (A - sum_j s_j u_j v_j^T) v, then scrubbed against found u's.
      std::vector<double> p = mat_vec(m, vcur);
      for (std::size_t j = 0; j < acc.s.size(); ++j) {
        axpy(-acc.s[j] * dot(acc.v_cols[j], vcur), acc.u_cols[j], &p);
      }
      orth_against(acc.u_cols, &p);
      const double np = norm2(p);
      if (np <= zero_tol) {
        exhausted = true;
        break;
      }
      ucur = p;
      scale_vec(1.0 / np, &ucur);

      std::vector<double> q = mat_t_vec(m, ucur);
      for (std::size_t j = 0; j < acc.s.size(); ++j) {
        axpy(-acc.s[j] * dot(acc.u_cols[j], ucur), acc.v_cols[j], &q);
      }
      orth_against(acc.v_cols, &q);
      const double nq = norm2(q);
      if (nq <= zero_tol) {
        exhausted = true;
        break;
      }
      sigma = nq;
      vcur = q;
      scale_vec(1.0 / nq, &vcur);

      if (sigma_prev >= 0.0 && std::abs(sigma - sigma_prev) <= kPowerTol * sigma) {
        converged = true;
        break;
      }
      sigma_prev = sigma;
    }

    if (exhausted) {
      acc.s.push_back(0.0);
      acc.u_cols.push_back(complete_canonical(acc.u_cols, nr));
      acc.v_cols.push_back(complete_canonical(acc.v_cols, nc));
      continue;
    }
    if (!converged) {
      throw NumericError("svd_truncated: power iteration for triple " +
                         std::to_string(i) + " did not converge within " +
                         std::to_string(kMaxPowerIters) + " iterations");
    }
    acc.s.push_back(sigma);
    acc.u_cols.push_back(std::move(ucur));
    acc.v_cols.push_back(std::move(vcur));
  }

  if (anorm > 0.0) rayleigh_ritz_polish(m, &acc);
  fix_signs(&acc);
  return assemble(std::move(acc), nr, nc);
}

}  // namespace kfc
