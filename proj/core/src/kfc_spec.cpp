// Copyright 2026 The kronfc Authors
// SPDX-License-Identifier: Apache-2.0

#include "kfc/kfc_spec.hpp"

#include <cmath>
#include <string>

#include "kfc/errors.hpp"

namespace kfc {
namespace {

bool is_prime(std::size_t n) {
  if (n < 2) return false;
  for (std::size_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

std::string dims_str(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

void check_positive(std::size_t v, const char* what) {
  if (v == 0) throw ArgumentError(std::string(what) + " must be positive");
}

// Compares divisor candidates by |log(d^2) - log(n)| without touching
// floating point: d1 is strictly better when its square-to-n ratio is
// smaller under exact cross multiplication.
bool divisor_better(std::size_t d1, std::size_t d2, std::size_t n) {
  using u128 = unsigned __int128;
  const u128 s1 = static_cast<u128>(d1) * d1;
  const u128 s2 = static_cast<u128>(d2) * d2;
  const u128 num1 = s1 >= n ? s1 : n, den1 = s1 >= n ? n : s1;
  const u128 num2 = s2 >= n ? s2 : n, den2 = s2 >= n ? n : s2;
  const u128 lhs = num1 * den2;
  const u128 rhs = num2 * den1;
  if (lhs != rhs) return lhs < rhs;
  return d1 > d2;  // tie in ratio: prefer the larger divisor
}

std::uint64_t term_macs(const FactorShape& s) {
  const std::uint64_t c1 = s.rows_a, k1 = s.cols_a;
  const std::uint64_t c2 = s.rows_b, k2 = s.cols_b;
  if (!s.has_third()) return k1 * c2 * (c1 + k2);
  const std::uint64_t c3 = s.rows_c, k3 = s.cols_c;
  return k1 * c1 * c2 * c3 + k1 * k2 * c3 * (c2 + k3);
}

}  // namespace

std::string formulation_name(Formulation f) {
  switch (f) {
    case Formulation::kI: return "I";
    case Formulation::kII: return "II";
    case Formulation::kIII: return "III";
    case Formulation::kIV: return "IV";
    case Formulation::kKfcm: return "KFCM";
  }
  throw ArgumentError("unknown formulation tag");
}

Formulation formulation_from_name(const std::string& name) {
  if (name == "I") return Formulation::kI;
  if (name == "II") return Formulation::kII;
  if (name == "III") return Formulation::kIII;
  if (name == "IV") return Formulation::kIV;
  if (name == "KFCM") return Formulation::kKfcm;
  throw ArgumentError("unknown formulation \"" + name +
                      "\"; valid tags: I, II, III, IV, KFCM");
}

std::size_t KfcSpec::total_rank() const {
  std::size_t total = 0;
  for (const auto& g : groups) total += g.rank;
  return total;
}

void KfcSpec::validate() const {
  if (output_dim == 0) throw ArgumentError("spec: output dim must be positive");
  if (groups.empty()) throw ArgumentError("spec: at least one shape group required");
  if (tensor_input) {
    check_positive(channels, "spec: channels");
    check_positive(height, "spec: height");
    check_positive(width, "spec: width");
    if (pad_input != 0) {
      throw ShapeError("spec: padding applies only to flat input");
    }
  } else {
    check_positive(channels, "spec: input dim");
    if (height != 0 || width != 0) {
      throw ShapeError("spec: flat input must not carry height/width");
    }
  }
  for (const auto& g : groups) {
    if (g.rank < 1) throw ArgumentError("spec: every group rank must be >= 1");
    const FactorShape& s = g.shape;
    check_positive(s.rows_a, "spec: rows_a");
    check_positive(s.cols_a, "spec: cols_a");
    check_positive(s.rows_b, "spec: rows_b");
    check_positive(s.cols_b, "spec: cols_b");
    if (s.has_third() && s.cols_c == 0) {
      throw ArgumentError("spec: cols_c must be positive with a third factor");
    }
    if (s.output_dim() != output_dim) {
      throw ShapeError("spec: group output " + std::to_string(s.output_dim()) +
                       " != layer output " + std::to_string(output_dim));
    }
    const bool needs_tensor = g.formulation != Formulation::kKfcm;
    if (needs_tensor != tensor_input) {
      throw ShapeError("spec: formulation " + formulation_name(g.formulation) +
                       (needs_tensor ? " needs a tensor input view"
                                     : " needs a flat input"));
    }
    switch (g.formulation) {
      case Formulation::kI:
        if (!s.has_third()) {
          throw ShapeError("spec: formulation I needs three factors");
        }
        if (s.rows_a != channels || s.rows_b != height || s.rows_c != width) {
          throw ShapeError("spec: formulation I factor rows (" +
                           std::to_string(s.rows_a) + "," +
                           std::to_string(s.rows_b) + "," +
                           std::to_string(s.rows_c) + ") != input view (" +
                           std::to_string(channels) + "," +
                           std::to_string(height) + "," +
                           std::to_string(width) + ")");
        }
        break;
      case Formulation::kII:
        if (s.has_third()) throw ShapeError("spec: formulation II takes two factors");
        if (s.rows_a != channels || s.rows_b != height * width) {
          throw ShapeError("spec: formulation II expects shapes (" +
                           std::to_string(channels) + "xK1, " +
                           std::to_string(height * width) + "xK2), got (" +
                           dims_str(s.rows_a, s.cols_a) + ", " +
                           dims_str(s.rows_b, s.cols_b) + ")");
        }
        break;
      case Formulation::kIII:
        if (s.has_third()) throw ShapeError("spec: formulation III takes two factors");
        if (s.rows_a != channels * height || s.rows_b != width) {
          throw ShapeError("spec: formulation III expects shapes (" +
                           std::to_string(channels * height) + "xK1, " +
                           std::to_string(width) + "xK2), got (" +
                           dims_str(s.rows_a, s.cols_a) + ", " +
                           dims_str(s.rows_b, s.cols_b) + ")");
        }
        break;
      case Formulation::kIV:
        if (s.has_third()) throw ShapeError("spec: formulation IV takes two factors");
        if (s.rows_a != channels * width || s.rows_b != height) {
          throw ShapeError("spec: formulation IV expects shapes (" +
                           std::to_string(channels * width) + "xK1, " +
                           std::to_string(height) + "xK2), got (" +
                           dims_str(s.rows_a, s.cols_a) + ", " +
                           dims_str(s.rows_b, s.cols_b) + ")");
        }
        break;
      case Formulation::kKfcm:
        if (s.has_third()) throw ShapeError("spec: KFCM takes two factors");
        if (s.rows_a * s.rows_b != padded_dim()) {
          throw ShapeError("spec: KFCM factor rows " +
                           std::to_string(s.rows_a) + "*" +
                           std::to_string(s.rows_b) + " != padded input " +
                           std::to_string(padded_dim()));
        }
        break;
    }
  }
}

ShapeGroup make_group(Formulation f, std::size_t c, std::size_t h,
                      std::size_t w, std::size_t k, std::size_t k1,
                      std::size_t k2, std::size_t k3, std::size_t rank) {
  if (f == Formulation::kKfcm) {
    throw ArgumentError("make_group: KFCM is built by make_spec_kfcm");
  }
  check_positive(c, "make_group: c");
  check_positive(h, "make_group: h");
  check_positive(w, "make_group: w");
  check_positive(k, "make_group: k");
  check_positive(k1, "make_group: k1");
  check_positive(k2, "make_group: k2");
  check_positive(rank, "make_group: rank");
  ShapeGroup g;
  g.formulation = f;
  g.rank = rank;
  if (f == Formulation::kI) {
    check_positive(k3, "make_group: k3");
    if (k1 * k2 * k3 != k) {
      throw ShapeError("make_group: k1*k2*k3 = " + std::to_string(k1 * k2 * k3) +
                       " must equal the output dim " + std::to_string(k));
    }
    g.shape = FactorShape{c, k1, h, k2, w, k3};
    return g;
  }
  if (k3 != 0) {
    throw ArgumentError("make_group: k3 applies only to formulation I");
  }
  if (k1 * k2 != k) {
    throw ShapeError("make_group: k1*k2 = " + std::to_string(k1 * k2) +
                     " must equal the output dim " + std::to_string(k));
  }
  switch (f) {
    case Formulation::kII:  g.shape = FactorShape{c, k1, h * w, k2}; break;
    case Formulation::kIII: g.shape = FactorShape{c * h, k1, w, k2}; break;
    case Formulation::kIV:  g.shape = FactorShape{c * w, k1, h, k2}; break;
    default: break;  // unreachable
  }
  return g;
}

KfcSpec make_spec_formulation(Formulation f, std::size_t c, std::size_t h,
                              std::size_t w, std::size_t k, std::size_t k1,
                              std::size_t k2, std::size_t k3,
                              std::size_t rank) {
  KfcSpec spec;
  spec.tensor_input = true;
  spec.channels = c;
  spec.height = h;
  spec.width = w;
  spec.output_dim = k;
  spec.groups.push_back(make_group(f, c, h, w, k, k1, k2, k3, rank));
  spec.validate();
  return spec;
}

KfcSpec make_spec_kfcm(std::size_t c, std::size_t k, std::size_t c1,
                       std::size_t k1, std::size_t rank) {
  check_positive(c, "make_spec_kfcm: c");
  check_positive(k, "make_spec_kfcm: k");
  check_positive(c1, "make_spec_kfcm: c1");
  check_positive(k1, "make_spec_kfcm: k1");
  check_positive(rank, "make_spec_kfcm: rank");
  if (c % c1 != 0) {
    std::string msg = "make_spec_kfcm: c1 (" + std::to_string(c1) +
                      ") does not divide the input dim (" + std::to_string(c) + ")";
    if (is_prime(c)) {
      msg += "; the input dim is prime, pad_dims can pick a padded size";
    }
    throw ShapeError(msg);
  }
  if (k % k1 != 0) {
    std::string msg = "make_spec_kfcm: k1 (" + std::to_string(k1) +
                      ") does not divide the output dim (" + std::to_string(k) + ")";
    if (is_prime(k)) {
      msg += "; the output dim is prime, consider an extra dummy class";
    }
    throw ShapeError(msg);
  }
  KfcSpec spec;
  spec.tensor_input = false;
  spec.channels = c;
  spec.output_dim = k;
  ShapeGroup g;
  g.formulation = Formulation::kKfcm;
  g.rank = rank;
  g.shape = FactorShape{c1, k1, c / c1, k / k1};
  spec.groups.push_back(g);
  spec.validate();
  return spec;
}

std::size_t nearest_sqrt_divisor(std::size_t n) {
  std::size_t best = 0;
  for (std::size_t d = 2; d * d <= n; ++d) {
    if (n % d != 0) continue;
    for (std::size_t cand : {d, n / d}) {
      if (cand == 1 || cand == n) continue;
      if (best == 0 || divisor_better(cand, best, n)) best = cand;
    }
  }
  return best;
}

KfcSpec make_spec_kfcm_default(std::size_t c, std::size_t k, std::size_t rank) {
  const std::size_t c1 = nearest_sqrt_divisor(c);
  if (c1 == 0) {
    throw ShapeError("make_spec_kfcm_default: input dim " + std::to_string(c) +
                     " has no nontrivial divisor; pad_dims(" +
                     std::to_string(c) + ") = " + std::to_string(pad_dims(c)) +
                     " would");
  }
  const std::size_t k1 = nearest_sqrt_divisor(k);
  if (k1 == 0) {
    throw ShapeError("make_spec_kfcm_default: output dim " + std::to_string(k) +
                     " has no nontrivial divisor");
  }
  return make_spec_kfcm(c, k, c1, k1, rank);
}

std::size_t pad_dims(std::size_t n) {
  if (n == 0) throw ArgumentError("pad_dims: n must be positive");
  for (std::size_t cand = n;; ++cand) {
    // Divisor window [sqrt(cand/2), sqrt(2*cand)], checked exactly.
    for (std::size_t d = 2; d * d <= 2 * cand; ++d) {
      if (cand > 2 * d * d) continue;
      if (cand % d == 0) return cand;
    }
  }
}

std::uint64_t count_params(const KfcSpec& spec) {
  spec.validate();
  std::uint64_t total = 0;
  for (const auto& g : spec.groups) {
    total += static_cast<std::uint64_t>(g.rank) * g.shape.param_count();
  }
  return total;
}

FlopReport count_macs(const KfcSpec& spec, std::size_t n) {
  spec.validate();
  if (n < 1) throw ArgumentError("count_macs: batch must be >= 1");
  FlopReport r;
  for (const auto& g : spec.groups) {
    r.macs += static_cast<std::uint64_t>(g.rank) * term_macs(g.shape);
  }
  r.macs *= n;
  r.params = count_params(spec);
  r.dense_macs = static_cast<std::uint64_t>(n) * spec.input_dim() * spec.output_dim;
  r.dense_params = static_cast<std::uint64_t>(spec.input_dim()) * spec.output_dim;
  return r;
}

}  // namespace kfc
