// Copyright 2026 The kronfc Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef KFC_KFC_SPEC_HPP_
#define KFC_KFC_SPEC_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace kfc {

// Factor-shape families for a structured layer. kI through kIV describe a
// (channels, height, width) tensor input; kKfcm factors a flat input.
enum class Formulation { kI, kII, kIII, kIV, kKfcm };

std::string formulation_name(Formulation f);
Formulation formulation_from_name(const std::string& name);

// Shapes of one Kronecker term A (x) B [(x) C]. The third factor is present
// only when rows_c is nonzero (formulation I).
struct FactorShape {
  std::size_t rows_a = 0, cols_a = 0;
  std::size_t rows_b = 0, cols_b = 0;
  std::size_t rows_c = 0, cols_c = 0;

  bool has_third() const { return rows_c != 0; }
  std::size_t input_dim() const {
    return rows_a * rows_b * (has_third() ? rows_c : 1);
  }
  std::size_t output_dim() const {
    return cols_a * cols_b * (has_third() ? cols_c : 1);
  }
  // Trainable entries of one term, bias not included.
  std::size_t param_count() const {
    return rows_a * cols_a + rows_b * cols_b + rows_c * cols_c;
  }
};

struct ShapeGroup {
  Formulation formulation = Formulation::kII;
  FactorShape shape;
  std::size_t rank = 1;
};

// Structural description of one KFC layer: the input view, the output width,
// and the shape groups whose term outputs are summed.
struct KfcSpec {
  bool tensor_input = false;
  std::size_t channels = 0;  // flat input dim when tensor_input is false
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t output_dim = 0;
  std::size_t pad_input = 0;  // zeros appended to each input row before factoring
  std::vector<ShapeGroup> groups;

  std::size_t input_dim() const {
    return tensor_input ? channels * height * width : channels;
  }
  std::size_t padded_dim() const { return input_dim() + pad_input; }
  std::size_t total_rank() const;
  // Throws ShapeError/ArgumentError when any group is inconsistent with the
  // declared input view or output width.
  void validate() const;
};

struct FlopReport {
  std::uint64_t macs = 0;
  std::uint64_t params = 0;
  std::uint64_t dense_macs = 0;
  std::uint64_t dense_params = 0;
};

// Single-group spec for one of formulations I..IV on a (c, h, w) input.
// factors_out must multiply to k; k3 is used only by formulation I.
KfcSpec make_spec_formulation(Formulation f, std::size_t c, std::size_t h,
                              std::size_t w, std::size_t k, std::size_t k1,
                              std::size_t k2, std::size_t k3, std::size_t rank);

// Group constructor for combined multi-shape specs; the caller assembles the
// groups into one KfcSpec and validates it.
ShapeGroup make_group(Formulation f, std::size_t c, std::size_t h,
                      std::size_t w, std::size_t k, std::size_t k1,
                      std::size_t k2, std::size_t k3, std::size_t rank);

// Flat-input spec factoring c = c1 * (c/c1) and k = k1 * (k/k1).
KfcSpec make_spec_kfcm(std::size_t c, std::size_t k, std::size_t c1,
                       std::size_t k1, std::size_t rank);

// Same, with c1 and k1 picked as the nontrivial divisor nearest the square
// root (log-scale distance, ties to the larger divisor). Throws ShapeError
// when no nontrivial divisor exists (prime dims); pad_dims gives an escape.
KfcSpec make_spec_kfcm_default(std::size_t c, std::size_t k, std::size_t rank);

// Divisor used by make_spec_kfcm_default; exposed for tests and the CLI.
// Returns 0 when n has no nontrivial divisor.
std::size_t nearest_sqrt_divisor(std::size_t n);

// Smallest n' >= n owning a divisor d with n' <= 2*d*d and d*d <= 2*n', so a
// near-square factoring exists after zero-padding the input.
std::size_t pad_dims(std::size_t n);

// Trainable factor entries summed over groups and ranks; bias excluded.
std::uint64_t count_params(const KfcSpec& spec);

// Multiply-add counts for a batch of n rows, factored versus dense.
FlopReport count_macs(const KfcSpec& spec, std::size_t n);

}  // namespace kfc

#endif  // KFC_KFC_SPEC_HPP_
