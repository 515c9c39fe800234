// Copyright 2026 The kronfc Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef KFC_REPORT_HPP_
#define KFC_REPORT_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace kfc {

// One report line. layer_params counts the parameters of the compressible
// layer under the method's own storage convention (see emit_report);
// model_params counts every trainable entry. A negative test_error prints
// as "-".
struct ReportRow {
  std::string method;
  std::uint64_t layer_params = 0;
  std::uint64_t model_params = 0;
  double test_error = -1.0;
};

// Human-readable count: against a kilo-scale baseline "74.0K" (one
// decimal); against a mega-scale baseline two significant digits, "0.016M".
std::string format_count(std::uint64_t n, bool mega);

// Four-column text table: method, layer params with percent reduction
// against rows[0], model params likewise, test error. Percentages carry one
// decimal; the baseline row reads 0.0%. Column widths are stable across
// rows. tsv emits the same cells tab-separated, one header line.
std::string emit_report(const std::vector<ReportRow>& rows);
std::string emit_report_tsv(const std::vector<ReportRow>& rows);

}  // namespace kfc

#endif  // KFC_REPORT_HPP_
