// Copyright 2026 The kronfc Authors
// SPDX-License-Identifier: Apache-2.0

#include "kfc/report.hpp"

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include "kfc/errors.hpp"

namespace kfc {
namespace {

std::string fmt(const char* spec, double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string reduction(std::uint64_t baseline, std::uint64_t n) {
  const double pct =
      baseline == 0 ? 0.0
                    : 100.0 * (1.0 - static_cast<double>(n) /
                                         static_cast<double>(baseline));
  return fmt("%.1f%%", pct);
}

std::string params_cell(std::uint64_t n, std::uint64_t baseline, bool mega) {
  return format_count(n, mega) + "(" + reduction(baseline, n) + ")";
}

std::string error_cell(double e) {
  return e < 0.0 ? std::string("-") : fmt("%.2f%%", 100.0 * e);
}

std::string pad(const std::string& s, std::size_t width) {
  std::string out = s;
  out.append(width - s.size(), ' ');
  return out;
}

}  // namespace

std::string format_count(std::uint64_t n, bool mega) {
  if (!mega) return fmt("%.1fK", static_cast<double>(n) / 1e3);
  const double v = static_cast<double>(n) / 1e6;
  if (v >= 1.0) return fmt("%.1fM", v);
  if (v >= 0.1) return fmt("%.2fM", v);
  return fmt("%.3fM", v);
}

std::string emit_report(const std::vector<ReportRow>& rows) {
  if (rows.empty()) throw ArgumentError("report: no rows");
  const ReportRow& base = rows.front();
  const bool layer_mega = base.layer_params >= 1000000;
  const bool model_mega = base.model_params >= 1000000;

  std::vector<std::vector<std::string>> cells;
  cells.push_back({"Method", "Layer Params(%Red)", "Model Params(%Red)",
                   "Test Error"});
  for (const ReportRow& r : rows) {
    cells.push_back({r.method,
                     params_cell(r.layer_params, base.layer_params, layer_mega),
                     params_cell(r.model_params, base.model_params, model_mega),
                     error_cell(r.test_error)});
  }
  std::size_t width[4] = {0, 0, 0, 0};
  for (const auto& row : cells) {
    for (int c = 0; c < 4; ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (const auto& row : cells) {
    for (int c = 0; c < 4; ++c) {
      out += c == 3 ? row[c] : pad(row[c], width[c] + 2);
    }
    out += '\n';
  }
  return out;
}

std::string emit_report_tsv(const std::vector<ReportRow>& rows) {
  if (rows.empty()) throw ArgumentError("report: no rows");
  const ReportRow& base = rows.front();
  std::string out =
      "method\tlayer_params\tlayer_reduction\tmodel_params\tmodel_reduction"
      "\ttest_error\n";
  for (const ReportRow& r : rows) {
    out += r.method + "\t" + std::to_string(r.layer_params) + "\t" +
           reduction(base.layer_params, r.layer_params) + "\t" +
           std::to_string(r.model_params) + "\t" +
           reduction(base.model_params, r.model_params) + "\t";
    out += r.test_error < 0.0 ? "-" : fmt("%.17g", r.test_error);
    out += '\n';
  }
  return out;
}

}  // namespace kfc
