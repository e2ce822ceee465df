#ifndef CWEBENCH_REPORTING_HPP
#define CWEBENCH_REPORTING_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cwebench/metrics.hpp"

namespace cwebench {

enum class TableKind {
  AccuracyCounts,   // parsed / cwe-only / cwe+superset / fully-correct counts
  RecallPrecision,
  LineOnly,         // exact-line quotes regardless of CWE, with n/loc baseline
  BestConfig,
  FpDistribution,   // most common false-positive CWEs
};

enum class TableFormat { Csv, Markdown, Json };

// One scored output: the classification outcome plus the per-case constants
// reports need (so every table is derivable from the scored log alone).
struct ScoredRecord {
  OutcomeRecord outcome;
  int loc = 0;
  bool ambiguous = false;
};

std::optional<TableKind> table_kind_from_name(std::string_view name);
std::optional<TableFormat> table_format_from_name(std::string_view name);

// Renders one table over the scored records. Deterministic: rows ordered by
// case id then model name; same input bytes produce the same document bytes.
// CSV/Markdown round reals to three decimals; JSON keeps full precision.
std::string emit_table(TableKind kind, const std::vector<ScoredRecord>& records,
                       TableFormat format);

}  // namespace cwebench

#endif  // CWEBENCH_REPORTING_HPP
