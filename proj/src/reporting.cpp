#include "cwebench/reporting.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <sstream>

#include "json.hpp"

#include "cwebench/errors.hpp"

namespace cwebench {

namespace {

using ordered_json = nlohmann::ordered_json;

// Numeric ids sort numerically ("114" before "1494" before "500843"),
// anything else lexicographically, so report row order matches intuition.
bool case_id_less(const std::string& a, const std::string& b) {
  auto numeric = [](const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
      return std::isdigit(c);
    });
  };
  if (numeric(a) && numeric(b)) {
    if (a.size() != b.size()) return a.size() < b.size();
  }
  return a < b;
}

// "%.3f" with trailing zeros trimmed but one decimal kept: 1 -> "1.0",
// 0.0216 -> "0.022". Rendered tables only; JSON keeps raw doubles.
std::string format_real(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", value);
  std::string s = buf;
  while (s.size() > 1 && s.back() == '0' && s[s.size() - 2] != '.') s.pop_back();
  return s;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

struct GroupKey {
  std::string case_id;
  std::string model;
  double temperature;

  bool operator<(const GroupKey& other) const {
    if (case_id != other.case_id) return case_id_less(case_id, other.case_id);
    if (model != other.model) return model < other.model;
    return temperature < other.temperature;
  }
};

struct CaseInfo {
  int loc = 1;
  bool ambiguous = false;
};

// (case, model, temperature) -> aggregate, plus per-case constants.
struct GroupedScores {
  std::map<GroupKey, ConfigAggregate> per_config;
  std::map<std::string, CaseInfo, decltype(&case_id_less)> cases{&case_id_less};
};

GroupedScores group_records(const std::vector<ScoredRecord>& records) {
  std::map<GroupKey, std::vector<OutcomeRecord>> buckets;
  GroupedScores grouped;
  for (const ScoredRecord& record : records) {
    const RunKey& key = record.outcome.key;
    buckets[{key.case_id, key.model, key.temperature}].push_back(record.outcome);
    grouped.cases[key.case_id] = {record.loc, record.ambiguous};
  }
  for (const auto& [key, outcomes] : buckets)
    grouped.per_config.emplace(key, aggregate_outcomes(outcomes));
  return grouped;
}

// (case, model) merged across temperatures, already in row order.
std::vector<std::pair<std::pair<std::string, std::string>, ConfigAggregate>>
merge_by_case_model(const GroupedScores& grouped) {
  std::map<std::pair<std::string, std::string>, std::vector<ConfigAggregate>> pooled;
  for (const auto& [key, agg] : grouped.per_config)
    pooled[{key.case_id, key.model}].push_back(agg);

  std::vector<std::pair<std::pair<std::string, std::string>, ConfigAggregate>> rows;
  rows.reserve(pooled.size());
  for (const auto& [key, parts] : pooled) rows.emplace_back(key, merge_aggregates(parts));
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.first.first != b.first.first) return case_id_less(a.first.first, b.first.first);
    return a.first.second < b.first.second;
  });
  return rows;
}

// ---- renderers ------------------------------------------------------------

std::string render_csv(const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream out;
  for (std::size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << csv_escape(header[i]);
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << csv_escape(row[i]);
    out << "\n";
  }
  return out.str();
}

std::string render_markdown(const std::vector<std::string>& header,
                            const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream out;
  out << "|";
  for (const auto& cell : header) out << " " << cell << " |";
  out << "\n|";
  for (std::size_t i = 0; i < header.size(); ++i) out << " --- |";
  out << "\n";
  for (const auto& row : rows) {
    out << "|";
    for (const auto& cell : row) out << " " << cell << " |";
    out << "\n";
  }
  return out.str();
}

}  // namespace

std::optional<TableKind> table_kind_from_name(std::string_view name) {
  if (name == "accuracy") return TableKind::AccuracyCounts;
  if (name == "recall") return TableKind::RecallPrecision;
  if (name == "line") return TableKind::LineOnly;
  if (name == "best") return TableKind::BestConfig;
  if (name == "fp") return TableKind::FpDistribution;
  return std::nullopt;
}

std::optional<TableFormat> table_format_from_name(std::string_view name) {
  if (name == "csv") return TableFormat::Csv;
  if (name == "markdown" || name == "md") return TableFormat::Markdown;
  if (name == "json") return TableFormat::Json;
  return std::nullopt;
}

std::string emit_table(TableKind kind, const std::vector<ScoredRecord>& records,
                       TableFormat format) {
  if (records.empty())
    throw Error(ErrorCode::EmptyInput, "no scored records to report on");

  GroupedScores grouped = group_records(records);

  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;       // CSV / Markdown cells
  ordered_json json_rows = ordered_json::array();   // full-precision variant

  switch (kind) {
    case TableKind::AccuracyCounts: {
      header = {"case_id", "model", "parsed", "cwe_only", "cwe_superset", "fully_correct"};
      for (const auto& [key, agg] : merge_by_case_model(grouped)) {
        rows.push_back({key.first, key.second, std::to_string(agg.parsed_count),
                        std::to_string(agg.cwe_only_count),
                        std::to_string(agg.cwe_superset_count),
                        std::to_string(agg.fully_correct_count)});
        json_rows.push_back({{"case_id", key.first},
                             {"model", key.second},
                             {"parsed", agg.parsed_count},
                             {"cwe_only", agg.cwe_only_count},
                             {"cwe_superset", agg.cwe_superset_count},
                             {"fully_correct", agg.fully_correct_count}});
      }
      break;
    }
    case TableKind::RecallPrecision: {
      header = {"case_id", "model", "recall", "precision"};
      for (const auto& [key, agg] : merge_by_case_model(grouped)) {
        rows.push_back({key.first, key.second, format_real(agg.recall),
                        format_real(agg.precision)});
        json_rows.push_back({{"case_id", key.first},
                             {"model", key.second},
                             {"recall", agg.recall},
                             {"precision", agg.precision}});
      }
      break;
    }
    case TableKind::LineOnly: {
      header = {"case_id", "model", "line_only", "n_outputs", "loc", "random_baseline",
                "ambiguous"};
      for (const auto& [key, agg] : merge_by_case_model(grouped)) {
        const CaseInfo& info = grouped.cases.at(key.first);
        const double baseline = random_line_baseline(info.loc, agg.n_outputs);
        rows.push_back({key.first, key.second, std::to_string(agg.line_only_count),
                        std::to_string(agg.n_outputs), std::to_string(info.loc),
                        format_real(baseline), info.ambiguous ? "yes" : "no"});
        json_rows.push_back({{"case_id", key.first},
                             {"model", key.second},
                             {"line_only", agg.line_only_count},
                             {"n_outputs", agg.n_outputs},
                             {"loc", info.loc},
                             {"random_baseline", baseline},
                             {"ambiguous", info.ambiguous}});
      }
      break;
    }
    case TableKind::BestConfig: {
      header = {"case_id", "model", "temperature", "recall", "precision", "parse_rate"};
      std::map<std::string, std::vector<ConfigAggregate>, decltype(&case_id_less)> per_case{
          &case_id_less};
      for (const auto& [key, agg] : grouped.per_config) per_case[key.case_id].push_back(agg);
      for (const auto& [case_id, candidates] : per_case) {
        BestConfig best = best_config(candidates);
        if (best.all_zero) {
          // a lone asterisk marks a case where no config scored
          rows.push_back({case_id, "*", "", "", "", ""});
          json_rows.push_back({{"case_id", case_id}, {"all_zero", true}});
          continue;
        }
        rows.push_back({case_id, best.model, format_temperature(best.temperature),
                        format_real(best.recall), format_real(best.precision),
                        format_real(best.parse_rate)});
        json_rows.push_back({{"case_id", case_id},
                             {"all_zero", false},
                             {"model", best.model},
                             {"temperature", best.temperature},
                             {"recall", best.recall},
                             {"precision", best.precision},
                             {"parse_rate", best.parse_rate}});
      }
      break;
    }
    case TableKind::FpDistribution: {
      header = {"case_id", "model", "mode_cwes", "count"};
      for (const auto& [key, agg] : merge_by_case_model(grouped)) {
        auto modes = fp_mode(agg.fp_histogram);
        std::string labels;
        int count = 0;
        ordered_json mode_list = ordered_json::array();
        for (const auto& [cwe, n] : modes) {
          if (!labels.empty()) labels += " ";
          labels += CweId{cwe}.token() + "~" + std::to_string(n) + "x";
          count = n;
          mode_list.push_back({{"cwe", cwe}, {"count", n}});
        }
        if (modes.empty()) labels = "-";
        rows.push_back({key.first, key.second, labels, std::to_string(count)});
        json_rows.push_back(
            {{"case_id", key.first}, {"model", key.second}, {"modes", mode_list}});
      }
      break;
    }
  }

  switch (format) {
    case TableFormat::Csv: return render_csv(header, rows);
    case TableFormat::Markdown: return render_markdown(header, rows);
    case TableFormat::Json: return json_rows.dump(2) + "\n";
  }
  return {};
}

}  // namespace cwebench
