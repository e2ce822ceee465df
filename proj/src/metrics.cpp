#include "cwebench/metrics.hpp"

#include <algorithm>
#include <cassert>
#include <tuple>

#include "cwebench/errors.hpp"

namespace cwebench {

namespace {

double safe_ratio(long numerator, long denominator) {
  return denominator == 0 ? 0.0 : static_cast<double>(numerator) / denominator;
}

}  // namespace

std::set<int> present_set(const std::vector<Finding>& findings, const CweCatalog& catalog) {
  (void)catalog;  // validity was resolved when the finding was lifted
  std::set<int> present;
  for (const Finding& finding : findings)
    if (finding.present && finding.cwe) present.insert(finding.cwe->number);
  return present;
}

Confusion confusion_counts(const std::set<int>& present, const CweId& truth,
                           const CweCatalog& catalog) {
  Confusion c;
  c.tp = present.count(truth.number) ? 1 : 0;
  c.fp = static_cast<int>(present.size()) - c.tp;
  c.fn = 1 - c.tp;
  c.tn = static_cast<int>(catalog.size()) - c.tp - c.fp - c.fn;
  return c;
}

OutcomeRecord classify_output(const ParseResult& result, const RunKey& key,
                              const TestCase& test_case, const CweCatalog& catalog) {
  OutcomeRecord record;
  record.key = key;
  record.truth = test_case.cwe.number;
  record.parsed = result.stage != ParseStage::Failed;
  if (!record.parsed) return record;

  record.present = present_set(result.findings, catalog);
  record.confusion = confusion_counts(record.present, test_case.cwe, catalog);

  const std::string& line = test_case.vulnerable_line;
  const Finding* correct = nullptr;
  int correct_count = 0;
  for (const Finding& finding : result.findings) {
    if (finding.source_code && *finding.source_code == line) record.line_only_match = true;
    if (finding.present && finding.cwe && finding.cwe->number == test_case.cwe.number) {
      ++correct_count;
      correct = &finding;
    }
  }

  if (correct_count == 1) {  // "uniquely identified": exactly one such finding
    if (!correct->source_code) {
      record.metric_class = MetricClass::CweOnlyWrongLine;
    } else if (*correct->source_code == line) {
      record.metric_class = MetricClass::FullyCorrect;
    } else if (correct->source_code->find(line) != std::string::npos) {
      record.metric_class = MetricClass::CweWithSuperset;
    } else {
      record.metric_class = MetricClass::CweOnlyWrongLine;
    }
  }
  return record;
}

ConfigAggregate aggregate_outcomes(const std::vector<OutcomeRecord>& records) {
  if (records.empty())
    throw Error(ErrorCode::EmptyAggregate, "no outcome records to aggregate");

  ConfigAggregate agg;
  agg.model = records.front().key.model;
  agg.temperature = records.front().key.temperature;
  agg.case_id = records.front().key.case_id;
  agg.n_outputs = static_cast<int>(records.size());

  for (const OutcomeRecord& record : records) {
    assert(record.key.model == agg.model && record.key.case_id == agg.case_id);
    if (record.line_only_match) ++agg.line_only_count;
    if (!record.parsed) continue;
    ++agg.parsed_count;
    switch (record.metric_class) {
      case MetricClass::CweOnlyWrongLine: ++agg.cwe_only_count; break;
      case MetricClass::CweWithSuperset: ++agg.cwe_superset_count; break;
      case MetricClass::FullyCorrect: ++agg.fully_correct_count; break;
      case MetricClass::None: break;
    }
    agg.tp += record.confusion.tp;
    agg.fp += record.confusion.fp;
    agg.fn += record.confusion.fn;
    agg.tn += record.confusion.tn;
    for (int cwe : record.present)
      if (cwe != record.truth) ++agg.fp_histogram[cwe];
  }

  agg.recall = safe_ratio(agg.tp, agg.tp + agg.fn);
  agg.precision = safe_ratio(agg.tp, agg.tp + agg.fp);
  agg.parse_rate = safe_ratio(agg.parsed_count, agg.n_outputs);
  return agg;
}

ConfigAggregate merge_aggregates(const std::vector<ConfigAggregate>& parts) {
  if (parts.empty())
    throw Error(ErrorCode::EmptyAggregate, "no aggregates to merge");

  ConfigAggregate merged;
  merged.model = parts.front().model;
  merged.temperature = parts.front().temperature;
  merged.case_id = parts.front().case_id;
  for (const ConfigAggregate& part : parts) {
    merged.n_outputs += part.n_outputs;
    merged.parsed_count += part.parsed_count;
    merged.cwe_only_count += part.cwe_only_count;
    merged.cwe_superset_count += part.cwe_superset_count;
    merged.fully_correct_count += part.fully_correct_count;
    merged.tp += part.tp;
    merged.fp += part.fp;
    merged.fn += part.fn;
    merged.tn += part.tn;
    merged.line_only_count += part.line_only_count;
    for (const auto& [cwe, count] : part.fp_histogram) merged.fp_histogram[cwe] += count;
  }
  merged.recall = safe_ratio(merged.tp, merged.tp + merged.fn);
  merged.precision = safe_ratio(merged.tp, merged.tp + merged.fp);
  merged.parse_rate = safe_ratio(merged.parsed_count, merged.n_outputs);
  return merged;
}

BestConfig best_config(const std::vector<ConfigAggregate>& candidates) {
  if (candidates.empty())
    throw Error(ErrorCode::EmptyAggregate, "no candidate configurations");

  const ConfigAggregate* best = nullptr;
  auto mean = [](const ConfigAggregate& agg) { return (agg.recall + agg.precision) / 2.0; };
  for (const ConfigAggregate& candidate : candidates) {
    if (best == nullptr) {
      best = &candidate;
      continue;
    }
    double a = mean(candidate), b = mean(*best);
    if (a != b) {
      if (a > b) best = &candidate;
    } else if (candidate.parse_rate != best->parse_rate) {
      if (candidate.parse_rate > best->parse_rate) best = &candidate;
    } else if (std::tie(candidate.model, candidate.temperature) <
               std::tie(best->model, best->temperature)) {
      best = &candidate;
    }
  }

  BestConfig result;
  if (mean(*best) == 0.0) {
    result.all_zero = true;
    return result;
  }
  result.model = best->model;
  result.temperature = best->temperature;
  result.recall = best->recall;
  result.precision = best->precision;
  result.parse_rate = best->parse_rate;
  return result;
}

std::vector<std::pair<int, int>> fp_mode(const std::map<int, int>& histogram) {
  std::vector<std::pair<int, int>> modes;
  int max_count = 0;
  for (const auto& [cwe, count] : histogram) max_count = std::max(max_count, count);
  if (max_count == 0) return modes;
  for (const auto& [cwe, count] : histogram)  // std::map iterates ascending by CWE
    if (count == max_count) modes.emplace_back(cwe, count);
  return modes;
}

double random_line_baseline(int loc, int n_outputs) {
  if (loc < 1) throw Error(ErrorCode::EmptyInput, "loc must be >= 1");
  if (n_outputs < 0) throw Error(ErrorCode::EmptyInput, "n_outputs must be >= 0");
  return static_cast<double>(n_outputs) / loc;
}

}  // namespace cwebench
