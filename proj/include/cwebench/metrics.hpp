#ifndef CWEBENCH_METRICS_HPP
#define CWEBENCH_METRICS_HPP

#include <map>
#include <set>
#include <string>
#include <vector>

#include "cwebench/backend.hpp"
#include "cwebench/corpus.hpp"
#include "cwebench/salvage_parser.hpp"

namespace cwebench {

// The four disjoint per-output accuracy classes. Parsed is tracked separately
// (an output can be parsed yet fall in none of the other three).
enum class MetricClass {
  None = 0,
  CweOnlyWrongLine = 2,   // unique correct CWE, quoted line matches nothing
  CweWithSuperset = 3,    // unique correct CWE, quoted syntax strictly contains the line
  FullyCorrect = 4,       // unique correct CWE and exact quoted line
};

struct Confusion {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  int tn = 0;
};

struct OutcomeRecord {
  RunKey key;
  bool parsed = false;
  MetricClass metric_class = MetricClass::None;
  bool line_only_match = false;  // any finding quotes the vulnerable line exactly
  std::set<int> present;         // deduplicated valid CWEs with Status Present
  Confusion confusion;           // zeros when not parsed
  int truth = 0;                 // ground-truth CWE number for the case
};

// Deduplicated set of catalog-valid CWE numbers whose Status is Present.
std::set<int> present_set(const std::vector<Finding>& findings, const CweCatalog& catalog);

// One-vs-rest confusion against the single ground-truth CWE;
// tp + fp + fn + tn always equals catalog.size().
Confusion confusion_counts(const std::set<int>& present, const CweId& truth,
                           const CweCatalog& catalog);

OutcomeRecord classify_output(const ParseResult& result, const RunKey& key,
                              const TestCase& test_case, const CweCatalog& catalog);

struct ConfigAggregate {
  std::string model;
  double temperature = 0.0;
  std::string case_id;
  int n_outputs = 0;
  int parsed_count = 0;        // metric 1
  int cwe_only_count = 0;      // metric 2
  int cwe_superset_count = 0;  // metric 3
  int fully_correct_count = 0; // metric 4
  long tp = 0, fp = 0, fn = 0, tn = 0;  // summed over parsed outputs
  double recall = 0.0;     // micro-averaged; 0 when the denominator is 0
  double precision = 0.0;
  double parse_rate = 0.0;
  int line_only_count = 0;
  std::map<int, int> fp_histogram;  // wrong present CWE -> occurrence count
};

// Folds records that share (model, temperature, case) into one aggregate.
ConfigAggregate aggregate_outcomes(const std::vector<OutcomeRecord>& records);

// Pools several aggregates of one case (e.g. across temperatures) into one.
ConfigAggregate merge_aggregates(const std::vector<ConfigAggregate>& parts);

struct BestConfig {
  bool all_zero = false;  // every candidate scored 0; nothing to report
  std::string model;
  double temperature = 0.0;
  double recall = 0.0;
  double precision = 0.0;
  double parse_rate = 0.0;
};

// Highest (recall+precision)/2; ties broken by higher parse rate, then by
// ascending (model, temperature).
BestConfig best_config(const std::vector<ConfigAggregate>& candidates);

// All CWEs achieving the histogram's maximum count, ascending by number.
std::vector<std::pair<int, int>> fp_mode(const std::map<int, int>& histogram);

// Expected number of exact hits if a line were drawn uniformly per output.
double random_line_baseline(int loc, int n_outputs);

}  // namespace cwebench

#endif  // CWEBENCH_METRICS_HPP
