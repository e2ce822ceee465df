#include "cwebench/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <tuple>

#include "json.hpp"

#include "cwebench/errors.hpp"
#include "cwebench/metrics.hpp"

namespace cwebench {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<std::string> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::ofstream open_sink(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

ordered_json key_to_json(const RunKey& key) {
  return {{"model", key.model},
          {"temperature", key.temperature},
          {"rep", key.rep},
          {"case_id", key.case_id}};
}

RunKey key_from_json(const ordered_json& doc) {
  return {doc.at("model").get<std::string>(), doc.at("temperature").get<double>(),
          doc.at("rep").get<int>(), doc.at("case_id").get<std::string>()};
}

ordered_json finding_to_json(const Finding& finding) {
  ordered_json doc = {{"cwe_raw", finding.cwe_raw},
                      {"cwe", nullptr},
                      {"status_raw", finding.status_raw},
                      {"present", finding.present}};
  if (finding.cwe) doc["cwe"] = finding.cwe->number;
  doc["source_code"] = finding.source_code ? ordered_json(*finding.source_code)
                                           : ordered_json(nullptr);
  doc["description"] = finding.description ? ordered_json(*finding.description)
                                           : ordered_json(nullptr);
  return doc;
}

// The resolved CWE and the Present flag are functions of the raw values, so a
// round trip re-derives them instead of trusting the file.
Finding finding_from_json(const ordered_json& doc, const CweCatalog& catalog) {
  Finding finding;
  finding.cwe_raw = doc.at("cwe_raw").get<std::string>();
  finding.cwe = parse_cwe_token(finding.cwe_raw, catalog);
  finding.status_raw = doc.at("status_raw").get<std::string>();
  std::string lowered = finding.status_raw;
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  finding.present = lowered == "present";
  if (doc.contains("source_code") && !doc.at("source_code").is_null())
    finding.source_code = doc.at("source_code").get<std::string>();
  if (doc.contains("description") && !doc.at("description").is_null())
    finding.description = doc.at("description").get<std::string>();
  return finding;
}

ordered_json parse_line(std::string_view line, const char* what) {
  ordered_json doc = ordered_json::parse(line, nullptr, false);
  if (doc.is_discarded() || !doc.is_object())
    throw Error(ErrorCode::Io, std::string("malformed ") + what + " record");
  return doc;
}

}  // namespace

std::string parsed_record_to_json(const ParsedRecord& record) {
  ordered_json doc = key_to_json(record.key);
  doc["stage"] = parse_stage_name(record.stage);
  ordered_json findings = ordered_json::array();
  for (const Finding& finding : record.findings) findings.push_back(finding_to_json(finding));
  doc["findings"] = std::move(findings);
  return doc.dump();
}

ParsedRecord parsed_record_from_json(std::string_view line, const CweCatalog& catalog) {
  ordered_json doc = parse_line(line, "parsed-log");
  try {
    ParsedRecord record;
    record.key = key_from_json(doc);
    auto stage = parse_stage_from_name(doc.at("stage").get<std::string>());
    if (!stage) throw Error(ErrorCode::Io, "unknown parse stage in parsed-log record");
    record.stage = *stage;
    for (const auto& entry : doc.at("findings"))
      record.findings.push_back(finding_from_json(entry, catalog));
    return record;
  } catch (const ordered_json::exception& e) {
    throw Error(ErrorCode::Io, std::string("parsed-log record field error: ") + e.what());
  }
}

std::string scored_record_to_json(const ScoredRecord& record) {
  const OutcomeRecord& outcome = record.outcome;
  ordered_json doc = key_to_json(outcome.key);
  doc["parsed"] = outcome.parsed;
  doc["metric_class"] = static_cast<int>(outcome.metric_class);
  doc["line_only_match"] = outcome.line_only_match;
  doc["present"] = outcome.present;
  doc["confusion"] = {{"tp", outcome.confusion.tp},
                      {"fp", outcome.confusion.fp},
                      {"fn", outcome.confusion.fn},
                      {"tn", outcome.confusion.tn}};
  doc["truth"] = outcome.truth;
  doc["loc"] = record.loc;
  doc["ambiguous"] = record.ambiguous;
  return doc.dump();
}

ScoredRecord scored_record_from_json(std::string_view line) {
  ordered_json doc = parse_line(line, "scored-log");
  try {
    ScoredRecord record;
    record.outcome.key = key_from_json(doc);
    record.outcome.parsed = doc.at("parsed").get<bool>();
    const int metric_class = doc.at("metric_class").get<int>();
    switch (metric_class) {
      case 0: record.outcome.metric_class = MetricClass::None; break;
      case 2: record.outcome.metric_class = MetricClass::CweOnlyWrongLine; break;
      case 3: record.outcome.metric_class = MetricClass::CweWithSuperset; break;
      case 4: record.outcome.metric_class = MetricClass::FullyCorrect; break;
      default: throw Error(ErrorCode::Io, "unknown metric_class in scored-log record");
    }
    record.outcome.line_only_match = doc.at("line_only_match").get<bool>();
    for (const auto& value : doc.at("present"))
      record.outcome.present.insert(value.get<int>());
    const auto& confusion = doc.at("confusion");
    record.outcome.confusion = {confusion.at("tp").get<int>(), confusion.at("fp").get<int>(),
                                confusion.at("fn").get<int>(), confusion.at("tn").get<int>()};
    record.outcome.truth = doc.at("truth").get<int>();
    record.loc = doc.at("loc").get<int>();
    record.ambiguous = doc.at("ambiguous").get<bool>();
    return record;
  } catch (const ordered_json::exception& e) {
    throw Error(ErrorCode::Io, std::string("scored-log record field error: ") + e.what());
  }
}

std::size_t parse_stage_run(const std::filesystem::path& output_log,
                            const std::filesystem::path& parsed_log,
                            const CweCatalog& catalog) {
  std::vector<OutputRecord> outputs = read_output_log(output_log);
  std::ofstream sink = open_sink(parsed_log);
  for (const OutputRecord& output : outputs) {
    ParsedRecord record;
    record.key = output.key();
    if (output.transport_ok) {
      // logs written by run_plan are already sanitized; hand-edited ones
      // may not be, and the parser requires valid UTF-8
      ParseResult result = parse_output(sanitize_utf8(output.raw_text), catalog);
      record.stage = result.stage;
      record.findings = std::move(result.findings);
    }
    sink << parsed_record_to_json(record) << "\n";
    if (!sink) throw Error(ErrorCode::Io, "short write to " + parsed_log.string());
  }
  return outputs.size();
}

std::size_t score_stage_run(const std::filesystem::path& parsed_log,
                            const std::filesystem::path& scored_log,
                            const std::filesystem::path& aggregate_log,
                            const std::vector<TestCase>& corpus, const CweCatalog& catalog) {
  std::map<std::string, const TestCase*> by_id;
  for (const TestCase& test_case : corpus) by_id[test_case.id] = &test_case;

  std::vector<std::string> lines = read_jsonl(parsed_log);
  std::ofstream sink = open_sink(scored_log);

  // aggregation key: case first so the file groups naturally by test case
  std::map<std::tuple<std::string, std::string, std::string>, std::vector<OutcomeRecord>>
      groups;

  std::size_t written = 0;
  for (const std::string& line : lines) {
    ParsedRecord parsed = parsed_record_from_json(line, catalog);
    auto found = by_id.find(parsed.key.case_id);
    if (found == by_id.end())
      throw Error(ErrorCode::Config,
                  "parsed log references unknown case id " + parsed.key.case_id);
    const TestCase& test_case = *found->second;

    ParseResult result{parsed.stage, std::move(parsed.findings)};
    ScoredRecord scored{classify_output(result, parsed.key, test_case, catalog),
                        test_case.loc, test_case.ambiguous_line};
    sink << scored_record_to_json(scored) << "\n";
    if (!sink) throw Error(ErrorCode::Io, "short write to " + scored_log.string());
    ++written;

    groups[{scored.outcome.key.case_id, scored.outcome.key.model,
            format_temperature(scored.outcome.key.temperature)}]
        .push_back(scored.outcome);
  }

  std::ofstream agg_sink = open_sink(aggregate_log);
  for (const auto& [key, outcomes] : groups) {
    ConfigAggregate agg = aggregate_outcomes(outcomes);
    ordered_json histogram = ordered_json::object();
    for (const auto& [cwe, count] : agg.fp_histogram)
      histogram[std::to_string(cwe)] = count;
    ordered_json doc = {{"case_id", agg.case_id},
                        {"model", agg.model},
                        {"temperature", agg.temperature},
                        {"n_outputs", agg.n_outputs},
                        {"parsed", agg.parsed_count},
                        {"cwe_only", agg.cwe_only_count},
                        {"cwe_superset", agg.cwe_superset_count},
                        {"fully_correct", agg.fully_correct_count},
                        {"tp", agg.tp},
                        {"fp", agg.fp},
                        {"fn", agg.fn},
                        {"tn", agg.tn},
                        {"recall", agg.recall},
                        {"precision", agg.precision},
                        {"parse_rate", agg.parse_rate},
                        {"line_only", agg.line_only_count},
                        {"fp_histogram", std::move(histogram)}};
    agg_sink << doc.dump() << "\n";
    if (!agg_sink) throw Error(ErrorCode::Io, "short write to " + aggregate_log.string());
  }
  return written;
}

std::vector<ScoredRecord> read_scored_log(const std::filesystem::path& scored_log) {
  std::vector<ScoredRecord> records;
  for (const std::string& line : read_jsonl(scored_log))
    records.push_back(scored_record_from_json(line));
  return records;
}

std::string report_stage_run(const std::filesystem::path& scored_log, TableKind kind,
                             TableFormat format) {
  return emit_table(kind, read_scored_log(scored_log), format);
}

}  // namespace cwebench
