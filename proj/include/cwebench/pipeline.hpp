#ifndef CWEBENCH_PIPELINE_HPP
#define CWEBENCH_PIPELINE_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "cwebench/backend.hpp"
#include "cwebench/reporting.hpp"
#include "cwebench/salvage_parser.hpp"

namespace cwebench {

// File-level stages shared by the CLI and the tests. Each stage reads and
// writes line-delimited JSON and preserves input record order, so a given
// output log always produces byte-identical downstream artifacts.

struct ParsedRecord {
  RunKey key;
  ParseStage stage = ParseStage::Failed;
  std::vector<Finding> findings;
};

std::string parsed_record_to_json(const ParsedRecord& record);
ParsedRecord parsed_record_from_json(std::string_view line, const CweCatalog& catalog);

std::string scored_record_to_json(const ScoredRecord& record);
ScoredRecord scored_record_from_json(std::string_view line);

// output log -> parsed log (one record per output, run keys carried through).
std::size_t parse_stage_run(const std::filesystem::path& output_log,
                            const std::filesystem::path& parsed_log,
                            const CweCatalog& catalog);

// parsed log -> scored log + per-(model, temperature, case) aggregate file.
std::size_t score_stage_run(const std::filesystem::path& parsed_log,
                            const std::filesystem::path& scored_log,
                            const std::filesystem::path& aggregate_log,
                            const std::vector<TestCase>& corpus, const CweCatalog& catalog);

std::vector<ScoredRecord> read_scored_log(const std::filesystem::path& scored_log);

std::string report_stage_run(const std::filesystem::path& scored_log, TableKind kind,
                             TableFormat format);

}  // namespace cwebench

#endif  // CWEBENCH_PIPELINE_HPP
