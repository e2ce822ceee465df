#ifndef CWEBENCH_SALVAGE_PARSER_HPP
#define CWEBENCH_SALVAGE_PARSER_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cwebench/cwe_catalog.hpp"

namespace cwebench {

// salvage_scan never looks past this many bytes of the output.
inline constexpr std::size_t kSalvageScanLimit = 64 * 1024;

struct Finding {
  std::string cwe_raw;                       // CWE_Number value, verbatim
  std::optional<CweId> cwe;                  // resolved against the catalog
  std::string status_raw;                    // Status value ("" when absent)
  bool present = false;                      // status_raw == "present", case-insensitive
  std::optional<std::string> source_code;    // whitespace-normalized
  std::optional<std::string> description;
};

enum class ParseStage { FencedStrict, Salvaged, Failed };

const char* parse_stage_name(ParseStage stage);
std::optional<ParseStage> parse_stage_from_name(std::string_view name);

struct ParseResult {
  ParseStage stage = ParseStage::Failed;
  std::vector<Finding> findings;
};

// Content between the first pair of ``` markers (lang tag line included);
// nullopt when fewer than two markers exist.
std::optional<std::string> extract_fenced(std::string_view text);

// Drops the first line of the candidate unless it already starts (after
// trimming) with '{' or '['. Handles the markdown identifiers models put
// right after the opening fence ("json", "c++", "json ?", ...).
std::string strip_lang_tag(std::string_view candidate);

// Strict RFC JSON parse. Succeeds iff the document is an object containing a
// key spelled "findings" in any capitalization; the value may have any shape.
// Array entries with a string CWE_Number are lifted into Findings (Status /
// Source_Code / Description keys matched case-insensitively, plus the
// "Description:" trailing-colon variant); malformed entries are skipped.
std::optional<std::vector<Finding>> parse_findings(std::string_view candidate,
                                                   const CweCatalog& catalog);

// Brace-pair trimming search: for each '{' (ascending), try every '}' beyond
// it (descending) until some substring parses. First success wins.
std::optional<std::vector<Finding>> salvage_scan(std::string_view text,
                                                 const CweCatalog& catalog);

// Stage 1 (fenced + lang-tag strip + strict parse), then stage 2 (salvage).
ParseResult parse_output(std::string_view sanitized_text, const CweCatalog& catalog);

}  // namespace cwebench

#endif  // CWEBENCH_SALVAGE_PARSER_HPP
