#ifndef CWEBENCH_CORPUS_HPP
#define CWEBENCH_CORPUS_HPP

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cwebench/cwe_catalog.hpp"

namespace cwebench {

enum class Language { C, Cpp };

struct TestCase {
  std::string id;
  CweId cwe;
  Language language = Language::C;
  // Comment-stripped source with original line breaks kept and whitespace-only
  // lines dropped; this is both the prompt view and the view count_loc counts.
  std::string source;
  std::string normalized_source;  // normalize_ws(source), used for matching
  std::string vulnerable_line;    // normalized syntax string
  int loc = 0;
  bool ambiguous_line = false;
};

// Removes // and /* */ comments while preserving string/char literal contents
// and the line structure of non-comment code. Block comments become a single
// space; trailing whitespace is trimmed from each line.
std::string strip_comments(std::string_view raw, Language language);

// Collapses every run of space/tab/newline/CR to a single space and trims.
std::string normalize_ws(std::string_view s);

// Number of lines containing at least one non-whitespace character.
int count_loc(std::string_view source);

// Loads manifest.json (array of {id, cwe, language, vulnerable_line,
// source_path[, ambiguous_line]}) plus the referenced source files, applying
// comment stripping, LOC counting, and label-uniqueness validation.
std::vector<TestCase> load_corpus(const std::filesystem::path& manifest_path,
                                  const CweCatalog& catalog);

}  // namespace cwebench

#endif  // CWEBENCH_CORPUS_HPP
