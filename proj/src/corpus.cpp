#include "cwebench/corpus.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "cwebench/errors.hpp"

namespace cwebench {

namespace {

using nlohmann::json;

bool is_collapsible_ws(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r';
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// \r\n and bare \r both become \n so downstream line handling sees one style.
std::string normalize_newlines(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] == '\r') {
      out.push_back('\n');
      if (i + 1 < raw.size() && raw[i + 1] == '\n') ++i;
    } else {
      out.push_back(raw[i]);
    }
  }
  return out;
}

std::string trim_trailing_per_line(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t line_start = 0;
  auto flush = [&](std::size_t end, bool newline) {
    std::size_t e = end;
    while (e > line_start && (text[e - 1] == ' ' || text[e - 1] == '\t')) --e;
    out.append(text.substr(line_start, e - line_start));
    if (newline) out.push_back('\n');
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\n') {
      flush(i, true);
      line_start = i + 1;
    }
  }
  flush(text.size(), false);
  return out;
}

std::string drop_blank_lines(std::string_view text) {
  std::string out;
  std::istringstream lines{std::string(text)};
  std::string line;
  while (std::getline(lines, line)) {
    bool blank = true;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) { blank = false; break; }
    if (blank) continue;
    if (!out.empty()) out.push_back('\n');
    out.append(line);
  }
  return out;
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return 0;
  std::size_t count = 0;
  for (std::size_t pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + 1))
    ++count;
  return count;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingSource, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

std::string strip_comments(std::string_view raw, Language language) {
  (void)language;  // C and C++ share the comment grammar handled here
  enum class State { Code, LineComment, BlockComment, String, Char };
  State state = State::Code;
  std::size_t opener = 0;  // byte offset of the current comment/literal opener
  bool escape = false;

  std::string out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    char c = raw[i];
    char next = i + 1 < raw.size() ? raw[i + 1] : '\0';
    switch (state) {
      case State::Code:
        if (c == '/' && next == '/') {
          state = State::LineComment;
          opener = i;
          ++i;
        } else if (c == '/' && next == '*') {
          state = State::BlockComment;
          opener = i;
          ++i;
        } else if (c == '"') {
          state = State::String;
          opener = i;
          escape = false;
          out.push_back(c);
        } else if (c == '\'' && !(i > 0 && is_ident_char(raw[i - 1]))) {
          // the lookbehind keeps digit separators (1'000) out of char-literal mode
          state = State::Char;
          opener = i;
          escape = false;
          out.push_back(c);
        } else {
          out.push_back(c);
        }
        break;
      case State::LineComment:
        if (c == '\n') {
          out.push_back('\n');
          state = State::Code;
        }
        break;
      case State::BlockComment:
        if (c == '*' && next == '/') {
          out.push_back(' ');  // single space so adjacent tokens never glue
          ++i;
          state = State::Code;
        }
        break;
      case State::String:
      case State::Char:
        if (!escape && c == '\n')
          throw Error(ErrorCode::UnterminatedStringLiteral,
                      "literal opened at byte " + std::to_string(opener) +
                          " runs past end of line");
        out.push_back(c);
        if (escape)
          escape = false;
        else if (c == '\\')
          escape = true;
        else if (state == State::String && c == '"')
          state = State::Code;
        else if (state == State::Char && c == '\'')
          state = State::Code;
        break;
    }
  }

  if (state == State::BlockComment)
    throw Error(ErrorCode::UnterminatedBlockComment,
                "comment opened at byte " + std::to_string(opener) + " never closes");
  if (state == State::String || state == State::Char)
    throw Error(ErrorCode::UnterminatedStringLiteral,
                "literal opened at byte " + std::to_string(opener) + " never closes");

  return trim_trailing_per_line(out);
}

std::string normalize_ws(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool in_run = false;
  for (char c : s) {
    if (is_collapsible_ws(c)) {
      in_run = true;
      continue;
    }
    if (in_run && !out.empty()) out.push_back(' ');
    in_run = false;
    out.push_back(c);
  }
  return out;
}

int count_loc(std::string_view source) {
  int loc = 0;
  std::size_t line_start = 0;
  auto scan_line = [&](std::size_t end) {
    for (std::size_t i = line_start; i < end; ++i)
      if (!std::isspace(static_cast<unsigned char>(source[i]))) { ++loc; return; }
  };
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (source[i] == '\n') {
      scan_line(i);
      line_start = i + 1;
    }
  }
  scan_line(source.size());
  if (loc == 0) throw Error(ErrorCode::EmptySource, "no countable lines of code");
  return loc;
}

std::vector<TestCase> load_corpus(const std::filesystem::path& manifest_path,
                                  const CweCatalog& catalog) {
  std::ifstream in(manifest_path);
  if (!in) throw Error(ErrorCode::ManifestParse, "cannot open " + manifest_path.string());

  json manifest = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (manifest.is_discarded() || !manifest.is_array())
    throw Error(ErrorCode::ManifestParse,
                manifest_path.string() + " is not a JSON array of cases");

  const std::filesystem::path base = manifest_path.parent_path();
  std::vector<TestCase> corpus;
  std::set<std::string> seen_ids;

  for (const auto& entry : manifest) {
    auto require_string = [&](const char* field) -> std::string {
      if (!entry.contains(field) || !entry[field].is_string())
        throw Error(ErrorCode::ManifestParse,
                    std::string("case entry missing string field '") + field + "'");
      return entry[field].get<std::string>();
    };

    TestCase tc;
    tc.id = require_string("id");
    if (!seen_ids.insert(tc.id).second)
      throw Error(ErrorCode::ManifestParse, "duplicate case id " + tc.id);

    std::string language = require_string("language");
    if (language == "C")
      tc.language = Language::C;
    else if (language == "C++")
      tc.language = Language::Cpp;
    else
      throw Error(ErrorCode::ManifestParse,
                  "case " + tc.id + ": language must be \"C\" or \"C++\", got \"" +
                      language + "\"");

    std::string cwe_raw = require_string("cwe");
    auto cwe = parse_cwe_token(cwe_raw, catalog);
    if (!cwe)
      throw Error(ErrorCode::InvalidCwe,
                  "case " + tc.id + ": '" + cwe_raw + "' is not a catalog CWE id");
    tc.cwe = *cwe;

    tc.vulnerable_line = normalize_ws(require_string("vulnerable_line"));
    if (tc.vulnerable_line.empty())
      throw Error(ErrorCode::ManifestParse, "case " + tc.id + ": empty vulnerable_line");

    tc.ambiguous_line = entry.value("ambiguous_line", false);

    std::filesystem::path source_path = base / require_string("source_path");
    std::string stripped =
        strip_comments(normalize_newlines(read_file(source_path)), tc.language);
    tc.source = drop_blank_lines(stripped);
    tc.loc = count_loc(tc.source);
    tc.normalized_source = normalize_ws(tc.source);

    std::size_t hits = count_occurrences(tc.normalized_source, tc.vulnerable_line);
    if (hits != 1 && !tc.ambiguous_line)
      throw Error(ErrorCode::NonUniqueVulnerableLine,
                  "case " + tc.id + ": vulnerable line occurs " + std::to_string(hits) +
                      " times (expected exactly 1)");
    if (hits == 0)
      throw Error(ErrorCode::NonUniqueVulnerableLine,
                  "case " + tc.id + ": vulnerable line not found in source");

    corpus.push_back(std::move(tc));
  }
  return corpus;
}

}  // namespace cwebench
