#include "cwebench/cwe_catalog.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "cwebench/errors.hpp"

namespace cwebench {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Canonical form only: "CWE-" followed by digits, nothing else.
std::optional<int> canonical_token_number(std::string_view token) {
  if (token.size() < 5 || token.substr(0, 4) != "CWE-") return std::nullopt;
  std::string_view digits = token.substr(4);
  int number = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), number);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) return std::nullopt;
  return number;
}

}  // namespace

const CweEntry* CweCatalog::find(int number) const {
  auto it = entries_.find(number);
  return it == entries_.end() ? nullptr : &it->second;
}

void CweCatalog::insert(int number, CweEntry entry) {
  entries_[number] = std::move(entry);
}

std::vector<RetrievalDoc> CweCatalog::retrieval_documents() const {
  std::vector<RetrievalDoc> docs;
  docs.reserve(entries_.size());
  for (const auto& [number, entry] : entries_) {
    CweId id{number};
    docs.push_back({id.token(),
                    id.token() + "\n" + entry.name + "\n" + entry.description});
  }
  return docs;
}

CweCatalog load_catalog(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw Error(ErrorCode::Io, "catalog directory not found: " + dir.string());

  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().filename().string().starts_with(".")) continue;
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  CweCatalog catalog;
  for (const auto& file : files) {
    std::string text = read_file(file);
    std::istringstream lines(text);
    std::string token_line, name_line;
    if (!std::getline(lines, token_line))
      throw Error(ErrorCode::MalformedEntry, "empty catalog file " + file.string());
    auto number = canonical_token_number(trim(token_line));
    if (!number)
      throw Error(ErrorCode::MalformedEntry,
                  "bad token '" + trim(token_line) + "' in " + file.string());
    if (!std::getline(lines, name_line) || trim(name_line).empty())
      throw Error(ErrorCode::MalformedEntry, "missing weakness name in " + file.string());
    std::string description;
    std::string line;
    while (std::getline(lines, line)) {
      if (!description.empty()) description += "\n";
      description += line;
    }
    if (catalog.contains(*number))
      throw Error(ErrorCode::DuplicateCwe,
                  "CWE-" + std::to_string(*number) + " defined twice (" + file.string() + ")");
    catalog.insert(*number, CweEntry{trim(name_line), trim(description)});
  }
  return catalog;
}

std::optional<CweId> parse_cwe_token(std::string_view raw, const CweCatalog& catalog) {
  std::string token = trim(raw);
  if (token.size() < 5) return std::nullopt;

  static constexpr std::string_view kPrefix = "cwe-";
  for (std::size_t i = 0; i < kPrefix.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(token[i])) != kPrefix[i]) return std::nullopt;

  std::string_view digits = std::string_view(token).substr(kPrefix.size());
  if (digits.empty() ||
      !std::all_of(digits.begin(), digits.end(),
                   [](unsigned char c) { return std::isdigit(c); }))
    return std::nullopt;

  int number = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), number);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) return std::nullopt;
  if (!catalog.contains(number)) return std::nullopt;
  return CweId{number};
}

}  // namespace cwebench
