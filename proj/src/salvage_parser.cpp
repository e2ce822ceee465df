#include "cwebench/salvage_parser.hpp"

#include <algorithm>
#include <cctype>

#include "json.hpp"

#include "cwebench/corpus.hpp"

namespace cwebench {

namespace {

using nlohmann::json;

constexpr std::string_view kFence = "```";
constexpr std::string_view kFindingsKey = "findings";

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool ci_equals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  return true;
}

std::string_view trim_view(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

const json* find_ci(const json& object, std::string_view wanted) {
  for (auto it = object.begin(); it != object.end(); ++it)
    if (ci_equals(it.key(), wanted)) return &it.value();
  return nullptr;
}

// An entry is usable when it is an object with a string CWE_Number. Status is
// optional (absent means not Present); Source_Code/Description must be strings
// to be kept. The "Description:" spelling mirrors the typo in the prompt's
// JSON example, so models reproduce it verbatim often enough to matter.
std::optional<Finding> lift_entry(const json& entry, const CweCatalog& catalog) {
  if (!entry.is_object()) return std::nullopt;

  const json* cwe_value = find_ci(entry, "cwe_number");
  if (cwe_value == nullptr || !cwe_value->is_string()) return std::nullopt;

  Finding finding;
  finding.cwe_raw = cwe_value->get<std::string>();
  finding.cwe = parse_cwe_token(finding.cwe_raw, catalog);

  if (const json* status = find_ci(entry, "status"); status != nullptr && status->is_string())
    finding.status_raw = status->get<std::string>();
  finding.present = ci_equals(finding.status_raw, "present");

  if (const json* code = find_ci(entry, "source_code"); code != nullptr && code->is_string())
    finding.source_code = normalize_ws(code->get<std::string>());

  const json* description = find_ci(entry, "description");
  if (description == nullptr) description = find_ci(entry, "description:");
  if (description != nullptr && description->is_string())
    finding.description = description->get<std::string>();

  return finding;
}

}  // namespace

const char* parse_stage_name(ParseStage stage) {
  switch (stage) {
    case ParseStage::FencedStrict: return "fenced_strict";
    case ParseStage::Salvaged: return "salvaged";
    case ParseStage::Failed: return "failed";
  }
  return "failed";
}

std::optional<ParseStage> parse_stage_from_name(std::string_view name) {
  if (name == "fenced_strict") return ParseStage::FencedStrict;
  if (name == "salvaged") return ParseStage::Salvaged;
  if (name == "failed") return ParseStage::Failed;
  return std::nullopt;
}

std::optional<std::string> extract_fenced(std::string_view text) {
  std::size_t open = text.find(kFence);
  if (open == std::string_view::npos) return std::nullopt;
  std::size_t close = text.find(kFence, open + kFence.size());
  if (close == std::string_view::npos) return std::nullopt;
  std::size_t begin = open + kFence.size();
  return std::string(text.substr(begin, close - begin));
}

std::string strip_lang_tag(std::string_view candidate) {
  std::size_t newline = candidate.find('\n');
  std::string_view first_line =
      newline == std::string_view::npos ? candidate : candidate.substr(0, newline);
  std::string_view trimmed = trim_view(first_line);
  if (!trimmed.empty() && (trimmed.front() == '{' || trimmed.front() == '['))
    return std::string(candidate);
  if (newline == std::string_view::npos) return std::string();
  return std::string(candidate.substr(newline + 1));
}

std::optional<std::vector<Finding>> parse_findings(std::string_view candidate,
                                                   const CweCatalog& catalog) {
  json doc = json::parse(candidate, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) return std::nullopt;

  const json* findings_value = find_ci(doc, kFindingsKey);
  if (findings_value == nullptr) return std::nullopt;

  std::vector<Finding> findings;
  if (findings_value->is_array()) {
    for (const auto& entry : *findings_value)
      if (auto finding = lift_entry(entry, catalog)) findings.push_back(std::move(*finding));
  }
  // any other value shape still counts as a successful (empty) parse
  return findings;
}

std::optional<std::vector<Finding>> salvage_scan(std::string_view text,
                                                 const CweCatalog& catalog) {
  std::string_view view = text.substr(0, std::min(text.size(), kSalvageScanLimit));
  const std::string lower = ascii_lower(view);

  // parse_findings can only succeed when the findings key appears literally,
  // so candidates without it are skipped without a JSON parse attempt.
  std::vector<std::size_t> key_positions;
  for (std::size_t pos = lower.find(kFindingsKey); pos != std::string::npos;
       pos = lower.find(kFindingsKey, pos + 1))
    key_positions.push_back(pos);
  if (key_positions.empty()) return std::nullopt;

  std::vector<std::size_t> closers;
  for (std::size_t i = 0; i < view.size(); ++i)
    if (view[i] == '}') closers.push_back(i);
  if (closers.empty()) return std::nullopt;

  for (std::size_t open = 0; open < view.size(); ++open) {
    if (view[open] != '{') continue;
    auto key_it = std::lower_bound(key_positions.begin(), key_positions.end(), open);
    if (key_it == key_positions.end()) break;  // no findings key anywhere to the right
    const std::size_t key_end = *key_it + kFindingsKey.size() - 1;
    for (auto close_it = closers.rbegin(); close_it != closers.rend(); ++close_it) {
      std::size_t close = *close_it;
      if (close < key_end) break;  // candidate can no longer contain the key
      if (close <= open) break;
      auto findings = parse_findings(view.substr(open, close - open + 1), catalog);
      if (findings) return findings;
    }
  }
  return std::nullopt;
}

ParseResult parse_output(std::string_view sanitized_text, const CweCatalog& catalog) {
  if (auto fenced = extract_fenced(sanitized_text)) {
    if (auto findings = parse_findings(strip_lang_tag(*fenced), catalog))
      return {ParseStage::FencedStrict, std::move(*findings)};
  }
  if (auto findings = salvage_scan(sanitized_text, catalog))
    return {ParseStage::Salvaged, std::move(*findings)};
  return {ParseStage::Failed, {}};
}

}  // namespace cwebench
