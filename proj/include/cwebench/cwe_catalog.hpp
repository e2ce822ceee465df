#ifndef CWEBENCH_CWE_CATALOG_HPP
#define CWEBENCH_CWE_CATALOG_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cwebench {

// One reference document handed to the retriever (doc_id + full text).
struct RetrievalDoc {
  std::string doc_id;
  std::string text;
};

struct CweId {
  int number = 0;

  std::string token() const { return "CWE-" + std::to_string(number); }

  friend bool operator==(const CweId& a, const CweId& b) { return a.number == b.number; }
  friend bool operator<(const CweId& a, const CweId& b) { return a.number < b.number; }
};

struct CweEntry {
  std::string name;
  std::string description;
};

// Immutable id -> entry map loaded from a directory of per-CWE text files.
class CweCatalog {
 public:
  std::size_t size() const { return entries_.size(); }
  bool contains(int number) const { return entries_.count(number) != 0; }
  const CweEntry* find(int number) const;
  const std::map<int, CweEntry>& entries() const { return entries_; }

  // One document per CWE: token, name, and description concatenated.
  std::vector<RetrievalDoc> retrieval_documents() const;

  void insert(int number, CweEntry entry);  // used by load_catalog and test fixtures

 private:
  std::map<int, CweEntry> entries_;
};

// Reads a directory where each file holds one CWE: line 1 the canonical
// "CWE-<number>" token, line 2 the weakness name, remainder the description.
CweCatalog load_catalog(const std::filesystem::path& dir);

// Strict token recognition: optional surrounding whitespace, case-insensitive
// "cwe-<digits>", nothing else, and the number must exist in the catalog.
std::optional<CweId> parse_cwe_token(std::string_view raw, const CweCatalog& catalog);

}  // namespace cwebench

#endif  // CWEBENCH_CWE_CATALOG_HPP
