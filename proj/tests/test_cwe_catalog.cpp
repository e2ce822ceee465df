#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>

#include "cwebench/cwe_catalog.hpp"
#include "cwebench/errors.hpp"

using namespace cwebench;

namespace {

template <typename Fn>
ErrorCode thrown_code(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a cwebench::Error");
  return ErrorCode::Io;  // unreachable
}

struct TempDir {
  std::filesystem::path path;

  TempDir() {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("cwebench_catalog_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }

  void write(const std::string& name, const std::string& content) const {
    std::ofstream out(path / name, std::ios::binary);
    out << content;
  }
};

// Synthetic catalog the size of the real CWE universe used in the accuracy
// formulas; entry 839 exists so tn = 839 - tp - fp - fn can be exercised.
CweCatalog synthetic_catalog(int size) {
  CweCatalog catalog;
  for (int i = 1; i <= size; ++i)
    catalog.insert(i, {"Weakness " + std::to_string(i), "Synthetic description."});
  return catalog;
}

}  // namespace

TEST_CASE("load_catalog reads one entry per file") {
  TempDir dir;
  dir.write("cwe-415.txt", "CWE-415\nDouble Free\nThe product calls free() twice.\n");
  dir.write("cwe-787.txt",
            "CWE-787\nOut-of-bounds Write\nThe product writes data past the end\n"
            "of the intended buffer.\n");
  CweCatalog catalog = load_catalog(dir.path);
  REQUIRE(catalog.size() == 2);
  CHECK(catalog.contains(415));
  CHECK(catalog.contains(787));
  CHECK_FALSE(catalog.contains(416));
  const CweEntry* entry = catalog.find(787);
  REQUIRE(entry != nullptr);
  CHECK(entry->name == "Out-of-bounds Write");
  CHECK(entry->description ==
        "The product writes data past the end\nof the intended buffer.");
  CHECK(catalog.find(999) == nullptr);
}

TEST_CASE("load_catalog rejects duplicates and malformed entries") {
  SUBCASE("same CWE in two files") {
    TempDir dir;
    dir.write("a.txt", "CWE-415\nDouble Free\nText.\n");
    dir.write("b.txt", "CWE-415\nDouble Free Again\nText.\n");
    CHECK(thrown_code([&] { load_catalog(dir.path); }) == ErrorCode::DuplicateCwe);
  }
  SUBCASE("first line is not a canonical token") {
    TempDir dir;
    dir.write("a.txt", "415\nDouble Free\nText.\n");
    CHECK(thrown_code([&] { load_catalog(dir.path); }) == ErrorCode::MalformedEntry);
  }
  SUBCASE("missing name line") {
    TempDir dir;
    dir.write("a.txt", "CWE-415\n");
    CHECK(thrown_code([&] { load_catalog(dir.path); }) == ErrorCode::MalformedEntry);
  }
  SUBCASE("missing directory") {
    CHECK(thrown_code([] { load_catalog("/nonexistent/catalog/dir"); }) == ErrorCode::Io);
  }
}

TEST_CASE("the bundled catalog covers every corpus CWE") {
  CweCatalog catalog = load_catalog(std::filesystem::path(CWEBENCH_DATA_DIR) / "catalog");
  CHECK(catalog.size() == 55);
  for (int number : {476, 79, 463, 20, 121, 329, 787, 489, 416, 134})
    CHECK(catalog.contains(number));
  // retrieval docs mirror the entries one-to-one and embed the token
  std::vector<RetrievalDoc> docs = catalog.retrieval_documents();
  REQUIRE(docs.size() == catalog.size());
  for (const RetrievalDoc& doc : docs) {
    CHECK(doc.text.find(doc.doc_id) != std::string::npos);
    CHECK(doc.doc_id.rfind("CWE-", 0) == 0);
  }
}

TEST_CASE("parse_cwe_token accepts exactly the canonical shapes") {
  CweCatalog catalog = synthetic_catalog(839);

  auto number_of = [&](std::string_view raw) -> int {
    auto id = parse_cwe_token(raw, catalog);
    return id ? id->number : -1;
  };

  CHECK(number_of("CWE-79") == 79);
  CHECK(number_of("cwe-79") == 79);
  CHECK(number_of("CwE-79") == 79);
  CHECK(number_of("  CWE-79  ") == 79);     // surrounding whitespace is fine
  CHECK(number_of("\tcwe-839\n") == 839);

  CHECK(number_of("CWE-79: XSS") == -1);    // trailing text is not
  CHECK(number_of("CWE 79") == -1);
  CHECK(number_of("CWE-") == -1);
  CHECK(number_of("CWE-7a") == -1);
  CHECK(number_of("79") == -1);
  CHECK(number_of("") == -1);
  CHECK(number_of("CWE--79") == -1);
  CHECK(number_of("CWE-99999") == -1);      // well-formed but not in the catalog
}

TEST_CASE("parse_cwe_token never accepts ill-formed tokens regardless of catalog") {
  CweCatalog catalog = synthetic_catalog(10);
  // sweep the whole catalog: membership is necessary, not sufficient
  for (int i = 1; i <= 10; ++i) {
    CHECK(parse_cwe_token("CWE-" + std::to_string(i), catalog).has_value());
    CHECK_FALSE(parse_cwe_token("CWE-" + std::to_string(i) + " ok", catalog).has_value());
  }
}
