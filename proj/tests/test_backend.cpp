#include "doctest.h"

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <unistd.h>
#include <vector>

#include "httplib.h"
#include "json.hpp"

#include "cwebench/backend.hpp"
#include "cwebench/errors.hpp"
#include "cwebench/prompting.hpp"

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
           ("cwebench_backend_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

// Reference UTF-8 well-formedness check, written from the Unicode range table
// rather than the arithmetic the production sanitizer uses.
bool reference_valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const unsigned char b = static_cast<unsigned char>(s[i]);
    if (b <= 0x7F) {
      ++i;
      continue;
    }
    std::size_t need;  // continuation bytes, with the table's first-byte ranges
    unsigned char lo1 = 0x80, hi1 = 0xBF;
    if (b >= 0xC2 && b <= 0xDF) need = 1;
    else if (b == 0xE0) { need = 2; lo1 = 0xA0; }
    else if ((b >= 0xE1 && b <= 0xEC) || b == 0xEE || b == 0xEF) need = 2;
    else if (b == 0xED) { need = 2; hi1 = 0x9F; }
    else if (b == 0xF0) { need = 3; lo1 = 0x90; }
    else if (b >= 0xF1 && b <= 0xF3) need = 3;
    else if (b == 0xF4) { need = 3; hi1 = 0x8F; }
    else return false;  // C0/C1, F5..FF, or a stray continuation byte
    if (i + need >= s.size()) return false;  // truncated sequence
    const unsigned char c1 = static_cast<unsigned char>(s[i + 1]);
    if (c1 < lo1 || c1 > hi1) return false;
    for (std::size_t k = 2; k <= need; ++k) {
      const unsigned char ck = static_cast<unsigned char>(s[i + k]);
      if (ck < 0x80 || ck > 0xBF) return false;
    }
    i += need + 1;
  }
  return true;
}

std::string encode_code_point(unsigned cp) {
  std::string out;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
  return out;
}

TestCase toy_case(const std::string& id) {
  TestCase tc;
  tc.id = id;
  tc.cwe = CweId{121};
  tc.source = "int main() { return 0; }";
  tc.normalized_source = tc.source;
  tc.vulnerable_line = "return 0;";
  tc.loc = 1;
  return tc;
}

Prompt toy_prompt(const TestCase& tc) {
  Prompt p;
  p.system = "SYS";
  p.user = "analyze " + tc.id;
  p.rendered = p.system + "\n\n" + p.user;
  return p;
}

struct ScriptedBackend : CompletionBackend {
  std::function<Completion(const RunKey&)> script;
  std::atomic<int> calls{0};

  Completion complete(const RunKey& key, const Prompt&) override {
    ++calls;
    return script(key);
  }
};

}  // namespace

TEST_CASE("format_temperature renders canonical decimal tokens") {
  CHECK(format_temperature(0.1) == "0.1");
  CHECK(format_temperature(0.25) == "0.25");
  CHECK(format_temperature(0.5) == "0.5");
  CHECK(format_temperature(1.0) == "1");
  CHECK(format_temperature(0.125) == "0.125");
  // the full default sweep stays distinct
  std::set<std::string> tokens;
  for (int i = 1; i <= 10; ++i) tokens.insert(format_temperature(i / 10.0));
  CHECK(tokens.size() == 10);
}

TEST_CASE("run keys separate their fields unambiguously") {
  RunKey a{"m", 0.1, 1, "c"};
  RunKey b{"m", 0.1, 11, "c"};
  RunKey c{"m", 0.11, 1, "c"};
  RunKey d{"m2", 0.1, 1, "c"};
  std::set<std::string> tokens = {a.token(), b.token(), c.token(), d.token()};
  CHECK(tokens.size() == 4);
  CHECK(a == RunKey{"m", 0.1, 1, "c"});
  CHECK(a.token().find('\x1f') != std::string::npos);
}

TEST_CASE("output records serialize with a fixed field order") {
  OutputRecord record{"M", 0.5, 1, "42", "hi", true, 7};
  CHECK(output_record_to_json(record) ==
        R"({"model":"M","temperature":0.5,"rep":1,"case_id":"42","raw_text":"hi","transport_ok":true,"elapsed_ms":7})");

  OutputRecord parsed = output_record_from_json(output_record_to_json(record));
  CHECK(parsed.model == "M");
  CHECK(parsed.temperature == 0.5);
  CHECK(parsed.rep == 1);
  CHECK(parsed.case_id == "42");
  CHECK(parsed.raw_text == "hi");
  CHECK(parsed.transport_ok);
  CHECK(parsed.elapsed_ms == 7);
  CHECK(parsed.key().token() == record.key().token());

  CHECK(thrown_code([] { output_record_from_json("not json"); }) == ErrorCode::Io);
  CHECK(thrown_code([] { output_record_from_json(R"({"model": "M"})"); }) == ErrorCode::Io);
  CHECK(thrown_code([] { read_output_log("/nonexistent/file.jsonl"); }) == ErrorCode::Io);
}

TEST_CASE("sanitize_utf8 keeps valid text and drops malformed bytes") {
  CHECK(sanitize_utf8("plain ascii") == "plain ascii");
  CHECK(sanitize_utf8("caf\xC3\xA9") == "caf\xC3\xA9");            // é
  CHECK(sanitize_utf8("\xE2\x82\xAC") == "\xE2\x82\xAC");          // €
  CHECK(sanitize_utf8("\xF0\x9F\x98\x80") == "\xF0\x9F\x98\x80");  // emoji
  CHECK(sanitize_utf8("\xF4\x8F\xBF\xBF") == "\xF4\x8F\xBF\xBF");  // U+10FFFF

  CHECK(sanitize_utf8("a\x80z") == "az");              // stray continuation
  CHECK(sanitize_utf8("a\xC3z") == "az");              // truncated two-byte
  CHECK(sanitize_utf8("a\xC0\x80z") == "az");          // overlong NUL
  CHECK(sanitize_utf8("a\xE0\x80\xAFz") == "az");      // overlong slash
  CHECK(sanitize_utf8("a\xED\xA0\x80z") == "az");      // UTF-16 surrogate
  CHECK(sanitize_utf8("a\xF4\x90\x80\x80z") == "az");  // past U+10FFFF
  CHECK(sanitize_utf8("a\xFF\xFEz") == "az");          // invalid lead bytes
  CHECK(sanitize_utf8("tail\xE2\x82") == "tail");      // truncated at end
  CHECK(sanitize_utf8("") == "");
}

TEST_CASE("sanitize_utf8 output is always well-formed and idempotent") {
  std::mt19937 rng(97531);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<int> len(0, 64);
  for (int trial = 0; trial < 2000; ++trial) {
    std::string noise;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) noise.push_back(static_cast<char>(byte(rng)));

    const std::string cleaned = sanitize_utf8(noise);
    CHECK(reference_valid_utf8(cleaned));
    CHECK(sanitize_utf8(cleaned) == cleaned);
    // ASCII survives exactly: it can never be part of a multi-byte sequence
    const auto ascii_count = [](std::string_view s) {
      std::size_t c = 0;
      for (char ch : s)
        if (static_cast<unsigned char>(ch) < 0x80) ++c;
      return c;
    };
    CHECK(ascii_count(cleaned) == ascii_count(noise));
  }
}

TEST_CASE("sanitize_utf8 passes randomly generated valid text through") {
  std::mt19937 rng(13579);
  std::uniform_int_distribution<unsigned> pick(0, 0x10FFFF);
  std::uniform_int_distribution<int> len(0, 40);
  for (int trial = 0; trial < 500; ++trial) {
    std::string text;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) {
      unsigned cp = pick(rng);
      if (cp >= 0xD800 && cp <= 0xDFFF) cp = 0x20;  // skip surrogates
      text += encode_code_point(cp);
    }
    CHECK(sanitize_utf8(text) == text);
    CHECK(reference_valid_utf8(text));
  }
}

TEST_CASE("ReplayBackend serves recorded completions by run key") {
  TempDir dir;
  const auto log = dir.path / "log.jsonl";
  {
    std::ofstream out(log);
    out << output_record_to_json({"M", 0.5, 1, "42", "stored text", true, 321}) << "\n";
    out << output_record_to_json({"M", 0.5, 2, "42", "", false, 0}) << "\n";
  }
  ReplayBackend backend(log);
  CHECK(backend.size() == 2);
  CHECK(backend.is_replay());

  Prompt prompt;
  Completion got = backend.complete({"M", 0.5, 1, "42"}, prompt);
  CHECK(got.text == "stored text");
  CHECK(got.elapsed_ms == 321);

  // a recorded transport failure replays as a transport failure
  CHECK(thrown_code([&] { backend.complete({"M", 0.5, 2, "42"}, prompt); }) ==
        ErrorCode::Transport);
  // absent key
  CHECK(thrown_code([&] { backend.complete({"M", 0.5, 3, "42"}, prompt); }) ==
        ErrorCode::ReplayMiss);
  CHECK(thrown_code([&] { backend.complete({"M", 0.8, 1, "42"}, prompt); }) ==
        ErrorCode::ReplayMiss);
}

TEST_CASE("run_plan executes the grid and resumes from an existing log") {
  TempDir dir;
  const auto log = dir.path / "outputs.jsonl";
  std::vector<TestCase> corpus = {toy_case("42")};
  SamplingPlan plan;
  plan.model = "M";
  plan.temperatures = {0.5, 0.8};
  plan.repetitions = 5;

  // pre-seed four of the ten grid cells
  {
    std::ofstream out(log);
    for (int rep = 1; rep <= 4; ++rep)
      out << output_record_to_json({"M", 0.5, rep, "42", "old", true, 1}) << "\n";
  }

  ScriptedBackend backend;
  backend.script = [](const RunKey& key) {
    return Completion{"reply for rep " + std::to_string(key.rep), 5};
  };
  RunSummary summary = run_plan(corpus, plan, backend, toy_prompt, log, 3);
  CHECK(summary.completed == 6);
  CHECK(summary.skipped_existing == 4);
  CHECK(summary.transport_failures == 0);
  CHECK(backend.calls.load() == 6);

  // the log now covers the whole grid exactly once
  std::vector<OutputRecord> records = read_output_log(log);
  REQUIRE(records.size() == 10);
  std::set<std::string> tokens;
  for (const OutputRecord& record : records) tokens.insert(record.key().token());
  CHECK(tokens.size() == 10);

  // running again is a no-op
  RunSummary again = run_plan(corpus, plan, backend, toy_prompt, log, 3);
  CHECK(again.completed == 0);
  CHECK(again.skipped_existing == 10);
  CHECK(backend.calls.load() == 6);
}

TEST_CASE("run_plan creates the log's parent directories") {
  TempDir dir;
  const auto log = dir.path / "nested" / "runs" / "outputs.jsonl";
  std::vector<TestCase> corpus = {toy_case("42")};
  SamplingPlan plan;
  plan.model = "M";
  plan.temperatures = {0.5};
  plan.repetitions = 2;

  ScriptedBackend backend;
  backend.script = [](const RunKey&) { return Completion{"ok", 1}; };
  RunSummary summary = run_plan(corpus, plan, backend, toy_prompt, log, 1);
  CHECK(summary.completed == 2);
  CHECK(read_output_log(log).size() == 2);
}

TEST_CASE("run_plan records transport failures and keeps going") {
  TempDir dir;
  const auto log = dir.path / "outputs.jsonl";
  std::vector<TestCase> corpus = {toy_case("42")};
  SamplingPlan plan;
  plan.model = "M";
  plan.temperatures = {0.5};
  plan.repetitions = 6;

  ScriptedBackend backend;
  backend.script = [](const RunKey& key) -> Completion {
    if (key.rep == 3) throw Error(ErrorCode::Transport, "scripted failure");
    if (key.rep == 4) throw std::runtime_error("non-library failure");
    return {"ok \xC0\x80 text", 2};  // invalid bytes must get scrubbed
  };
  RunSummary summary = run_plan(corpus, plan, backend, toy_prompt, log, 2);
  CHECK(summary.completed == 4);
  CHECK(summary.transport_failures == 2);

  int failures = 0;
  for (const OutputRecord& record : read_output_log(log)) {
    if (!record.transport_ok) {
      ++failures;
      CHECK(record.raw_text.empty());
    } else {
      CHECK(record.raw_text == "ok  text");
    }
  }
  CHECK(failures == 2);
}

TEST_CASE("run_plan validates the plan against the corpus") {
  TempDir dir;
  const auto log = dir.path / "outputs.jsonl";
  std::vector<TestCase> corpus = {toy_case("42")};
  ScriptedBackend backend;
  backend.script = [](const RunKey&) { return Completion{"x", 1}; };

  SamplingPlan plan;
  plan.model = "M";
  plan.temperatures = {0.5};
  plan.repetitions = 1;
  plan.case_ids = {"не существует"};
  CHECK(thrown_code([&] { run_plan(corpus, plan, backend, toy_prompt, log); }) ==
        ErrorCode::Config);

  plan.case_ids = {"42"};
  plan.repetitions = 0;
  CHECK(thrown_code([&] { run_plan(corpus, plan, backend, toy_prompt, log); }) ==
        ErrorCode::Config);

  plan.repetitions = 1;
  plan.temperatures = {0.0};
  CHECK(thrown_code([&] { run_plan(corpus, plan, backend, toy_prompt, log); }) ==
        ErrorCode::Config);

  plan.temperatures = {};
  CHECK(thrown_code([&] { run_plan(corpus, plan, backend, toy_prompt, log); }) ==
        ErrorCode::Config);

  plan.temperatures = {0.5};
  plan.model = "";
  CHECK(thrown_code([&] { run_plan(corpus, plan, backend, toy_prompt, log); }) ==
        ErrorCode::Config);
}

TEST_CASE("HttpBackend speaks the chat-completions protocol") {
  httplib::Server server;
  std::atomic<int> hits{0};
  std::string seen_auth;
  std::string seen_body;

  server.Post("/v1/chat/completions", [&](const httplib::Request& req,
                                          httplib::Response& res) {
    ++hits;
    seen_auth = req.get_header_value("Authorization");
    seen_body = req.body;
    nlohmann::json reply = {
        {"choices",
         nlohmann::json::array(
             {{{"message", {{"role", "assistant"}, {"content", "the answer"}}}}})}};
    res.set_content(reply.dump(), "application/json");
  });

  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  HttpBackendConfig config;
  config.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  config.api_key = "sk-test";
  config.max_attempts = 2;
  config.initial_backoff_ms = 10;
  config.timeout_sec = 5;
  config.max_tokens = 512;
  HttpBackend backend(config);

  TestCase tc = toy_case("42");
  Prompt prompt;
  prompt.system = "SYS";
  prompt.context = "CTX";
  prompt.user = "USER";
  prompt.rendered = "SYS\n\nCTX\n\nUSER";

  Completion got = backend.complete({"modelA", 0.3, 1, "42"}, prompt);
  CHECK(got.text == "the answer");
  CHECK(got.elapsed_ms >= 0);
  CHECK(hits.load() == 1);
  CHECK(seen_auth == "Bearer sk-test");

  nlohmann::json body = nlohmann::json::parse(seen_body);
  CHECK(body["model"] == "modelA");
  CHECK(body["temperature"] == 0.3);
  CHECK(body["max_tokens"] == 512);
  REQUIRE(body["messages"].size() == 2);
  CHECK(body["messages"][0]["role"] == "system");
  CHECK(body["messages"][0]["content"] == "SYS");
  CHECK(body["messages"][1]["role"] == "user");
  CHECK(body["messages"][1]["content"] == "CTX\n\nUSER");

  server.stop();
  server_thread.join();
}

TEST_CASE("HttpBackend retries retryable statuses and gives up cleanly") {
  httplib::Server server;
  std::atomic<int> hits{0};
  std::atomic<int> fail_first{0};
  std::atomic<int> status_code{500};

  server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    const int hit = ++hits;
    if (hit <= fail_first.load()) {
      res.status = status_code.load();
      res.set_content("overloaded", "text/plain");
      return;
    }
    nlohmann::json reply = {
        {"choices",
         nlohmann::json::array({{{"message", {{"content", "recovered"}}}}})}};
    res.set_content(reply.dump(), "application/json");
  });

  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  HttpBackendConfig config;
  config.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  config.max_attempts = 3;
  config.initial_backoff_ms = 10;
  config.timeout_sec = 5;
  HttpBackend backend(config);
  Prompt prompt = toy_prompt(toy_case("42"));

  SUBCASE("a 500 is retried until success") {
    fail_first = 1;
    Completion got = backend.complete({"m", 0.5, 1, "42"}, prompt);
    CHECK(got.text == "recovered");
    CHECK(hits.load() == 2);
  }
  SUBCASE("a 429 is retried too") {
    fail_first = 1;
    status_code = 429;
    Completion got = backend.complete({"m", 0.5, 1, "42"}, prompt);
    CHECK(got.text == "recovered");
    CHECK(hits.load() == 2);
  }
  SUBCASE("permanent 500s exhaust the attempt budget") {
    fail_first = 100;
    CHECK(thrown_code([&] { backend.complete({"m", 0.5, 1, "42"}, prompt); }) ==
          ErrorCode::Transport);
    CHECK(hits.load() == 3);
  }
  SUBCASE("a 400 fails immediately without retry") {
    fail_first = 100;
    status_code = 400;
    CHECK(thrown_code([&] { backend.complete({"m", 0.5, 1, "42"}, prompt); }) ==
          ErrorCode::BadStatus);
    CHECK(hits.load() == 1);
  }

  server.stop();
  server_thread.join();
}

TEST_CASE("HttpBackend rejects malformed success bodies and dead endpoints") {
  httplib::Server server;
  server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"unexpected": true})", "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  HttpBackendConfig config;
  config.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  config.max_attempts = 2;
  config.initial_backoff_ms = 10;
  config.timeout_sec = 5;
  Prompt prompt = toy_prompt(toy_case("42"));

  CHECK(thrown_code([&] {
          HttpBackend(config).complete({"m", 0.5, 1, "42"}, prompt);
        }) == ErrorCode::BadStatus);

  server.stop();
  server_thread.join();

  // nobody is listening anymore: transport failure after retries
  CHECK(thrown_code([&] {
          HttpBackend(config).complete({"m", 0.5, 1, "42"}, prompt);
        }) == ErrorCode::Transport);

  // and a URL without a scheme is a config error
  HttpBackendConfig bad;
  bad.base_url = "localhost:8000/v1";
  CHECK(thrown_code([&] { HttpBackend unused(bad); (void)unused; }) == ErrorCode::Config);
}
