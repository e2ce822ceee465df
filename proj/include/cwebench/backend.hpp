#ifndef CWEBENCH_BACKEND_HPP
#define CWEBENCH_BACKEND_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cwebench/corpus.hpp"
#include "cwebench/prompting.hpp"

namespace cwebench {

// Canonical decimal rendering of a sampling temperature ("0.1", "1"); used for
// run-key comparisons so doubles never get compared bit-wise across a JSON
// round trip.
std::string format_temperature(double temperature);

struct RunKey {
  std::string model;
  double temperature = 0.0;
  int rep = 0;
  std::string case_id;

  std::string token() const;  // collision-free join of the four fields
  friend bool operator<(const RunKey& a, const RunKey& b) { return a.token() < b.token(); }
  friend bool operator==(const RunKey& a, const RunKey& b) { return a.token() == b.token(); }
};

// One line of the append-only output log; doubles as the replay format.
struct OutputRecord {
  std::string model;
  double temperature = 0.0;
  int rep = 0;
  std::string case_id;
  std::string raw_text;   // sanitized model text ("" when transport failed)
  bool transport_ok = true;
  std::int64_t elapsed_ms = 0;

  RunKey key() const { return {model, temperature, rep, case_id}; }
};

std::string output_record_to_json(const OutputRecord& record);
OutputRecord output_record_from_json(std::string_view line);
std::vector<OutputRecord> read_output_log(const std::filesystem::path& path);

// Drops bytes that do not form valid UTF-8 (overlong forms, surrogates and
// out-of-range code points included); valid input passes through unchanged.
std::string sanitize_utf8(std::string_view bytes);

struct Completion {
  std::string text;  // raw bytes as returned by the model
  std::int64_t elapsed_ms = 0;
};

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  // Throws Error with code Transport/BadStatus/Timeout/ReplayMiss on failure.
  virtual Completion complete(const RunKey& key, const Prompt& prompt) = 0;
  virtual bool is_replay() const { return false; }
};

struct HttpBackendConfig {
  std::string base_url;            // e.g. "http://localhost:8000/v1"
  std::string api_key;             // sent as a bearer token when nonempty
  int max_attempts = 3;            // total tries per call
  int initial_backoff_ms = 1000;   // doubles after every failed attempt
  int timeout_sec = 120;
  std::optional<int> max_tokens;
};

// OpenAI-compatible chat-completions client (system + user messages).
class HttpBackend : public CompletionBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config);
  Completion complete(const RunKey& key, const Prompt& prompt) override;

 private:
  HttpBackendConfig config_;
  std::string host_;         // scheme://authority
  std::string path_prefix_;  // path portion of base_url
};

// Serves completions out of a previously captured output log, keyed by run
// key. Makes no network calls; replays recorded transport failures too.
class ReplayBackend : public CompletionBackend {
 public:
  explicit ReplayBackend(const std::filesystem::path& log_path);
  Completion complete(const RunKey& key, const Prompt& prompt) override;
  bool is_replay() const override { return true; }
  std::size_t size() const { return records_.size(); }

 private:
  std::map<std::string, OutputRecord> records_;  // token -> record
};

struct SamplingPlan {
  std::string model;
  std::vector<double> temperatures;  // each > 0
  int repetitions = 0;               // >= 1
  std::vector<std::string> case_ids; // empty = whole corpus
};

// The stock sweep: temperatures 0.1 .. 1.0 in steps of 0.1, 100 reps.
SamplingPlan default_plan(std::string model);

struct RunSummary {
  std::size_t completed = 0;
  std::size_t transport_failures = 0;
  std::size_t skipped_existing = 0;
};

using PromptBuilder = std::function<Prompt(const TestCase&)>;

// Executes the cases x temperatures x repetitions grid, appending one JSONL
// record per completion to log_path. Run keys already present in the log are
// skipped, which makes interrupted runs resumable. Transport failures become
// transport_ok=false records rather than aborting the sweep. Replay backends
// are driven single-threaded so regenerated logs are byte-stable.
RunSummary run_plan(const std::vector<TestCase>& corpus, const SamplingPlan& plan,
                    CompletionBackend& backend, const PromptBuilder& build_prompt,
                    const std::filesystem::path& log_path, int concurrency = 4);

}  // namespace cwebench

#endif  // CWEBENCH_BACKEND_HPP
