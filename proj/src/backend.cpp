#include "cwebench/backend.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "cwebench/errors.hpp"

namespace cwebench {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr char kKeySep = '\x1f';  // cannot occur in sanitized model/case names

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) lines.push_back(line);
  return lines;
}

// base_url -> (scheme://authority, path prefix). httplib wants them apart.
std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
  std::size_t scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos)
    throw Error(ErrorCode::Config, "endpoint must start with http:// or https://");
  std::size_t path_start = base_url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {base_url, ""};
  std::string prefix = base_url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {base_url.substr(0, path_start), prefix};
}

}  // namespace

std::string format_temperature(double temperature) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", temperature);
  return buf;
}

std::string RunKey::token() const {
  return model + kKeySep + format_temperature(temperature) + kKeySep +
         std::to_string(rep) + kKeySep + case_id;
}

std::string output_record_to_json(const OutputRecord& record) {
  ordered_json j;
  j["model"] = record.model;
  j["temperature"] = record.temperature;
  j["rep"] = record.rep;
  j["case_id"] = record.case_id;
  j["raw_text"] = record.raw_text;
  j["transport_ok"] = record.transport_ok;
  j["elapsed_ms"] = record.elapsed_ms;
  return j.dump();
}

OutputRecord output_record_from_json(std::string_view line) {
  json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object())
    throw Error(ErrorCode::Io, "malformed output-log line");
  OutputRecord record;
  try {
    record.model = j.at("model").get<std::string>();
    record.temperature = j.at("temperature").get<double>();
    record.rep = j.at("rep").get<int>();
    record.case_id = j.at("case_id").get<std::string>();
    record.raw_text = j.at("raw_text").get<std::string>();
    record.transport_ok = j.at("transport_ok").get<bool>();
    record.elapsed_ms = j.at("elapsed_ms").get<std::int64_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Io, std::string("output-log record field error: ") + e.what());
  }
  return record;
}

std::vector<OutputRecord> read_output_log(const std::filesystem::path& path) {
  std::vector<OutputRecord> records;
  for (const std::string& line : read_lines(path))
    records.push_back(output_record_from_json(line));
  return records;
}

std::string sanitize_utf8(std::string_view bytes) {
  std::string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  while (i < bytes.size()) {
    const unsigned char b0 = static_cast<unsigned char>(bytes[i]);

    if (b0 < 0x80) {
      out.push_back(bytes[i]);
      ++i;
      continue;
    }

    int length = 0;
    unsigned cp = 0;
    if ((b0 & 0xE0) == 0xC0) { length = 2; cp = b0 & 0x1F; }
    else if ((b0 & 0xF0) == 0xE0) { length = 3; cp = b0 & 0x0F; }
    else if ((b0 & 0xF8) == 0xF0) { length = 4; cp = b0 & 0x07; }
    else { ++i; continue; }  // stray continuation or invalid lead byte

    if (i + length > bytes.size()) { ++i; continue; }
    bool ok = true;
    for (int k = 1; k < length; ++k) {
      const unsigned char bk = static_cast<unsigned char>(bytes[i + k]);
      if ((bk & 0xC0) != 0x80) { ok = false; break; }
      cp = (cp << 6) | (bk & 0x3F);
    }
    // reject overlong encodings, UTF-16 surrogates, and values past U+10FFFF
    if (ok) {
      if (length == 2 && cp < 0x80) ok = false;
      if (length == 3 && cp < 0x800) ok = false;
      if (length == 4 && cp < 0x10000) ok = false;
      if (cp >= 0xD800 && cp <= 0xDFFF) ok = false;
      if (cp > 0x10FFFF) ok = false;
    }
    if (!ok) { ++i; continue; }

    out.append(bytes.substr(i, length));
    i += length;
  }
  return out;
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  auto [host, prefix] = split_base_url(config_.base_url);
  host_ = host;
  path_prefix_ = prefix;
}

Completion HttpBackend::complete(const RunKey& key, const Prompt& prompt) {
  json body;
  body["model"] = key.model;
  body["temperature"] = key.temperature;
  body["messages"] = json::array({
      json{{"role", "system"}, {"content", prompt.system}},
      json{{"role", "user"}, {"content", prompt.user_payload()}},
  });
  if (config_.max_tokens) body["max_tokens"] = *config_.max_tokens;
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (!config_.api_key.empty())
    headers.emplace("Authorization", "Bearer " + config_.api_key);

  const auto started = std::chrono::steady_clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - started)
        .count();
  };

  std::string last_failure = "no attempt made";
  bool timed_out = false;
  int backoff_ms = config_.initial_backoff_ms;

  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
      backoff_ms *= 2;
    }

    httplib::Client client(host_);
    client.set_connection_timeout(config_.timeout_sec, 0);
    client.set_read_timeout(config_.timeout_sec, 0);
    client.set_write_timeout(config_.timeout_sec, 0);

    auto res = client.Post(path_prefix_ + "/chat/completions", headers, payload,
                           "application/json");
    if (!res) {
      timed_out = res.error() == httplib::Error::ConnectionTimeout ||
                  res.error() == httplib::Error::Read || res.error() == httplib::Error::Write;
      last_failure = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) {
      json reply = json::parse(res->body, nullptr, /*allow_exceptions=*/false);
      if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty() ||
          !reply["choices"][0].contains("message") ||
          !reply["choices"][0]["message"].contains("content") ||
          !reply["choices"][0]["message"]["content"].is_string())
        throw Error(ErrorCode::BadStatus, "completion response missing choices[0].message.content");
      return {reply["choices"][0]["message"]["content"].get<std::string>(), elapsed_ms()};
    }
    if (res->status == 429 || res->status >= 500) {  // worth retrying
      last_failure = "HTTP " + std::to_string(res->status);
      continue;
    }
    throw Error(ErrorCode::BadStatus,
                "HTTP " + std::to_string(res->status) + " from " + host_);
  }

  if (timed_out) throw Error(ErrorCode::Timeout, last_failure);
  throw Error(ErrorCode::Transport,
              last_failure + " after " + std::to_string(config_.max_attempts) + " attempts");
}

ReplayBackend::ReplayBackend(const std::filesystem::path& log_path) {
  for (OutputRecord& record : read_output_log(log_path)) {
    std::string token = record.key().token();
    records_[std::move(token)] = std::move(record);
  }
}

Completion ReplayBackend::complete(const RunKey& key, const Prompt& prompt) {
  (void)prompt;
  auto it = records_.find(key.token());
  if (it == records_.end())
    throw Error(ErrorCode::ReplayMiss,
                "no replay record for model=" + key.model +
                    " temperature=" + format_temperature(key.temperature) +
                    " rep=" + std::to_string(key.rep) + " case=" + key.case_id);
  const OutputRecord& record = it->second;
  if (!record.transport_ok)
    throw Error(ErrorCode::Transport, "replayed transport failure for " + key.case_id);
  return {record.raw_text, record.elapsed_ms};
}

SamplingPlan default_plan(std::string model) {
  SamplingPlan plan;
  plan.model = std::move(model);
  for (int i = 1; i <= 10; ++i) plan.temperatures.push_back(i / 10.0);
  plan.repetitions = 100;
  return plan;
}

RunSummary run_plan(const std::vector<TestCase>& corpus, const SamplingPlan& plan,
                    CompletionBackend& backend, const PromptBuilder& build_prompt,
                    const std::filesystem::path& log_path, int concurrency) {
  if (plan.model.empty()) throw Error(ErrorCode::Config, "plan has no model name");
  if (plan.repetitions < 1) throw Error(ErrorCode::Config, "plan repetitions must be >= 1");
  if (plan.temperatures.empty()) throw Error(ErrorCode::Config, "plan has no temperatures");
  for (double t : plan.temperatures)
    if (t <= 0.0)
      throw Error(ErrorCode::Config, "temperatures must be > 0, got " + format_temperature(t));

  // Resolve the case list against the corpus before doing any work.
  std::vector<const TestCase*> cases;
  if (plan.case_ids.empty()) {
    for (const TestCase& tc : corpus) cases.push_back(&tc);
  } else {
    for (const std::string& id : plan.case_ids) {
      const TestCase* found = nullptr;
      for (const TestCase& tc : corpus)
        if (tc.id == id) { found = &tc; break; }
      if (!found) throw Error(ErrorCode::Config, "plan names unknown case id " + id);
      cases.push_back(found);
    }
  }

  std::set<std::string> existing;
  if (std::filesystem::exists(log_path))
    for (const OutputRecord& record : read_output_log(log_path))
      existing.insert(record.key().token());

  struct Job {
    const TestCase* test_case;
    RunKey key;
  };
  RunSummary summary;
  std::vector<Job> jobs;
  for (const TestCase* tc : cases)
    for (double temperature : plan.temperatures)
      for (int rep = 1; rep <= plan.repetitions; ++rep) {
        RunKey key{plan.model, temperature, rep, tc->id};
        if (existing.count(key.token())) {
          ++summary.skipped_existing;
          continue;
        }
        jobs.push_back({tc, key});
      }

  // Prompts are per case; build each once up front.
  std::map<std::string, Prompt> prompts;
  for (const TestCase* tc : cases)
    if (!prompts.count(tc->id)) prompts[tc->id] = build_prompt(*tc);

  if (log_path.has_parent_path()) std::filesystem::create_directories(log_path.parent_path());
  std::ofstream log(log_path, std::ios::app);
  if (!log) throw Error(ErrorCode::Io, "cannot open log for append: " + log_path.string());

  if (backend.is_replay()) concurrency = 1;  // keep regenerated logs byte-stable
  concurrency = std::max(1, std::min<int>(concurrency, static_cast<int>(jobs.size())));

  std::mutex sink_mutex;
  std::atomic<std::size_t> next_job{0};
  std::atomic<std::size_t> completed{0};
  std::atomic<std::size_t> failures{0};
  std::exception_ptr sink_error;

  auto worker = [&] {
    for (;;) {
      const std::size_t index = next_job.fetch_add(1);
      if (index >= jobs.size()) return;
      const Job& job = jobs[index];

      OutputRecord record;
      record.model = job.key.model;
      record.temperature = job.key.temperature;
      record.rep = job.key.rep;
      record.case_id = job.key.case_id;
      try {
        Completion completion = backend.complete(job.key, prompts.at(job.test_case->id));
        record.raw_text = sanitize_utf8(completion.text);
        record.transport_ok = true;
        record.elapsed_ms = completion.elapsed_ms;
        ++completed;
      } catch (const std::exception&) {
        record.raw_text.clear();
        record.transport_ok = false;
        record.elapsed_ms = 0;
        ++failures;
      }

      std::lock_guard<std::mutex> lock(sink_mutex);
      log << output_record_to_json(record) << '\n';
      log.flush();
      if (!log && !sink_error)
        sink_error = std::make_exception_ptr(
            Error(ErrorCode::Io, "write failed on " + log_path.string()));
      if (sink_error) return;
    }
  };

  if (concurrency <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(concurrency);
    for (int i = 0; i < concurrency; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (sink_error) std::rethrow_exception(sink_error);

  summary.completed = completed;
  summary.transport_failures = failures;
  return summary;
}

}  // namespace cwebench
