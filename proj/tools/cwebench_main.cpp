#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cwebench/backend.hpp"
#include "cwebench/corpus.hpp"
#include "cwebench/cwe_catalog.hpp"
#include "cwebench/errors.hpp"
#include "cwebench/pipeline.hpp"
#include "cwebench/prompting.hpp"
#include "cwebench/reporting.hpp"
#include "cwebench/retriever.hpp"

namespace {

using cwebench::Error;
using cwebench::ErrorCode;

// Everything `run` needs; config-file values fill the holes CLI flags leave.
struct RunOptions {
  std::string manifest;
  std::string catalog;
  std::string model;
  std::vector<double> temperatures;
  int repetitions = 0;
  std::vector<std::string> cases;
  int rag_k = 4;
  int concurrency = 4;
  std::string base_url;
  std::optional<int> max_tokens;
  int timeout_sec = 120;
  int max_attempts = 3;
  int initial_backoff_ms = 1000;
};

nlohmann::json load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Config, "cannot open config file " + path);
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object())
    throw Error(ErrorCode::Config, "config file " + path + " is not a JSON object");
  return doc;
}

template <typename T>
void fill_from_config(const nlohmann::json& config, const char* key, bool flag_given,
                      T& slot) {
  if (flag_given || !config.contains(key)) return;
  try {
    slot = config.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::Config, std::string("config field \"") + key +
                                       "\" has the wrong type");
  }
}

std::string api_key_from_env() {
  for (const char* name : {"CWEBENCH_API_KEY", "OPENAI_API_KEY"}) {
    const char* value = std::getenv(name);
    if (value && *value) return value;
  }
  return {};
}

std::string language_name(cwebench::Language language) {
  return language == cwebench::Language::Cpp ? "C++" : "C";
}

void write_or_print(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + out_path);
  out << text;
}

void cmd_corpus_validate(const std::string& manifest, const std::string& catalog_dir) {
  cwebench::CweCatalog catalog = cwebench::load_catalog(catalog_dir);
  std::vector<cwebench::TestCase> corpus = cwebench::load_corpus(manifest, catalog);
  for (const cwebench::TestCase& test_case : corpus) {
    std::cout << test_case.id << "\t" << test_case.cwe.token() << "\t"
              << language_name(test_case.language) << "\tloc=" << test_case.loc
              << (test_case.ambiguous_line ? "\tambiguous-line" : "") << "\n";
  }
  std::cout << "ok: " << corpus.size() << " cases, " << catalog.size()
            << " catalog entries\n";
}

void cmd_run(const RunOptions& options, const std::string& replay_path,
             const std::string& out_path) {
  cwebench::CweCatalog catalog = cwebench::load_catalog(options.catalog);
  std::vector<cwebench::TestCase> corpus = cwebench::load_corpus(options.manifest, catalog);

  cwebench::SamplingPlan plan = cwebench::default_plan(options.model);
  if (!options.temperatures.empty()) plan.temperatures = options.temperatures;
  if (options.repetitions > 0) plan.repetitions = options.repetitions;
  plan.case_ids = options.cases;

  std::unique_ptr<cwebench::CompletionBackend> backend;
  if (!replay_path.empty()) {
    backend = std::make_unique<cwebench::ReplayBackend>(replay_path);
  } else {
    if (options.base_url.empty())
      throw Error(ErrorCode::Config, "live runs need base_url (config) or --base-url");
    cwebench::HttpBackendConfig http;
    http.base_url = options.base_url;
    http.api_key = api_key_from_env();
    http.max_attempts = options.max_attempts;
    http.initial_backoff_ms = options.initial_backoff_ms;
    http.timeout_sec = options.timeout_sec;
    http.max_tokens = options.max_tokens;
    backend = std::make_unique<cwebench::HttpBackend>(http);
  }

  // retrieval context over the CWE reference texts, shared across all cases
  std::vector<cwebench::DocChunk> chunks =
      cwebench::chunk_docs(catalog.retrieval_documents());
  const int rag_k = options.rag_k;
  cwebench::PromptBuilder build_prompt =
      [&chunks, rag_k](const cwebench::TestCase& test_case) {
        cwebench::ContextBundle context;
        if (rag_k > 0)
          context = cwebench::build_context(test_case.normalized_source, chunks, rag_k);
        return cwebench::assemble_prompt(cwebench::default_system_prompt(), context,
                                         cwebench::render_user_prompt(test_case));
      };

  cwebench::RunSummary summary = cwebench::run_plan(corpus, plan, *backend, build_prompt,
                                                    out_path, options.concurrency);
  std::cout << "completed=" << summary.completed
            << " transport_failures=" << summary.transport_failures
            << " skipped_existing=" << summary.skipped_existing << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark how well chat-completion models identify CWE weaknesses in C/C++ code"};
  app.require_subcommand(1);

  // ---- corpus validate -----------------------------------------------------
  CLI::App* corpus_cmd = app.add_subcommand("corpus", "Corpus maintenance commands");
  corpus_cmd->require_subcommand(1);
  CLI::App* validate_cmd =
      corpus_cmd->add_subcommand("validate", "Load and validate the corpus and catalog");
  std::string validate_manifest;
  std::string validate_catalog;
  validate_cmd->add_option("--manifest", validate_manifest, "corpus manifest.json")
      ->required();
  validate_cmd->add_option("--catalog", validate_catalog, "CWE catalog directory")
      ->required();
  validate_cmd->callback(
      [&] { cmd_corpus_validate(validate_manifest, validate_catalog); });

  // ---- run -----------------------------------------------------------------
  CLI::App* run_cmd =
      app.add_subcommand("run", "Sample the model grid and append an output log");
  std::string run_config;
  std::string run_replay;
  std::string run_out = "runs/outputs.jsonl";
  RunOptions options;
  run_cmd->add_option("--config", run_config, "JSON config file; flags override it");
  run_cmd->add_option("--replay", run_replay,
                      "serve completions from this previously captured output log");
  run_cmd->add_option("--out", run_out, "output log path (appended, resumable)");
  CLI::Option* opt_manifest = run_cmd->add_option("--manifest", options.manifest);
  CLI::Option* opt_catalog = run_cmd->add_option("--catalog", options.catalog);
  CLI::Option* opt_model = run_cmd->add_option("--model", options.model);
  CLI::Option* opt_temps =
      run_cmd->add_option("--temperature", options.temperatures)->expected(-1);
  CLI::Option* opt_reps = run_cmd->add_option("--reps", options.repetitions);
  CLI::Option* opt_cases = run_cmd->add_option("--case", options.cases)->expected(-1);
  CLI::Option* opt_rag_k = run_cmd->add_option("--rag-k", options.rag_k);
  CLI::Option* opt_conc = run_cmd->add_option("--concurrency", options.concurrency);
  CLI::Option* opt_url = run_cmd->add_option("--base-url", options.base_url);
  int max_tokens_flag = 0;
  CLI::Option* opt_max_tokens = run_cmd->add_option("--max-tokens", max_tokens_flag);
  CLI::Option* opt_timeout = run_cmd->add_option("--timeout-sec", options.timeout_sec);
  run_cmd->callback([&] {
    nlohmann::json config = nlohmann::json::object();
    if (!run_config.empty()) config = load_config_file(run_config);
    fill_from_config(config, "corpus", opt_manifest->count() > 0, options.manifest);
    fill_from_config(config, "catalog", opt_catalog->count() > 0, options.catalog);
    fill_from_config(config, "model", opt_model->count() > 0, options.model);
    fill_from_config(config, "temperatures", opt_temps->count() > 0, options.temperatures);
    fill_from_config(config, "repetitions", opt_reps->count() > 0, options.repetitions);
    fill_from_config(config, "cases", opt_cases->count() > 0, options.cases);
    fill_from_config(config, "rag_k", opt_rag_k->count() > 0, options.rag_k);
    fill_from_config(config, "concurrency", opt_conc->count() > 0, options.concurrency);
    fill_from_config(config, "base_url", opt_url->count() > 0, options.base_url);
    fill_from_config(config, "timeout_sec", opt_timeout->count() > 0, options.timeout_sec);
    fill_from_config(config, "max_attempts", false, options.max_attempts);
    fill_from_config(config, "initial_backoff_ms", false, options.initial_backoff_ms);
    if (opt_max_tokens->count() > 0)
      options.max_tokens = max_tokens_flag;
    else if (config.contains("max_tokens"))
      options.max_tokens = config.at("max_tokens").get<int>();
    if (options.manifest.empty() || options.catalog.empty())
      throw Error(ErrorCode::Config, "corpus manifest and catalog paths are required");
    if (options.model.empty())
      throw Error(ErrorCode::Config, "a model name is required");
    cmd_run(options, run_replay, run_out);
  });

  // ---- parse ---------------------------------------------------------------
  CLI::App* parse_cmd =
      app.add_subcommand("parse", "Parse an output log into a findings log");
  std::string parse_catalog;
  std::string parse_in;
  std::string parse_out;
  parse_cmd->add_option("--catalog", parse_catalog, "CWE catalog directory")->required();
  parse_cmd->add_option("--in", parse_in, "output log (JSONL)")->required();
  parse_cmd->add_option("--out", parse_out, "parsed log to write")->required();
  parse_cmd->callback([&] {
    cwebench::CweCatalog catalog = cwebench::load_catalog(parse_catalog);
    std::size_t n = cwebench::parse_stage_run(parse_in, parse_out, catalog);
    std::cout << "parsed " << n << " records\n";
  });

  // ---- score ---------------------------------------------------------------
  CLI::App* score_cmd =
      app.add_subcommand("score", "Score a parsed log against the corpus labels");
  std::string score_manifest;
  std::string score_catalog;
  std::string score_in;
  std::string score_out;
  std::string score_aggregates;
  score_cmd->add_option("--manifest", score_manifest, "corpus manifest.json")->required();
  score_cmd->add_option("--catalog", score_catalog, "CWE catalog directory")->required();
  score_cmd->add_option("--in", score_in, "parsed log (JSONL)")->required();
  score_cmd->add_option("--out", score_out, "scored log to write")->required();
  score_cmd->add_option("--aggregates", score_aggregates,
                        "per-(model, temperature, case) aggregate file to write")
      ->required();
  score_cmd->callback([&] {
    cwebench::CweCatalog catalog = cwebench::load_catalog(score_catalog);
    std::vector<cwebench::TestCase> corpus = cwebench::load_corpus(score_manifest, catalog);
    std::size_t n = cwebench::score_stage_run(score_in, score_out, score_aggregates, corpus,
                                              catalog);
    std::cout << "scored " << n << " records\n";
  });

  // ---- report --------------------------------------------------------------
  CLI::App* report_cmd =
      app.add_subcommand("report", "Render a metric table from a scored log");
  std::string report_in;
  std::string report_table = "accuracy";
  std::string report_format = "csv";
  std::string report_out;
  report_cmd->add_option("--in", report_in, "scored log (JSONL)")->required();
  report_cmd
      ->add_option("--table", report_table, "accuracy|recall|line|best|fp")
      ->check(CLI::IsMember({"accuracy", "recall", "line", "best", "fp"}));
  report_cmd->add_option("--format", report_format, "csv|markdown|json")
      ->check(CLI::IsMember({"csv", "markdown", "md", "json"}));
  report_cmd->add_option("--out", report_out, "write here instead of stdout");
  report_cmd->callback([&] {
    auto kind = cwebench::table_kind_from_name(report_table);
    auto format = cwebench::table_format_from_name(report_format);
    if (!kind || !format) throw Error(ErrorCode::Config, "unknown table or format name");
    write_or_print(cwebench::report_stage_run(report_in, *kind, *format), report_out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
