#include "foveate/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "foveate/config.hpp"
#include "foveate/corpus.hpp"
#include "foveate/diversity.hpp"
#include "foveate/http_backend.hpp"
#include "foveate/judge.hpp"
#include "foveate/log.hpp"
#include "foveate/pipeline.hpp"
#include "foveate/scripted_backend.hpp"

namespace foveate {

using nlohmann::json;

namespace {

std::shared_ptr<Backend> make_backend(const BackendConfig& config) {
  if (config.kind == "scripted") {
    return ScriptedBackend::with_pipeline_rules();
  }
  HttpBackendConfig http;
  http.base_url = config.base_url;
  http.chat_model = config.chat_model;
  http.embed_model = config.embed_model;
  http.timeout_seconds = config.timeout_seconds;
  if (const char* key = std::getenv(config.api_key_env.c_str())) {
    http.api_key = key;
  } else {
    throw ConfigError("API key environment variable " + config.api_key_env +
                      " is not set");
  }
  return std::make_shared<HttpBackend>(std::move(http));
}

Gateway make_gateway(const BackendConfig& config) {
  GatewayOptions options;
  options.max_retries = config.max_retries;
  options.max_in_flight = config.max_in_flight;
  options.embed_batch_limit = static_cast<std::size_t>(config.embed_batch_limit);
  return Gateway(make_backend(config), std::move(options));
}

// Accepts full-provenance rows ({"question": ...}) as well as sft rows
// ({"instruction": ...}).
std::string question_of_row(const json& row, const std::string& path,
                            std::size_t line_no) {
  if (row.contains("question") && row.at("question").is_string()) {
    return row.at("question").get<std::string>();
  }
  if (row.contains("instruction") && row.at("instruction").is_string()) {
    return row.at("instruction").get<std::string>();
  }
  throw Error(path + ":" + std::to_string(line_no) +
              ": row has neither question nor instruction field");
}

std::vector<json> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path);
  std::vector<json> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    bool blank = true;
    for (char c : line) {
      if (!std::isspace(static_cast<unsigned char>(c))) {
        blank = false;
        break;
      }
    }
    if (blank) continue;
    json row = json::parse(line, nullptr, false);
    if (row.is_discarded()) {
      throw Error(path + ":" + std::to_string(line_no) + ": malformed JSON row");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

struct SynthesizeArgs {
  std::string corpus_path;
  std::string config_path;
  bool resume = false;
  bool force = false;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> disable_levels;
  std::vector<std::string> enable_levels;
  std::optional<std::string> backend_kind;
  std::optional<std::size_t> limit;
  std::optional<std::string> ledger_dir;
  std::optional<std::string> out_path;
  std::optional<std::string> format;
  std::optional<int> workers;
};

void set_level_flag(LevelFlags& levels, const std::string& name, bool value) {
  if (name == "micro") {
    levels.micro = value;
  } else if (name == "scatter") {
    levels.scatter = value;
  } else if (name == "macro") {
    levels.macro = value;
  } else {
    throw ConfigError("unknown level: " + name);
  }
}

int cmd_synthesize(const SynthesizeArgs& args, std::ostream& out) {
  PipelineConfig config = args.config_path.empty()
                              ? PipelineConfig{}
                              : PipelineConfig::load(args.config_path);
  if (args.seed) config.seed = *args.seed;
  for (const auto& level : args.disable_levels) {
    set_level_flag(config.levels, level, false);
  }
  for (const auto& level : args.enable_levels) {
    set_level_flag(config.levels, level, true);
  }
  if (args.backend_kind) config.backend.kind = *args.backend_kind;
  if (args.ledger_dir) config.ledger_dir = *args.ledger_dir;
  if (args.out_path) config.dataset_path = *args.out_path;
  if (args.format) config.export_format = *args.format;
  if (args.workers) config.workers = *args.workers;
  config.validate();

  Corpus corpus = load_corpus(args.corpus_path, args.limit);
  Gateway gateway = make_gateway(config.backend);

  RunOptions options;
  options.resume = args.resume;
  options.force_fingerprint = args.force;
  RunResult result = run_pipeline(corpus, config, gateway, options);

  ExportSummary summary =
      export_dataset(result.dataset, export_format_from_string(config.export_format),
                     config.dataset_path);

  json report{
      {"documents", corpus.documents.size()},
      {"records", result.dataset.size()},
      {"verified", result.ledger.total_verified()},
      {"failed_records", result.ledger.total_failed_records()},
      {"per_level", result.ledger.level_totals()},
      {"fingerprint", result.ledger.fingerprint},
      {"dataset", config.dataset_path},
      {"format", config.export_format},
      {"written", summary.written},
      {"skipped", summary.skipped},
  };
  long failed_docs = 0;
  for (const auto& [id, entry] : result.ledger.docs) {
    if (entry.state == "failed") ++failed_docs;
  }
  report["failed_documents"] = failed_docs;
  out << report.dump(2) << '\n';
  return 0;
}

int cmd_export(const std::string& ledger_dir, const std::string& format,
               const std::string& out_path, std::ostream& out) {
  std::vector<InstructionRecord> records = load_ledger_records(ledger_dir);
  if (records.empty()) throw Error("no records stored under " + ledger_dir);
  ExportSummary summary =
      export_dataset(records, export_format_from_string(format), out_path);
  out << json{{"records", records.size()},
              {"written", summary.written},
              {"skipped", summary.skipped},
              {"dataset", out_path},
              {"format", format}}
             .dump(2)
      << '\n';
  return 0;
}

int cmd_profiles(std::ostream& out) {
  json profiles = json::array();
  for (const auto& name : profile_names()) {
    SamplingProfile p = named_profile(name);
    json j{{"name", name},
           {"temperature", p.temperature},
           {"top_p", p.top_p},
           {"frequency_penalty", p.frequency_penalty},
           {"presence_penalty", p.presence_penalty}};
    j["max_completion_tokens"] =
        p.max_completion_tokens ? json(*p.max_completion_tokens) : json(nullptr);
    profiles.push_back(std::move(j));
  }
  out << profiles.dump(2) << '\n';
  return 0;
}

int cmd_eval_diversity(const std::string& questions_path,
                       const BackendConfig& backend, std::ostream& out) {
  std::vector<std::string> questions;
  std::size_t line_no = 0;
  for (const auto& row : read_jsonl(questions_path)) {
    ++line_no;
    questions.push_back(question_of_row(row, questions_path, line_no));
  }
  Gateway gateway = make_gateway(backend);
  DiversityReport report = diversity_report(gateway, questions);
  out << json{{"selfbleu_diversity", report.selfbleu_diversity},
              {"embedding_diversity", report.embedding_diversity},
              {"n_sentences", report.n_sentences},
              {"ngram_orders", report.ngram_orders}}
             .dump(2)
      << '\n';
  return 0;
}

// Full-provenance rows grouped by doc_id.
std::map<std::string, std::vector<std::string>> questions_by_doc(
    const std::string& path) {
  std::map<std::string, std::vector<std::string>> grouped;
  std::size_t line_no = 0;
  for (const auto& row : read_jsonl(path)) {
    ++line_no;
    if (!row.contains("doc_id") || !row.at("doc_id").is_string()) {
      throw Error(path + ":" + std::to_string(line_no) +
                  ": row missing doc_id (use full-provenance exports)");
    }
    grouped[row.at("doc_id").get<std::string>()].push_back(
        question_of_row(row, path, line_no));
  }
  return grouped;
}

int cmd_eval_difficulty(const std::string& corpus_path, const std::string& set_a,
                        const std::string& set_b, const std::string& label_a,
                        const std::string& label_b, std::uint64_t seed,
                        const BackendConfig& backend, std::ostream& out) {
  Corpus corpus = load_corpus(corpus_path);
  auto a_by_doc = questions_by_doc(set_a);
  auto b_by_doc = questions_by_doc(set_b);
  Gateway gateway = make_gateway(backend);
  RngStream rng(derive_seed(seed, "eval-difficulty", "positions"));

  std::vector<HeadToHeadTrial> trials;
  for (const auto& doc : corpus.documents) {
    auto ita = a_by_doc.find(doc.id);
    auto itb = b_by_doc.find(doc.id);
    if (ita == a_by_doc.end() || itb == b_by_doc.end()) continue;
    if (ita->second.empty() || itb->second.empty()) continue;
    trials.push_back(judge_difficulty(gateway, doc, ita->second, itb->second,
                                      label_a, label_b, rng));
  }
  if (trials.empty()) {
    throw Error("no document has instructions in both sets");
  }
  WinRateReport report = win_rate(trials, label_a);
  out << json{{"champion", label_a},
              {"baseline", label_b},
              {"trials", trials.size()},
              {"wins", report.wins},
              {"losses", report.losses},
              {"invalid", report.invalid},
              {"win_rate", report.win_rate},
              {"win_rate_percent", report.percent_string()}}
             .dump(2)
      << '\n';
  return 0;
}

int cmd_eval_accuracy(const std::string& pairs_path, const BackendConfig& backend,
                      std::ostream& out) {
  auto rows = read_jsonl(pairs_path);
  if (rows.empty()) throw Error("no rows in " + pairs_path);
  Gateway gateway = make_gateway(backend);

  double recall_sum = 0.0;
  long correct = 0;
  long incorrect = 0;
  long invalid = 0;
  std::size_t line_no = 0;
  for (const auto& row : rows) {
    ++line_no;
    for (const char* field : {"question", "ground_truth", "generated"}) {
      if (!row.contains(field) || !row.at(field).is_string()) {
        throw Error(pairs_path + ":" + std::to_string(line_no) +
                    ": row missing field " + field);
      }
    }
    const auto question = row.at("question").get<std::string>();
    const auto ground_truth = row.at("ground_truth").get<std::string>();
    const auto generated = row.at("generated").get<std::string>();
    recall_sum += recall_score(generated, ground_truth);
    switch (judge_accuracy(gateway, question, ground_truth, generated)) {
      case AccuracyVerdict::correct: ++correct; break;
      case AccuracyVerdict::incorrect: ++incorrect; break;
      case AccuracyVerdict::invalid: ++invalid; break;
    }
  }
  json report{{"count", rows.size()},
              {"recall_mean", recall_sum / static_cast<double>(rows.size())},
              {"correct", correct},
              {"incorrect", incorrect},
              {"invalid", invalid}};
  if (correct + incorrect > 0) {
    report["accuracy"] =
        static_cast<double>(correct) / static_cast<double>(correct + incorrect);
  } else {
    report["accuracy"] = json(nullptr);
  }
  out << report.dump(2) << '\n';
  return 0;
}

int cmd_eval_regeneration(const std::string& pairs_path,
                          const BackendConfig& backend, std::ostream& out) {
  auto rows = read_jsonl(pairs_path);
  if (rows.empty()) throw Error("no rows in " + pairs_path);
  Gateway gateway = make_gateway(backend);

  std::vector<RegenerationVerdict> verdicts;
  std::size_t line_no = 0;
  for (const auto& row : rows) {
    ++line_no;
    for (const char* field : {"question", "answer"}) {
      if (!row.contains(field) || !row.at(field).is_string()) {
        throw Error(pairs_path + ":" + std::to_string(line_no) +
                    ": row missing field " + field);
      }
    }
    verdicts.push_back(judge_regeneration(gateway,
                                          row.at("question").get<std::string>(),
                                          row.at("answer").get<std::string>()));
  }
  QualityReport report = quality_report(verdicts);
  auto dimension = [](const std::array<double, 3>& pct) {
    return json{{"high", pct[0]}, {"medium", pct[1]}, {"low", pct[2]}};
  };
  out << json{{"fluency", dimension(report.fluency_pct)},
              {"completeness", dimension(report.completeness_pct)},
              {"valid", report.valid},
              {"invalid", report.invalid}}
             .dump(2)
      << '\n';
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Multi-level foveation instruction synthesis and evaluation"};
  app.require_subcommand(1);

  BackendConfig eval_backend;

  // synthesize
  SynthesizeArgs syn;
  auto* synthesize = app.add_subcommand(
      "synthesize", "Run the synthesis pipeline over a corpus");
  synthesize->add_option("--corpus", syn.corpus_path, "Corpus file (JSONL)")
      ->required();
  synthesize->add_option("--config", syn.config_path, "Pipeline config (JSON)");
  synthesize->add_flag("--resume", syn.resume, "Resume a persisted run");
  synthesize->add_flag("--force", syn.force,
                       "Override the resume fingerprint guard");
  std::uint64_t syn_seed = 0;
  auto* seed_opt = synthesize->add_option("--seed", syn_seed, "Global seed");
  synthesize->add_option("--disable-level", syn.disable_levels,
                         "Disable a level (micro|scatter|macro)");
  synthesize->add_option("--enable-level", syn.enable_levels, "Enable a level");
  std::string syn_backend;
  auto* backend_opt = synthesize->add_option("--backend", syn_backend,
                                             "Backend kind (openai|scripted)");
  std::size_t syn_limit = 0;
  auto* limit_opt =
      synthesize->add_option("--limit", syn_limit, "Process only the first N docs");
  std::string syn_ledger;
  auto* ledger_opt =
      synthesize->add_option("--ledger", syn_ledger, "Ledger directory");
  std::string syn_out;
  auto* out_opt = synthesize->add_option("--out", syn_out, "Dataset output path");
  std::string syn_format;
  auto* format_opt = synthesize->add_option(
      "--format", syn_format, "Export format (sft-triples|full-provenance)");
  int syn_workers = 0;
  auto* workers_opt =
      synthesize->add_option("--workers", syn_workers, "Document-level workers");

  // export
  auto* export_cmd =
      app.add_subcommand("export", "Re-export the record store of a run");
  std::string export_ledger;
  std::string export_format = "sft-triples";
  std::string export_out = "dataset.jsonl";
  export_cmd->add_option("--ledger", export_ledger, "Ledger directory")->required();
  export_cmd->add_option("--format", export_format, "Export format");
  export_cmd->add_option("--out", export_out, "Dataset output path");

  // profiles
  auto* profiles_cmd =
      app.add_subcommand("profiles", "Print the named sampling profiles");

  // shared eval options
  auto add_backend_options = [&](CLI::App* cmd) {
    cmd->add_option("--backend", eval_backend.kind, "Backend kind (openai|scripted)");
    cmd->add_option("--base-url", eval_backend.base_url, "API base URL");
    cmd->add_option("--chat-model", eval_backend.chat_model, "Chat model name");
    cmd->add_option("--embed-model", eval_backend.embed_model, "Embedding model");
    cmd->add_option("--api-key-env", eval_backend.api_key_env,
                    "Environment variable holding the API key");
  };

  // eval-diversity
  auto* diversity_cmd = app.add_subcommand(
      "eval-diversity", "SelfBLEU and embedding diversity of a question file");
  std::string diversity_questions;
  diversity_cmd->add_option("--questions", diversity_questions,
                            "JSONL file with question/instruction rows")
      ->required();
  add_backend_options(diversity_cmd);

  // eval-difficulty
  auto* difficulty_cmd = app.add_subcommand(
      "eval-difficulty", "Head-to-head difficulty win rate between two sets");
  std::string diff_corpus, diff_a, diff_b;
  std::string diff_label_a = "set-a";
  std::string diff_label_b = "set-b";
  std::uint64_t diff_seed = 42;
  difficulty_cmd->add_option("--corpus", diff_corpus, "Corpus file")->required();
  difficulty_cmd->add_option("--set-a", diff_a, "Full-provenance set A")->required();
  difficulty_cmd->add_option("--set-b", diff_b, "Full-provenance set B")->required();
  difficulty_cmd->add_option("--label-a", diff_label_a, "Label for set A");
  difficulty_cmd->add_option("--label-b", diff_label_b, "Label for set B");
  difficulty_cmd->add_option("--seed", diff_seed, "Position randomization seed");
  add_backend_options(difficulty_cmd);

  // eval-accuracy
  auto* accuracy_cmd = app.add_subcommand(
      "eval-accuracy", "Token recall plus judge accuracy over answer pairs");
  std::string accuracy_pairs;
  accuracy_cmd->add_option("--pairs", accuracy_pairs,
                           "JSONL rows with question/ground_truth/generated")
      ->required();
  add_backend_options(accuracy_cmd);

  // eval-regeneration
  auto* regeneration_cmd = app.add_subcommand(
      "eval-regeneration", "Fluency/completeness audit of question-answer pairs");
  std::string regeneration_pairs;
  regeneration_cmd->add_option("--pairs", regeneration_pairs,
                               "JSONL rows with question/answer")
      ->required();
  add_backend_options(regeneration_cmd);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    err << "run with --help for usage\n";
    return 2;
  }

  try {
    if (*synthesize) {
      if (*seed_opt) syn.seed = syn_seed;
      if (*backend_opt) syn.backend_kind = syn_backend;
      if (*limit_opt) syn.limit = syn_limit;
      if (*ledger_opt) syn.ledger_dir = syn_ledger;
      if (*out_opt) syn.out_path = syn_out;
      if (*format_opt) syn.format = syn_format;
      if (*workers_opt) syn.workers = syn_workers;
      return cmd_synthesize(syn, out);
    }
    if (*export_cmd) return cmd_export(export_ledger, export_format, export_out, out);
    if (*profiles_cmd) return cmd_profiles(out);
    if (*diversity_cmd) return cmd_eval_diversity(diversity_questions, eval_backend, out);
    if (*difficulty_cmd) {
      return cmd_eval_difficulty(diff_corpus, diff_a, diff_b, diff_label_a,
                                 diff_label_b, diff_seed, eval_backend, out);
    }
    if (*accuracy_cmd) return cmd_eval_accuracy(accuracy_pairs, eval_backend, out);
    if (*regeneration_cmd) {
      return cmd_eval_regeneration(regeneration_pairs, eval_backend, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  err << "no subcommand selected\n";
  return 2;
}

}  // namespace foveate
