#include "foveate/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "foveate/log.hpp"
#include "foveate/resynthesis.hpp"
#include "foveate/synthesis.hpp"

namespace foveate {

using nlohmann::json;

namespace {

int level_rank(Level level) {
  switch (level) {
    case Level::micro: return 0;
    case Level::scatter: return 1;
    case Level::macro: return 2;
  }
  return 0;
}

json ledger_to_json(const RunLedger& ledger) {
  json docs = json::object();
  for (const auto& [id, entry] : ledger.docs) {
    json e{{"state", entry.state},
           {"verified", entry.verified},
           {"failed_records", entry.failed_records},
           {"levels", entry.level_counts}};
    if (!entry.error.empty()) e["error"] = entry.error;
    docs[id] = std::move(e);
  }
  return json{{"fingerprint", ledger.fingerprint},
              {"corpus_hash", ledger.corpus_hash},
              {"docs", std::move(docs)}};
}

RunLedger ledger_from_json(const json& j) {
  RunLedger ledger;
  ledger.fingerprint = j.at("fingerprint").get<std::string>();
  ledger.corpus_hash = j.at("corpus_hash").get<std::string>();
  for (const auto& [id, e] : j.at("docs").items()) {
    DocEntry entry;
    entry.state = e.at("state").get<std::string>();
    entry.error = e.value("error", "");
    entry.verified = e.at("verified").get<int>();
    entry.failed_records = e.at("failed_records").get<int>();
    entry.level_counts = e.at("levels").get<std::map<std::string, int>>();
    ledger.docs[id] = std::move(entry);
  }
  return ledger;
}

// Write-then-rename so an interrupted run never leaves a torn ledger.
void write_ledger(const std::filesystem::path& dir, const RunLedger& ledger) {
  auto tmp = dir / "ledger.json.tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error("cannot write ledger: " + tmp.string());
    out << ledger_to_json(ledger).dump(2) << '\n';
    out.flush();
    if (!out) throw Error("ledger write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, dir / "ledger.json");
}

struct DocOutcome {
  std::vector<InstructionRecord> records;
  DocEntry entry;
};

DocOutcome process_document(const Document& doc, const PipelineConfig& config,
                            Gateway& gateway, const PromptTemplates& prompts,
                            EmbeddingCache& cache) {
  if (config.max_document_chars != 0 &&
      doc.text.size() > config.max_document_chars) {
    throw Error("document " + doc.id + " has " + std::to_string(doc.text.size()) +
                " chars, beyond max_document_chars=" +
                std::to_string(config.max_document_chars) +
                "; prompts are never truncated, so the document is rejected");
  }

  SynthesisContext ctx{gateway, prompts};
  std::vector<InstructionRecord> drafts;

  std::vector<FoveateElement> selected;
  if (config.levels.micro || config.levels.scatter) {
    ExtractionResult extraction =
        extract_elements(gateway, prompts, doc, config.elements_per_doc,
                         config.overshoot);
    selected = select_elements(gateway, doc, extraction.elements,
                               static_cast<std::size_t>(config.elements_per_doc),
                               &cache);
  }

  if (config.levels.micro) {
    int seq = 0;
    for (const auto& element : selected) {
      drafts.push_back(reverse_synthesize(ctx, doc, element,
                                          config.regenerate_answers, seq++));
    }
  }

  if (config.levels.scatter) {
    if (selected.size() >= 2) {
      RngStream rng(derive_seed(config.seed, doc.id, "groups"));
      GroupingResult grouping = form_groups(selected, config.groups_per_doc,
                                            config.group_size_dist, rng);
      int seq = 0;
      for (const auto& group : grouping.groups) {
        drafts.push_back(direct_synthesize(ctx, doc, group, seq++));
      }
    } else {
      log::warn("doc " + doc.id + ": fewer than 2 elements, skipping scatter level");
    }
  }

  if (config.levels.macro) {
    SegmentExtractionResult segments = extract_segments(gateway, prompts, doc);
    const std::size_t take = std::min<std::size_t>(
        segments.segments.size(), static_cast<std::size_t>(config.max_segments));
    int seq = 0;
    for (std::size_t i = 0; i < take; ++i) {
      drafts.push_back(transcribe_synthesize(ctx, doc, segments.segments[i], seq++));
    }
  }

  RngStream filter_rng(derive_seed(config.seed, doc.id, "resynthesis"));
  FilterResult filtered = run_filter(ctx, doc, std::move(drafts),
                                     config.resynthesis_policy(), filter_rng);

  DocOutcome outcome;
  outcome.entry.state = "done";
  outcome.entry.verified = static_cast<int>(filtered.verified.size());
  outcome.entry.failed_records = static_cast<int>(filtered.failed.size());
  outcome.records.reserve(filtered.verified.size() + filtered.failed.size());
  for (auto& r : filtered.verified) outcome.records.push_back(std::move(r));
  for (auto& r : filtered.failed) outcome.records.push_back(std::move(r));
  std::sort(outcome.records.begin(), outcome.records.end(),
            [](const InstructionRecord& a, const InstructionRecord& b) {
              if (level_rank(a.level) != level_rank(b.level)) {
                return level_rank(a.level) < level_rank(b.level);
              }
              return a.seq < b.seq;
            });
  for (const auto& r : outcome.records) {
    ++outcome.entry.level_counts[std::string(level_name(r.level))];
  }
  return outcome;
}

}  // namespace

std::map<std::string, long> RunLedger::level_totals() const {
  std::map<std::string, long> totals;
  for (const auto& [id, entry] : docs) {
    for (const auto& [level, count] : entry.level_counts) totals[level] += count;
  }
  return totals;
}

long RunLedger::total_records() const {
  long total = 0;
  for (const auto& [level, count] : level_totals()) total += count;
  return total;
}

long RunLedger::total_verified() const {
  long total = 0;
  for (const auto& [id, entry] : docs) total += entry.verified;
  return total;
}

long RunLedger::total_failed_records() const {
  long total = 0;
  for (const auto& [id, entry] : docs) total += entry.failed_records;
  return total;
}

std::string corpus_hash(const Corpus& corpus) {
  std::uint64_t h = fnv1a("corpus");
  for (const auto& doc : corpus.documents) {
    h = fnv1a(doc.id, h);
    h = fnv1a("\x1f", h);
  }
  return to_hex(h);
}

std::vector<InstructionRecord> load_ledger_records(const std::string& ledger_dir) {
  auto path = std::filesystem::path(ledger_dir) / "records.jsonl";
  if (!std::filesystem::exists(path)) return {};
  return read_records(path);
}

RunResult run_pipeline(const Corpus& corpus, const PipelineConfig& config,
                       Gateway& gateway, const RunOptions& options) {
  config.validate();
  const PromptTemplates prompts = config.prompt_dir.empty()
                                      ? PromptTemplates::defaults()
                                      : PromptTemplates::load(config.prompt_dir);
  const bool persist = !config.ledger_dir.empty();
  const std::filesystem::path dir(config.ledger_dir);

  RunLedger ledger;
  ledger.fingerprint = config.fingerprint();
  ledger.corpus_hash = corpus_hash(corpus);

  std::map<std::string, std::vector<InstructionRecord>> records_by_doc;

  if (options.resume) {
    if (!persist) throw ConfigError("resume requires a ledger directory");
    auto ledger_path = dir / "ledger.json";
    std::ifstream in(ledger_path);
    if (!in) throw Error("cannot open ledger: " + ledger_path.string());
    json j;
    in >> j;
    RunLedger stored = ledger_from_json(j);
    if (!options.force_fingerprint) {
      if (stored.fingerprint != ledger.fingerprint) {
        throw ConfigError(
            "resume refused: config fingerprint " + ledger.fingerprint +
            " does not match ledger fingerprint " + stored.fingerprint +
            " (pass --force to override)");
      }
      if (stored.corpus_hash != ledger.corpus_hash) {
        throw ConfigError("resume refused: corpus changed since the run started "
                          "(pass --force to override)");
      }
    }
    ledger.docs = std::move(stored.docs);
    for (auto& record : load_ledger_records(config.ledger_dir)) {
      records_by_doc[record.doc_id].push_back(std::move(record));
    }
  } else if (persist) {
    std::filesystem::create_directories(dir);
    std::ofstream truncate(dir / "records.jsonl", std::ios::trunc);
    write_ledger(dir, ledger);
  }

  // Documents not yet terminally recorded. "failed" is terminal for the run;
  // a fresh run, not resume, retries those.
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
    auto it = ledger.docs.find(corpus.documents[i].id);
    if (it == ledger.docs.end()) pending.push_back(i);
  }

  EmbeddingCache cache;
  std::mutex ledger_mutex;
  std::atomic<std::size_t> cursor{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&]() {
    for (;;) {
      {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error) return;
      }
      std::size_t slot = cursor.fetch_add(1);
      if (slot >= pending.size()) return;
      const std::size_t doc_index = pending[slot];
      const Document& doc = corpus.documents[doc_index];

      DocOutcome outcome;
      try {
        outcome = process_document(doc, config, gateway, prompts, cache);
      } catch (const std::exception& e) {
        log::error("doc " + doc.id + " failed: " + e.what());
        outcome.records.clear();
        outcome.entry = DocEntry{};
        outcome.entry.state = "failed";
        outcome.entry.error = e.what();
      }

      try {
        std::lock_guard<std::mutex> lock(ledger_mutex);
        if (persist && !outcome.records.empty()) {
          std::ofstream out(dir / "records.jsonl", std::ios::app);
          if (!out) throw Error("cannot append to record store");
          for (const auto& r : outcome.records) {
            out << record_to_json(r).dump() << '\n';
          }
          out.flush();
          if (!out) throw Error("record store write failed");
        }
        records_by_doc[doc.id] = std::move(outcome.records);
        ledger.docs[doc.id] = std::move(outcome.entry);
        if (persist) write_ledger(dir, ledger);
        if (options.hooks.after_document) {
          options.hooks.after_document(doc, doc_index);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  const int worker_count =
      std::max(1, std::min<int>(config.workers, static_cast<int>(pending.size())));
  if (worker_count <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(worker_count));
    for (int i = 0; i < worker_count; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  RunResult result;
  result.ledger = std::move(ledger);
  for (const auto& doc : corpus.documents) {
    auto it = records_by_doc.find(doc.id);
    if (it == records_by_doc.end()) continue;
    std::vector<InstructionRecord> recs = it->second;
    // Stored rows already follow (level, seq) order, but restoring it here
    // keeps exports identical no matter where the records came from.
    std::sort(recs.begin(), recs.end(),
              [](const InstructionRecord& a, const InstructionRecord& b) {
                if (level_rank(a.level) != level_rank(b.level)) {
                  return level_rank(a.level) < level_rank(b.level);
                }
                return a.seq < b.seq;
              });
    for (auto& r : recs) result.dataset.push_back(std::move(r));
  }
  return result;
}

}  // namespace foveate
