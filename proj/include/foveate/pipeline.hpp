#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "foveate/config.hpp"
#include "foveate/corpus.hpp"
#include "foveate/foveation.hpp"
#include "foveate/gateway.hpp"
#include "foveate/records.hpp"

namespace foveate {

struct DocEntry {
  std::string state;  // "done" or "failed"
  std::string error;  // set for failed documents
  std::map<std::string, int> level_counts;
  int verified = 0;
  int failed_records = 0;
};

struct RunLedger {
  std::string fingerprint;
  std::string corpus_hash;
  std::map<std::string, DocEntry> docs;

  // Per-level record totals over done documents; the Eq-style accumulation
  // the dataset size is checked against.
  std::map<std::string, long> level_totals() const;
  long total_records() const;
  long total_verified() const;
  long total_failed_records() const;
};

struct RunHooks {
  // Invoked after a document's records and ledger entry are persisted.
  // Tests inject crashes by throwing from here.
  std::function<void(const Document&, std::size_t index)> after_document;
};

struct RunOptions {
  bool resume = false;
  bool force_fingerprint = false;  // override the resume fingerprint guard
  RunHooks hooks;
};

struct RunResult {
  std::vector<InstructionRecord> dataset;  // corpus order, then level, then seq
  RunLedger ledger;
};

// Processes every document independently: extract -> select -> per-level
// synthesis -> verification/re-synthesis filter. The dataset accumulates the
// per-document, per-level subsets; per-document failures are recorded in the
// ledger and skipped, never aborting the run. Deterministic for a fixed
// (corpus, config, scripted backend, seed) regardless of worker count.
RunResult run_pipeline(const Corpus& corpus, const PipelineConfig& config,
                       Gateway& gateway, const RunOptions& options = {});

std::string corpus_hash(const Corpus& corpus);

// Reads the record store of a persisted run.
std::vector<InstructionRecord> load_ledger_records(const std::string& ledger_dir);

}  // namespace foveate
