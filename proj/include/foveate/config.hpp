#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "foveate/resynthesis.hpp"

namespace foveate {

struct BackendConfig {
  std::string kind = "openai";  // "openai" or "scripted"
  std::string base_url = "https://api.openai.com/v1";
  std::string chat_model = "gpt-4o-mini";
  std::string embed_model = "text-embedding-3-small";
  std::string api_key_env = "OPENAI_API_KEY";
  int max_in_flight = 4;
  int max_retries = 3;
  int embed_batch_limit = 32;
  long timeout_seconds = 120;
};

struct LevelFlags {
  bool micro = true;
  bool scatter = true;
  bool macro = true;

  bool any() const { return micro || scatter || macro; }
};

struct PipelineConfig {
  LevelFlags levels;
  int elements_per_doc = 3;   // k selected per document
  double overshoot = 2.0;     // extraction candidates = ceil(k * overshoot)
  int groups_per_doc = 2;
  std::map<int, double> group_size_dist = {{2, 0.6}, {3, 0.3}, {4, 0.1}};
  int max_segments = 2;
  bool regenerate_answers = true;  // off = the answer-regeneration ablation arm
  // Prompts embed the full document, never truncated; documents longer than
  // this are rejected up front instead. 0 disables the guard.
  std::size_t max_document_chars = 200000;
  int resynthesis_max_iterations = 3;
  int resynthesis_reference_sample_size = 2;
  BackendConfig backend;
  std::uint64_t seed = 42;
  int workers = 1;
  std::string prompt_dir;  // empty = built-in templates

  // Outputs; not part of the fingerprint.
  std::string ledger_dir;
  std::string dataset_path = "dataset.jsonl";
  std::string export_format = "sft-triples";

  void validate() const;

  nlohmann::json to_json() const;
  static PipelineConfig from_json(const nlohmann::json& j);
  static PipelineConfig load(const std::filesystem::path& path);

  ResynthesisPolicy resynthesis_policy() const;

  // Stable hash of every field that can change what a run produces. Output
  // paths and scheduling knobs (workers, in-flight bound) are excluded by
  // design: they never alter results.
  std::string fingerprint() const;
};

}  // namespace foveate
