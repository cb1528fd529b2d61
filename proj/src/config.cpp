#include "foveate/config.hpp"

#include <cmath>
#include <fstream>

#include "foveate/errors.hpp"
#include "foveate/rng.hpp"

namespace foveate {

using nlohmann::json;

void PipelineConfig::validate() const {
  if (!levels.any()) throw ConfigError("config: at least one level must be enabled");
  if ((levels.micro || levels.scatter) && elements_per_doc < 1) {
    throw ConfigError("config: elements_per_doc must be >= 1");
  }
  if (overshoot < 1.0) throw ConfigError("config: overshoot must be >= 1");
  if (levels.scatter && groups_per_doc < 1) {
    throw ConfigError("config: groups_per_doc must be >= 1");
  }
  if (levels.macro && max_segments < 1) {
    throw ConfigError("config: max_segments must be >= 1");
  }
  if (resynthesis_max_iterations < 1) {
    throw ConfigError("config: resynthesis max_iterations must be >= 1");
  }
  if (resynthesis_reference_sample_size < 0) {
    throw ConfigError("config: resynthesis reference_sample_size must be >= 0");
  }
  if (workers < 1) throw ConfigError("config: workers must be >= 1");
  if (backend.kind != "openai" && backend.kind != "scripted") {
    throw ConfigError("config: backend kind must be \"openai\" or \"scripted\"");
  }
  double sum = 0.0;
  for (const auto& [size, prob] : group_size_dist) {
    if (size < 2) throw ConfigError("config: group sizes must be >= 2");
    if (prob < 0.0) throw ConfigError("config: negative group size probability");
    sum += prob;
  }
  if (levels.scatter && std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("config: group_size_dist must sum to 1");
  }
}

json PipelineConfig::to_json() const {
  json dist = json::object();
  for (const auto& [size, prob] : group_size_dist) {
    dist[std::to_string(size)] = prob;
  }
  return json{
      {"levels",
       {{"micro", levels.micro}, {"scatter", levels.scatter}, {"macro", levels.macro}}},
      {"elements_per_doc", elements_per_doc},
      {"overshoot", overshoot},
      {"groups_per_doc", groups_per_doc},
      {"group_size_dist", std::move(dist)},
      {"max_segments", max_segments},
      {"regenerate_answers", regenerate_answers},
      {"max_document_chars", max_document_chars},
      {"resynthesis",
       {{"max_iterations", resynthesis_max_iterations},
        {"reference_sample_size", resynthesis_reference_sample_size}}},
      {"backend",
       {{"kind", backend.kind},
        {"base_url", backend.base_url},
        {"chat_model", backend.chat_model},
        {"embed_model", backend.embed_model},
        {"api_key_env", backend.api_key_env},
        {"max_in_flight", backend.max_in_flight},
        {"max_retries", backend.max_retries},
        {"embed_batch_limit", backend.embed_batch_limit},
        {"timeout_seconds", backend.timeout_seconds}}},
      {"seed", seed},
      {"workers", workers},
      {"prompt_dir", prompt_dir},
      {"output",
       {{"ledger_dir", ledger_dir},
        {"dataset", dataset_path},
        {"format", export_format}}},
  };
}

PipelineConfig PipelineConfig::from_json(const json& j) {
  PipelineConfig c;
  if (j.contains("levels")) {
    const auto& levels = j.at("levels");
    c.levels.micro = levels.value("micro", true);
    c.levels.scatter = levels.value("scatter", true);
    c.levels.macro = levels.value("macro", true);
  }
  c.elements_per_doc = j.value("elements_per_doc", c.elements_per_doc);
  c.overshoot = j.value("overshoot", c.overshoot);
  c.groups_per_doc = j.value("groups_per_doc", c.groups_per_doc);
  if (j.contains("group_size_dist")) {
    c.group_size_dist.clear();
    for (const auto& [key, value] : j.at("group_size_dist").items()) {
      c.group_size_dist[std::stoi(key)] = value.get<double>();
    }
  }
  c.max_segments = j.value("max_segments", c.max_segments);
  c.regenerate_answers = j.value("regenerate_answers", c.regenerate_answers);
  c.max_document_chars = j.value("max_document_chars", c.max_document_chars);
  if (j.contains("resynthesis")) {
    const auto& r = j.at("resynthesis");
    c.resynthesis_max_iterations =
        r.value("max_iterations", c.resynthesis_max_iterations);
    c.resynthesis_reference_sample_size =
        r.value("reference_sample_size", c.resynthesis_reference_sample_size);
  }
  if (j.contains("backend")) {
    const auto& b = j.at("backend");
    c.backend.kind = b.value("kind", c.backend.kind);
    c.backend.base_url = b.value("base_url", c.backend.base_url);
    c.backend.chat_model = b.value("chat_model", c.backend.chat_model);
    c.backend.embed_model = b.value("embed_model", c.backend.embed_model);
    c.backend.api_key_env = b.value("api_key_env", c.backend.api_key_env);
    c.backend.max_in_flight = b.value("max_in_flight", c.backend.max_in_flight);
    c.backend.max_retries = b.value("max_retries", c.backend.max_retries);
    c.backend.embed_batch_limit =
        b.value("embed_batch_limit", c.backend.embed_batch_limit);
    c.backend.timeout_seconds = b.value("timeout_seconds", c.backend.timeout_seconds);
  }
  c.seed = j.value("seed", c.seed);
  c.workers = j.value("workers", c.workers);
  c.prompt_dir = j.value("prompt_dir", c.prompt_dir);
  if (j.contains("output")) {
    const auto& o = j.at("output");
    c.ledger_dir = o.value("ledger_dir", c.ledger_dir);
    c.dataset_path = o.value("dataset", c.dataset_path);
    c.export_format = o.value("format", c.export_format);
  }
  return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

ResynthesisPolicy PipelineConfig::resynthesis_policy() const {
  ResynthesisPolicy policy;
  policy.max_iterations = resynthesis_max_iterations;
  policy.reference_sample_size = resynthesis_reference_sample_size;
  policy.profile = named_profile("high-creativity");
  return policy;
}

std::string PipelineConfig::fingerprint() const {
  json j = to_json();
  j.erase("output");
  j.erase("workers");
  j["backend"].erase("max_in_flight");
  j["backend"].erase("max_retries");
  j["backend"].erase("timeout_seconds");
  j["backend"].erase("embed_batch_limit");  // order/cardinality invariant
  j["backend"].erase("api_key_env");
  // dump() emits keys sorted, so the digest is canonical.
  return to_hex(fnv1a(j.dump()));
}

}  // namespace foveate
