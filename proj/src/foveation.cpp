#include "foveate/foveation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "foveate/log.hpp"

namespace foveate {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string to_lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Strips "- ", "* " and "3." / "3)" style list prefixes.
std::string strip_list_prefix(std::string line) {
  if (line.size() >= 2 && (line[0] == '-' || line[0] == '*') && line[1] == ' ') {
    return trim(line.substr(2));
  }
  std::size_t i = 0;
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
  if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) {
    return trim(line.substr(i + 1));
  }
  return line;
}

std::vector<FoveateElement> parse_elements(const std::string& response) {
  std::vector<FoveateElement> elements;
  std::unordered_set<std::string> seen;
  std::istringstream in(response);
  std::string raw;
  while (std::getline(in, raw)) {
    std::string line = strip_list_prefix(trim(raw));
    if (line.empty()) continue;
    FoveateElement element;
    std::string lower = to_lower(line);
    if (lower.rfind("entity:", 0) == 0) {
      element.kind = ElementKind::entity;
      element.text = trim(line.substr(7));
    } else if (lower.rfind("attribute:", 0) == 0) {
      element.kind = ElementKind::attribute;
      element.text = trim(line.substr(10));
    } else {
      element.kind = ElementKind::entity;  // untagged lines count as entities
      element.text = line;
    }
    if (element.text.empty()) continue;
    if (!seen.insert(element.text).second) continue;
    elements.push_back(std::move(element));
  }
  return elements;
}

}  // namespace

std::optional<EmbeddingVector> EmbeddingCache::get(const std::string& key) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void EmbeddingCache::put(const std::string& key, EmbeddingVector vector) {
  std::lock_guard<std::mutex> lock(mu_);
  entries_[key] = std::move(vector);
}

ExtractionResult extract_elements(Gateway& gateway, const PromptTemplates& prompts,
                                  const Document& doc, int target_count,
                                  double overshoot) {
  if (target_count < 1) throw Error("extract_elements: target_count must be >= 1");
  if (overshoot < 1.0) throw Error("extract_elements: overshoot must be >= 1");

  const int ask = static_cast<int>(
      std::ceil(static_cast<double>(target_count) * overshoot));
  const std::string user = render_template(
      prompts.element_extraction,
      {{"count", std::to_string(ask)}, {"document", doc.text}});
  const SamplingProfile profile = named_profile("normal");

  ExtractionResult result;
  for (int attempt = 0; attempt < 2; ++attempt) {
    ChatExchange exchange = gateway.chat(prompts.system, user, profile);
    result.elements = parse_elements(exchange.response_text);
    if (!result.elements.empty()) return result;
    if (attempt == 0) {
      log::warn("element extraction for doc " + doc.id +
                " was unparseable, re-prompting");
      result.reprompts = 1;
    }
  }
  throw ParseError("element extraction for doc " + doc.id +
                   " produced no candidates after re-prompt");
}

std::vector<FoveateElement> select_elements(Gateway& gateway, const Document& doc,
                                            const std::vector<FoveateElement>& candidates,
                                            std::size_t k,
                                            EmbeddingCache* cache) {
  if (candidates.empty()) throw Error("select_elements: no candidates");

  EmbeddingVector doc_vector;
  std::vector<EmbeddingVector> candidate_vectors;
  std::optional<EmbeddingVector> cached =
      cache ? cache->get(doc.id) : std::nullopt;

  std::vector<std::string> texts;
  if (!cached) texts.push_back(doc.text);
  for (const auto& c : candidates) texts.push_back(c.text);
  std::vector<EmbeddingVector> vectors = gateway.embed(texts);

  std::size_t offset = 0;
  if (cached) {
    doc_vector = std::move(*cached);
  } else {
    doc_vector = std::move(vectors.front());
    offset = 1;
    if (cache) cache->put(doc.id, doc_vector);
  }
  candidate_vectors.assign(vectors.begin() + static_cast<std::ptrdiff_t>(offset),
                           vectors.end());

  std::vector<FoveateElement> scored = candidates;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    scored[i].similarity = cosine(doc_vector, candidate_vectors[i]);
  }
  // stable_sort keeps candidate order for equal similarities.
  std::stable_sort(scored.begin(), scored.end(),
                   [](const FoveateElement& a, const FoveateElement& b) {
                     return *a.similarity > *b.similarity;
                   });
  if (scored.size() > k) scored.resize(k);
  return scored;
}

GroupingResult form_groups(const std::vector<FoveateElement>& elements,
                           int num_groups, const std::map<int, double>& size_dist,
                           RngStream& rng) {
  // Duplicate texts would let one group hold the same phrase twice.
  std::vector<FoveateElement> pool;
  {
    std::unordered_set<std::string> seen;
    for (const auto& e : elements) {
      if (seen.insert(e.text).second) pool.push_back(e);
    }
  }
  if (pool.size() < 2) throw Error("form_groups: need at least 2 distinct elements");
  if (num_groups < 0) throw Error("form_groups: negative group count");
  if (size_dist.empty()) throw ConfigError("form_groups: empty size distribution");

  double sum = 0.0;
  for (const auto& [size, prob] : size_dist) {
    if (size < 2) throw ConfigError("form_groups: group sizes must be >= 2");
    if (prob < 0.0) throw ConfigError("form_groups: negative probability");
    sum += prob;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("form_groups: size distribution must sum to 1");
  }

  GroupingResult result;
  for (int g = 0; g < num_groups; ++g) {
    double u = rng.next_double();
    int size = size_dist.rbegin()->first;
    double cumulative = 0.0;
    for (const auto& [s, prob] : size_dist) {
      cumulative += prob;
      if (u < cumulative) {
        size = s;
        break;
      }
    }
    if (static_cast<std::size_t>(size) > pool.size()) {
      result.warnings.push_back("group size " + std::to_string(size) +
                                " clamped to " + std::to_string(pool.size()));
      log::warn(result.warnings.back());
      size = static_cast<int>(pool.size());
    }
    FoveateGroup group;
    for (std::size_t idx : rng.sample_without_replacement(
             pool.size(), static_cast<std::size_t>(size))) {
      group.members.push_back(pool[idx]);
    }
    result.groups.push_back(std::move(group));
  }
  return result;
}

namespace {

// A line is "shaped" when it looks like "<tag>: <excerpt>" with a short
// alphabetic tag. Shaped lines with unknown techniques are dropped; a
// response with no shaped lines at all is unparseable.
struct SegmentLine {
  bool shaped = false;
  std::optional<Technique> technique;
  std::string excerpt;
  std::string tag;
};

SegmentLine parse_segment_line(const std::string& raw) {
  SegmentLine parsed;
  std::string line = strip_list_prefix(trim(raw));
  auto colon = line.find(':');
  if (colon == std::string::npos || colon == 0 || colon > 32) return parsed;
  std::string tag = trim(line.substr(0, colon));
  for (char c : tag) {
    if (!std::isalpha(static_cast<unsigned char>(c)) && c != ' ' && c != '_' &&
        c != '-') {
      return parsed;
    }
  }
  std::string excerpt = trim(line.substr(colon + 1));
  if (excerpt.empty()) return parsed;
  parsed.shaped = true;
  parsed.tag = tag;
  parsed.excerpt = std::move(excerpt);
  std::string normalized = to_lower(tag);
  std::replace(normalized.begin(), normalized.end(), ' ', '_');
  std::replace(normalized.begin(), normalized.end(), '-', '_');
  parsed.technique = technique_from_name(normalized);
  return parsed;
}

}  // namespace

SegmentExtractionResult extract_segments(Gateway& gateway,
                                         const PromptTemplates& prompts,
                                         const Document& doc) {
  const std::string user =
      render_template(prompts.segment_extraction, {{"document", doc.text}});
  const SamplingProfile profile = named_profile("normal");

  SegmentExtractionResult result;
  for (int attempt = 0; attempt < 2; ++attempt) {
    ChatExchange exchange = gateway.chat(prompts.system, user, profile);
    std::string body = trim(exchange.response_text);
    if (body.empty() || to_lower(body) == "none") {
      return result;  // explicit empty result
    }

    result.segments.clear();
    result.dropped.clear();
    bool any_shaped = false;
    std::istringstream in(body);
    std::string line;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      SegmentLine parsed = parse_segment_line(line);
      if (!parsed.shaped) continue;
      any_shaped = true;
      if (!parsed.technique) {
        result.dropped.push_back(parsed.tag);
        log::warn("segment for doc " + doc.id + " dropped: technique \"" +
                  parsed.tag + "\" outside the closed set");
        continue;
      }
      result.segments.push_back(FoveateSegment{parsed.excerpt, *parsed.technique});
    }
    if (any_shaped) return result;
    if (attempt == 0) {
      log::warn("segment extraction for doc " + doc.id +
                " was unparseable, re-prompting");
      result.reprompts = 1;
    }
  }
  throw ParseError("segment extraction for doc " + doc.id +
                   " produced unparseable output after re-prompt");
}

}  // namespace foveate
