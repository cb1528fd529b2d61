#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "foveate/corpus.hpp"
#include "foveate/gateway.hpp"
#include "foveate/prompts.hpp"
#include "foveate/records.hpp"
#include "foveate/rng.hpp"

namespace foveate {

// Document embeddings reused across selection calls; keyed by document id.
class EmbeddingCache {
 public:
  std::optional<EmbeddingVector> get(const std::string& key) const;
  void put(const std::string& key, EmbeddingVector vector);

 private:
  mutable std::mutex mu_;
  std::map<std::string, EmbeddingVector> entries_;
};

struct ExtractionResult {
  std::vector<FoveateElement> elements;  // deduplicated by text, prompt order
  int reprompts = 0;
};

// Asks the teacher for ceil(target_count * overshoot) candidate elements and
// parses the tagged line list. One re-prompt on unparseable output, then
// ParseError. May return fewer than requested if the model under-produces.
ExtractionResult extract_elements(Gateway& gateway, const PromptTemplates& prompts,
                                  const Document& doc, int target_count,
                                  double overshoot);

// Embeds the document and every candidate, then keeps the k candidates with
// the highest cosine similarity to the document, descending, ties broken by
// candidate order. Fewer than k candidates means all of them, sorted.
std::vector<FoveateElement> select_elements(Gateway& gateway, const Document& doc,
                                            const std::vector<FoveateElement>& candidates,
                                            std::size_t k,
                                            EmbeddingCache* cache = nullptr);

struct GroupingResult {
  std::vector<FoveateGroup> groups;
  std::vector<std::string> warnings;
};

// Draws a size per group from size_dist and samples that many distinct
// elements uniformly without replacement. Groups may overlap each other.
// Sizes above the element count clamp with a warning. Deterministic for a
// fixed rng stream.
GroupingResult form_groups(const std::vector<FoveateElement>& elements,
                           int num_groups, const std::map<int, double>& size_dist,
                           RngStream& rng);

struct SegmentExtractionResult {
  std::vector<FoveateSegment> segments;
  int reprompts = 0;
  std::vector<std::string> dropped;  // lines with techniques outside the set
};

// Asks the teacher for technique-tagged spans. "NONE" (or no spans) is a
// valid empty result; pairs outside the five-technique set are dropped with
// a warning; shapeless output gets one re-prompt, then ParseError.
SegmentExtractionResult extract_segments(Gateway& gateway,
                                         const PromptTemplates& prompts,
                                         const Document& doc);

}  // namespace foveate
