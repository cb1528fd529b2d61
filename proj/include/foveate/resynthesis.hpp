#pragma once

#include <vector>

#include "foveate/rng.hpp"
#include "foveate/synthesis.hpp"

namespace foveate {

struct VerificationVerdict {
  bool answerable = false;
  std::string rationale;  // judge text verbatim, or "unparseable"
};

struct ResynthesisPolicy {
  int max_iterations = 3;
  int reference_sample_size = 2;
  SamplingProfile profile = named_profile("high-creativity");
};

// One judge call over (document, question) only; the stored answer plays no
// part in the verdict. Unparseable judge output fails closed.
VerificationVerdict verify_answerable(const SynthesisContext& ctx,
                                      const Document& doc,
                                      const InstructionRecord& record);

// Repairs one failed record: up to max_iterations rounds, each with a fresh
// uniform sample of reference_sample_size verified exemplars from the pool,
// a high-creativity question rewrite and a re-verification. The answer is
// regenerated only once a rewrite verifies. Transport failures propagate
// without consuming an iteration.
InstructionRecord resynthesize_one(const SynthesisContext& ctx, const Document& doc,
                                   InstructionRecord failed,
                                   const std::vector<InstructionRecord>& pool,
                                   const ResynthesisPolicy& policy, RngStream& rng);

struct FilterResult {
  std::vector<InstructionRecord> verified;  // status verified or resynthesized
  std::vector<InstructionRecord> failed;    // status failed
};

// Verifies every draft; unanswerable drafts go through resynthesize_one with
// the document's already-verified records as the reference pool. The output
// partition is exhaustive and disjoint: no record is dropped or duplicated.
FilterResult run_filter(const SynthesisContext& ctx, const Document& doc,
                        std::vector<InstructionRecord> drafts,
                        const ResynthesisPolicy& policy, RngStream& rng);

}  // namespace foveate
