#pragma once

#include <string>
#include <vector>

#include "foveate/corpus.hpp"
#include "foveate/gateway.hpp"
#include "foveate/prompts.hpp"
#include "foveate/records.hpp"

namespace foveate {

// First words of imperative rewrites that pass the transcription form check.
const std::vector<std::string>& default_imperative_verbs();

struct SynthesisContext {
  Gateway& gateway;
  const PromptTemplates& prompts;
  const std::vector<std::string>& imperative_verbs = default_imperative_verbs();
};

// One teacher call grounded in the full document under the "normal" profile.
std::string regenerate_answer(const SynthesisContext& ctx, const Document& doc,
                              const std::string& question);

// Reverse synthesis: the element is the intended answer. With regenerate on
// (the default) a second call produces a fluent grounded answer; with it off
// the answer is the element text byte-for-byte.
InstructionRecord reverse_synthesize(const SynthesisContext& ctx,
                                     const Document& doc,
                                     const FoveateElement& element,
                                     bool regenerate, int seq);

// Direct synthesis: one question that involves every group member, answer
// regenerated from the document. Member mention in question-or-answer is
// recorded per member as a soft signal, never a failure.
InstructionRecord direct_synthesize(const SynthesisContext& ctx,
                                    const Document& doc, const FoveateGroup& group,
                                    int seq);

// Transcription synthesis: rewrites the declarative excerpt as a question or
// imperative, answer regenerated from the document. form_ok records whether
// the rewrite looks interrogative/imperative.
InstructionRecord transcribe_synthesize(const SynthesisContext& ctx,
                                        const Document& doc,
                                        const FoveateSegment& segment, int seq);

}  // namespace foveate
