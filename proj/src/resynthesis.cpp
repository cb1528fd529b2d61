#include "foveate/resynthesis.hpp"

#include <cctype>

#include "foveate/log.hpp"

namespace foveate {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// First whitespace-delimited token, surrounding punctuation stripped,
// lowercased. "**Yes**, because..." parses as "yes".
std::string first_token_lower(const std::string& text) {
  std::string t = trim(text);
  auto end = t.find_first_of(" \t\r\n");
  if (end != std::string::npos) t.resize(end);
  std::size_t b = 0;
  std::size_t e = t.size();
  while (b < e && std::ispunct(static_cast<unsigned char>(t[b]))) ++b;
  while (e > b && std::ispunct(static_cast<unsigned char>(t[e - 1]))) --e;
  std::string out;
  for (std::size_t i = b; i < e; ++i) {
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(t[i])));
  }
  return out;
}

std::string render_references(const std::vector<const InstructionRecord*>& refs) {
  if (refs.empty()) return "";
  std::string block = "\nExamples of questions that worked for this text:\n";
  for (const auto* r : refs) {
    block += "- " + r->question + "\n";
  }
  return block;
}

}  // namespace

VerificationVerdict verify_answerable(const SynthesisContext& ctx,
                                      const Document& doc,
                                      const InstructionRecord& record) {
  if (record.question.empty()) throw Error("verify_answerable: empty question");
  const std::string user = render_template(
      ctx.prompts.verification,
      {{"question", record.question}, {"document", doc.text}});
  ChatExchange exchange =
      ctx.gateway.chat(ctx.prompts.system, user, named_profile("normal"));

  VerificationVerdict verdict;
  std::string token = first_token_lower(exchange.response_text);
  if (token == "yes") {
    verdict.answerable = true;
    verdict.rationale = exchange.response_text;
  } else if (token == "no") {
    verdict.answerable = false;
    verdict.rationale = exchange.response_text;
  } else {
    verdict.answerable = false;  // fail closed
    verdict.rationale = "unparseable";
  }
  return verdict;
}

InstructionRecord resynthesize_one(const SynthesisContext& ctx, const Document& doc,
                                   InstructionRecord failed,
                                   const std::vector<InstructionRecord>& pool,
                                   const ResynthesisPolicy& policy, RngStream& rng) {
  if (policy.max_iterations < 1) {
    throw ConfigError("resynthesize_one: max_iterations must be >= 1");
  }
  if (policy.reference_sample_size < 0) {
    throw ConfigError("resynthesize_one: negative reference_sample_size");
  }

  // The failed record itself can never serve as its own exemplar.
  std::vector<const InstructionRecord*> eligible;
  for (const auto& r : pool) {
    if (r.id != failed.id) eligible.push_back(&r);
  }
  if (eligible.empty() && policy.reference_sample_size > 0) {
    log::warn("resynthesis of " + failed.id + " proceeding with zero references");
  }

  InstructionRecord record = std::move(failed);
  int next_round = 1;
  for (const auto& h : record.history) {
    if (h.round >= next_round) next_round = h.round + 1;
  }

  for (int i = 0; i < policy.max_iterations; ++i, ++next_round) {
    // Fresh sample every round.
    const std::size_t want = std::min<std::size_t>(
        eligible.size(), static_cast<std::size_t>(policy.reference_sample_size));
    std::vector<const InstructionRecord*> refs;
    for (std::size_t idx : rng.sample_without_replacement(eligible.size(), want)) {
      refs.push_back(eligible[idx]);
    }

    const std::string user = render_template(
        ctx.prompts.resynthesis_question,
        {{"references", render_references(refs)},
         {"question", record.question},
         {"document", doc.text}});
    std::string question;
    {
      ChatExchange exchange = ctx.gateway.chat(ctx.prompts.system, user, policy.profile);
      question = trim(exchange.response_text);
      if (question.empty()) {
        ChatExchange again = ctx.gateway.chat(ctx.prompts.system, user, policy.profile);
        question = trim(again.response_text);
      }
      if (question.empty()) {
        throw ParseError("re-synthesis for " + record.id +
                         " produced an empty question");
      }
    }

    InstructionRecord candidate = record;
    candidate.question = question;
    VerificationVerdict verdict = verify_answerable(ctx, doc, candidate);

    // All calls for this round succeeded, so the attempt counts now; a
    // transport failure above propagates without touching the record.
    record.attempts += 1;
    record.history.push_back(AttemptEntry{next_round, question, verdict.answerable,
                                          verdict.rationale,
                                          static_cast<int>(refs.size())});
    if (verdict.answerable) {
      record.question = question;
      record.answer = regenerate_answer(ctx, doc, question);
      record.status = RecordStatus::resynthesized;
      return record;
    }
  }

  record.status = RecordStatus::failed;
  return record;
}

FilterResult run_filter(const SynthesisContext& ctx, const Document& doc,
                        std::vector<InstructionRecord> drafts,
                        const ResynthesisPolicy& policy, RngStream& rng) {
  FilterResult result;
  for (auto& draft : drafts) {
    if (draft.doc_id != doc.id) {
      throw Error("run_filter: record " + draft.id + " does not belong to doc " +
                  doc.id);
    }
    VerificationVerdict verdict = verify_answerable(ctx, doc, draft);
    draft.history.push_back(
        AttemptEntry{0, draft.question, verdict.answerable, verdict.rationale, 0});
    if (verdict.answerable) {
      draft.status = RecordStatus::verified;
      result.verified.push_back(std::move(draft));
      continue;
    }
    InstructionRecord repaired = resynthesize_one(ctx, doc, std::move(draft),
                                                  result.verified, policy, rng);
    if (repaired.status == RecordStatus::resynthesized) {
      result.verified.push_back(std::move(repaired));
    } else {
      result.failed.push_back(std::move(repaired));
    }
  }
  return result;
}

}  // namespace foveate
