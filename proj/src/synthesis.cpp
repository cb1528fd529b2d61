#include "foveate/synthesis.hpp"

#include <algorithm>
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

std::string to_lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// One teacher call with a single re-prompt when the reply trims to nothing.
std::string chat_nonempty(const SynthesisContext& ctx, const std::string& user,
                          const SamplingProfile& profile, const char* what) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    ChatExchange exchange = ctx.gateway.chat(ctx.prompts.system, user, profile);
    std::string text = trim(exchange.response_text);
    if (!text.empty()) return text;
    if (attempt == 0) log::warn(std::string(what) + " came back empty, re-prompting");
  }
  throw ParseError(std::string(what) + " was empty after re-prompt");
}

bool contains_ci(const std::string& haystack, const std::string& needle) {
  return to_lower(haystack).find(to_lower(needle)) != std::string::npos;
}

}  // namespace

const std::vector<std::string>& default_imperative_verbs() {
  static const std::vector<std::string> kVerbs = {
      "explain",  "describe", "discuss",   "analyze", "identify",
      "summarize", "compare", "contrast",  "list",    "outline",
      "evaluate", "define",   "interpret", "examine", "assess",
      "illustrate", "justify", "state",    "rewrite", "argue"};
  return kVerbs;
}

std::string regenerate_answer(const SynthesisContext& ctx, const Document& doc,
                              const std::string& question) {
  if (question.empty()) throw Error("regenerate_answer: empty question");
  const std::string user = render_template(
      ctx.prompts.answer_regeneration,
      {{"question", question}, {"document", doc.text}});
  return chat_nonempty(ctx, user, named_profile("normal"), "answer regeneration");
}

InstructionRecord reverse_synthesize(const SynthesisContext& ctx,
                                     const Document& doc,
                                     const FoveateElement& element,
                                     bool regenerate, int seq) {
  const std::string user = render_template(
      ctx.prompts.reverse_question,
      {{"element", element.text}, {"document", doc.text}});
  InstructionRecord record;
  record.question =
      chat_nonempty(ctx, user, named_profile("normal"), "reverse question");
  record.answer =
      regenerate ? regenerate_answer(ctx, doc, record.question) : element.text;
  record.doc_id = doc.id;
  record.level = Level::micro;
  record.provenance = element;
  record.status = RecordStatus::draft;
  record.attempts = 1;
  record.seq = seq;
  record.id = make_record_id(doc.id, Level::micro, record.provenance, seq);
  return record;
}

InstructionRecord direct_synthesize(const SynthesisContext& ctx,
                                    const Document& doc, const FoveateGroup& group,
                                    int seq) {
  if (group.members.size() < 2) {
    throw Error("direct_synthesize: group needs at least 2 members");
  }
  std::string members;
  for (const auto& m : group.members) {
    members += "- " + m.text + "\n";
  }
  if (!members.empty()) members.pop_back();

  const std::string user = render_template(
      ctx.prompts.direct_question,
      {{"members", members}, {"document", doc.text}});
  InstructionRecord record;
  record.question =
      chat_nonempty(ctx, user, named_profile("normal"), "direct question");
  record.answer = regenerate_answer(ctx, doc, record.question);
  record.doc_id = doc.id;
  record.level = Level::scatter;
  record.provenance = group;
  record.status = RecordStatus::draft;
  record.attempts = 1;
  record.seq = seq;
  record.id = make_record_id(doc.id, Level::scatter, record.provenance, seq);

  const std::string joined = record.question + "\n" + record.answer;
  record.member_coverage.reserve(group.members.size());
  for (const auto& m : group.members) {
    record.member_coverage.push_back(contains_ci(joined, m.text));
  }
  return record;
}

InstructionRecord transcribe_synthesize(const SynthesisContext& ctx,
                                        const Document& doc,
                                        const FoveateSegment& segment, int seq) {
  const std::string user = render_template(
      ctx.prompts.transcription_question,
      {{"technique", std::string(technique_name(segment.technique))},
       {"excerpt", segment.excerpt},
       {"document", doc.text}});
  InstructionRecord record;
  record.question =
      chat_nonempty(ctx, user, named_profile("normal"), "transcription rewrite");
  record.answer = regenerate_answer(ctx, doc, record.question);
  record.doc_id = doc.id;
  record.level = Level::macro;
  record.provenance = segment;
  record.status = RecordStatus::draft;
  record.attempts = 1;
  record.seq = seq;
  record.id = make_record_id(doc.id, Level::macro, record.provenance, seq);

  bool ok = !record.question.empty() && record.question.back() == '?';
  if (!ok) {
    std::string first_word = to_lower(record.question.substr(
        0, record.question.find_first_of(" \t\n,:;")));
    while (!first_word.empty() &&
           std::ispunct(static_cast<unsigned char>(first_word.back()))) {
      first_word.pop_back();
    }
    ok = std::find(ctx.imperative_verbs.begin(), ctx.imperative_verbs.end(),
                   first_word) != ctx.imperative_verbs.end();
  }
  record.form_ok = ok;
  if (!ok) {
    log::warn("transcription rewrite for doc " + doc.id +
              " is neither interrogative nor imperative");
  }
  return record;
}

}  // namespace foveate
