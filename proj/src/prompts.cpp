#include "foveate/prompts.hpp"

#include <fstream>
#include <sstream>

#include "foveate/errors.hpp"

namespace foveate {

namespace {

// The "Text:" line must stay last in each template: the document is appended
// verbatim and untruncated, and downstream parsing of scripted transcripts
// relies on it being the tail of the prompt.

constexpr std::string_view kSystem =
    "You are a data synthesis assistant. Work strictly from the text the user "
    "provides; never rely on outside knowledge.";

constexpr std::string_view kElementExtraction =
    R"(List the {count} most important foveate elements of the text: the entities it mentions and the attributes of those entities. Prefer short, specific phrases taken from the text.
Respond with one element per line in the form "entity: <phrase>" or "attribute: <phrase>" and nothing else.

Text:
{document})";

constexpr std::string_view kSegmentExtraction =
    R"(Identify spans of the text that employ one of these writing techniques: metaphor, hyperbole, contrastive foil, rhetorical question, citation.
Respond with one span per line in the form "<technique>: <verbatim excerpt>" and nothing else.
If the text contains no such spans, respond with exactly "NONE".

Text:
{document})";

constexpr std::string_view kReverseQuestion =
    R"(Write one question about the text whose correct answer is the answer phrase below. The question must be answerable from the text alone. Respond with the question only.

Answer phrase: {element}

Text:
{document})";

constexpr std::string_view kDirectQuestion =
    R"(Write one question about the text that necessarily involves every one of the key phrases below, probing how they relate to each other. Respond with the question only.

Key phrases:
{members}

Text:
{document})";

constexpr std::string_view kTranscriptionQuestion =
    R"(The excerpt below uses the writing technique "{technique}". Rewrite it as a single question or as an imperative writing task that asks about what the excerpt conveys. Respond with the rewritten instruction only.

Technique: {technique}
Excerpt: {excerpt}

Text:
{document})";

constexpr std::string_view kAnswerRegeneration =
    R"(Answer the question using only the text. Respond with a fluent, complete answer and nothing else.

Question: {question}

Text:
{document})";

constexpr std::string_view kVerification =
    R"(Decide whether the question below can be fully answered using only the text. Respond with 'Yes' or 'No'. You may add a brief reason after the verdict.

Question: {question}

Text:
{document})";

constexpr std::string_view kResynthesisQuestion =
    R"(The failed question below could not be answered from the text. Write one new question that can be fully answered using only the text. Be creative: take a different angle than the failed question. Respond with the question only.
{references}
Failed question: {question}

Text:
{document})";

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read prompt template: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  // Editors append a final newline; it is not part of the prompt.
  if (text.size() >= 2 && text.compare(text.size() - 2, 2, "\r\n") == 0) {
    text.erase(text.size() - 2);
  } else if (!text.empty() && text.back() == '\n') {
    text.pop_back();
  }
  return text;
}

void maybe_override(std::string& slot, const std::filesystem::path& dir,
                    const char* name) {
  auto path = dir / (std::string(name) + ".txt");
  if (std::filesystem::exists(path)) slot = read_file(path);
}

}  // namespace

PromptTemplates PromptTemplates::defaults() {
  PromptTemplates t;
  t.system = std::string(kSystem);
  t.element_extraction = std::string(kElementExtraction);
  t.segment_extraction = std::string(kSegmentExtraction);
  t.reverse_question = std::string(kReverseQuestion);
  t.direct_question = std::string(kDirectQuestion);
  t.transcription_question = std::string(kTranscriptionQuestion);
  t.answer_regeneration = std::string(kAnswerRegeneration);
  t.verification = std::string(kVerification);
  t.resynthesis_question = std::string(kResynthesisQuestion);
  return t;
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ConfigError("prompt template directory not found: " + dir.string());
  }
  PromptTemplates t = defaults();
  maybe_override(t.system, dir, "system");
  maybe_override(t.element_extraction, dir, "element_extraction");
  maybe_override(t.segment_extraction, dir, "segment_extraction");
  maybe_override(t.reverse_question, dir, "reverse_question");
  maybe_override(t.direct_question, dir, "direct_question");
  maybe_override(t.transcription_question, dir, "transcription_question");
  maybe_override(t.answer_regeneration, dir, "answer_regeneration");
  maybe_override(t.verification, dir, "verification");
  maybe_override(t.resynthesis_question, dir, "resynthesis_question");
  return t;
}

std::string render_template(std::string_view tpl,
                            const std::map<std::string, std::string>& slots) {
  std::string out(tpl);
  for (const auto& [name, value] : slots) {
    const std::string placeholder = "{" + name + "}";
    std::size_t pos = 0;
    while ((pos = out.find(placeholder, pos)) != std::string::npos) {
      out.replace(pos, placeholder.size(), value);
      pos += value.size();
    }
  }
  return out;
}

}  // namespace foveate
