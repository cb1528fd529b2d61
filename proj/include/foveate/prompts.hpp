#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace foveate {

// Editable prompt assets for extraction and synthesis. Placeholders use
// {name} syntax; render_template substitutes them literally. Judge prompts
// are deliberately NOT here: they ship as fixed constants in judge.hpp.
struct PromptTemplates {
  std::string system;
  std::string element_extraction;   // {count} {document}
  std::string segment_extraction;   // {document}
  std::string reverse_question;     // {element} {document}
  std::string direct_question;      // {members} {document}
  std::string transcription_question;  // {technique} {excerpt} {document}
  std::string answer_regeneration;  // {question} {document}
  std::string verification;         // {question} {document}
  std::string resynthesis_question; // {references} {question} {document}

  static PromptTemplates defaults();

  // Defaults overridden by any matching <name>.txt found in dir.
  static PromptTemplates load(const std::filesystem::path& dir);
};

std::string render_template(std::string_view tpl,
                            const std::map<std::string, std::string>& slots);

}  // namespace foveate
