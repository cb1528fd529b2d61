#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace foveate {

enum class ElementKind { entity, attribute };

// Entity or attribute phrase pulled from a document; the atomic unit of
// micro-level synthesis. similarity is filled by selection, absent before.
struct FoveateElement {
  std::string text;
  ElementKind kind = ElementKind::entity;
  std::optional<double> similarity;

  bool operator==(const FoveateElement&) const = default;
};

// Small random combination of elements whose joint relationship seeds one
// scatter-level instruction. Members are pairwise distinct by text.
struct FoveateGroup {
  std::vector<FoveateElement> members;

  bool operator==(const FoveateGroup&) const = default;
};

enum class Technique {
  metaphor,
  hyperbole,
  contrastive_foil,
  rhetorical_question,
  citation,
};

struct FoveateSegment {
  std::string excerpt;
  Technique technique = Technique::metaphor;

  bool operator==(const FoveateSegment&) const = default;
};

enum class Level { micro, scatter, macro };

enum class RecordStatus { draft, verified, failed, resynthesized };

// One verification or re-synthesis round. Round 0 is the initial draft
// verification; rounds >= 1 are retries.
struct AttemptEntry {
  int round = 0;
  std::string question;
  bool answerable = false;
  std::string rationale;
  int references_used = 0;

  bool operator==(const AttemptEntry&) const = default;
};

using Provenance = std::variant<FoveateElement, FoveateGroup, FoveateSegment>;

struct InstructionRecord {
  std::string id;
  std::string doc_id;
  Level level = Level::micro;
  std::string question;
  std::string answer;
  Provenance provenance;
  RecordStatus status = RecordStatus::draft;
  int attempts = 1;
  int seq = 0;  // ordinal within (doc, level); fixes export order
  std::vector<AttemptEntry> history;
  std::vector<bool> member_coverage;  // scatter only: member mentioned in Q/A
  std::optional<bool> form_ok;        // macro only: interrogative/imperative check

  bool operator==(const InstructionRecord&) const = default;
};

// micro <=> element, scatter <=> group, macro <=> segment.
bool level_matches_provenance(const InstructionRecord& record);

std::string make_record_id(const std::string& doc_id, Level level,
                           const Provenance& provenance, int seq);

std::string_view level_name(Level level);
Level level_from_name(std::string_view name);
std::string_view status_name(RecordStatus status);
RecordStatus status_from_name(std::string_view name);
std::string_view technique_name(Technique technique);
std::optional<Technique> technique_from_name(std::string_view name);
std::string_view element_kind_name(ElementKind kind);
ElementKind element_kind_from_name(std::string_view name);

nlohmann::json record_to_json(const InstructionRecord& record);
InstructionRecord record_from_json(const nlohmann::json& j);

}  // namespace foveate
