#include "foveate/records.hpp"

#include "foveate/errors.hpp"
#include "foveate/rng.hpp"

namespace foveate {

using nlohmann::json;

bool level_matches_provenance(const InstructionRecord& record) {
  switch (record.level) {
    case Level::micro:
      return std::holds_alternative<FoveateElement>(record.provenance);
    case Level::scatter:
      return std::holds_alternative<FoveateGroup>(record.provenance);
    case Level::macro:
      return std::holds_alternative<FoveateSegment>(record.provenance);
  }
  return false;
}

namespace {

std::string provenance_digest(const Provenance& provenance) {
  std::string s;
  if (const auto* e = std::get_if<FoveateElement>(&provenance)) {
    s = "e\x1f" + e->text + "\x1f" + std::string(element_kind_name(e->kind));
  } else if (const auto* g = std::get_if<FoveateGroup>(&provenance)) {
    s = "g";
    for (const auto& m : g->members) s += "\x1f" + m.text;
  } else if (const auto* seg = std::get_if<FoveateSegment>(&provenance)) {
    s = "s\x1f" + seg->excerpt + "\x1f" + std::string(technique_name(seg->technique));
  }
  return s;
}

}  // namespace

std::string make_record_id(const std::string& doc_id, Level level,
                           const Provenance& provenance, int seq) {
  std::uint64_t h = fnv1a(provenance_digest(provenance));
  h = fnv1a("\x1f" + std::to_string(seq), h);
  return doc_id + "#" + std::string(level_name(level)) + "#" + to_hex(h);
}

std::string_view level_name(Level level) {
  switch (level) {
    case Level::micro: return "micro";
    case Level::scatter: return "scatter";
    case Level::macro: return "macro";
  }
  return "micro";
}

Level level_from_name(std::string_view name) {
  if (name == "micro") return Level::micro;
  if (name == "scatter") return Level::scatter;
  if (name == "macro") return Level::macro;
  throw Error("unknown level: " + std::string(name));
}

std::string_view status_name(RecordStatus status) {
  switch (status) {
    case RecordStatus::draft: return "draft";
    case RecordStatus::verified: return "verified";
    case RecordStatus::failed: return "failed";
    case RecordStatus::resynthesized: return "resynthesized";
  }
  return "draft";
}

RecordStatus status_from_name(std::string_view name) {
  if (name == "draft") return RecordStatus::draft;
  if (name == "verified") return RecordStatus::verified;
  if (name == "failed") return RecordStatus::failed;
  if (name == "resynthesized") return RecordStatus::resynthesized;
  throw Error("unknown status: " + std::string(name));
}

std::string_view technique_name(Technique technique) {
  switch (technique) {
    case Technique::metaphor: return "metaphor";
    case Technique::hyperbole: return "hyperbole";
    case Technique::contrastive_foil: return "contrastive_foil";
    case Technique::rhetorical_question: return "rhetorical_question";
    case Technique::citation: return "citation";
  }
  return "metaphor";
}

std::optional<Technique> technique_from_name(std::string_view name) {
  if (name == "metaphor") return Technique::metaphor;
  if (name == "hyperbole") return Technique::hyperbole;
  if (name == "contrastive_foil") return Technique::contrastive_foil;
  if (name == "rhetorical_question") return Technique::rhetorical_question;
  if (name == "citation") return Technique::citation;
  return std::nullopt;
}

std::string_view element_kind_name(ElementKind kind) {
  return kind == ElementKind::entity ? "entity" : "attribute";
}

ElementKind element_kind_from_name(std::string_view name) {
  if (name == "entity") return ElementKind::entity;
  if (name == "attribute") return ElementKind::attribute;
  throw Error("unknown element kind: " + std::string(name));
}

namespace {

json element_to_json(const FoveateElement& e) {
  json j{{"text", e.text}, {"kind", std::string(element_kind_name(e.kind))}};
  if (e.similarity) j["similarity"] = *e.similarity;
  return j;
}

FoveateElement element_from_json(const json& j) {
  FoveateElement e;
  e.text = j.at("text").get<std::string>();
  e.kind = element_kind_from_name(j.at("kind").get<std::string>());
  if (j.contains("similarity")) e.similarity = j.at("similarity").get<double>();
  return e;
}

}  // namespace

json record_to_json(const InstructionRecord& record) {
  json j{
      {"id", record.id},
      {"doc_id", record.doc_id},
      {"level", std::string(level_name(record.level))},
      {"question", record.question},
      {"answer", record.answer},
      {"status", std::string(status_name(record.status))},
      {"attempts", record.attempts},
      {"seq", record.seq},
  };

  json prov;
  if (const auto* e = std::get_if<FoveateElement>(&record.provenance)) {
    prov["element"] = element_to_json(*e);
  } else if (const auto* g = std::get_if<FoveateGroup>(&record.provenance)) {
    json members = json::array();
    for (const auto& m : g->members) members.push_back(element_to_json(m));
    prov["group"] = json{{"members", std::move(members)}};
  } else if (const auto* s = std::get_if<FoveateSegment>(&record.provenance)) {
    prov["segment"] = json{{"excerpt", s->excerpt},
                           {"technique", std::string(technique_name(s->technique))}};
  }
  j["provenance"] = std::move(prov);

  if (!record.history.empty()) {
    json hist = json::array();
    for (const auto& a : record.history) {
      hist.push_back(json{{"round", a.round},
                          {"question", a.question},
                          {"answerable", a.answerable},
                          {"rationale", a.rationale},
                          {"references_used", a.references_used}});
    }
    j["history"] = std::move(hist);
  }
  if (!record.member_coverage.empty()) {
    j["member_coverage"] = record.member_coverage;
  }
  if (record.form_ok) j["form_ok"] = *record.form_ok;
  return j;
}

InstructionRecord record_from_json(const json& j) {
  InstructionRecord r;
  r.id = j.at("id").get<std::string>();
  r.doc_id = j.at("doc_id").get<std::string>();
  r.level = level_from_name(j.at("level").get<std::string>());
  r.question = j.at("question").get<std::string>();
  r.answer = j.at("answer").get<std::string>();
  r.status = status_from_name(j.at("status").get<std::string>());
  r.attempts = j.at("attempts").get<int>();
  r.seq = j.at("seq").get<int>();

  const json& prov = j.at("provenance");
  if (prov.contains("element")) {
    r.provenance = element_from_json(prov.at("element"));
  } else if (prov.contains("group")) {
    FoveateGroup g;
    for (const auto& m : prov.at("group").at("members")) {
      g.members.push_back(element_from_json(m));
    }
    r.provenance = std::move(g);
  } else if (prov.contains("segment")) {
    FoveateSegment s;
    s.excerpt = prov.at("segment").at("excerpt").get<std::string>();
    auto t = technique_from_name(prov.at("segment").at("technique").get<std::string>());
    if (!t) throw Error("unknown technique in record " + r.id);
    s.technique = *t;
    r.provenance = std::move(s);
  } else {
    throw Error("record " + r.id + " has no provenance");
  }

  if (j.contains("history")) {
    for (const auto& a : j.at("history")) {
      AttemptEntry e;
      e.round = a.at("round").get<int>();
      e.question = a.at("question").get<std::string>();
      e.answerable = a.at("answerable").get<bool>();
      e.rationale = a.at("rationale").get<std::string>();
      e.references_used = a.at("references_used").get<int>();
      r.history.push_back(std::move(e));
    }
  }
  if (j.contains("member_coverage")) {
    r.member_coverage = j.at("member_coverage").get<std::vector<bool>>();
  }
  if (j.contains("form_ok")) r.form_ok = j.at("form_ok").get<bool>();

  if (!level_matches_provenance(r)) {
    throw Error("record " + r.id + ": level does not match provenance");
  }
  return r;
}

}  // namespace foveate
