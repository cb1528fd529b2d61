#include "foveate/corpus.hpp"

#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "foveate/errors.hpp"

namespace foveate {

using nlohmann::json;

namespace {

bool is_blank(const std::string& line) {
  for (char c : line) {
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

std::string trimmed(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

const Document* Corpus::find(const std::string& id) const {
  for (const auto& d : documents) {
    if (d.id == id) return &d;
  }
  return nullptr;
}

std::size_t Corpus::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < documents.size(); ++i) {
    if (documents[i].id == id) return i;
  }
  return static_cast<std::size_t>(-1);
}

Corpus load_corpus(const std::filesystem::path& path,
                   std::optional<std::size_t> limit) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file: " + path.string());

  Corpus corpus;
  corpus.name = path.stem().string();
  std::unordered_set<std::string> seen_ids;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (limit && corpus.documents.size() >= *limit) break;
    if (is_blank(line)) continue;

    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(path.string() + ":" + std::to_string(line_no) +
                  ": malformed record: " + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j.contains("text")) {
      throw Error(path.string() + ":" + std::to_string(line_no) +
                  ": record must be an object with id and text fields");
    }

    Document doc;
    try {
      doc.id = j.at("id").get<std::string>();
      doc.text = j.at("text").get<std::string>();
      if (j.contains("source") && !j.at("source").is_null()) {
        doc.source = j.at("source").get<std::string>();
      }
      if (j.contains("meta") && !j.at("meta").is_null()) {
        doc.meta = j.at("meta").get<std::map<std::string, std::string>>();
      }
    } catch (const json::exception& e) {
      throw Error(path.string() + ":" + std::to_string(line_no) +
                  ": malformed record: " + e.what());
    }

    if (doc.id.empty()) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": empty id");
    }
    if (trimmed(doc.text).empty()) {
      throw Error(path.string() + ":" + std::to_string(line_no) +
                  ": empty text for document " + doc.id);
    }
    if (!seen_ids.insert(doc.id).second) {
      throw Error(path.string() + ":" + std::to_string(line_no) +
                  ": duplicate document id " + doc.id);
    }
    corpus.documents.push_back(std::move(doc));
  }

  if (corpus.documents.empty()) {
    throw Error("empty corpus: " + path.string());
  }
  return corpus;
}

ExportFormat export_format_from_string(const std::string& name) {
  if (name == "sft-triples") return ExportFormat::sft_triples;
  if (name == "full-provenance") return ExportFormat::full_provenance;
  throw ConfigError("unknown export format: " + name);
}

std::string export_format_name(ExportFormat format) {
  return format == ExportFormat::sft_triples ? "sft-triples" : "full-provenance";
}

namespace {

bool exportable_as_triple(const InstructionRecord& r) {
  return r.status == RecordStatus::verified ||
         r.status == RecordStatus::resynthesized;
}

}  // namespace

ExportSummary export_dataset(const std::vector<InstructionRecord>& records,
                             ExportFormat format,
                             const std::filesystem::path& path) {
  if (records.empty()) throw Error("export: no records to write");

  if (format == ExportFormat::sft_triples) {
    std::size_t keep = 0;
    for (const auto& r : records) {
      if (exportable_as_triple(r)) ++keep;
    }
    if (keep == 0) {
      throw Error("export: zero verified records for sft-triples output");
    }
  }

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot open output file: " + path.string());

  ExportSummary summary;
  for (const auto& r : records) {
    if (format == ExportFormat::sft_triples) {
      if (!exportable_as_triple(r)) {
        ++summary.skipped;
        continue;
      }
      if (r.question.empty() || r.answer.empty()) {
        throw Error("export: verified record " + r.id + " has empty fields");
      }
      json row{{"instruction", r.question}, {"input", ""}, {"output", r.answer}};
      out << row.dump() << '\n';
    } else {
      out << record_to_json(r).dump() << '\n';
    }
    ++summary.written;
  }

  out.flush();
  if (!out) throw Error("write failed: " + path.string());
  return summary;
}

std::vector<InstructionRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open records file: " + path.string());
  std::vector<InstructionRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    try {
      records.push_back(record_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error(path.string() + ":" + std::to_string(line_no) +
                  ": malformed record: " + e.what());
    }
  }
  return records;
}

}  // namespace foveate
