#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "foveate/records.hpp"

namespace foveate {

// One unsupervised text; the unit of synthesis.
struct Document {
  std::string id;
  std::string text;
  std::string source;
  std::map<std::string, std::string> meta;

  bool operator==(const Document&) const = default;
};

struct Corpus {
  std::string name;
  std::vector<Document> documents;

  const Document* find(const std::string& id) const;
  // Position of a document in file order; npos when absent.
  std::size_t index_of(const std::string& id) const;
};

// Line-delimited records, one JSON object per line with fields id/text and
// optional source/meta. Deterministic and order-preserving; ids must be
// unique and texts non-empty after trimming. Errors cite the line number.
Corpus load_corpus(const std::filesystem::path& path,
                   std::optional<std::size_t> limit = std::nullopt);

enum class ExportFormat { sft_triples, full_provenance };

ExportFormat export_format_from_string(const std::string& name);
std::string export_format_name(ExportFormat format);

struct ExportSummary {
  std::size_t written = 0;
  std::size_t skipped = 0;
};

// sft-triples keeps only successfully verified records (status verified or
// resynthesized) as {"instruction","input","output"} rows; full-provenance
// writes every record completely and round-trips through read_records.
ExportSummary export_dataset(const std::vector<InstructionRecord>& records,
                             ExportFormat format,
                             const std::filesystem::path& path);

std::vector<InstructionRecord> read_records(const std::filesystem::path& path);

}  // namespace foveate
