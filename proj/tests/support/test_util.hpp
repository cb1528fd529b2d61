#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "foveate/records.hpp"
#include "foveate/rng.hpp"

namespace testutil {

// Self-cleaning temp directory for file-based tests.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("foveate_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  out << body;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Random records exercising every provenance shape and optional field; used
// by the export/import round-trip property.
inline foveate::InstructionRecord random_record(foveate::RngStream& rng, int seq) {
  using namespace foveate;
  static const std::vector<std::string> kWords = {
      "quantum", "processor", "speed",  "luxury", "market", "design",
      "system",  "latency",   "signal", "memory", "core",   "pipeline"};
  auto word = [&] { return kWords[rng.next_index(kWords.size())]; };
  auto phrase = [&](std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) {
      if (i) s += ' ';
      s += word();
    }
    return s;
  };

  InstructionRecord r;
  r.doc_id = "doc-" + std::to_string(rng.next_index(5));
  r.question = "What about " + phrase(2 + rng.next_index(4)) + "?";
  r.answer = phrase(3 + rng.next_index(6));
  r.seq = seq;
  r.attempts = 1 + static_cast<int>(rng.next_index(4));
  switch (rng.next_index(4)) {
    case 0: r.status = RecordStatus::draft; break;
    case 1: r.status = RecordStatus::verified; break;
    case 2: r.status = RecordStatus::failed; break;
    default: r.status = RecordStatus::resynthesized; break;
  }

  switch (rng.next_index(3)) {
    case 0: {
      FoveateElement e;
      e.text = phrase(1 + rng.next_index(2));
      e.kind = rng.next_index(2) == 0 ? ElementKind::entity : ElementKind::attribute;
      if (rng.next_index(2) == 0) e.similarity = rng.next_double() * 2.0 - 1.0;
      r.level = Level::micro;
      r.provenance = e;
      break;
    }
    case 1: {
      FoveateGroup g;
      std::size_t members = 2 + rng.next_index(3);
      for (std::size_t i = 0; i < members; ++i) {
        FoveateElement e;
        e.text = word() + "-" + std::to_string(i);
        e.kind = ElementKind::entity;
        g.members.push_back(std::move(e));
      }
      r.level = Level::scatter;
      r.provenance = g;
      for (std::size_t i = 0; i < members; ++i) {
        r.member_coverage.push_back(rng.next_index(2) == 0);
      }
      break;
    }
    default: {
      FoveateSegment s;
      s.excerpt = phrase(4);
      s.technique = static_cast<Technique>(rng.next_index(5));
      r.level = Level::macro;
      r.provenance = s;
      r.form_ok = rng.next_index(2) == 0;
      break;
    }
  }

  std::size_t rounds = rng.next_index(3);
  for (std::size_t i = 0; i <= rounds; ++i) {
    AttemptEntry a;
    a.round = static_cast<int>(i);
    a.question = "Round " + std::to_string(i) + ": " + phrase(3) + "?";
    a.answerable = rng.next_index(2) == 0;
    a.rationale = rng.next_index(3) == 0 ? "unparseable" : ("Yes, " + phrase(2));
    a.references_used = static_cast<int>(rng.next_index(3));
    r.history.push_back(std::move(a));
  }

  r.id = make_record_id(r.doc_id, r.level, r.provenance, r.seq);
  return r;
}

}  // namespace testutil
