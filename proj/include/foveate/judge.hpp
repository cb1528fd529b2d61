#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "foveate/corpus.hpp"
#include "foveate/gateway.hpp"
#include "foveate/rng.hpp"

namespace foveate {

// Judge prompt texts are fixed constants, not editable assets: downstream
// win rates and quality scores are only comparable when these bytes never
// drift. Tests hold independent golden copies.
namespace judge_prompts {

const std::string& difficulty_system();
std::string difficulty_user(const std::string& content, const std::string& set1,
                            const std::string& set2);

const std::string& accuracy_system();
std::string accuracy_user(const std::string& question,
                          const std::string& ground_truth,
                          const std::string& generated);

const std::string& regeneration_system();
std::string regeneration_user(const std::string& question,
                              const std::string& answer);

// "1. q1\n2. q2\n..." — how an instruction set fills a prompt slot.
std::string serialize_instruction_set(const std::vector<std::string>& questions);

}  // namespace judge_prompts

enum class TrialWinner { a, b, invalid };

struct HeadToHeadTrial {
  std::string doc_id;
  std::string set_a_source;
  std::string set_b_source;
  int position_of_a = 1;  // 1 or 2, drawn from the seeded stream
  std::string judge_raw;  // verbatim judge output
  TrialWinner winner = TrialWinner::invalid;
};

// One anonymized, position-randomized difficulty trial. Both sets are
// truncated to the smaller size so the comparison stays controlled. The
// judge reply must be a lone "1" or "2" (whitespace-tolerant); anything else
// is an invalid trial.
HeadToHeadTrial judge_difficulty(Gateway& gateway, const Document& doc,
                                 std::vector<std::string> set_a,
                                 std::vector<std::string> set_b,
                                 const std::string& label_a,
                                 const std::string& label_b, RngStream& rng);

struct WinRateReport {
  long wins = 0;
  long losses = 0;
  long invalid = 0;
  double win_rate = 0.0;  // wins / (wins + losses); invalid trials excluded

  // "70.64%"
  std::string percent_string() const;
};

WinRateReport win_rate(const std::vector<HeadToHeadTrial>& trials,
                       const std::string& champion);

// Multiset token recall of the ground truth inside the generated answer,
// using the shared tokenizer. Errors when the ground truth tokenizes empty.
double recall_score(const std::string& generated, const std::string& ground_truth);

enum class AccuracyVerdict { correct, incorrect, invalid };

AccuracyVerdict judge_accuracy(Gateway& gateway, const std::string& question,
                               const std::string& ground_truth,
                               const std::string& generated);

enum class QualityLevel { high = 0, medium = 1, low = 2 };

struct RegenerationVerdict {
  std::optional<QualityLevel> fluency;
  std::optional<QualityLevel> completeness;
  std::string raw;

  bool valid() const { return fluency.has_value() && completeness.has_value(); }
};

// Parses the judge's {"fluency": ..., "completeness": ...} reply; levels
// outside high/medium/low invalidate the trial. JSON that does not parse at
// all earns one retry, then an invalid verdict.
RegenerationVerdict judge_regeneration(Gateway& gateway, const std::string& question,
                                       const std::string& answer);

struct QualityReport {
  // Percentages over valid verdicts, indexed by QualityLevel.
  std::array<double, 3> fluency_pct{};
  std::array<double, 3> completeness_pct{};
  long valid = 0;
  long invalid = 0;
};

QualityReport quality_report(const std::vector<RegenerationVerdict>& verdicts);

}  // namespace foveate
