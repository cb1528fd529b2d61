#include <doctest.h>

#include <fstream>
#include <sstream>

#include "foveate/judge.hpp"
#include "foveate/scripted_backend.hpp"
#include "support/test_util.hpp"

using namespace foveate;

namespace {

struct Harness {
  std::shared_ptr<ScriptedBackend> backend = std::make_shared<ScriptedBackend>();
  Gateway gateway;
  Document doc{"d1", "Some unsupervised text about processors and speed.", "", {}};

  Harness() : gateway(backend, [] {
                GatewayOptions o;
                o.sleep_fn = [](std::chrono::milliseconds) {};
                return o;
              }()) {}

  void judge_always(std::string reply) {
    backend->set_default([reply = std::move(reply)](const std::string&,
                                                    const std::string&) {
      return reply;
    });
  }
};

std::string fixture(const std::string& name) {
  std::ifstream in(std::string(FIXTURE_DIR) + "/" + name, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  if (!text.empty() && text.back() == '\n') text.pop_back();
  return text;
}

std::string replace_all(std::string text, const std::string& from,
                        const std::string& to) {
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
  return text;
}

}  // namespace

TEST_CASE("judge prompts match the golden fixtures byte-for-byte") {
  CHECK(judge_prompts::difficulty_system() == fixture("difficulty_system.txt"));
  CHECK(judge_prompts::accuracy_system() == fixture("accuracy_system.txt"));
  CHECK(judge_prompts::regeneration_system() == fixture("regeneration_system.txt"));

  std::string user = fixture("difficulty_user.txt");
  user = replace_all(user, "{content}", "CONTENT");
  user = replace_all(user, "{set1}", "SET-ONE");
  user = replace_all(user, "{set2}", "SET-TWO");
  CHECK(judge_prompts::difficulty_user("CONTENT", "SET-ONE", "SET-TWO") == user);

  std::string accuracy = fixture("accuracy_user.txt");
  accuracy = replace_all(accuracy, "{question}", "Q");
  accuracy = replace_all(accuracy, "{ground_truth}", "GT");
  accuracy = replace_all(accuracy, "{generated}", "GEN");
  CHECK(judge_prompts::accuracy_user("Q", "GT", "GEN") == accuracy);

  std::string regeneration = fixture("regeneration_user.txt");
  regeneration = replace_all(regeneration, "{question}", "Q");
  regeneration = replace_all(regeneration, "{answer}", "A");
  CHECK(judge_prompts::regeneration_user("Q", "A") == regeneration);
}

TEST_CASE("instruction sets serialize as a newline-numbered list") {
  CHECK(judge_prompts::serialize_instruction_set({"first?", "second?"}) ==
        "1. first?\n2. second?");
}

TEST_CASE("judge_difficulty maps the verdict through the randomized position") {
  std::vector<std::string> set_a = {"hard question?"};
  std::vector<std::string> set_b = {"easy question?"};

  SUBCASE("judge says 1 while a sits first") {
    Harness h;
    h.judge_always("1");
    // position_of_a == 1 requires the first draw below 0.5; find a seed.
    std::uint64_t seed = 1;
    for (; RngStream(seed).next_double() >= 0.5; ++seed) {
    }
    RngStream rng(seed);
    HeadToHeadTrial trial =
        judge_difficulty(h.gateway, h.doc, set_a, set_b, "ours", "theirs", rng);
    CHECK(trial.position_of_a == 1);
    CHECK(trial.winner == TrialWinner::a);
    CHECK(trial.judge_raw == "1");
  }

  SUBCASE("judge says 2 while a sits second") {
    Harness h;
    h.judge_always("2");
    std::uint64_t seed = 1;
    for (; RngStream(seed).next_double() < 0.5; ++seed) {
    }
    RngStream rng(seed);
    HeadToHeadTrial trial =
        judge_difficulty(h.gateway, h.doc, set_a, set_b, "ours", "theirs", rng);
    CHECK(trial.position_of_a == 2);
    CHECK(trial.winner == TrialWinner::a);
  }

  SUBCASE("anything but a lone digit is invalid") {
    Harness h;
    h.judge_always("Set 1 is harder");
    RngStream rng(9);
    HeadToHeadTrial trial =
        judge_difficulty(h.gateway, h.doc, set_a, set_b, "ours", "theirs", rng);
    CHECK(trial.winner == TrialWinner::invalid);
    CHECK(trial.judge_raw == "Set 1 is harder");
  }

  SUBCASE("whitespace around the digit is tolerated") {
    Harness h;
    h.judge_always(" 1\n");
    RngStream rng(9);
    HeadToHeadTrial trial =
        judge_difficulty(h.gateway, h.doc, set_a, set_b, "ours", "theirs", rng);
    CHECK(trial.winner != TrialWinner::invalid);
  }
}

TEST_CASE("judge_difficulty truncates to equal set sizes and uses its profile") {
  Harness h;
  h.judge_always("1");
  std::vector<std::string> set_a = {"a1?", "a2?", "a3?"};
  std::vector<std::string> set_b = {"b1?"};
  RngStream rng(4);
  judge_difficulty(h.gateway, h.doc, set_a, set_b, "ours", "theirs", rng);

  auto transcript = h.backend->transcript();
  REQUIRE(transcript.size() == 1);
  CHECK(transcript[0].profile == named_profile("difficulty-judge"));
  CHECK(*transcript[0].profile.max_completion_tokens == 5);
  CHECK(transcript[0].profile.temperature == 0.5);
  // Only one question per side after truncation.
  CHECK(transcript[0].user.find("a1?") != std::string::npos);
  CHECK(transcript[0].user.find("a2?") == std::string::npos);
  CHECK(transcript[0].system == judge_prompts::difficulty_system());
}

TEST_CASE("de-randomization: a content-keyed judge is position invariant") {
  // The judge always prefers the set containing ALPHA, wherever it sits.
  auto content_keyed = [](const std::string&, const std::string& user) {
    auto set1 = user.find("Instruction Set 1: ");
    auto set2 = user.find("Instruction Set 2: ");
    std::string first = user.substr(set1, set2 - set1);
    return first.find("ALPHA") != std::string::npos ? std::string("1")
                                                    : std::string("2");
  };
  std::vector<std::string> set_a = {"ALPHA question?"};
  std::vector<std::string> set_b = {"beta question?"};

  bool saw_first = false;
  bool saw_second = false;
  RngStream rng(31337);
  for (int i = 0; i < 64; ++i) {
    Harness h;
    h.backend->set_default(content_keyed);
    HeadToHeadTrial trial =
        judge_difficulty(h.gateway, h.doc, set_a, set_b, "ours", "theirs", rng);
    CHECK(trial.winner == TrialWinner::a);
    saw_first |= trial.position_of_a == 1;
    saw_second |= trial.position_of_a == 2;
  }
  CHECK(saw_first);
  CHECK(saw_second);
}

TEST_CASE("position randomization is fair over seeded trials") {
  Harness h;
  h.judge_always("1");
  std::vector<std::string> set = {"q?"};
  RngStream rng(20240810);
  int first = 0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    HeadToHeadTrial trial =
        judge_difficulty(h.gateway, h.doc, set, set, "ours", "theirs", rng);
    if (trial.position_of_a == 1) ++first;
  }
  double frequency = static_cast<double>(first) / trials;
  CHECK(frequency >= 0.48);
  CHECK(frequency <= 0.52);
}

TEST_CASE("win_rate over a synthetic tally prints 70.64%") {
  std::vector<HeadToHeadTrial> trials;
  auto make_trial = [](TrialWinner winner) {
    HeadToHeadTrial t;
    t.set_a_source = "ours";
    t.set_b_source = "theirs";
    t.winner = winner;
    return t;
  };
  for (int i = 0; i < 7064; ++i) trials.push_back(make_trial(TrialWinner::a));
  for (int i = 0; i < 2936; ++i) trials.push_back(make_trial(TrialWinner::b));

  WinRateReport report = win_rate(trials, "ours");
  CHECK(report.wins == 7064);
  CHECK(report.losses == 2936);
  CHECK(report.invalid == 0);
  CHECK(report.win_rate == doctest::Approx(0.7064).epsilon(1e-12));
  CHECK(report.percent_string() == "70.64%");
}

TEST_CASE("win_rate excludes invalid trials and errors when none are valid") {
  auto make_trial = [](TrialWinner winner) {
    HeadToHeadTrial t;
    t.set_a_source = "ours";
    t.set_b_source = "theirs";
    t.winner = winner;
    return t;
  };
  std::vector<HeadToHeadTrial> trials = {make_trial(TrialWinner::a),
                                         make_trial(TrialWinner::invalid)};
  WinRateReport report = win_rate(trials, "ours");
  CHECK(report.wins == 1);
  CHECK(report.invalid == 1);
  CHECK(report.win_rate == 1.0);

  std::vector<HeadToHeadTrial> all_invalid = {make_trial(TrialWinner::invalid)};
  CHECK_THROWS_AS(win_rate(all_invalid, "ours"), Error);
}

TEST_CASE("win_rate conserves trial counts on random inputs") {
  RngStream rng(0xbead);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<HeadToHeadTrial> trials;
    std::size_t n = 1 + rng.next_index(50);
    bool any_valid = false;
    for (std::size_t i = 0; i < n; ++i) {
      HeadToHeadTrial t;
      t.set_a_source = "ours";
      t.set_b_source = "theirs";
      switch (rng.next_index(3)) {
        case 0: t.winner = TrialWinner::a; any_valid = true; break;
        case 1: t.winner = TrialWinner::b; any_valid = true; break;
        default: t.winner = TrialWinner::invalid; break;
      }
      trials.push_back(std::move(t));
    }
    if (!any_valid) continue;
    WinRateReport report = win_rate(trials, "theirs");
    CHECK(report.wins + report.losses + report.invalid ==
          static_cast<long>(n));
  }
}

TEST_CASE("recall_score is multiset token recall") {
  CHECK(recall_score("The capital is Paris, in France.", "paris france") == 1.0);
  CHECK(recall_score("paris", "paris france") == 0.5);
  CHECK(recall_score("", "paris") == 0.0);
  CHECK(recall_score("paris paris", "paris paris paris") ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK_THROWS_AS(recall_score("anything", "!!!"), Error);
}

TEST_CASE("recall_score is monotone in added generated tokens") {
  RngStream rng(0xabc1);
  static const std::vector<std::string> kWords = {"red", "green", "blue",
                                                  "fast", "slow", "chip"};
  for (int trial = 0; trial < 50; ++trial) {
    std::string gt;
    for (int i = 0; i < 4; ++i) {
      gt += kWords[rng.next_index(kWords.size())] + " ";
    }
    std::string gen;
    double last = recall_score(gen, gt);
    for (int step = 0; step < 8; ++step) {
      gen += kWords[rng.next_index(kWords.size())] + " ";
      double now = recall_score(gen, gt);
      CHECK(now >= last);
      last = now;
    }
  }
}

TEST_CASE("judge_accuracy parses verdict words strictly") {
  Harness h;
  SUBCASE("correct") {
    h.judge_always("Correct");
    CHECK(judge_accuracy(h.gateway, "q", "gt", "gen") == AccuracyVerdict::correct);
  }
  SUBCASE("incorrect with trailing punctuation") {
    h.judge_always("incorrect.");
    CHECK(judge_accuracy(h.gateway, "q", "gt", "gen") ==
          AccuracyVerdict::incorrect);
  }
  SUBCASE("prose is invalid") {
    h.judge_always("The answer is right");
    CHECK(judge_accuracy(h.gateway, "q", "gt", "gen") == AccuracyVerdict::invalid);
  }
  SUBCASE("prompts are the fixed accuracy texts") {
    h.judge_always("Correct");
    judge_accuracy(h.gateway, "Q1", "GT1", "GEN1");
    auto transcript = h.backend->transcript();
    REQUIRE(transcript.size() == 1);
    CHECK(transcript[0].system == judge_prompts::accuracy_system());
    CHECK(transcript[0].user == judge_prompts::accuracy_user("Q1", "GT1", "GEN1"));
  }
  SUBCASE("empty inputs are rejected") {
    h.judge_always("Correct");
    CHECK_THROWS_AS(judge_accuracy(h.gateway, "", "gt", "gen"), Error);
  }
}

TEST_CASE("judge_regeneration parses the structured verdict") {
  Harness h;
  SUBCASE("well-formed verdict") {
    h.judge_always(R"({"fluency":"high","completeness":"medium"})");
    RegenerationVerdict verdict = judge_regeneration(h.gateway, "q", "a");
    REQUIRE(verdict.valid());
    CHECK(*verdict.fluency == QualityLevel::high);
    CHECK(*verdict.completeness == QualityLevel::medium);
    CHECK(h.backend->call_count() == 1);

    auto transcript = h.backend->transcript();
    CHECK(transcript[0].profile == named_profile("regeneration-judge"));
    CHECK(transcript[0].profile.temperature == 0.2);
    CHECK(*transcript[0].profile.max_completion_tokens == 50);
  }
  SUBCASE("out-of-set level is invalid without retry") {
    h.judge_always(R"({"fluency":"excellent","completeness":"high"})");
    RegenerationVerdict verdict = judge_regeneration(h.gateway, "q", "a");
    CHECK_FALSE(verdict.valid());
    CHECK(h.backend->call_count() == 1);
  }
  SUBCASE("broken JSON earns one retry then invalid") {
    h.judge_always("not json at all");
    RegenerationVerdict verdict = judge_regeneration(h.gateway, "q", "a");
    CHECK_FALSE(verdict.valid());
    CHECK(h.backend->call_count() == 2);
  }
  SUBCASE("fenced JSON is tolerated") {
    h.judge_always("```json\n{\"fluency\":\"low\",\"completeness\":\"low\"}\n```");
    RegenerationVerdict verdict = judge_regeneration(h.gateway, "q", "a");
    REQUIRE(verdict.valid());
    CHECK(*verdict.fluency == QualityLevel::low);
  }
}

TEST_CASE("quality_report aggregates per-dimension percentages") {
  auto verdict = [](QualityLevel f, QualityLevel c) {
    RegenerationVerdict v;
    v.fluency = f;
    v.completeness = c;
    return v;
  };

  SUBCASE("all high") {
    std::vector<RegenerationVerdict> verdicts(
        10, verdict(QualityLevel::high, QualityLevel::high));
    QualityReport report = quality_report(verdicts);
    CHECK(report.fluency_pct[0] == 100.0);
    CHECK(report.fluency_pct[1] == 0.0);
    CHECK(report.fluency_pct[2] == 0.0);
  }

  SUBCASE("hand-counted mix") {
    std::vector<RegenerationVerdict> verdicts = {
        verdict(QualityLevel::high, QualityLevel::high),
        verdict(QualityLevel::medium, QualityLevel::low),
        verdict(QualityLevel::low, QualityLevel::low),
        verdict(QualityLevel::low, QualityLevel::medium),
    };
    QualityReport report = quality_report(verdicts);
    CHECK(report.fluency_pct[0] == 25.0);
    CHECK(report.fluency_pct[1] == 25.0);
    CHECK(report.fluency_pct[2] == 50.0);
    CHECK(report.completeness_pct[0] == 25.0);
    CHECK(report.completeness_pct[1] == 25.0);
    CHECK(report.completeness_pct[2] == 50.0);
  }

  SUBCASE("930/68/2 verdict mix reproduces the 93.0/6.8/0.2 row shape") {
    std::vector<RegenerationVerdict> verdicts;
    for (int i = 0; i < 930; ++i) {
      verdicts.push_back(verdict(QualityLevel::high, QualityLevel::high));
    }
    for (int i = 0; i < 68; ++i) {
      verdicts.push_back(verdict(QualityLevel::medium, QualityLevel::high));
    }
    for (int i = 0; i < 2; ++i) {
      verdicts.push_back(verdict(QualityLevel::low, QualityLevel::high));
    }
    QualityReport report = quality_report(verdicts);
    CHECK(report.fluency_pct[0] == doctest::Approx(93.0).epsilon(1e-9));
    CHECK(report.fluency_pct[1] == doctest::Approx(6.8).epsilon(1e-9));
    CHECK(report.fluency_pct[2] == doctest::Approx(0.2).epsilon(1e-9));
  }

  SUBCASE("percentages sum to 100 on random verdict mixes") {
    RngStream rng(0x900d);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<RegenerationVerdict> verdicts;
      std::size_t n = 1 + rng.next_index(40);
      for (std::size_t i = 0; i < n; ++i) {
        if (rng.next_index(5) == 0) {
          verdicts.push_back(RegenerationVerdict{});  // invalid
        } else {
          verdicts.push_back(
              verdict(static_cast<QualityLevel>(rng.next_index(3)),
                      static_cast<QualityLevel>(rng.next_index(3))));
        }
      }
      bool any_valid = false;
      for (const auto& v : verdicts) any_valid |= v.valid();
      if (!any_valid) continue;
      QualityReport report = quality_report(verdicts);
      double fluency_sum = report.fluency_pct[0] + report.fluency_pct[1] +
                           report.fluency_pct[2];
      double completeness_sum = report.completeness_pct[0] +
                                report.completeness_pct[1] +
                                report.completeness_pct[2];
      CHECK(fluency_sum == doctest::Approx(100.0).epsilon(1e-3));
      CHECK(completeness_sum == doctest::Approx(100.0).epsilon(1e-3));
    }
  }

  SUBCASE("all invalid errors") {
    std::vector<RegenerationVerdict> verdicts(3);
    CHECK_THROWS_AS(quality_report(verdicts), Error);
  }
}
