#include "foveate/judge.hpp"

#include <cctype>
#include <cstdio>

#include <json.hpp>

#include "foveate/log.hpp"
#include "foveate/tokenize.hpp"

namespace foveate {

namespace judge_prompts {

const std::string& difficulty_system() {
  static const std::string kText =
      R"(Please compare two sets of instructions/questions for a given content to determine which set is more difficult for a language model to generate coherent and accurate responses. A set of instructions is considered more difficult if it requires:
1. More complex reasoning or multi-step analysis
2. Integration of multiple concepts or contexts
3. Explanation of nuanced relationships or processes
4. Handling of ambiguous or less-documented information
5. Synthesis of information from diverse sources or time periods

Please respond with '1' if the first set of instructions is more difficult, or '2' if the second set of instructions is more difficult.
Please respond with the number only, no other text or characters.)";
  return kText;
}

std::string difficulty_user(const std::string& content, const std::string& set1,
                            const std::string& set2) {
  return "Content: " + content + "\nInstruction Set 1: " + set1 +
         "\nInstruction Set 2: " + set2;
}

const std::string& accuracy_system() {
  static const std::string kText =
      R"(You are a fair judge. Your task is to determine if the generated answer correctly answers the question, even if it contains additional explanations.
Rules:
1. The generated answer is correct if it contains the key information from the ground truth
2. Additional explanations or context in the generated answer should not make it incorrect
3. Only respond with 'Correct' or 'Incorrect')";
  return kText;
}

std::string accuracy_user(const std::string& question,
                          const std::string& ground_truth,
                          const std::string& generated) {
  return "Compare the following answers:\nQuestion: " + question +
         "\nGround Truth Answer: " + ground_truth + "\nGenerated Answer: " +
         generated +
         "\n\nIs the generated answer correct, regardless of any additional "
         "explanation? Respond only with 'Correct' or 'Incorrect'.";
}

const std::string& regeneration_system() {
  static const std::string kText =
      R"(Please evaluate the given question and answer pair based on two criteria:

1. Fluency: How well does the answer flow and connect with the question?
   - High: The answer naturally follows from the question
   - Medium: The connection is somewhat clear but could be improved
   - Low: The answer feels disconnected from the question

2. Completeness: How thoroughly does the answer address the question?
   - High: The answer fully addresses all aspects of the question
   - Medium: The answer covers most aspects but misses some points
   - Low: The answer only partially addresses the question

Please respond with a JSON object in the following format:
{
    "fluency": "high|medium|low",
    "completeness": "high|medium|low"
}

Do not include any other text or explanation.)";
  return kText;
}

std::string regeneration_user(const std::string& question,
                              const std::string& answer) {
  return "Question: " + question + "\nAnswer: " + answer;
}

std::string serialize_instruction_set(const std::vector<std::string>& questions) {
  std::string out;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    if (i) out += '\n';
    out += std::to_string(i + 1) + ". " + questions[i];
  }
  return out;
}

}  // namespace judge_prompts

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string strip_punct_edges(std::string s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::ispunct(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::ispunct(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string to_lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::optional<QualityLevel> level_from_string(std::string s) {
  s = to_lower(trim(s));
  if (s == "high") return QualityLevel::high;
  if (s == "medium") return QualityLevel::medium;
  if (s == "low") return QualityLevel::low;
  return std::nullopt;
}

// Judges whose replies are plain verdict words run under the "normal"
// profile; only the difficulty and regeneration judges have dedicated
// presets.
const SamplingProfile& plain_judge_profile() {
  static const SamplingProfile kProfile = named_profile("normal");
  return kProfile;
}

}  // namespace

HeadToHeadTrial judge_difficulty(Gateway& gateway, const Document& doc,
                                 std::vector<std::string> set_a,
                                 std::vector<std::string> set_b,
                                 const std::string& label_a,
                                 const std::string& label_b, RngStream& rng) {
  if (set_a.empty() || set_b.empty()) {
    throw Error("judge_difficulty: both instruction sets must be non-empty");
  }
  // Equal set sizes: truncate the larger set to the smaller.
  const std::size_t size = std::min(set_a.size(), set_b.size());
  set_a.resize(size);
  set_b.resize(size);

  HeadToHeadTrial trial;
  trial.doc_id = doc.id;
  trial.set_a_source = label_a;
  trial.set_b_source = label_b;
  trial.position_of_a = rng.next_double() < 0.5 ? 1 : 2;

  const std::string serialized_a = judge_prompts::serialize_instruction_set(set_a);
  const std::string serialized_b = judge_prompts::serialize_instruction_set(set_b);
  const std::string user = judge_prompts::difficulty_user(
      doc.text, trial.position_of_a == 1 ? serialized_a : serialized_b,
      trial.position_of_a == 1 ? serialized_b : serialized_a);

  ChatExchange exchange = gateway.chat(judge_prompts::difficulty_system(), user,
                                       named_profile("difficulty-judge"));
  trial.judge_raw = exchange.response_text;

  const std::string verdict = trim(exchange.response_text);
  if (verdict == "1" || verdict == "2") {
    const int winning_position = verdict == "1" ? 1 : 2;
    trial.winner = winning_position == trial.position_of_a ? TrialWinner::a
                                                           : TrialWinner::b;
  } else {
    trial.winner = TrialWinner::invalid;
  }
  return trial;
}

std::string WinRateReport::percent_string() const {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f%%", win_rate * 100.0);
  return buf;
}

WinRateReport win_rate(const std::vector<HeadToHeadTrial>& trials,
                       const std::string& champion) {
  if (trials.empty()) throw Error("win_rate: no trials");
  const std::string& a = trials.front().set_a_source;
  const std::string& b = trials.front().set_b_source;
  if (champion != a && champion != b) {
    throw Error("win_rate: champion \"" + champion + "\" not in the method pair");
  }

  WinRateReport report;
  for (const auto& t : trials) {
    if (t.set_a_source != a || t.set_b_source != b) {
      throw Error("win_rate: trials mix different method pairs");
    }
    switch (t.winner) {
      case TrialWinner::invalid:
        ++report.invalid;
        break;
      case TrialWinner::a:
        (champion == a) ? ++report.wins : ++report.losses;
        break;
      case TrialWinner::b:
        (champion == b) ? ++report.wins : ++report.losses;
        break;
    }
  }
  if (report.wins + report.losses == 0) {
    throw Error("win_rate: all trials invalid");
  }
  report.win_rate = static_cast<double>(report.wins) /
                    static_cast<double>(report.wins + report.losses);
  return report;
}

double recall_score(const std::string& generated, const std::string& ground_truth) {
  std::vector<std::string> gt = tokenize(ground_truth);
  if (gt.empty()) throw Error("recall_score: empty ground truth after tokenization");
  std::vector<std::string> gen = tokenize(generated);

  std::map<std::string, long> gen_counts;
  for (const auto& t : gen) ++gen_counts[t];

  long hit = 0;
  for (const auto& t : gt) {
    auto it = gen_counts.find(t);
    if (it != gen_counts.end() && it->second > 0) {
      ++hit;
      --it->second;
    }
  }
  return static_cast<double>(hit) / static_cast<double>(gt.size());
}

AccuracyVerdict judge_accuracy(Gateway& gateway, const std::string& question,
                               const std::string& ground_truth,
                               const std::string& generated) {
  if (question.empty() || ground_truth.empty() || generated.empty()) {
    throw Error("judge_accuracy: all inputs must be non-empty");
  }
  ChatExchange exchange = gateway.chat(
      judge_prompts::accuracy_system(),
      judge_prompts::accuracy_user(question, ground_truth, generated),
      plain_judge_profile());

  // Strict core with tolerated surrounding punctuation: "Incorrect." passes,
  // "The answer is right" does not.
  const std::string verdict =
      to_lower(strip_punct_edges(trim(exchange.response_text)));
  if (verdict == "correct") return AccuracyVerdict::correct;
  if (verdict == "incorrect") return AccuracyVerdict::incorrect;
  return AccuracyVerdict::invalid;
}

namespace {

RegenerationVerdict parse_regeneration(const std::string& raw, bool& json_ok) {
  RegenerationVerdict verdict;
  verdict.raw = raw;
  json_ok = false;

  std::string body = trim(raw);
  if (body.rfind("```", 0) == 0) {  // tolerate fenced replies
    auto first_newline = body.find('\n');
    if (first_newline != std::string::npos) body = body.substr(first_newline + 1);
    auto fence = body.rfind("```");
    if (fence != std::string::npos) body = body.substr(0, fence);
    body = trim(body);
  }

  nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return verdict;
  json_ok = true;
  if (j.contains("fluency") && j.at("fluency").is_string()) {
    verdict.fluency = level_from_string(j.at("fluency").get<std::string>());
  }
  if (j.contains("completeness") && j.at("completeness").is_string()) {
    verdict.completeness = level_from_string(j.at("completeness").get<std::string>());
  }
  return verdict;
}

}  // namespace

RegenerationVerdict judge_regeneration(Gateway& gateway, const std::string& question,
                                       const std::string& answer) {
  if (question.empty() || answer.empty()) {
    throw Error("judge_regeneration: question and answer must be non-empty");
  }
  const std::string system = judge_prompts::regeneration_system();
  const std::string user = judge_prompts::regeneration_user(question, answer);
  const SamplingProfile profile = named_profile("regeneration-judge");

  bool json_ok = false;
  ChatExchange exchange = gateway.chat(system, user, profile);
  RegenerationVerdict verdict = parse_regeneration(exchange.response_text, json_ok);
  if (!json_ok) {
    // One retry on structurally broken output; a parsed reply with an
    // out-of-set level is invalid immediately.
    ChatExchange again = gateway.chat(system, user, profile);
    verdict = parse_regeneration(again.response_text, json_ok);
  }
  if (!verdict.valid()) {
    log::warn("regeneration judge verdict invalid: " +
              verdict.raw.substr(0, 80));
  }
  return verdict;
}

QualityReport quality_report(const std::vector<RegenerationVerdict>& verdicts) {
  QualityReport report;
  std::array<long, 3> fluency{};
  std::array<long, 3> completeness{};
  for (const auto& v : verdicts) {
    if (!v.valid()) {
      ++report.invalid;
      continue;
    }
    ++report.valid;
    ++fluency[static_cast<std::size_t>(*v.fluency)];
    ++completeness[static_cast<std::size_t>(*v.completeness)];
  }
  if (report.valid == 0) throw Error("quality_report: no valid verdicts");
  for (std::size_t i = 0; i < 3; ++i) {
    report.fluency_pct[i] =
        100.0 * static_cast<double>(fluency[i]) / static_cast<double>(report.valid);
    report.completeness_pct[i] = 100.0 * static_cast<double>(completeness[i]) /
                                 static_cast<double>(report.valid);
  }
  return report;
}

}  // namespace foveate
