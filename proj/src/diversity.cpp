#include "foveate/diversity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "foveate/log.hpp"

namespace foveate {

namespace {

constexpr double kEpsilon = 1e-9;

using NgramCounts = std::unordered_map<std::string, int>;

// n-grams as '\x1f'-joined keys; tokens never contain that byte after
// tokenization (it is stripped as part of a token, never a separator), and
// collisions would need it inside a token anyway.
NgramCounts ngram_counts(const std::vector<std::string>& tokens, int n) {
  NgramCounts counts;
  if (tokens.size() < static_cast<std::size_t>(n)) return counts;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (std::size_t k = 1; k < static_cast<std::size_t>(n); ++k) {
      key += '\x1f';
      key += tokens[i + k];
    }
    counts[key] += 1;
  }
  return counts;
}

// Accumulates in ascending order so results do not depend on input order.
double ordered_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return std::accumulate(values.begin(), values.end(), 0.0);
}

double bleu_impl(const std::vector<std::string>& candidate,
                 const std::vector<const std::vector<std::string>*>& references,
                 int n) {
  double log_score = 0.0;
  bool any_match = false;
  for (int order = 1; order <= n; ++order) {
    NgramCounts cand = ngram_counts(candidate, order);
    NgramCounts max_ref;
    for (const auto* ref : references) {
      for (const auto& [gram, count] : ngram_counts(*ref, order)) {
        int& slot = max_ref[gram];
        slot = std::max(slot, count);
      }
    }
    double total = 0.0;
    double clipped = 0.0;
    for (const auto& [gram, count] : cand) {
      total += count;
      auto it = max_ref.find(gram);
      if (it != max_ref.end()) clipped += std::min(count, it->second);
    }
    double precision = (total > 0.0) ? clipped / total : 0.0;
    if (precision > 0.0) {
      any_match = true;
    } else {
      precision = kEpsilon;
    }
    log_score += std::log(precision) / static_cast<double>(n);
  }
  // The geometric mean of n floored precisions is the floor itself; skip the
  // exp/log round trip so the all-miss case lands on epsilon exactly.
  double score = any_match ? std::exp(log_score) : kEpsilon;

  const std::size_t c = candidate.size();
  std::size_t r = references.front()->size();
  auto dist = [&](std::size_t x) { return x > c ? x - c : c - x; };
  for (const auto* ref : references) {
    std::size_t len = ref->size();
    if (dist(len) < dist(r) || (dist(len) == dist(r) && len < r)) r = len;
  }
  if (c < r) {
    score *= std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
  }
  return std::clamp(score, 0.0, 1.0);
}

}  // namespace

double bleu(const TokenizedSentence& candidate,
            const std::vector<TokenizedSentence>& references, int n) {
  if (n < 1) throw Error("bleu: order must be >= 1");
  if (references.empty()) throw Error("bleu: no references");
  if (candidate.tokens.empty()) throw Error("bleu: empty candidate");
  std::vector<const std::vector<std::string>*> refs;
  refs.reserve(references.size());
  for (const auto& r : references) refs.push_back(&r.tokens);
  return bleu_impl(candidate.tokens, refs, n);
}

double selfbleu_diversity(const std::vector<std::string>& sentences) {
  if (sentences.size() < 2) {
    throw Error("selfbleu_diversity: need at least 2 sentences");
  }
  std::vector<std::vector<std::string>> tokenized;
  tokenized.reserve(sentences.size());
  for (const auto& s : sentences) {
    tokenized.push_back(tokenize(s));
    if (tokenized.back().empty()) {
      throw Error("selfbleu_diversity: sentence tokenizes to nothing: " + s);
    }
  }

  std::vector<double> per_sentence;
  per_sentence.reserve(tokenized.size());
  for (std::size_t i = 0; i < tokenized.size(); ++i) {
    std::vector<const std::vector<std::string>*> refs;
    refs.reserve(tokenized.size() - 1);
    for (std::size_t j = 0; j < tokenized.size(); ++j) {
      if (j != i) refs.push_back(&tokenized[j]);
    }
    double sum = 0.0;
    for (int n = 2; n <= 5; ++n) sum += bleu_impl(tokenized[i], refs, n);
    per_sentence.push_back(sum / 4.0);
  }
  double mean = ordered_sum(std::move(per_sentence)) /
                static_cast<double>(tokenized.size());
  return 1.0 - mean;
}

double embedding_diversity(const std::vector<EmbeddingVector>& vectors) {
  if (vectors.size() < 2) {
    throw Error("embedding_diversity: need at least 2 vectors");
  }
  const std::size_t dim = vectors.front().dim();
  for (const auto& v : vectors) {
    if (v.dim() != dim) throw Error("embedding_diversity: dimension mismatch");
    if (v.norm() == 0.0) throw Error("embedding_diversity: zero-norm vector");
  }

  // Ordered pairs i != j: each unordered pair contributes its cosine twice,
  // so the mean equals the unordered-pair mean.
  std::vector<double> cosines;
  cosines.reserve(vectors.size() * (vectors.size() - 1) / 2);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    for (std::size_t j = i + 1; j < vectors.size(); ++j) {
      cosines.push_back(cosine(vectors[i], vectors[j]));
    }
  }
  double mean = ordered_sum(std::move(cosines)) /
                static_cast<double>(vectors.size() * (vectors.size() - 1) / 2);
  double diversity = 1.0 - mean;
  if (diversity > 1.0) {
    log::warn("embedding_diversity: negative mean cosine, clamping to 1");
    return 1.0;
  }
  if (diversity < 0.0) return 0.0;
  return diversity;
}

DiversityReport diversity_report(Gateway& gateway,
                                 const std::vector<std::string>& questions) {
  if (questions.size() < 2) {
    throw Error("diversity_report: need at least 2 questions");
  }
  DiversityReport report;
  report.n_sentences = questions.size();
  report.selfbleu_diversity = selfbleu_diversity(questions);
  report.embedding_diversity = embedding_diversity(gateway.embed(questions));
  return report;
}

}  // namespace foveate
