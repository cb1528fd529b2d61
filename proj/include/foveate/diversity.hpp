#pragma once

#include <string>
#include <vector>

#include "foveate/gateway.hpp"
#include "foveate/tokenize.hpp"

namespace foveate {

struct TokenizedSentence {
  std::string raw;
  std::vector<std::string> tokens;

  static TokenizedSentence make(std::string raw_text) {
    TokenizedSentence s;
    s.tokens = tokenize(raw_text);
    s.raw = std::move(raw_text);
    return s;
  }
};

// Multi-reference BLEU-n: clipped modified precisions p_1..p_n with uniform
// weights 1/n, geometric mean with zero precisions floored at 1e-9, brevity
// penalty exp(1 - r/c) for c < r where r is the closest reference length
// (ties toward the shorter reference). Always in [0, 1].
double bleu(const TokenizedSentence& candidate,
            const std::vector<TokenizedSentence>& references, int n);

// 1 - mean over sentences of the mean BLEU-n of each sentence against all
// others, n in {2,3,4,5}. Requires at least two sentences.
double selfbleu_diversity(const std::vector<std::string>& sentences);

// 1 - mean pairwise cosine over ordered pairs i != j, clamped to [0, 1].
// Requires >= 2 vectors of uniform dimension and nonzero norm.
double embedding_diversity(const std::vector<EmbeddingVector>& vectors);

struct DiversityReport {
  double selfbleu_diversity = 0.0;
  double embedding_diversity = 0.0;
  std::size_t n_sentences = 0;
  std::vector<int> ngram_orders = {2, 3, 4, 5};
};

// Tokenizes the questions, embeds them through the gateway and computes both
// metrics.
DiversityReport diversity_report(Gateway& gateway,
                                 const std::vector<std::string>& questions);

}  // namespace foveate
