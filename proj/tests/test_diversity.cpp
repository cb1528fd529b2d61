#include <doctest.h>

#include <cmath>

#include "foveate/diversity.hpp"
#include "foveate/scripted_backend.hpp"
#include "support/diversity_oracle.hpp"
#include "support/test_util.hpp"

using namespace foveate;

namespace {

TokenizedSentence sentence(const std::string& raw) {
  return TokenizedSentence::make(raw);
}

std::vector<std::string> random_corpus(RngStream& rng, std::size_t max_sentences,
                                       std::size_t max_tokens) {
  static const std::vector<std::string> kVocab = {
      "alpha", "bravo", "charlie", "delta", "echo",  "foxtrot", "golf",
      "hotel", "india", "juliet",  "kilo",  "lima",  "mike",    "november",
      "oscar", "papa",  "quebec",  "romeo", "sierra", "tango"};
  std::size_t n = 2 + rng.next_index(max_sentences - 1);
  std::vector<std::string> sentences;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t len = 1 + rng.next_index(max_tokens);
    std::string s;
    for (std::size_t t = 0; t < len; ++t) {
      if (t) s += ' ';
      s += kVocab[rng.next_index(kVocab.size())];
    }
    sentences.push_back(std::move(s));
  }
  return sentences;
}

}  // namespace

TEST_CASE("tokenizer is lowercase, whitespace-split, punctuation-stripped") {
  CHECK(tokenize("Hello,  World!") == std::vector<std::string>{"hello", "world"});
  CHECK(tokenize("  a\tb\nc ") == std::vector<std::string>{"a", "b", "c"});
  CHECK(tokenize("'quoted' (parens)") ==
        std::vector<std::string>{"quoted", "parens"});
  CHECK(tokenize("x-200 isn't bad") ==
        std::vector<std::string>{"x-200", "isn't", "bad"});
  CHECK(tokenize("--- ...") == std::vector<std::string>{});
  // NBSP splits like a regular space.
  CHECK(tokenize("a\xc2\xa0j") == std::vector<std::string>{"a", "j"});
}

TEST_CASE("bleu identity and disjoint cases") {
  auto c = sentence("a b c d e");
  CHECK(bleu(c, {sentence("a b c d e")}, 4) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bleu(sentence("x y z w v"), {sentence("a b c d e")}, 2) <= 1e-9);
}

TEST_CASE("bleu hand value from clipped-precision arithmetic") {
  // p1 = 3/4, p2 = 2/3, BP = 1 -> sqrt(1/2).
  double value = bleu(sentence("a b c d"), {sentence("a b c e")}, 2);
  CHECK(value == doctest::Approx(0.7071067811865476).epsilon(1e-9));
}

TEST_CASE("bleu brevity penalty uses the closest reference length") {
  // candidate length 2, reference length 4: BP = exp(1 - 4/2) = e^-1.
  double value = bleu(sentence("a b"), {sentence("a b c d")}, 1);
  CHECK(value == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

  // Two references; the closer (length 2) wins, so no penalty.
  double no_penalty = bleu(sentence("a b"), {sentence("a b c d"), sentence("a b")}, 1);
  CHECK(no_penalty == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("bleu input validation") {
  CHECK_THROWS_AS(bleu(sentence(""), {sentence("a b")}, 2), Error);
  CHECK_THROWS_AS(bleu(sentence("a"), {}, 2), Error);
  CHECK_THROWS_AS(bleu(sentence("a"), {sentence("b")}, 0), Error);
}

TEST_CASE("selfbleu limit cases") {
  SUBCASE("identical corpus gives exactly zero") {
    std::vector<std::string> dup(4, "the same sentence repeated here");
    CHECK(selfbleu_diversity(dup) == 0.0);
  }
  SUBCASE("disjoint vocabularies give ~1") {
    std::vector<std::string> corpus = {
        "alpha bravo charlie delta echo",
        "foxtrot golf hotel india juliet",
        "kilo lima mike november oscar",
    };
    CHECK(selfbleu_diversity(corpus) >= 1.0 - 1e-9);
  }
  SUBCASE("fewer than two sentences is an error") {
    CHECK_THROWS_AS(selfbleu_diversity({"only one"}), Error);
  }
}

TEST_CASE("selfbleu matches the brute-force oracle on a fixed corpus") {
  std::vector<std::string> corpus = {
      "the quick brown fox jumps over the lazy dog",
      "the quick brown cat sleeps under the warm sun",
      "a slow green turtle walks across the quiet road",
  };
  CHECK(selfbleu_diversity(corpus) ==
        doctest::Approx(oracle::selfbleu_diversity(corpus)).epsilon(1e-9));
}

TEST_CASE("selfbleu oracle equivalence over random corpora") {
  RngStream rng(0xd1e5);
  for (int trial = 0; trial < 100; ++trial) {
    auto corpus = random_corpus(rng, 6, 12);
    double got = selfbleu_diversity(corpus);
    double want = oracle::selfbleu_diversity(corpus);
    REQUIRE(std::abs(got - want) <= 1e-9);
  }
}

TEST_CASE("selfbleu is permutation invariant, exactly") {
  RngStream rng(0x5eed);
  for (int trial = 0; trial < 20; ++trial) {
    auto corpus = random_corpus(rng, 6, 10);
    double base = selfbleu_diversity(corpus);
    std::vector<std::string> shuffled = corpus;
    for (std::size_t i = shuffled.size(); i > 1; --i) {
      std::swap(shuffled[i - 1], shuffled[rng.next_index(i)]);
    }
    CHECK(selfbleu_diversity(shuffled) == base);
  }
}

TEST_CASE("appending a duplicate sentence never increases selfbleu diversity") {
  RngStream rng(0xabcd);
  for (int trial = 0; trial < 20; ++trial) {
    auto corpus = random_corpus(rng, 5, 10);
    double before = selfbleu_diversity(corpus);
    corpus.push_back(corpus[rng.next_index(corpus.size())]);
    double after = selfbleu_diversity(corpus);
    CHECK(after <= before + 1e-12);
  }
}

TEST_CASE("bleu stays within [0,1] on random inputs") {
  RngStream rng(0xfeed);
  for (int trial = 0; trial < 200; ++trial) {
    auto corpus = random_corpus(rng, 4, 8);
    auto candidate = sentence(corpus[0]);
    std::vector<TokenizedSentence> refs;
    for (std::size_t i = 1; i < corpus.size(); ++i) refs.push_back(sentence(corpus[i]));
    int n = 1 + static_cast<int>(rng.next_index(5));
    double value = bleu(candidate, refs, n);
    CHECK(value >= 0.0);
    CHECK(value <= 1.0);
  }
}

TEST_CASE("embedding diversity limit cases") {
  EmbeddingVector e1{{1.0, 0.0, 0.0}};
  EmbeddingVector e2{{0.0, 1.0, 0.0}};
  EmbeddingVector e3{{0.0, 0.0, 1.0}};

  SUBCASE("identical vectors give exactly zero") {
    CHECK(embedding_diversity({e1, e1, e1}) == 0.0);
  }
  SUBCASE("orthogonal vectors give exactly one") {
    CHECK(embedding_diversity({e1, e2, e3}) == 1.0);
  }
  SUBCASE("opposed vectors clamp to one") {
    EmbeddingVector neg{{-1.0, 0.0, 0.0}};
    CHECK(embedding_diversity({e1, neg}) == 1.0);
  }
  SUBCASE("validation") {
    CHECK_THROWS_AS(embedding_diversity({e1}), Error);
    CHECK_THROWS_AS(embedding_diversity({e1, EmbeddingVector{{1.0, 0.0}}}), Error);
    CHECK_THROWS_AS(embedding_diversity({e1, EmbeddingVector{{0.0, 0.0, 0.0}}}),
                    Error);
  }
}

TEST_CASE("embedding diversity hand value") {
  double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  std::vector<EmbeddingVector> vectors = {
      EmbeddingVector{{1.0, 0.0}},
      EmbeddingVector{{0.0, 1.0}},
      EmbeddingVector{{inv_sqrt2, inv_sqrt2}},
  };
  CHECK(embedding_diversity(vectors) == doctest::Approx(0.5286).epsilon(1e-4));

  std::vector<std::vector<double>> raw = {{1.0, 0.0}, {0.0, 1.0},
                                          {inv_sqrt2, inv_sqrt2}};
  CHECK(embedding_diversity(vectors) ==
        doctest::Approx(oracle::embedding_diversity(raw)).epsilon(1e-12));
}

TEST_CASE("embedding diversity is permutation invariant, exactly") {
  RngStream rng(0xeeee);
  std::vector<EmbeddingVector> vectors;
  for (int i = 0; i < 6; ++i) {
    EmbeddingVector v;
    for (int d = 0; d < 5; ++d) v.values.push_back(rng.next_double() * 2.0 - 1.0);
    vectors.push_back(std::move(v));
  }
  double base = embedding_diversity(vectors);
  std::vector<EmbeddingVector> shuffled = vectors;
  for (std::size_t i = shuffled.size(); i > 1; --i) {
    std::swap(shuffled[i - 1], shuffled[rng.next_index(i)]);
  }
  CHECK(embedding_diversity(shuffled) == base);
}

TEST_CASE("diversity_report composes the two metrics") {
  auto backend = std::make_shared<ScriptedBackend>();
  GatewayOptions options;
  options.sleep_fn = [](std::chrono::milliseconds) {};
  Gateway gateway(backend, options);

  SUBCASE("duplicated question list gives zero on both axes") {
    std::vector<std::string> questions(3, "what is the answer to everything?");
    DiversityReport report = diversity_report(gateway, questions);
    CHECK(report.selfbleu_diversity == 0.0);
    CHECK(report.embedding_diversity == 0.0);
    CHECK(report.n_sentences == 3);
    CHECK(report.ngram_orders == std::vector<int>{2, 3, 4, 5});
  }

  SUBCASE("report equals composing the operations directly") {
    std::vector<std::string> questions = {
        "what powers the device through the day?",
        "how does the design keep latency low under load?",
        "why was the original chassis replaced entirely?",
    };
    DiversityReport report = diversity_report(gateway, questions);
    CHECK(report.selfbleu_diversity == selfbleu_diversity(questions));
    CHECK(report.embedding_diversity ==
          embedding_diversity(gateway.embed(questions)));
  }
}
