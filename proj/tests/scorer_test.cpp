#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "ucorrect/error.hpp"
#include "ucorrect/ngram_scorer.hpp"
#include "ucorrect/scorer.hpp"

namespace ucorrect {
namespace {

using testing::abcd_vocab;
using testing::repeated;
using testing::seq;

NgramConfig window(std::size_t w) {
  NgramConfig c;
  c.window = w;
  return c;
}

std::vector<std::string> abcd_times(int n) { return std::vector<std::string>(n, "abcd"); }

TEST(TrainNgram, CountsMatchBruteForce) {
  Vocab v = abcd_vocab();
  auto scorer = train_ngram(repeated("abcd", 5, v), window(1), v);
  std::vector<std::string> ctx{"b"};
  EXPECT_EQ(scorer.left_count(ctx, "c"), 5.0);

  auto spec = testing::oracle_spec(abcd_times(5), v, window(1));
  for (const char* c : {"a", "b", "c", "d"}) {
    for (const char* t : {"a", "b", "c", "d"}) {
      std::vector<std::string> context{c};
      EXPECT_EQ(scorer.left_count(context, t), oracle::left_count(spec, {c}, t)) << c << t;
    }
  }
}

TEST(TrainNgram, WiderContextsMatchBruteForce) {
  std::vector<std::string> lines{"abcab", "bca", "cabd", "abcd", "dd"};
  Vocab v = abcd_vocab();
  auto scorer = train_ngram(testing::tokenize_all(lines, v), window(3), v);
  auto spec = testing::oracle_spec(lines, v, window(3));
  const std::vector<std::string> alphabet{"a", "b", "c", "d"};
  for (const auto& x : alphabet) {
    for (const auto& y : alphabet) {
      for (const auto& t : alphabet) {
        std::vector<std::string> ctx{x, y};
        EXPECT_EQ(scorer.left_count(ctx, t), oracle::left_count(spec, ctx, t));
      }
    }
  }
  std::vector<std::string> padded{"<s>", "<s>"};
  EXPECT_EQ(scorer.left_count(padded, "a"), 2.0);  // "abcab", "abcd"
}

TEST(TrainNgram, EmptyCorpusThrows) {
  std::vector<TokenSeq> none;
  try {
    train_ngram(none, {}, abcd_vocab());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyInput);
  }
}

TEST(TrainNgram, InvalidConfig) {
  Vocab v = abcd_vocab();
  auto corpus = repeated("ab", 1, v);
  for (NgramConfig c : {NgramConfig{0, 0.5, 0.1}, NgramConfig{2, 1.5, 0.1},
                        NgramConfig{2, -0.1, 0.1}, NgramConfig{2, 0.5, 0.0}}) {
    try {
      train_ngram(corpus, c, v);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidConfig);
    }
  }
}

TEST(TrainNgram, OrderInvariantCountTables) {
  Vocab v({"今", "天", "气", "很", "好", "a", "b"});
  std::vector<std::string> lines{"今天天气很好", "天气好", "a今b", "很好很好", "ab", "气"};
  auto base = train_ngram(testing::tokenize_all(lines, v), {}, v);
  std::mt19937 rng(11);
  for (int i = 0; i < 10; ++i) {
    std::shuffle(lines.begin(), lines.end(), rng);
    auto other = train_ngram(testing::tokenize_all(lines, v), {}, v);
    EXPECT_EQ(other.to_json(), base.to_json());
  }
}

TEST(UniformScorer, EqualProbabilities) {
  UniformScorer u(abcd_vocab());
  TokenSeq x = seq("abca", u.vocab());
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (TokenId t = 0; t < 4; ++t) EXPECT_DOUBLE_EQ(u.prob(MaskedSeq(x, i), t), 0.25);
  }
}

TEST(UniformScorer, TopCandidatesTieBreakByCodePoint) {
  UniformScorer u(Vocab({"d", "c", "b", "a"}));
  TokenSeq x = seq("ab", u.vocab());
  auto top = u.top_candidates(MaskedSeq(x, 0), 2);
  ASSERT_EQ(top.size(), 2u);
  EXPECT_EQ(top[0].token.text, "a");
  EXPECT_EQ(top[1].token.text, "b");
  EXPECT_EQ(u.top_candidates(MaskedSeq(x, 0), 10).size(), 4u);
}

TEST(NgramScorer, ProbMatchesCountingOracle) {
  Vocab v = abcd_vocab();
  auto scorer = train_ngram(repeated("abcd", 5, v), window(1), v);
  TokenSeq x = seq("abad", v);
  MaskedSeq m(x, 2);
  // Both sides see the context 5 times, always followed/preceded by c:
  // (5 + 0.1) / (5 + 0.4) = 17/18.
  EXPECT_NEAR(scorer.prob(m, *v.find("c")), 17.0 / 18.0, 1e-15);
  EXPECT_NEAR(scorer.prob(m, *v.find("a")), 1.0 / 54.0, 1e-15);

  auto spec = testing::oracle_spec(abcd_times(5), v, window(1));
  for (TokenId t = 0; t < 4; ++t) {
    EXPECT_NEAR(scorer.prob(m, t), oracle::ngram_prob(spec, testing::texts(x), 2, v.texts()[t]),
                1e-15);
  }
  auto top = scorer.top_candidates(m, 1);
  ASSERT_EQ(top.size(), 1u);
  EXPECT_EQ(top[0].token.text, "c");
  EXPECT_NEAR(top[0].prob, 17.0 / 18.0, 1e-15);
}

TEST(NgramScorer, BackoffMatchesOracleOnRandomQueries) {
  std::vector<std::string> lines;
  std::mt19937 rng(5);
  for (int i = 0; i < 30; ++i) {
    std::string s;
    int n = 2 + static_cast<int>(rng() % 6);
    for (int j = 0; j < n; ++j) s += "abcde"[rng() % 5];
    lines.push_back(s);
  }
  Vocab v({"a", "b", "c", "d"});  // 'e' stays unknown
  for (std::size_t w : {1u, 2u, 3u}) {
    NgramConfig cfg{w, 0.3, 0.05};
    auto scorer = train_ngram(testing::tokenize_all(lines, v), cfg, v);
    auto spec = testing::oracle_spec(lines, v, cfg);
    for (int q = 0; q < 200; ++q) {
      std::string s;
      int n = 1 + static_cast<int>(rng() % 7);
      for (int j = 0; j < n; ++j) s += "abcde"[rng() % 5];
      TokenSeq x = seq(s, v);
      std::size_t i = rng() % x.size();
      TokenId t = static_cast<TokenId>(rng() % 4);
      EXPECT_NEAR(scorer.prob(MaskedSeq(x, i), t),
                  oracle::ngram_prob(spec, testing::texts(x), i, v.texts()[t]), 1e-14)
          << s << " @" << i << " w=" << w;
    }
  }
}

TEST(NgramScorer, UnseenTokenHasPositiveProbability) {
  Vocab v({"a", "b", "c", "d", "z"});
  auto scorer = train_ngram(repeated("abcd", 5, v), window(2), v);
  TokenSeq x = seq("abcd", v);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_GT(scorer.prob(MaskedSeq(x, i), *v.find("z")), 0.0);
}

TEST(NgramScorer, SentinelsRejected) {
  Vocab v = abcd_vocab();
  auto scorer = train_ngram(repeated("abcd", 1, v), {}, v);
  TokenSeq x = seq("ab", v);
  for (TokenId t : {v.mask_id(), v.unk_id()}) {
    try {
      scorer.prob(MaskedSeq(x, 0), t);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kMaskIsSentinel);
    }
  }
}

TEST(NgramScorer, NormalizedAndConsistentWithTopCandidates) {
  Vocab v({"a", "b", "c", "d", "e", "f"});
  std::vector<std::string> lines{"abcdef", "fedcba", "aabbcc", "abab", "cdcd", "ef"};
  auto scorer = train_ngram(testing::tokenize_all(lines, v), {}, v);
  std::mt19937 rng(9);
  for (int q = 0; q < 300; ++q) {
    std::string s;
    int n = 1 + static_cast<int>(rng() % 8);
    for (int j = 0; j < n; ++j) s += "abcdefx"[rng() % 7];
    TokenSeq x = seq(s, v);
    MaskedSeq m(x, rng() % x.size());
    double sum = 0.0;
    for (TokenId t = 0; t < v.size(); ++t) sum += scorer.prob(m, t);
    EXPECT_NEAR(sum, 1.0, 1e-9);

    auto all = scorer.top_candidates(m, 100);
    ASSERT_EQ(all.size(), v.size());
    for (const auto& tp : all) EXPECT_NEAR(tp.prob, scorer.prob(m, tp.token.id), 1e-12);
    for (std::size_t l = 1; l < v.size(); ++l) {
      auto shorter = scorer.top_candidates(m, l);
      auto longer = scorer.top_candidates(m, l + 1);
      ASSERT_EQ(shorter.size(), l);
      for (std::size_t k = 0; k < l; ++k) EXPECT_EQ(shorter[k].token, longer[k].token);
    }
    EXPECT_TRUE(std::is_sorted(all.begin(), all.end(), [](const auto& a, const auto& b) {
      return a.prob > b.prob || (a.prob == b.prob && a.token.text < b.token.text);
    }));
  }
}

TEST(FineTune, WeightMustBePositive) {
  Vocab v = abcd_vocab();
  auto base = train_ngram(repeated("abcd", 5, v), {}, v);
  auto domain = repeated("abcd", 1, v);
  for (double w : {0.0, -1.0}) {
    try {
      fine_tune(base, domain, w);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidConfig);
    }
  }
  std::vector<TokenSeq> none;
  EXPECT_THROW(fine_tune(base, none, 1.0), Error);
}

TEST(FineTune, WeightOneEqualsTrainingOnTheUnion) {
  Vocab v = abcd_vocab();
  auto base_corpus = testing::tokenize_all({"abcd", "dcba", "abab"}, v);
  auto domain = testing::tokenize_all({"cdcd", "acbd"}, v);
  auto union_corpus = base_corpus;
  union_corpus.insert(union_corpus.end(), domain.begin(), domain.end());

  auto tuned = fine_tune(train_ngram(base_corpus, {}, v), domain, 1.0);
  EXPECT_EQ(tuned.to_json(), train_ngram(union_corpus, {}, v).to_json());
}

TEST(FineTune, DomainDataRaisesInDomainProbability) {
  Vocab v = abcd_vocab();
  auto base = train_ngram(testing::tokenize_all({"abad", "abbd", "abcd"}, v), window(1), v);
  auto tuned = fine_tune(base, repeated("abcd", 100, v), 1.0);
  TokenSeq x = seq("abcd", v);
  MaskedSeq m(x, 2);
  TokenId c = *v.find("c");
  EXPECT_GT(tuned.prob(m, c), base.prob(m, c));
  // Merged counts: context "b" is followed by c 101 of 104 times, context "d"
  // is preceded by c 101 of 103 times.
  EXPECT_NEAR(tuned.prob(m, c), 0.5 * (101.1 / 104.4) + 0.5 * (101.1 / 103.4), 1e-12);
}

TEST(FineTune, IntegerWeightEqualsRepeatingTheDomain) {
  Vocab v = abcd_vocab();
  auto base_corpus = testing::tokenize_all({"abad", "dcba"}, v);
  auto domain = testing::tokenize_all({"abcd", "bcda"}, v);
  auto repeated_union = base_corpus;
  for (int r = 0; r < 3; ++r) repeated_union.insert(repeated_union.end(), domain.begin(), domain.end());
  auto tuned = fine_tune(train_ngram(base_corpus, {}, v), domain, 3.0);
  EXPECT_EQ(tuned.to_json(), train_ngram(repeated_union, {}, v).to_json());
}

TEST(FineTune, LargeWeightApproachesDomainFrequencies) {
  Vocab v = abcd_vocab();
  auto base = train_ngram(testing::tokenize_all({"abcc", "dcbb"}, v), NgramConfig{1, 1.0, 0.1}, v);
  // In the domain text "c" is followed by d once and by a once.
  auto tuned = fine_tune(base, testing::tokenize_all({"abcd", "abca"}, v), 1e9);
  TokenSeq x = seq("abcd", v);
  MaskedSeq m(x, 3);
  EXPECT_NEAR(tuned.prob(m, *v.find("d")), 0.5, 1e-6);
  EXPECT_NEAR(tuned.prob(m, *v.find("a")), 0.5, 1e-6);
  EXPECT_NEAR(tuned.prob(m, *v.find("c")), 0.0, 1e-6);
}

TEST(ModelFile, SaveLoadPreservesProbabilities) {
  testing::TempDir dir;
  Vocab v({"今", "天", "气", "很", "好"});
  std::vector<std::string> lines{"今天天气很好", "天气很好", "今天好", "好天气"};
  auto corpus = testing::tokenize_all(lines, v);
  auto scorer = fine_tune(train_ngram(corpus, {2, 0.3, 0.07}, v), corpus, 0.37);
  scorer.save(dir / "model.json");
  auto loaded = NgramScorer::load(dir / "model.json");
  EXPECT_EQ(loaded.config().window, 2u);
  EXPECT_EQ(loaded.config().lambda, 0.3);

  std::mt19937 rng(1);
  const std::string chars[] = {"今", "天", "气", "很", "好", "我"};
  for (int q = 0; q < 1000; ++q) {
    std::string s;
    int n = 1 + static_cast<int>(rng() % 6);
    for (int j = 0; j < n; ++j) s += chars[rng() % 6];
    TokenSeq x = seq(s, v);
    MaskedSeq m(x, rng() % x.size());
    TokenId t = static_cast<TokenId>(rng() % v.size());
    EXPECT_NEAR(loaded.prob(m, t), scorer.prob(m, t), 1e-12);
  }
}

TEST(ModelFile, IntegerCountsAndStableBytes) {
  Vocab v = abcd_vocab();
  auto scorer = train_ngram(testing::tokenize_all({"abxd", "ab"}, v), window(2), v);
  auto doc = scorer.to_json();
  EXPECT_EQ(doc["version"], 1);
  EXPECT_TRUE(doc["left_counts"]["<s> <s>"]["a"].is_number_integer());
  EXPECT_EQ(doc["left_counts"]["<s> <s>"]["a"], 2);
  EXPECT_EQ(doc["left_counts"]["b [UNK]"]["d"], 1);
  EXPECT_EQ(NgramScorer::from_json(doc).to_json().dump(), doc.dump());
}

TEST(ModelFile, MalformedDocumentRejected) {
  EXPECT_THROW(NgramScorer::from_json(nlohmann::json{{"version", 1}}), Error);
  auto doc = train_ngram(repeated("ab", 1, abcd_vocab()), {}, abcd_vocab()).to_json();
  doc["version"] = 2;
  EXPECT_THROW(NgramScorer::from_json(doc), Error);
}

}  // namespace
}  // namespace ucorrect
