// Copyright 2026 The bailaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bailaudit/topics.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "support/synthetic.hpp"
#include "support/tempdir.hpp"

namespace bailaudit {
namespace {

TokenizedCase doc(const std::string& id,
                  const std::vector<std::string>& tokens) {
  TokenizedCase c;
  c.id = id;
  c.tokens = tokens;
  return c;
}

// Hand-built model: counts only, no training.
LdaModel make_model(int k, std::vector<std::string> vocab,
                    std::vector<std::vector<std::int32_t>> topic_word_rows,
                    std::vector<std::vector<std::int32_t>> doc_topic_rows,
                    double alpha, double beta) {
  LdaModel m;
  m.config.num_topics = k;
  m.config.alpha = alpha;
  m.config.beta = beta;
  m.config.iterations = 1;
  m.config.burn_in = 0;
  m.vocab = std::move(vocab);
  for (const auto& row : topic_word_rows) {
    std::int64_t total = 0;
    for (auto c : row) total += c;
    m.topic_totals.push_back(total);
    m.topic_word.insert(m.topic_word.end(), row.begin(), row.end());
  }
  m.doc_topic = std::move(doc_topic_rows);
  for (std::size_t d = 0; d < m.doc_topic.size(); ++d) {
    m.doc_ids.push_back("doc" + std::to_string(d));
  }
  return m;
}

TEST(TrainLda, SingleTokenCorpus) {
  const std::vector<TokenizedCase> corpus = {doc("a", {"a"})};
  LdaConfig cfg = LdaConfig::with_defaults(2, 7);
  cfg.iterations = 10;
  cfg.burn_in = 2;
  const LdaModel m = train_lda(corpus, cfg);
  ASSERT_EQ(m.assignments.size(), 1u);
  ASSERT_EQ(m.assignments[0].size(), 1u);
  EXPECT_NO_THROW(m.check_invariants());
  EXPECT_EQ(m.topic_totals[0] + m.topic_totals[1], 1);
}

TEST(TrainLda, DeterministicForFixedSeed) {
  const auto planted = testing::make_planted_corpus(3, 30, 40, 20, 123);
  LdaConfig cfg = LdaConfig::with_defaults(3, 55);
  cfg.alpha = 0.5;
  cfg.iterations = 30;
  cfg.burn_in = 5;
  const LdaModel a = train_lda(planted.docs, cfg);
  const LdaModel b = train_lda(planted.docs, cfg);
  EXPECT_EQ(a.assignments, b.assignments);
  EXPECT_EQ(a.topic_word, b.topic_word);
  cfg.seed = 56;
  const LdaModel c = train_lda(planted.docs, cfg);
  EXPECT_NE(a.assignments, c.assignments);
}

TEST(TrainLda, EmptyCorpusFails) {
  LdaConfig cfg = LdaConfig::with_defaults(2, 1);
  EXPECT_THROW(train_lda({}, cfg), std::runtime_error);
  const std::vector<TokenizedCase> all_empty = {doc("a", {}), doc("b", {})};
  EXPECT_THROW(train_lda(all_empty, cfg), std::runtime_error);
}

TEST(TrainLda, EmptyDocsSkippedButKeepRows) {
  const std::vector<TokenizedCase> corpus = {doc("a", {"x", "y"}), doc("b", {}),
                                             doc("c", {"x"})};
  LdaConfig cfg = LdaConfig::with_defaults(2, 3);
  cfg.iterations = 5;
  cfg.burn_in = 1;
  std::size_t empty = 0;
  const LdaModel m = train_lda(corpus, cfg, &empty);
  EXPECT_EQ(empty, 1u);
  ASSERT_EQ(m.doc_topic.size(), 3u);
  EXPECT_EQ(m.doc_topic[1][0] + m.doc_topic[1][1], 0);
  EXPECT_NO_THROW(m.check_invariants());
}

TEST(TrainLda, InvariantsHoldOnRandomCorpus) {
  const auto planted = testing::make_planted_corpus(4, 24, 60, 15, 9);
  LdaConfig cfg = LdaConfig::with_defaults(4, 2);
  cfg.iterations = 25;
  cfg.burn_in = 5;
  const LdaModel m = train_lda(planted.docs, cfg);
  EXPECT_NO_THROW(m.check_invariants());
}

// --- θ and φ -----------------------------------------------------------------

TEST(DocTopicDistribution, EmptyDocIsUniform) {
  const LdaModel m = make_model(2, {"a"}, {{1}, {0}}, {{0, 0}}, 0.5, 0.01);
  const auto theta = doc_topic_distribution(m, 0);
  EXPECT_DOUBLE_EQ(theta[0], 0.5);
  EXPECT_DOUBLE_EQ(theta[1], 0.5);
}

TEST(DocTopicDistribution, HandArithmetic) {
  const LdaModel m =
      make_model(2, {"a"}, {{3}, {1}}, {{3, 1}}, 0.5, 0.01);
  const auto theta = doc_topic_distribution(m, 0);
  EXPECT_DOUBLE_EQ(theta[0], 0.7);
  EXPECT_DOUBLE_EQ(theta[1], 0.3);
}

TEST(DocTopicDistribution, SumsToOne) {
  const auto planted = testing::make_planted_corpus(3, 30, 20, 25, 77);
  LdaConfig cfg = LdaConfig::with_defaults(3, 4);
  cfg.iterations = 10;
  cfg.burn_in = 2;
  const LdaModel m = train_lda(planted.docs, cfg);
  for (std::size_t d = 0; d < m.num_docs(); ++d) {
    const auto theta = doc_topic_distribution(m, d);
    double sum = 0;
    for (double t : theta) {
      EXPECT_GE(t, 0.0);
      sum += t;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
  EXPECT_THROW(doc_topic_distribution(m, m.num_docs()), std::out_of_range);
}

TEST(TopicWordDistribution, HandArithmetic) {
  const LdaModel m = make_model(1, {"a", "b", "c"}, {{2, 0, 0}}, {{2}}, 0.5,
                                1.0);
  const auto phi = topic_word_distribution(m, 0);
  EXPECT_DOUBLE_EQ(phi[0], 3.0 / 5.0);
  EXPECT_DOUBLE_EQ(phi[1], 1.0 / 5.0);
  EXPECT_DOUBLE_EQ(phi[2], 1.0 / 5.0);
}

TEST(TopicWordDistribution, EmptyTopicIsUniformAndSumsToOne) {
  const LdaModel m = make_model(2, {"a", "b", "c"}, {{0, 0, 0}, {1, 2, 3}},
                                {{0, 6}}, 0.5, 0.01);
  const auto phi = topic_word_distribution(m, 0);
  EXPECT_DOUBLE_EQ(phi[0], 1.0 / 3.0);
  for (int k = 0; k < 2; ++k) {
    const auto p = topic_word_distribution(m, k);
    double sum = 0;
    for (double v : p) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
  EXPECT_THROW(topic_word_distribution(m, 2), std::out_of_range);
  EXPECT_THROW(topic_word_distribution(m, -1), std::out_of_range);
}

// --- top keywords and dominant topics ---------------------------------------------

TEST(TopKeywords, UniqueMaxFirstAndTiesByVocabIndex) {
  const LdaModel m = make_model(1, {"a", "b", "c", "d"}, {{2, 5, 2, 1}},
                                {{10}}, 0.5, 0.01);
  const auto s = top_keywords(m, 0, 4);
  ASSERT_EQ(s.top_words.size(), 4u);
  EXPECT_EQ(s.top_words[0].first, "b");
  // a and c tie at count 2: a (lower vocab index) first
  EXPECT_EQ(s.top_words[1].first, "a");
  EXPECT_EQ(s.top_words[2].first, "c");
  EXPECT_EQ(s.top_words[3].first, "d");
  // probabilities non-increasing
  for (std::size_t i = 1; i < s.top_words.size(); ++i) {
    EXPECT_LE(s.top_words[i].second, s.top_words[i - 1].second);
  }
  EXPECT_THROW(top_keywords(m, 0, 5), std::invalid_argument);
}

TEST(DominantTopics, SpecExamples) {
  // counts [5,3,2]: dominant 0, second 1
  const LdaModel a = make_model(3, {"w"}, {{5}, {3}, {2}}, {{5, 3, 2}},
                                0.5, 0.01);
  EXPECT_EQ(dominant_topics(a, 0), (std::pair<int, int>{0, 1}));
  // tie [4,4,2] -> (0,1)
  const LdaModel b = make_model(3, {"w"}, {{4}, {4}, {2}}, {{4, 4, 2}},
                                0.5, 0.01);
  EXPECT_EQ(dominant_topics(b, 0), (std::pair<int, int>{0, 1}));
  // uniform -> (0,1)
  const LdaModel c = make_model(3, {"w"}, {{0}, {0}, {0}}, {{0, 0, 0}},
                                0.5, 0.01);
  EXPECT_EQ(dominant_topics(c, 0), (std::pair<int, int>{0, 1}));
  // K < 2 is an error
  const LdaModel d = make_model(1, {"w"}, {{1}}, {{1}}, 0.5, 0.01);
  EXPECT_THROW(dominant_topics(d, 0), std::runtime_error);
}

// --- UMass coherence ------------------------------------------------------------

TEST(UmassCoherence, HandPairwiseCounts) {
  // corpus {d1:{a,b}, d2:{a}, d3:{b,c}}, top words (a,b), M=2:
  // C = log((D(b,a)+1)/D(a)) = log(2/2) = 0
  const std::vector<TokenizedCase> corpus = {
      doc("d1", {"a", "b"}), doc("d2", {"a"}), doc("d3", {"b", "c"})};
  const LdaModel m = make_model(1, {"a", "b", "c"}, {{5, 3, 1}}, {{9}},
                                0.5, 0.01);
  EXPECT_DOUBLE_EQ(umass_coherence(m, corpus, 0, 2), 0.0);
}

TEST(UmassCoherence, FullyCooccurringWordsArePositive) {
  const std::vector<TokenizedCase> corpus = {doc("d1", {"a", "b"}),
                                             doc("d2", {"a", "b"})};
  const LdaModel m = make_model(1, {"a", "b"}, {{5, 3}}, {{8}}, 0.5, 0.01);
  // C = log((2+1)/2) > 0
  EXPECT_NEAR(umass_coherence(m, corpus, 0, 2), std::log(1.5), 1e-12);
  EXPECT_GT(umass_coherence(m, corpus, 0, 2), 0.0);
}

TEST(UmassCoherence, SingleWordIsVacuouslyZero) {
  const std::vector<TokenizedCase> corpus = {doc("d1", {"a"})};
  const LdaModel m = make_model(1, {"a", "b"}, {{5, 3}}, {{8}}, 0.5, 0.01);
  EXPECT_DOUBLE_EQ(umass_coherence(m, corpus, 0, 1), 0.0);
}

TEST(UmassCoherence, ZeroDocFrequencyNamesTheWord) {
  const std::vector<TokenizedCase> corpus = {doc("d1", {"b"})};
  const LdaModel m = make_model(1, {"a", "b"}, {{5, 3}}, {{8}}, 0.5, 0.01);
  try {
    umass_coherence(m, corpus, 0, 2);
    FAIL() << "expected zero-df error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("\"a\""), std::string::npos);
  }
}

TEST(UmassCoherence, AgreesWithBruteForceOnRandomCorpora) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto planted =
        testing::make_planted_corpus(3, 18, 30 + 4 * seed, 12, 1000 + seed);
    LdaConfig cfg = LdaConfig::with_defaults(3, seed);
    cfg.alpha = 0.3;
    cfg.iterations = 20;
    cfg.burn_in = 4;
    const LdaModel m = train_lda(planted.docs, cfg);
    for (int k = 0; k < m.K(); ++k) {
      const auto summary = top_keywords(m, k, 10);
      std::vector<std::string> words;
      for (const auto& [w, p] : summary.top_words) words.push_back(w);
      double expected;
      try {
        expected = testing::brute_force_umass(planted.docs, words);
      } catch (...) {  // oracle cannot divide by zero df either
        continue;
      }
      if (!std::isfinite(expected)) continue;
      EXPECT_NEAR(umass_coherence(m, planted.docs, k, 10), expected, 1e-9);
    }
  }
}

// --- Held-out perplexity ---------------------------------------------------------

TEST(Perplexity, UnigramClosedFormAtKOne) {
  // K=1: θ=1, so PP = exp(-Σ log φ_0w / N) with φ = ((3+1)/6, (1+1)/6)
  const LdaModel m = make_model(1, {"a", "b"}, {{3, 1}}, {{4}}, 0.5, 1.0);
  const std::vector<TokenizedCase> held = {doc("h", {"a", "b"})};
  const auto result = held_out_perplexity(m, held, 5, 99);
  const double expected =
      std::exp(-(std::log(4.0 / 6.0) + std::log(2.0 / 6.0)) / 2.0);
  EXPECT_NEAR(result.value, expected, 1e-12);
  EXPECT_EQ(result.oov_tokens, 0u);
  EXPECT_EQ(result.retained_tokens, 2u);
  EXPECT_GE(result.value, 1.0);
}

TEST(Perplexity, CountsOutOfVocabularyTokens) {
  const LdaModel m = make_model(1, {"a", "b"}, {{3, 1}}, {{4}}, 0.5, 1.0);
  const std::vector<TokenizedCase> held = {doc("h", {"a", "zzz"})};
  const auto result = held_out_perplexity(m, held, 5, 99);
  EXPECT_EQ(result.oov_tokens, 1u);
  EXPECT_EQ(result.retained_tokens, 1u);
}

TEST(Perplexity, NoRetainedTokensFails) {
  const LdaModel m = make_model(1, {"a"}, {{3}}, {{3}}, 0.5, 1.0);
  const std::vector<TokenizedCase> held = {doc("h", {"zzz"})};
  EXPECT_THROW(held_out_perplexity(m, held, 5, 99), std::runtime_error);
}

TEST(Perplexity, TrainingBeatsRandomInitOnPlantedCorpus) {
  const auto planted = testing::make_planted_corpus(3, 30, 300, 40, 2024);
  const auto held = testing::make_planted_corpus(3, 30, 60, 40, 4048);
  LdaConfig cfg;
  cfg.num_topics = 3;
  cfg.alpha = 0.2;
  cfg.beta = 0.01;
  cfg.iterations = 150;
  cfg.burn_in = 50;
  cfg.seed = 5;
  const LdaModel trained = train_lda(planted.docs, cfg);
  const LdaModel untrained = testing::untrained_lda_model(planted.docs, cfg);
  const double pp_trained =
      held_out_perplexity(trained, held.docs, 40, 77).value;
  const double pp_untrained =
      held_out_perplexity(untrained, held.docs, 40, 77).value;
  EXPECT_GE(pp_trained, 1.0);
  EXPECT_GE(pp_untrained, 1.0);
  EXPECT_LT(pp_trained, pp_untrained);
}

// --- Sweep ---------------------------------------------------------------------

TEST(Sweep, SingletonCandidateIsChosen) {
  const auto planted = testing::make_planted_corpus(2, 16, 40, 12, 31);
  LdaConfig base = LdaConfig::with_defaults(2, 17);
  base.alpha = 0.4;
  base.iterations = 15;
  base.burn_in = 3;
  const auto result = sweep_topic_counts(planted.docs, {2}, base);
  EXPECT_EQ(result.chosen_k, 2);
  ASSERT_EQ(result.entries.size(), 1u);
  EXPECT_EQ(result.entries[0].num_topics, 2);
}

TEST(Sweep, TieBreaksToSmallerK) {
  std::vector<SweepEntry> entries = {{10, -5.0, 2.0}, {5, -5.0, 3.0}};
  EXPECT_EQ(select_chosen_k(entries), 5);
  entries = {{5, -5.0, 3.0}, {10, -4.0, 2.0}};
  EXPECT_EQ(select_chosen_k(entries), 10);
  EXPECT_THROW(select_chosen_k({}), std::invalid_argument);
}

TEST(Sweep, DeterministicAcrossThreadCounts) {
  const auto planted = testing::make_planted_corpus(3, 24, 60, 15, 8);
  LdaConfig base = LdaConfig::with_defaults(2, 21);
  base.alpha = 0.4;
  base.iterations = 15;
  base.burn_in = 3;
  const auto a = sweep_topic_counts(planted.docs, {2, 3, 4}, base, 1);
  const auto b = sweep_topic_counts(planted.docs, {2, 3, 4}, base, 4);
  ASSERT_EQ(a.entries.size(), b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    EXPECT_EQ(a.entries[i].num_topics, b.entries[i].num_topics);
    EXPECT_EQ(a.entries[i].coherence, b.entries[i].coherence);
    EXPECT_EQ(a.entries[i].perplexity, b.entries[i].perplexity);
  }
  EXPECT_EQ(a.chosen_k, b.chosen_k);
  EXPECT_THROW(sweep_topic_counts(planted.docs, {}, base),
               std::invalid_argument);
}

// --- Planted-topic recovery -------------------------------------------------------

TEST(PlantedRecovery, RecoversTopicsWithinTolerance) {
  const auto planted = testing::make_planted_corpus(3, 30, 500, 50, 20000);
  LdaConfig cfg;
  cfg.num_topics = 3;
  cfg.alpha = 0.5;
  cfg.beta = 0.01;
  cfg.iterations = 250;
  cfg.burn_in = 80;
  cfg.seed = 300;
  const LdaModel m = train_lda(planted.docs, cfg);
  EXPECT_LT(testing::worst_matched_tv(m, planted), 0.1);
}

// --- Artifact ------------------------------------------------------------------

TEST(ModelArtifact, RoundTrips) {
  const auto planted = testing::make_planted_corpus(3, 20, 30, 10, 3);
  LdaConfig cfg = LdaConfig::with_defaults(3, 13);
  cfg.iterations = 10;
  cfg.burn_in = 2;
  const LdaModel m = train_lda(planted.docs, cfg);
  testing::TempDir dir("model");
  const auto path = dir.file("model.json");
  save_lda_model(m, path);
  const LdaModel loaded = load_lda_model(path);
  EXPECT_EQ(loaded.vocab, m.vocab);
  EXPECT_EQ(loaded.topic_word, m.topic_word);
  EXPECT_EQ(loaded.doc_topic, m.doc_topic);
  EXPECT_EQ(loaded.doc_ids, m.doc_ids);
  EXPECT_EQ(loaded.config.num_topics, m.config.num_topics);
  EXPECT_DOUBLE_EQ(loaded.config.alpha, m.config.alpha);
}

TEST(ModelArtifact, RejectsWrongVersionOrFormat) {
  testing::TempDir dir("modelbad");
  const auto path = dir.file("bad.json");
  write_file(path,
             R"({"format":"bailaudit.lda_model","format_version":99})");
  EXPECT_THROW(load_lda_model(path), std::runtime_error);
  write_file(path, R"({"format":"something_else","format_version":1})");
  EXPECT_THROW(load_lda_model(path), std::runtime_error);
}

}  // namespace
}  // namespace bailaudit
