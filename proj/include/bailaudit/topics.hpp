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
//
// LDA by collapsed Gibbs sampling, with UMass coherence, held-out
// perplexity via fold-in, and a topic-count sweep that selects K by
// maximal mean coherence.

#ifndef BAILAUDIT_TOPICS_HPP_
#define BAILAUDIT_TOPICS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "bailaudit/corpus.hpp"
#include "bailaudit/hash.hpp"
#include "bailaudit/io.hpp"
#include "bailaudit/rng.hpp"
#include "bailaudit/threading.hpp"

namespace bailaudit {

struct LdaConfig {
  int num_topics = 0;     // K
  double alpha = 0.0;     // symmetric doc-topic prior; 0 means "use 50/K"
  double beta = 0.01;     // symmetric topic-word prior
  int iterations = 500;   // Gibbs sweeps
  int burn_in = 200;      // sweeps before estimates count as settled
  std::uint64_t seed = 0;

  double effective_alpha() const {
    return alpha > 0.0 ? alpha : 50.0 / static_cast<double>(num_topics);
  }

  void validate() const {
    if (num_topics < 2) throw std::invalid_argument("LDA requires K >= 2");
    if (effective_alpha() <= 0.0 || beta <= 0.0) {
      throw std::invalid_argument("LDA priors must be positive");
    }
    if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
    if (burn_in < 0 || burn_in >= iterations) {
      throw std::invalid_argument("burn_in must lie in [0, iterations)");
    }
  }

  static LdaConfig with_defaults(int k, std::uint64_t seed) {
    LdaConfig c;
    c.num_topics = k;
    c.alpha = 50.0 / static_cast<double>(k);
    c.seed = seed;
    return c;
  }
};

/// Count-state of a trained sampler. Rows of `doc_topic` align 1:1 with the
/// training corpus (a document emptied by preprocessing keeps an all-zero
/// row, so its topic distribution falls back to the prior).
class LdaModel {
 public:
  std::vector<std::string> vocab;                    // V entries
  std::vector<std::string> doc_ids;                  // D entries
  std::vector<std::vector<std::int32_t>> docs;       // vocab ids per doc
  std::vector<std::int32_t> topic_word;              // K*V, [k*V + w]
  std::vector<std::vector<std::int32_t>> doc_topic;  // D x K
  std::vector<std::int64_t> topic_totals;            // K
  std::vector<std::vector<std::int32_t>> assignments;  // D x N_d
  LdaConfig config;

  int K() const { return config.num_topics; }
  std::size_t V() const { return vocab.size(); }
  std::size_t num_docs() const { return doc_ids.size(); }

  std::int32_t topic_word_count(int k, std::int32_t w) const {
    return topic_word[static_cast<std::size_t>(k) * V() +
                      static_cast<std::size_t>(w)];
  }

  void check_invariants() const {
    const std::size_t v = V();
    const int k_count = K();
    if (topic_word.size() != static_cast<std::size_t>(k_count) * v) {
      throw std::runtime_error("LdaModel: topic_word shape mismatch");
    }
    for (int k = 0; k < k_count; ++k) {
      std::int64_t row = 0;
      for (std::size_t w = 0; w < v; ++w) {
        const auto c = topic_word[static_cast<std::size_t>(k) * v + w];
        if (c < 0) throw std::runtime_error("LdaModel: negative count");
        row += c;
      }
      if (row != topic_totals[static_cast<std::size_t>(k)]) {
        throw std::runtime_error("LdaModel: topic_word row " +
                                 std::to_string(k) +
                                 " does not sum to topic total");
      }
    }
    if (!docs.empty()) {
      if (docs.size() != doc_topic.size()) {
        throw std::runtime_error("LdaModel: doc_topic shape mismatch");
      }
      for (std::size_t d = 0; d < docs.size(); ++d) {
        std::int64_t row = 0;
        for (auto c : doc_topic[d]) {
          if (c < 0) throw std::runtime_error("LdaModel: negative count");
          row += c;
        }
        if (row != static_cast<std::int64_t>(docs[d].size())) {
          throw std::runtime_error("LdaModel: doc_topic row " +
                                   std::to_string(d) +
                                   " does not sum to token count");
        }
      }
    }
    for (const auto& doc_z : assignments) {
      for (auto z : doc_z) {
        if (z < 0 || z >= k_count) {
          throw std::runtime_error("LdaModel: assignment out of [0,K)");
        }
      }
    }
  }
};

// --- Training ---------------------------------------------------------------

/// Collapsed Gibbs sampling. Each token's topic is resampled from
///   p(z = k | rest) ∝ (n_dk + α) (n_kw + β) / (n_k + Vβ)
/// with the token's own assignment removed from the counts. The model is
/// the count state after the final sweep; bit-deterministic for a fixed
/// (corpus order, config, seed). Documents with no tokens are skipped.
inline LdaModel train_lda(const std::vector<TokenizedCase>& corpus,
                          const LdaConfig& config,
                          std::size_t* empty_docs_out = nullptr) {
  config.validate();
  if (corpus.empty()) throw std::runtime_error("train_lda: empty corpus");

  LdaModel m;
  m.config = config;
  std::unordered_map<std::string, std::int32_t> vocab_index;
  std::size_t total_tokens = 0;
  for (const auto& c : corpus) {
    m.doc_ids.push_back(c.id);
    std::vector<std::int32_t> ids;
    ids.reserve(c.tokens.size());
    for (const auto& t : c.tokens) {
      auto [it, inserted] =
          vocab_index.emplace(t, static_cast<std::int32_t>(m.vocab.size()));
      if (inserted) m.vocab.push_back(t);
      ids.push_back(it->second);
    }
    total_tokens += ids.size();
    m.docs.push_back(std::move(ids));
  }
  if (total_tokens == 0) {
    throw std::runtime_error("train_lda: every document is empty");
  }
  if (empty_docs_out) {
    *empty_docs_out = static_cast<std::size_t>(
        std::count_if(m.docs.begin(), m.docs.end(),
                      [](const auto& d) { return d.empty(); }));
  }

  const int K = config.num_topics;
  const std::size_t V = m.vocab.size();
  const double alpha = config.effective_alpha();
  const double beta = config.beta;
  const double v_beta = static_cast<double>(V) * beta;

  m.topic_word.assign(static_cast<std::size_t>(K) * V, 0);
  m.topic_totals.assign(static_cast<std::size_t>(K), 0);
  m.doc_topic.assign(m.docs.size(),
                     std::vector<std::int32_t>(static_cast<std::size_t>(K), 0));
  m.assignments.resize(m.docs.size());

  Rng rng(config.seed);
  std::vector<double> weight(static_cast<std::size_t>(K));
  // Sequential initialization: each token is drawn from the collapsed
  // conditional given everything assigned before it, so the first sweep
  // already starts from a coherent state rather than a uniform scatter.
  for (std::size_t d = 0; d < m.docs.size(); ++d) {
    m.assignments[d].resize(m.docs[d].size());
    for (std::size_t i = 0; i < m.docs[d].size(); ++i) {
      const std::int32_t w = m.docs[d][i];
      double total = 0.0;
      for (int k = 0; k < K; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        total += (static_cast<double>(m.doc_topic[d][ku]) + alpha) *
                 (static_cast<double>(
                      m.topic_word[ku * V + static_cast<std::size_t>(w)]) +
                  beta) /
                 (static_cast<double>(m.topic_totals[ku]) + v_beta);
        weight[ku] = total;
      }
      const double u = rng.next_double() * total;
      int z = K - 1;
      for (int k = 0; k < K; ++k) {
        if (u < weight[static_cast<std::size_t>(k)]) {
          z = k;
          break;
        }
      }
      m.assignments[d][i] = z;
      ++m.doc_topic[d][static_cast<std::size_t>(z)];
      ++m.topic_word[static_cast<std::size_t>(z) * V +
                     static_cast<std::size_t>(w)];
      ++m.topic_totals[static_cast<std::size_t>(z)];
    }
  }
  for (int sweep = 0; sweep < config.iterations; ++sweep) {
    for (std::size_t d = 0; d < m.docs.size(); ++d) {
      auto& zd = m.assignments[d];
      auto& nd = m.doc_topic[d];
      const auto& wd = m.docs[d];
      for (std::size_t i = 0; i < wd.size(); ++i) {
        const std::int32_t w = wd[i];
        const int old_z = zd[i];
        --nd[static_cast<std::size_t>(old_z)];
        --m.topic_word[static_cast<std::size_t>(old_z) * V +
                       static_cast<std::size_t>(w)];
        --m.topic_totals[static_cast<std::size_t>(old_z)];

        double total = 0.0;
        for (int k = 0; k < K; ++k) {
          const auto ku = static_cast<std::size_t>(k);
          const double p =
              (static_cast<double>(nd[ku]) + alpha) *
              (static_cast<double>(
                   m.topic_word[ku * V + static_cast<std::size_t>(w)]) +
               beta) /
              (static_cast<double>(m.topic_totals[ku]) + v_beta);
          total += p;
          weight[ku] = total;  // running cumulative sum
        }
        const double u = rng.next_double() * total;
        int new_z = K - 1;
        for (int k = 0; k < K; ++k) {
          if (u < weight[static_cast<std::size_t>(k)]) {
            new_z = k;
            break;
          }
        }
        zd[i] = new_z;
        ++nd[static_cast<std::size_t>(new_z)];
        ++m.topic_word[static_cast<std::size_t>(new_z) * V +
                       static_cast<std::size_t>(w)];
        ++m.topic_totals[static_cast<std::size_t>(new_z)];
      }
    }
#ifndef NDEBUG
    m.check_invariants();
#endif
  }
  return m;
}

// --- Point estimates ----------------------------------------------------------

/// θ_d with θ_dk = (n_dk + α) / (N_d + Kα). A zero-token document yields the
/// uniform prior 1/K.
inline std::vector<double> doc_topic_distribution(const LdaModel& m,
                                                  std::size_t doc_index) {
  if (doc_index >= m.doc_topic.size()) {
    throw std::out_of_range("doc index " + std::to_string(doc_index) +
                            " out of range");
  }
  const double alpha = m.config.effective_alpha();
  const auto& nd = m.doc_topic[doc_index];
  std::int64_t n_tokens = 0;
  for (auto c : nd) n_tokens += c;
  const double denom = static_cast<double>(n_tokens) +
                       static_cast<double>(m.K()) * alpha;
  std::vector<double> theta(nd.size());
  for (std::size_t k = 0; k < nd.size(); ++k) {
    theta[k] = (static_cast<double>(nd[k]) + alpha) / denom;
  }
  return theta;
}

/// φ_k with φ_kw = (n_kw + β) / (n_k + Vβ).
inline std::vector<double> topic_word_distribution(const LdaModel& m, int k) {
  if (k < 0 || k >= m.K()) {
    throw std::out_of_range("topic " + std::to_string(k) + " out of range");
  }
  const double beta = m.config.beta;
  const double denom =
      static_cast<double>(m.topic_totals[static_cast<std::size_t>(k)]) +
      static_cast<double>(m.V()) * beta;
  std::vector<double> phi(m.V());
  for (std::size_t w = 0; w < m.V(); ++w) {
    phi[w] = (static_cast<double>(
                  m.topic_word[static_cast<std::size_t>(k) * m.V() + w]) +
              beta) /
             denom;
  }
  return phi;
}

struct TopicSummary {
  int topic_id = 0;
  std::vector<std::pair<std::string, double>> top_words;  // φ descending
};

/// Top-M words of a topic. φ shares a denominator within a topic, so the
/// ranking is by raw count with exact integer tie-breaks on vocab index.
inline TopicSummary top_keywords(const LdaModel& m, int k, std::size_t top_m = 10) {
  if (k < 0 || k >= m.K()) {
    throw std::out_of_range("topic " + std::to_string(k) + " out of range");
  }
  if (top_m > m.V()) {
    throw std::invalid_argument("top_keywords: M exceeds vocabulary size");
  }
  std::vector<std::int32_t> order(m.V());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t v = m.V();
  const auto* row = m.topic_word.data() + static_cast<std::size_t>(k) * v;
  std::partial_sort(order.begin(), order.begin() + static_cast<long>(top_m),
                    order.end(), [&](std::int32_t a, std::int32_t b) {
                      if (row[a] != row[b]) return row[a] > row[b];
                      return a < b;
                    });
  const double beta = m.config.beta;
  const double denom =
      static_cast<double>(m.topic_totals[static_cast<std::size_t>(k)]) +
      static_cast<double>(v) * beta;
  TopicSummary s;
  s.topic_id = k;
  for (std::size_t i = 0; i < top_m; ++i) {
    const auto w = order[i];
    s.top_words.emplace_back(
        m.vocab[static_cast<std::size_t>(w)],
        (static_cast<double>(row[w]) + beta) / denom);
  }
  return s;
}

/// Indices of the largest and second-largest θ_d entries; integer count
/// comparison, ties to the lower topic index.
inline std::pair<int, int> dominant_topics(const LdaModel& m,
                                           std::size_t doc_index) {
  if (m.K() < 2) {
    throw std::runtime_error("dominant_topics requires K >= 2");
  }
  if (doc_index >= m.doc_topic.size()) {
    throw std::out_of_range("doc index " + std::to_string(doc_index) +
                            " out of range");
  }
  const auto& nd = m.doc_topic[doc_index];
  int first = 0;
  for (int k = 1; k < m.K(); ++k) {
    if (nd[static_cast<std::size_t>(k)] > nd[static_cast<std::size_t>(first)]) {
      first = k;
    }
  }
  int second = first == 0 ? 1 : 0;
  for (int k = 0; k < m.K(); ++k) {
    if (k == first || k == second) continue;
    if (nd[static_cast<std::size_t>(k)] >
        nd[static_cast<std::size_t>(second)]) {
      second = k;
    }
  }
  return {first, second};
}

// --- Model selection metrics ---------------------------------------------------

/// UMass coherence of topic k against a reference corpus:
///   C = Σ_{m=2..M} Σ_{l=1..m-1} log((D(w_m, w_l) + eps) / D(w_l))
/// where D counts documents containing the word(s) and words are the
/// topic's top-M by φ. Throws if a conditioning word never occurs.
inline double umass_coherence(const LdaModel& m,
                              const std::vector<TokenizedCase>& corpus, int k,
                              std::size_t top_m = 10, double eps = 1.0) {
  const TopicSummary summary =
      top_keywords(m, k, std::min<std::size_t>(top_m, m.V()));
  const std::size_t M = summary.top_words.size();
  if (M <= 1) return 0.0;

  std::vector<std::string> words;
  words.reserve(M);
  for (const auto& [w, p] : summary.top_words) words.push_back(w);

  // Document presence vectors for just the needed words.
  std::vector<std::vector<bool>> present(M);
  for (auto& p : present) p.assign(corpus.size(), false);
  std::unordered_map<std::string_view, std::size_t> word_pos;
  for (std::size_t i = 0; i < M; ++i) word_pos[words[i]] = i;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    for (const auto& t : corpus[d].tokens) {
      auto it = word_pos.find(t);
      if (it != word_pos.end()) present[it->second][d] = true;
    }
  }
  std::vector<std::int64_t> df(M, 0);
  for (std::size_t i = 0; i < M; ++i) {
    df[i] = std::count(present[i].begin(), present[i].end(), true);
  }

  double coherence = 0.0;
  for (std::size_t mi = 1; mi < M; ++mi) {
    for (std::size_t li = 0; li < mi; ++li) {
      if (df[li] == 0) {
        throw std::runtime_error(
            "umass_coherence: word \"" + words[li] +
            "\" has zero document frequency in the reference corpus");
      }
      std::int64_t co = 0;
      for (std::size_t d = 0; d < corpus.size(); ++d) {
        if (present[mi][d] && present[li][d]) ++co;
      }
      coherence += std::log((static_cast<double>(co) + eps) /
                            static_cast<double>(df[li]));
    }
  }
  return coherence;
}

struct PerplexityResult {
  double value = 0.0;
  std::size_t oov_tokens = 0;       // dropped: not in the model vocabulary
  std::size_t retained_tokens = 0;
};

/// Held-out perplexity by fold-in: φ is frozen at the trained counts, z is
/// resampled on the held-out documents for `fold_in_iters` sweeps, and
///   PP = exp(-(Σ_d Σ_tokens log Σ_k θ̂_dk φ_kw) / N).
/// Out-of-vocabulary tokens are dropped and counted.
inline PerplexityResult held_out_perplexity(
    const LdaModel& m, const std::vector<TokenizedCase>& held_out,
    int fold_in_iters, std::uint64_t seed) {
  std::unordered_map<std::string_view, std::int32_t> vocab_index;
  for (std::size_t w = 0; w < m.vocab.size(); ++w) {
    vocab_index[m.vocab[w]] = static_cast<std::int32_t>(w);
  }
  PerplexityResult result;
  std::vector<std::vector<std::int32_t>> docs;
  for (const auto& c : held_out) {
    std::vector<std::int32_t> ids;
    for (const auto& t : c.tokens) {
      auto it = vocab_index.find(t);
      if (it == vocab_index.end()) {
        ++result.oov_tokens;
      } else {
        ids.push_back(it->second);
      }
    }
    result.retained_tokens += ids.size();
    docs.push_back(std::move(ids));
  }
  if (result.retained_tokens == 0) {
    throw std::runtime_error(
        "held_out_perplexity: no held-out tokens in the model vocabulary");
  }

  const int K = m.K();
  const std::size_t V = m.V();
  const double alpha = m.config.effective_alpha();
  const double beta = m.config.beta;
  const double v_beta = static_cast<double>(V) * beta;

  auto phi_kw = [&](int k, std::int32_t w) {
    const auto ku = static_cast<std::size_t>(k);
    return (static_cast<double>(
                m.topic_word[ku * V + static_cast<std::size_t>(w)]) +
            beta) /
           (static_cast<double>(m.topic_totals[ku]) + v_beta);
  };

  Rng rng(seed);
  double log_likelihood = 0.0;
  std::vector<double> weight(static_cast<std::size_t>(K));
  for (const auto& wd : docs) {
    if (wd.empty()) continue;
    std::vector<int> zd(wd.size());
    std::vector<std::int64_t> nd(static_cast<std::size_t>(K), 0);
    for (std::size_t i = 0; i < wd.size(); ++i) {
      const int z = static_cast<int>(rng.below(static_cast<std::uint64_t>(K)));
      zd[i] = z;
      ++nd[static_cast<std::size_t>(z)];
    }
    for (int sweep = 0; sweep < fold_in_iters; ++sweep) {
      for (std::size_t i = 0; i < wd.size(); ++i) {
        --nd[static_cast<std::size_t>(zd[i])];
        double total = 0.0;
        for (int k = 0; k < K; ++k) {
          total += phi_kw(k, wd[i]) *
                   (static_cast<double>(nd[static_cast<std::size_t>(k)]) +
                    alpha);
          weight[static_cast<std::size_t>(k)] = total;
        }
        const double u = rng.next_double() * total;
        int new_z = K - 1;
        for (int k = 0; k < K; ++k) {
          if (u < weight[static_cast<std::size_t>(k)]) {
            new_z = k;
            break;
          }
        }
        zd[i] = new_z;
        ++nd[static_cast<std::size_t>(new_z)];
      }
    }
    const double theta_denom = static_cast<double>(wd.size()) +
                               static_cast<double>(K) * alpha;
    for (std::size_t i = 0; i < wd.size(); ++i) {
      double p = 0.0;
      for (int k = 0; k < K; ++k) {
        const double theta =
            (static_cast<double>(nd[static_cast<std::size_t>(k)]) + alpha) /
            theta_denom;
        p += theta * phi_kw(k, wd[i]);
      }
      log_likelihood += std::log(p);
    }
  }
  result.value = std::exp(-log_likelihood /
                          static_cast<double>(result.retained_tokens));
  return result;
}

inline PerplexityResult held_out_perplexity(
    const LdaModel& m, const std::vector<TokenizedCase>& held_out,
    int fold_in_iters = 50) {
  return held_out_perplexity(m, held_out, fold_in_iters,
                             m.config.seed ^ 0x5df1a3c2b4e69f71ULL);
}

// --- Topic count sweep -----------------------------------------------------------

struct SweepEntry {
  int num_topics = 0;
  double coherence = 0.0;
  double perplexity = 0.0;
};

struct SweepResult {
  std::vector<SweepEntry> entries;  // in candidate order
  int chosen_k = 0;
};

/// argmax-coherence with ties to the smaller K.
inline int select_chosen_k(const std::vector<SweepEntry>& entries) {
  if (entries.empty()) throw std::invalid_argument("empty sweep");
  std::size_t best = 0;
  for (std::size_t i = 1; i < entries.size(); ++i) {
    const bool better =
        entries[i].coherence > entries[best].coherence ||
        (entries[i].coherence == entries[best].coherence &&
         entries[i].num_topics < entries[best].num_topics);
    if (better) best = i;
  }
  return entries[best].num_topics;
}

/// Trains one seeded model per candidate K on an internal 90/10
/// train/held-out document split, scoring mean per-topic UMass coherence
/// (topics whose top words lack reference support are skipped) and held-out
/// fold-in perplexity. Candidates may be evaluated in parallel; results are
/// reduced in candidate order.
inline SweepResult sweep_topic_counts(const std::vector<TokenizedCase>& corpus,
                                      const std::vector<int>& candidate_ks,
                                      const LdaConfig& base_config,
                                      unsigned threads = 1,
                                      int fold_in_iters = 50) {
  if (candidate_ks.empty()) {
    throw std::invalid_argument("sweep requires at least one candidate K");
  }
  // Internal held-out fraction for perplexity.
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(base_config.seed ^ 0x9c4f36a1d2e85b07ULL);
  rng.shuffle(order);
  std::size_t held = corpus.size() / 10;
  if (held == 0 && corpus.size() > 1) held = 1;
  std::vector<TokenizedCase> held_out, training;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < held ? held_out : training).push_back(corpus[order[i]]);
  }

  SweepResult result;
  result.entries.resize(candidate_ks.size());
  std::vector<std::string> errors(candidate_ks.size());
  parallel_for(candidate_ks.size(), threads, [&](std::size_t i) {
    const int k = candidate_ks[i];
    try {
      LdaConfig config = base_config;
      config.num_topics = k;
      if (base_config.alpha <= 0.0) config.alpha = 50.0 / k;
      config.seed = derive_seed(base_config.seed,
                                "sweep-k" + std::to_string(k));
      const LdaModel model = train_lda(training, config);
      double coherence_sum = 0.0;
      int scored = 0;
      for (int topic = 0; topic < model.K(); ++topic) {
        try {
          coherence_sum += umass_coherence(model, training, topic);
          ++scored;
        } catch (const std::exception&) {
          // Topic without reference support; leave it out of the mean.
        }
      }
      if (scored == 0) {
        throw std::runtime_error("no topic had scorable coherence");
      }
      SweepEntry entry;
      entry.num_topics = k;
      entry.coherence = coherence_sum / scored;
      entry.perplexity =
          held_out_perplexity(model, held_out, fold_in_iters,
                              derive_seed(config.seed, "fold-in"))
              .value;
      result.entries[i] = entry;
    } catch (const std::exception& e) {
      errors[i] = "K=" + std::to_string(k) + ": " + e.what();
    }
  });
  for (const auto& err : errors) {
    if (!err.empty()) {
      throw std::runtime_error("topic sweep failed at " + err);
    }
  }
  result.chosen_k = select_chosen_k(result.entries);
  return result;
}

// --- Artifact ---------------------------------------------------------------------

inline constexpr int kLdaModelFormatVersion = 1;

inline void save_lda_model(const LdaModel& m, const std::filesystem::path& path) {
  nlohmann::json j;
  j["format"] = "bailaudit.lda_model";
  j["format_version"] = kLdaModelFormatVersion;
  j["config"] = {
      {"num_topics", m.config.num_topics}, {"alpha", m.config.alpha},
      {"beta", m.config.beta},             {"iterations", m.config.iterations},
      {"burn_in", m.config.burn_in},       {"seed", m.config.seed},
  };
  j["vocab"] = m.vocab;
  j["doc_ids"] = m.doc_ids;
  nlohmann::json rows = nlohmann::json::array();
  for (int k = 0; k < m.K(); ++k) {
    rows.push_back(std::vector<std::int32_t>(
        m.topic_word.begin() + static_cast<long>(k) * static_cast<long>(m.V()),
        m.topic_word.begin() +
            (static_cast<long>(k) + 1) * static_cast<long>(m.V())));
  }
  j["topic_word_counts"] = std::move(rows);
  j["doc_topic_counts"] = m.doc_topic;
  j["topic_totals"] = m.topic_totals;
  write_file(path, j.dump());
}

inline LdaModel load_lda_model(const std::filesystem::path& path) {
  const nlohmann::json j = nlohmann::json::parse(read_file(path));
  if (!j.contains("format") || j["format"] != "bailaudit.lda_model") {
    throw std::runtime_error(path.string() + ": not an LDA model artifact");
  }
  if (!j.contains("format_version") ||
      j["format_version"].get<int>() != kLdaModelFormatVersion) {
    throw std::runtime_error(
        path.string() + ": unsupported model format version " +
        (j.contains("format_version") ? j["format_version"].dump() : "?") +
        " (expected " + std::to_string(kLdaModelFormatVersion) + ")");
  }
  LdaModel m;
  const auto& cfg = j.at("config");
  m.config.num_topics = cfg.at("num_topics").get<int>();
  m.config.alpha = cfg.at("alpha").get<double>();
  m.config.beta = cfg.at("beta").get<double>();
  m.config.iterations = cfg.at("iterations").get<int>();
  m.config.burn_in = cfg.at("burn_in").get<int>();
  m.config.seed = cfg.at("seed").get<std::uint64_t>();
  m.vocab = j.at("vocab").get<std::vector<std::string>>();
  m.doc_ids = j.at("doc_ids").get<std::vector<std::string>>();
  const auto rows =
      j.at("topic_word_counts").get<std::vector<std::vector<std::int32_t>>>();
  for (const auto& row : rows) {
    if (row.size() != m.vocab.size()) {
      throw std::runtime_error(path.string() + ": topic_word row width");
    }
    m.topic_word.insert(m.topic_word.end(), row.begin(), row.end());
  }
  m.doc_topic =
      j.at("doc_topic_counts").get<std::vector<std::vector<std::int32_t>>>();
  m.topic_totals = j.at("topic_totals").get<std::vector<std::int64_t>>();
  m.check_invariants();
  return m;
}

}  // namespace bailaudit

#endif  // BAILAUDIT_TOPICS_HPP_
