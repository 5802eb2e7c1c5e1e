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
// Corpus ingestion and preprocessing for Hindi (Devanagari) legal case
// documents: JSONL loading with seeded sampling, tokenization with URL,
// punctuation and stopword filtering, token statistics and stratified
// train/val/test splitting.

#ifndef BAILAUDIT_CORPUS_HPP_
#define BAILAUDIT_CORPUS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <regex>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "bailaudit/io.hpp"
#include "bailaudit/rng.hpp"
#include "bailaudit/text.hpp"

namespace bailaudit {

enum class BailOutcome : int { kDenied = 0, kGranted = 1 };

inline int outcome_to_int(BailOutcome o) { return static_cast<int>(o); }

inline std::string outcome_to_string(BailOutcome o) {
  return o == BailOutcome::kGranted ? "granted" : "denied";
}

struct CaseDocument {
  std::string id;
  std::string facts;  // NFC-normalized after ingestion
  BailOutcome label = BailOutcome::kDenied;
  std::optional<std::string> district;
};

struct TokenizedCase {
  std::string id;
  std::vector<std::string> tokens;
  BailOutcome label = BailOutcome::kDenied;
};

enum class Partition { kFull, kGrantedOnly, kDeniedOnly };

struct CorpusStats {
  double mean = 0.0;
  double median = 0.0;
  std::int64_t min = 0;
  std::int64_t max = 0;
  Partition partition = Partition::kFull;
  std::size_t n_cases = 0;
};

struct SplitSpec {
  double train_frac = 0.8;
  double val_frac = 0.1;
  double test_frac = 0.1;
  std::uint64_t seed = 0;

  void validate() const {
    auto in_open_unit = [](double f) { return f > 0.0 && f < 1.0; };
    if (!in_open_unit(train_frac) || !in_open_unit(val_frac) ||
        !in_open_unit(test_frac)) {
      throw std::invalid_argument("split fractions must lie in (0,1)");
    }
    const double sum = train_frac + val_frac + test_frac;
    if (std::abs(sum - 1.0) > 1e-9) {
      throw std::invalid_argument("split fractions must sum to 1");
    }
  }
};

using StopwordSet = std::unordered_set<std::string>;

/// Newline-delimited stopword file; lines starting with '#' are comments.
/// Entries are NFC-normalized.
inline StopwordSet load_stopwords(const std::filesystem::path& path) {
  StopwordSet out;
  for (const auto& raw : read_lines(path)) {
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    out.insert(nfc(line));
  }
  return out;
}

// --- Loading -----------------------------------------------------------------

/// Reads a JSONL corpus ({"id","facts","decision"[,"district"]} per line).
/// With sample_n set, draws that many records uniformly without replacement
/// (seeded) and returns them in file order. Facts are NFC-normalized.
inline std::vector<CaseDocument> load_corpus(
    const std::filesystem::path& path,
    std::optional<std::size_t> sample_n = std::nullopt,
    std::uint64_t seed = 0) {
  std::vector<CaseDocument> docs;
  std::unordered_set<std::string> seen_ids;
  std::size_t lineno = 0;
  for (const auto& line : read_lines(path)) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
      throw std::runtime_error("corpus line " + std::to_string(lineno) +
                               ": invalid JSON (" + e.what() + ")");
    }
    auto fail = [&](const std::string& what) -> std::runtime_error {
      return std::runtime_error("corpus line " + std::to_string(lineno) +
                                ": " + what);
    };
    if (!rec.is_object()) throw fail("record is not a JSON object");
    if (!rec.contains("id") || !rec["id"].is_string() ||
        rec["id"].get<std::string>().empty()) {
      throw fail("missing or empty `id`");
    }
    if (!rec.contains("facts") || !rec["facts"].is_string()) {
      throw fail("missing `facts`");
    }
    if (!rec.contains("decision") || !rec["decision"].is_string()) {
      throw fail("missing `decision`");
    }
    const std::string decision = rec["decision"].get<std::string>();
    BailOutcome label;
    if (decision == "granted") {
      label = BailOutcome::kGranted;
    } else if (decision == "denied") {
      label = BailOutcome::kDenied;
    } else {
      throw fail("decision must be \"granted\" or \"denied\", got \"" +
                 decision + "\"");
    }
    CaseDocument doc;
    doc.id = rec["id"].get<std::string>();
    if (!seen_ids.insert(doc.id).second) {
      throw fail("duplicate case id \"" + doc.id + "\"");
    }
    doc.facts = nfc(rec["facts"].get<std::string>());
    doc.label = label;
    if (rec.contains("district") && rec["district"].is_string()) {
      doc.district = rec["district"].get<std::string>();
    }
    docs.push_back(std::move(doc));
  }
  if (!sample_n) return docs;
  if (*sample_n > docs.size()) {
    throw std::runtime_error("sample_n (" + std::to_string(*sample_n) +
                             ") exceeds corpus size (" +
                             std::to_string(docs.size()) + ")");
  }
  // Partial Fisher-Yates over indices, then restore file order.
  std::vector<std::size_t> idx(docs.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(seed);
  for (std::size_t i = 0; i < *sample_n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(
                                  rng.below(idx.size() - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(*sample_n);
  std::sort(idx.begin(), idx.end());
  std::vector<CaseDocument> sampled;
  sampled.reserve(*sample_n);
  for (std::size_t i : idx) sampled.push_back(std::move(docs[i]));
  return sampled;
}

// --- Tokenization --------------------------------------------------------------

namespace detail {

// URLs are ASCII; deleting the whole printable-ASCII run keeps Devanagari
// neighbours intact and never increases the token count.
inline const std::regex& url_regex() {
  static const std::regex re(R"((https?://|www\.)[!-~]*)",
                             std::regex::ECMAScript | std::regex::icase);
  return re;
}

inline std::string strip_urls(const std::string& text) {
  return std::regex_replace(text, url_regex(), "");
}

inline std::vector<std::string> split_tokens(const std::string& text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char32_t cp : utf8_decode(text)) {
    if (is_word_delimiter(cp)) {
      if (!current.empty()) {
        tokens.push_back(std::move(current));
        current.clear();
      }
    } else {
      utf8_append(current, cp);
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

inline std::string strip_punctuation(const std::string& token) {
  std::string out;
  for (char32_t cp : utf8_decode(token)) {
    if (is_punctuation(cp) || is_format_control(cp)) continue;
    utf8_append(out, cp);
  }
  return out;
}

}  // namespace detail

/// Whitespace/danda token count of the raw facts text, before any filtering.
inline std::size_t raw_token_count(const CaseDocument& doc) {
  return detail::split_tokens(doc.facts).size();
}

/// Filter order: URL-shaped substrings deleted first, then tokenization,
/// then punctuation stripped from tokens, then stopwords dropped. Empty
/// facts yield an empty token list.
inline TokenizedCase preprocess(const CaseDocument& doc,
                                const StopwordSet& stopwords) {
  TokenizedCase out;
  out.id = doc.id;
  out.label = doc.label;
  for (auto& token : detail::split_tokens(detail::strip_urls(doc.facts))) {
    std::string cleaned = detail::strip_punctuation(token);
    if (cleaned.empty()) continue;
    if (stopwords.count(cleaned)) continue;
    out.tokens.push_back(std::move(cleaned));
  }
  return out;
}

// --- Statistics -----------------------------------------------------------------

namespace detail {

inline CorpusStats stats_from_counts(std::vector<std::int64_t> counts,
                                     Partition partition) {
  if (counts.empty()) {
    throw std::runtime_error("corpus_stats: empty partition");
  }
  std::sort(counts.begin(), counts.end());
  CorpusStats s;
  s.partition = partition;
  s.n_cases = counts.size();
  s.min = counts.front();
  s.max = counts.back();
  long double sum = 0;
  for (auto c : counts) sum += static_cast<long double>(c);
  s.mean = static_cast<double>(sum / static_cast<long double>(counts.size()));
  const std::size_t n = counts.size();
  s.median = (n % 2 == 1)
                 ? static_cast<double>(counts[n / 2])
                 : (static_cast<double>(counts[n / 2 - 1]) +
                    static_cast<double>(counts[n / 2])) /
                       2.0;
  return s;
}

inline bool in_partition(BailOutcome label, Partition p) {
  switch (p) {
    case Partition::kFull:
      return true;
    case Partition::kGrantedOnly:
      return label == BailOutcome::kGranted;
    case Partition::kDeniedOnly:
      return label == BailOutcome::kDenied;
  }
  return false;
}

}  // namespace detail

/// Token statistics over preprocessed cases.
inline CorpusStats corpus_stats(const std::vector<TokenizedCase>& cases,
                                Partition partition) {
  std::vector<std::int64_t> counts;
  for (const auto& c : cases) {
    if (detail::in_partition(c.label, partition)) {
      counts.push_back(static_cast<std::int64_t>(c.tokens.size()));
    }
  }
  return detail::stats_from_counts(std::move(counts), partition);
}

/// Token statistics over the raw (unpreprocessed) facts text.
inline CorpusStats corpus_stats(const std::vector<CaseDocument>& cases,
                                Partition partition) {
  std::vector<std::int64_t> counts;
  for (const auto& c : cases) {
    if (detail::in_partition(c.label, partition)) {
      counts.push_back(static_cast<std::int64_t>(raw_token_count(c)));
    }
  }
  return detail::stats_from_counts(std::move(counts), partition);
}

// --- Splitting -----------------------------------------------------------------

struct SplitIndices {
  std::vector<std::size_t> train, val, test;
};

namespace detail {

// Hamilton-style apportionment of n over the three fractions.
inline std::array<std::size_t, 3> global_split_targets(std::size_t n,
                                                       const SplitSpec& spec) {
  const double fracs[3] = {spec.train_frac, spec.val_frac, spec.test_frac};
  std::array<std::size_t, 3> target{};
  double rem[3];
  std::size_t assigned = 0;
  for (int s = 0; s < 3; ++s) {
    const double ideal = static_cast<double>(n) * fracs[s];
    target[s] = static_cast<std::size_t>(ideal);
    rem[s] = ideal - static_cast<double>(target[s]);
    assigned += target[s];
  }
  while (assigned < n) {
    int pick = 0;
    for (int s = 1; s < 3; ++s) {
      if (rem[s] > rem[pick]) pick = s;
    }
    ++target[pick];
    rem[pick] = -1.0;
    ++assigned;
  }
  // Keep every split non-empty; the spec guarantees this for n >= 10.
  for (int s = 0; s < 3; ++s) {
    while (target[s] == 0) {
      int donor = 0;
      for (int t = 1; t < 3; ++t) {
        if (target[t] > target[donor]) donor = t;
      }
      if (target[donor] <= 1) break;
      --target[donor];
      ++target[s];
    }
  }
  return target;
}

}  // namespace detail

/// Stratified three-way split. Each label group is shuffled (seeded), group
/// quotas are apportioned so that column totals match the global targets,
/// and groups are assigned contiguously. Deterministic for a fixed
/// (labels, spec).
inline SplitIndices stratified_split_indices(const std::vector<int>& labels,
                                             const SplitSpec& spec) {
  spec.validate();
  const std::size_t n = labels.size();
  if (n < 10) {
    throw std::runtime_error("split requires at least 10 documents, got " +
                             std::to_string(n));
  }
  const auto target = detail::global_split_targets(n, spec);

  // Label groups in ascending label order, members in input order.
  std::vector<int> distinct;
  for (int l : labels) {
    if (std::find(distinct.begin(), distinct.end(), l) == distinct.end()) {
      distinct.push_back(l);
    }
  }
  std::sort(distinct.begin(), distinct.end());
  std::vector<std::vector<std::size_t>> groups;
  for (int l : distinct) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i) {
      if (labels[i] == l) members.push_back(i);
    }
    groups.push_back(std::move(members));
  }
  Rng rng(spec.seed);
  for (auto& g : groups) rng.shuffle(g);

  // Per-group quotas: floors first, then distribute the shortfall by
  // largest fractional remainder, restricted to (group, split) cells whose
  // row and column still have a deficit. Row deficits and column deficits
  // always total the same, so a feasible cell exists at every step.
  const double fracs[3] = {spec.train_frac, spec.val_frac, spec.test_frac};
  const std::size_t ngroups = groups.size();
  std::vector<std::array<std::size_t, 3>> quota(ngroups);
  std::vector<std::array<double, 3>> frac_part(ngroups);
  std::vector<std::size_t> row_deficit(ngroups);
  std::array<std::size_t, 3> col_sum{};
  for (std::size_t g = 0; g < ngroups; ++g) {
    std::size_t row = 0;
    for (int s = 0; s < 3; ++s) {
      const double ideal = static_cast<double>(groups[g].size()) * fracs[s];
      quota[g][s] = static_cast<std::size_t>(ideal);
      frac_part[g][s] = ideal - static_cast<double>(quota[g][s]);
      row += quota[g][s];
      col_sum[s] += quota[g][s];
    }
    row_deficit[g] = groups[g].size() - row;
  }
  // The non-empty correction in global_split_targets can pull a column
  // target below the floor sum; shrink the largest cells of that column
  // until the two agree, returning the slack to the row deficits.
  for (int s = 0; s < 3; ++s) {
    while (col_sum[s] > target[s]) {
      std::size_t pick = 0;
      for (std::size_t g = 1; g < ngroups; ++g) {
        if (quota[g][s] > quota[pick][s]) pick = g;
      }
      --quota[pick][s];
      frac_part[pick][s] = -1.0;
      ++row_deficit[pick];
      --col_sum[s];
    }
  }
  std::array<std::size_t, 3> col_deficit{};
  for (int s = 0; s < 3; ++s) {
    col_deficit[s] = target[s] - col_sum[s];
  }
  std::size_t remaining = 0;
  for (std::size_t g = 0; g < ngroups; ++g) remaining += row_deficit[g];
  while (remaining > 0) {
    double best = -2.0;  // any feasible cell (frac >= -1) qualifies
    std::size_t best_g = 0;
    int best_s = 0;
    for (std::size_t g = 0; g < ngroups; ++g) {
      if (row_deficit[g] == 0) continue;
      for (int s = 0; s < 3; ++s) {
        if (col_deficit[s] == 0) continue;
        if (frac_part[g][s] > best) {
          best = frac_part[g][s];
          best_g = g;
          best_s = s;
        }
      }
    }
    ++quota[best_g][best_s];
    frac_part[best_g][best_s] = -1.0;
    --row_deficit[best_g];
    --col_deficit[best_s];
    --remaining;
  }

  SplitIndices out;
  for (std::size_t g = 0; g < ngroups; ++g) {
    std::size_t pos = 0;
    for (std::size_t i = 0; i < quota[g][0]; ++i) out.train.push_back(groups[g][pos++]);
    for (std::size_t i = 0; i < quota[g][1]; ++i) out.val.push_back(groups[g][pos++]);
    while (pos < groups[g].size()) out.test.push_back(groups[g][pos++]);
  }
  return out;
}

template <class T>
struct CorpusSplits {
  std::vector<T> train, val, test;
};

/// Splits any record type with a label accessor; see
/// stratified_split_indices for the guarantees.
template <class T, class LabelFn>
CorpusSplits<T> split_corpus(const std::vector<T>& cases,
                             const SplitSpec& spec, LabelFn label_of) {
  std::vector<int> labels;
  labels.reserve(cases.size());
  for (const auto& c : cases) labels.push_back(label_of(c));
  const SplitIndices idx = stratified_split_indices(labels, spec);
  CorpusSplits<T> out;
  for (auto i : idx.train) out.train.push_back(cases[i]);
  for (auto i : idx.val) out.val.push_back(cases[i]);
  for (auto i : idx.test) out.test.push_back(cases[i]);
  return out;
}

inline CorpusSplits<CaseDocument> split_corpus(
    const std::vector<CaseDocument>& cases, const SplitSpec& spec) {
  return split_corpus(cases, spec, [](const CaseDocument& d) {
    return outcome_to_int(d.label);
  });
}

}  // namespace bailaudit

#endif  // BAILAUDIT_CORPUS_HPP_
