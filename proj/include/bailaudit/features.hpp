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
// Case featurization: five topic keywords (three from the dominant topic,
// two from the second-dominant) plus two crime themes per case, with a
// stable per-slot categorical encoding.

#ifndef BAILAUDIT_FEATURES_HPP_
#define BAILAUDIT_FEATURES_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "bailaudit/corpus.hpp"
#include "bailaudit/hash.hpp"
#include "bailaudit/io.hpp"
#include "bailaudit/threading.hpp"
#include "bailaudit/topics.hpp"

namespace bailaudit {

inline constexpr char kOtherTheme[] = "other";
inline constexpr char kNoneField[] = "None";  // CSV spelling of an empty slot

inline constexpr std::size_t kNumKeywordSlots = 5;
inline constexpr std::size_t kNumSlots = 7;  // 5 keywords + theme1 + theme2
inline constexpr std::int32_t kNoneCode = 0;
inline constexpr std::int32_t kUnseenCode = -1;

struct ThemeLexicon {
  // theme name -> seed words (NFC-normalized); matching uses set semantics.
  std::map<std::string, std::vector<std::string>> themes;

  void validate() const {
    if (themes.size() < 2) {
      throw std::invalid_argument("theme lexicon needs at least 2 themes");
    }
    std::vector<std::set<std::string>> sets;
    for (const auto& [name, words] : themes) {
      if (words.empty()) {
        throw std::invalid_argument("theme \"" + name + "\" has no seed words");
      }
      sets.emplace_back(words.begin(), words.end());
    }
    for (std::size_t i = 0; i < sets.size(); ++i) {
      for (std::size_t j = i + 1; j < sets.size(); ++j) {
        if (sets[i] == sets[j]) {
          throw std::invalid_argument(
              "two themes share an identical seed set");
        }
      }
    }
  }

  static ThemeLexicon load(const std::filesystem::path& path) {
    ThemeLexicon lex;
    lex.themes = parse_lexicon_file(path);
    lex.validate();
    return lex;
  }

  /// Checksum of the canonical content (names sorted, words sorted), so the
  /// same lexicon hashes identically regardless of file formatting.
  std::string checksum() const {
    std::string canon;
    for (const auto& [name, words] : themes) {
      canon += name;
      canon.push_back('\x1f');
      std::set<std::string> sorted(words.begin(), words.end());
      for (const auto& w : sorted) {
        canon += w;
        canon.push_back('\x1e');
      }
      canon.push_back('\n');
    }
    return sha256_hex(canon);
  }
};

struct FeatureVector {
  std::string case_id;
  std::array<std::optional<std::string>, kNumKeywordSlots> keywords;
  std::string theme1, theme2;
  BailOutcome label = BailOutcome::kDenied;
};

using EncodedRow = std::array<std::int32_t, kNumSlots>;

inline const std::array<const char*, kNumSlots> kSlotNames = {
    "keyword1", "keyword2", "keyword3", "keyword4",
    "keyword5", "theme1",   "theme2"};

/// Per-slot categorical vocabularies. Code 0 is the shared None sentinel;
/// observed values get codes 1.. in first-appearance order. A value absent
/// from the training schema encodes to kUnseenCode, which fails every
/// equality split.
class FeatureSchema {
 public:
  std::array<std::vector<std::string>, kNumSlots> values;  // code-1 -> value

  std::int32_t intern_value(std::size_t slot,
                            const std::optional<std::string>& v) {
    if (!v) return kNoneCode;
    auto& index = index_[slot];
    auto it = index.find(*v);
    if (it != index.end()) return it->second;
    values[slot].push_back(*v);
    const auto code = static_cast<std::int32_t>(values[slot].size());
    index.emplace(*v, code);
    return code;
  }

  std::int32_t encode_value(std::size_t slot,
                            const std::optional<std::string>& v) const {
    if (!v) return kNoneCode;
    const auto& index = index_[slot];
    auto it = index.find(*v);
    return it == index.end() ? kUnseenCode : it->second;
  }

  std::optional<std::string> decode_value(std::size_t slot,
                                          std::int32_t code) const {
    if (code == kNoneCode) return std::nullopt;
    if (code < 1 || static_cast<std::size_t>(code) > values[slot].size()) {
      throw std::out_of_range("code " + std::to_string(code) +
                              " not in slot " + kSlotNames[slot]);
    }
    return values[slot][static_cast<std::size_t>(code) - 1];
  }

  EncodedRow encode(const FeatureVector& fv) const {
    EncodedRow row{};
    for (std::size_t s = 0; s < kNumKeywordSlots; ++s) {
      row[s] = encode_value(s, fv.keywords[s]);
    }
    row[5] = encode_value(5, fv.theme1);
    row[6] = encode_value(6, fv.theme2);
    return row;
  }

  std::string hash() const {
    std::string canon;
    for (std::size_t s = 0; s < kNumSlots; ++s) {
      canon += kSlotNames[s];
      canon.push_back('\x1f');
      for (const auto& v : values[s]) {
        canon += v;
        canon.push_back('\x1e');
      }
      canon.push_back('\n');
    }
    return sha256_hex(canon);
  }

  void rebuild_index() {
    for (std::size_t s = 0; s < kNumSlots; ++s) {
      index_[s].clear();
      for (std::size_t i = 0; i < values[s].size(); ++i) {
        index_[s].emplace(values[s][i], static_cast<std::int32_t>(i + 1));
      }
    }
  }

 private:
  std::array<std::unordered_map<std::string, std::int32_t>, kNumSlots> index_;
};

// --- Feature extraction -----------------------------------------------------

/// Walks the dominant topic's top-10 list in rank order, taking the first
/// three words that occur in the case's token set, then the first two from
/// the second-dominant topic. Unfilled slots stay empty, so None can only
/// appear as a suffix of each slot group.
inline std::array<std::optional<std::string>, kNumKeywordSlots>
extract_case_keywords(const LdaModel& model, const TokenizedCase& c,
                      std::size_t doc_index) {
  const auto [dominant, second] = dominant_topics(model, doc_index);
  const std::size_t top_m = std::min<std::size_t>(10, model.V());
  const TopicSummary dom = top_keywords(model, dominant, top_m);
  const TopicSummary sec = top_keywords(model, second, top_m);

  std::unordered_set<std::string_view> present;
  for (const auto& t : c.tokens) present.insert(t);

  std::array<std::optional<std::string>, kNumKeywordSlots> slots;
  std::size_t filled = 0;
  for (const auto& [word, p] : dom.top_words) {
    if (filled == 3) break;
    if (present.count(word)) slots[filled++] = word;
  }
  filled = 3;
  for (const auto& [word, p] : sec.top_words) {
    if (filled == kNumKeywordSlots) break;
    if (present.count(word)) slots[filled++] = word;
  }
  return slots;
}

/// Scores each theme as |top10(dominant) ∩ seeds| + 0.5 |top10(second) ∩
/// seeds|. Returns the two best-scoring themes (ties by name); with a single
/// nonzero scorer both slots carry it, and with none both are "other".
inline std::pair<std::string, std::string> assign_themes(
    const TopicSummary& dominant, const TopicSummary& second,
    const ThemeLexicon& lexicon) {
  std::unordered_set<std::string_view> dom_words, sec_words;
  for (const auto& [w, p] : dominant.top_words) dom_words.insert(w);
  for (const auto& [w, p] : second.top_words) sec_words.insert(w);

  std::vector<std::pair<std::string, double>> ranked;
  for (const auto& [name, seeds] : lexicon.themes) {
    std::unordered_set<std::string_view> seen;
    double score = 0.0;
    for (const auto& s : seeds) {
      if (!seen.insert(s).second) continue;  // duplicate seed words count once
      if (dom_words.count(s)) score += 1.0;
      if (sec_words.count(s)) score += 0.5;
    }
    if (score > 0.0) ranked.emplace_back(name, score);
  }
  // lexicon.themes iterates in name order, so equal scores keep the
  // lexicographically smaller theme with a stable sort.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) {
                     return a.second > b.second;
                   });
  if (ranked.empty()) return {kOtherTheme, kOtherTheme};
  const std::string theme1 = ranked[0].first;
  const std::string theme2 = ranked.size() > 1 ? ranked[1].first : theme1;
  return {theme1, theme2};
}

/// JSONL overrides {"id","theme1","theme2"}: listed cases take these themes
/// instead of lexicon scoring (so any external labeler can be plugged in).
/// Ids must exist in the corpus and theme names in the lexicon (or "other").
inline std::map<std::string, std::pair<std::string, std::string>>
load_external_themes(const std::filesystem::path& path,
                     const std::unordered_set<std::string>& corpus_ids,
                     const ThemeLexicon& lexicon) {
  std::map<std::string, std::pair<std::string, std::string>> out;
  std::size_t lineno = 0;
  for (const auto& line : read_lines(path)) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
      throw std::runtime_error("theme overrides line " +
                               std::to_string(lineno) + ": invalid JSON (" +
                               e.what() + ")");
    }
    const std::string id = rec.at("id").get<std::string>();
    if (!corpus_ids.count(id)) {
      throw std::runtime_error("theme overrides: unknown case id \"" + id +
                               "\"");
    }
    auto check_theme = [&](const std::string& t) {
      if (t != kOtherTheme && !lexicon.themes.count(t)) {
        throw std::runtime_error("theme overrides: unknown theme \"" + t +
                                 "\" for case \"" + id + "\"");
      }
    };
    const std::string t1 = nfc(rec.at("theme1").get<std::string>());
    const std::string t2 = nfc(rec.at("theme2").get<std::string>());
    check_theme(t1);
    check_theme(t2);
    out[id] = {t1, t2};
  }
  return out;
}

// --- Dataset ------------------------------------------------------------------

struct Dataset {
  std::vector<FeatureVector> rows;   // sorted by case_id
  std::vector<EncodedRow> encoded;   // aligned with rows
  FeatureSchema schema;
  std::vector<std::string> skipped_empty_ids;

  Dataset subset(const std::vector<std::size_t>& indices) const {
    Dataset out;
    out.schema = schema;
    for (auto i : indices) {
      out.rows.push_back(rows[i]);
      out.encoded.push_back(encoded[i]);
    }
    return out;
  }
};

/// One FeatureVector per non-empty case (empty-token cases are skipped and
/// listed), sorted by case id, with first-appearance integer codes.
inline Dataset build_dataset(
    const LdaModel& model, const std::vector<TokenizedCase>& corpus,
    const ThemeLexicon& lexicon,
    const std::map<std::string, std::pair<std::string, std::string>>&
        overrides = {},
    unsigned threads = 1) {
  lexicon.validate();
  if (corpus.size() != model.num_docs()) {
    throw std::invalid_argument(
        "build_dataset: corpus size does not match the model");
  }
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    if (corpus[d].id != model.doc_ids[d]) {
      throw std::invalid_argument(
          "build_dataset: corpus order does not match the model (doc " +
          std::to_string(d) + ")");
    }
  }
  for (const auto& [id, themes] : overrides) {
    (void)themes;
    if (std::find_if(corpus.begin(), corpus.end(), [&](const auto& c) {
          return c.id == id;
        }) == corpus.end()) {
      throw std::runtime_error("theme overrides: unknown case id \"" + id +
                               "\"");
    }
  }

  Dataset ds;
  std::vector<std::optional<FeatureVector>> built(corpus.size());
  parallel_for(corpus.size(), threads, [&](std::size_t d) {
    const auto& c = corpus[d];
    if (c.tokens.empty()) return;
    FeatureVector fv;
    fv.case_id = c.id;
    fv.label = c.label;
    fv.keywords = extract_case_keywords(model, c, d);
    if (auto it = overrides.find(c.id); it != overrides.end()) {
      fv.theme1 = it->second.first;
      fv.theme2 = it->second.second;
    } else {
      const auto [dom, sec] = dominant_topics(model, d);
      const std::size_t top_m = std::min<std::size_t>(10, model.V());
      const auto themes = assign_themes(top_keywords(model, dom, top_m),
                                        top_keywords(model, sec, top_m),
                                        lexicon);
      fv.theme1 = themes.first;
      fv.theme2 = themes.second;
    }
    built[d] = std::move(fv);
  });
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    if (built[d]) {
      ds.rows.push_back(std::move(*built[d]));
    } else {
      ds.skipped_empty_ids.push_back(corpus[d].id);
    }
  }
  std::sort(ds.rows.begin(), ds.rows.end(),
            [](const FeatureVector& a, const FeatureVector& b) {
              return a.case_id < b.case_id;
            });
  for (const auto& fv : ds.rows) {
    EncodedRow row{};
    for (std::size_t s = 0; s < kNumKeywordSlots; ++s) {
      row[s] = ds.schema.intern_value(s, fv.keywords[s]);
    }
    row[5] = ds.schema.intern_value(5, fv.theme1);
    row[6] = ds.schema.intern_value(6, fv.theme2);
    ds.encoded.push_back(row);
  }
  return ds;
}

// --- Artifacts -------------------------------------------------------------------

inline constexpr int kSchemaFormatVersion = 1;

inline void write_features_csv(const Dataset& ds,
                               const std::filesystem::path& path) {
  std::string out;
  append_csv_row(out, {"case_id", "keyword1", "keyword2", "keyword3",
                       "keyword4", "keyword5", "theme1", "theme2", "label"});
  for (const auto& fv : ds.rows) {
    std::vector<std::string> fields;
    fields.push_back(fv.case_id);
    for (const auto& kw : fv.keywords) {
      fields.push_back(kw ? *kw : std::string(kNoneField));
    }
    fields.push_back(fv.theme1);
    fields.push_back(fv.theme2);
    fields.push_back(std::to_string(outcome_to_int(fv.label)));
    append_csv_row(out, fields);
  }
  write_file(path, out);
}

inline std::vector<FeatureVector> load_features_csv(
    const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw std::runtime_error(path.string() + ": empty file");
  std::vector<FeatureVector> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = parse_csv_row(lines[i]);
    if (fields.size() != 9) {
      throw std::runtime_error(path.string() + " line " + std::to_string(i + 1) +
                               ": expected 9 fields");
    }
    FeatureVector fv;
    fv.case_id = fields[0];
    for (std::size_t s = 0; s < kNumKeywordSlots; ++s) {
      if (fields[1 + s] != kNoneField) fv.keywords[s] = fields[1 + s];
    }
    fv.theme1 = fields[6];
    fv.theme2 = fields[7];
    fv.label = fields[8] == "1" ? BailOutcome::kGranted : BailOutcome::kDenied;
    rows.push_back(std::move(fv));
  }
  return rows;
}

inline void write_schema_json(const FeatureSchema& schema,
                              const std::filesystem::path& path) {
  nlohmann::json j;
  j["format"] = "bailaudit.feature_schema";
  j["format_version"] = kSchemaFormatVersion;
  nlohmann::json slots = nlohmann::json::array();
  for (std::size_t s = 0; s < kNumSlots; ++s) {
    slots.push_back({{"name", kSlotNames[s]}, {"values", schema.values[s]}});
  }
  j["slots"] = std::move(slots);
  j["none_code"] = kNoneCode;
  j["hash"] = schema.hash();
  write_file(path, j.dump());
}

inline FeatureSchema load_schema_json(const std::filesystem::path& path) {
  const nlohmann::json j = nlohmann::json::parse(read_file(path));
  if (!j.contains("format") || j["format"] != "bailaudit.feature_schema") {
    throw std::runtime_error(path.string() + ": not a feature schema");
  }
  if (j.at("format_version").get<int>() != kSchemaFormatVersion) {
    throw std::runtime_error(path.string() +
                             ": unsupported schema format version");
  }
  FeatureSchema schema;
  const auto& slots = j.at("slots");
  if (slots.size() != kNumSlots) {
    throw std::runtime_error(path.string() + ": wrong slot count");
  }
  for (std::size_t s = 0; s < kNumSlots; ++s) {
    schema.values[s] = slots[s].at("values").get<std::vector<std::string>>();
  }
  schema.rebuild_index();
  if (j.contains("hash") && j["hash"].get<std::string>() != schema.hash()) {
    throw std::runtime_error(path.string() + ": schema hash mismatch");
  }
  return schema;
}

}  // namespace bailaudit

#endif  // BAILAUDIT_FEATURES_HPP_
