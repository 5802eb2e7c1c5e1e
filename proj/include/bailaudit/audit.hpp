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
// Counterfactual name-substitution audit: select cases carrying a
// community-linked proper noun in a keyword slot, swap the noun against
// every alternative from each community, count label flips, and measure the
// demographic-parity gap |P(denied | community A) - P(denied | community B)|
// from the classifier's probabilities.

#ifndef BAILAUDIT_AUDIT_HPP_
#define BAILAUDIT_AUDIT_HPP_

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "bailaudit/classifier.hpp"
#include "bailaudit/features.hpp"
#include "bailaudit/hash.hpp"
#include "bailaudit/io.hpp"
#include "bailaudit/threading.hpp"

namespace bailaudit {

struct NameLexicon {
  // community -> proper nouns (NFC-normalized), e.g. {"Hindu": [...],
  // "Muslim": [...]}. Extensible to other protected axes via the file.
  std::map<std::string, std::vector<std::string>> communities;

  void validate() const {
    if (communities.size() < 2) {
      throw std::invalid_argument("name lexicon needs at least 2 communities");
    }
    std::set<std::string> all;
    for (const auto& [name, members] : communities) {
      std::set<std::string> unique(members.begin(), members.end());
      if (unique.size() < 2) {
        throw std::invalid_argument(
            "community \"" + name +
            "\" needs at least 2 names (swaps need alternatives)");
      }
      for (const auto& m : unique) {
        if (!all.insert(m).second) {
          throw std::invalid_argument("name \"" + m +
                                      "\" appears in two communities");
        }
      }
    }
  }

  static NameLexicon load(const std::filesystem::path& path) {
    NameLexicon lex;
    lex.communities = parse_lexicon_file(path);
    lex.validate();
    return lex;
  }

  std::optional<std::string> community_of(const std::string& name) const {
    for (const auto& [community, members] : communities) {
      if (std::find(members.begin(), members.end(), name) != members.end()) {
        return community;
      }
    }
    return std::nullopt;
  }

  std::string checksum() const {
    std::string canon;
    for (const auto& [name, members] : communities) {
      canon += name;
      canon.push_back('\x1f');
      std::set<std::string> sorted(members.begin(), members.end());
      for (const auto& m : sorted) {
        canon += m;
        canon.push_back('\x1e');
      }
      canon.push_back('\n');
    }
    return sha256_hex(canon);
  }
};

struct AuditCase {
  std::string case_id;
  FeatureVector features;
  EncodedRow encoded{};
  int name_slot = 0;  // keyword slot index 0..4 holding the audited name
  std::string original_name;
  std::string original_community;
  BailOutcome baseline_label = BailOutcome::kDenied;
  double baseline_p_denied = 0.0;
  std::string theme;                   // theme1, the audit grouping key
  std::vector<int> extra_name_slots;   // further name-bearing slots (logged)
};

struct FlipRecord {
  std::string case_id;
  int predicted_label = 0;
  int changed_label = 0;
  std::map<std::string, int> flips;  // community -> replacements that flip
};

struct ThemeGapRow {
  std::string theme;
  std::size_t n_cases = 0;
  double gap = 0.0;  // undefined when n_cases == 0
};

struct FairnessReport {
  std::vector<ThemeGapRow> per_theme;  // requested theme order
  double overall_gap = 0.0;
  std::size_t overall_n = 0;
  std::map<std::string, std::vector<FlipRecord>> flips_by_theme;
  std::pair<std::string, std::string> communities;
  std::string name_lexicon_checksum;
  std::string theme_lexicon_checksum;
};

// --- Case selection -------------------------------------------------------------

/// Cases whose theme1 matches the filter (when given) and whose keyword
/// slots contain at least one lexicon name. The lowest-index matching slot
/// is audited; any further matches are recorded but not audited. An empty
/// result is not an error.
inline std::vector<AuditCase> select_audit_cases(
    const Dataset& dataset, const DecisionTree& tree, const NameLexicon& lexicon,
    const std::optional<std::string>& theme_filter = std::nullopt) {
  lexicon.validate();
  if (!tree.schema_hash.empty() &&
      tree.schema_hash != dataset.schema.hash()) {
    throw std::runtime_error(
        "audit: decision tree was trained against a different feature "
        "schema");
  }
  std::vector<AuditCase> out;
  for (std::size_t r = 0; r < dataset.rows.size(); ++r) {
    const FeatureVector& fv = dataset.rows[r];
    if (theme_filter && fv.theme1 != *theme_filter) continue;
    AuditCase ac;
    bool found = false;
    for (std::size_t s = 0; s < kNumKeywordSlots; ++s) {
      if (!fv.keywords[s]) continue;
      const auto community = lexicon.community_of(*fv.keywords[s]);
      if (!community) continue;
      if (!found) {
        found = true;
        ac.name_slot = static_cast<int>(s);
        ac.original_name = *fv.keywords[s];
        ac.original_community = *community;
      } else {
        ac.extra_name_slots.push_back(static_cast<int>(s));
      }
    }
    if (!found) continue;
    ac.case_id = fv.case_id;
    ac.features = fv;
    ac.encoded = dataset.encoded[r];
    ac.theme = fv.theme1;
    ac.baseline_label = predict_label(tree, ac.encoded);
    ac.baseline_p_denied = predict_proba_denied(tree, ac.encoded);
    out.push_back(std::move(ac));
  }
  return out;
}

// --- Swaps ----------------------------------------------------------------------

/// Copy of the encoded vector with the audited slot set to the replacement
/// name; names unseen at training time get the reserved unseen code. Every
/// other slot is untouched.
inline EncodedRow counterfactual_swap(const AuditCase& ac,
                                      const FeatureSchema& schema,
                                      const std::string& replacement) {
  if (replacement == ac.original_name) {
    throw std::invalid_argument(
        "counterfactual_swap: replacement equals the original name");
  }
  EncodedRow row = ac.encoded;
  row[static_cast<std::size_t>(ac.name_slot)] =
      schema.encode_value(static_cast<std::size_t>(ac.name_slot), replacement);
  return row;
}

/// For each community, the number of replacement names (excluding the
/// original itself) whose swap changes the predicted label.
inline FlipRecord flip_counts(const AuditCase& ac, const DecisionTree& tree,
                              const NameLexicon& lexicon,
                              const FeatureSchema& schema) {
  FlipRecord rec;
  rec.case_id = ac.case_id;
  rec.predicted_label = outcome_to_int(ac.baseline_label);
  rec.changed_label = 1 - rec.predicted_label;
  for (const auto& [community, names] : lexicon.communities) {
    int flips = 0;
    for (const auto& name : names) {
      if (name == ac.original_name) continue;
      const BailOutcome swapped =
          predict_label(tree, counterfactual_swap(ac, schema, name));
      if (swapped != ac.baseline_label) ++flips;
    }
    rec.flips[community] = flips;
  }
  return rec;
}

namespace detail {

// Mean of P(denied) over a community's names, keeping the original vector
// when the original name belongs to the community. Centered so that a
// constant probability list yields that constant exactly.
inline double community_mean_proba(const AuditCase& ac,
                                   const DecisionTree& tree,
                                   const FeatureSchema& schema,
                                   const std::vector<std::string>& names) {
  std::vector<double> probs;
  probs.reserve(names.size());
  for (const auto& name : names) {
    if (name == ac.original_name) {
      probs.push_back(ac.baseline_p_denied);
    } else {
      probs.push_back(
          predict_proba_denied(tree, counterfactual_swap(ac, schema, name)));
    }
  }
  const double base = probs.front();
  double acc = 0.0;
  for (double p : probs) acc += p - base;
  return base + acc / static_cast<double>(probs.size());
}

inline double case_gap(const AuditCase& ac, const DecisionTree& tree,
                       const NameLexicon& lexicon, const FeatureSchema& schema,
                       const std::pair<std::string, std::string>& communities) {
  auto names_of = [&](const std::string& c) -> const std::vector<std::string>& {
    auto it = lexicon.communities.find(c);
    if (it == lexicon.communities.end()) {
      throw std::invalid_argument("fairness_gap: community \"" + c +
                                  "\" not in the name lexicon");
    }
    return it->second;
  };
  const double pa =
      community_mean_proba(ac, tree, schema, names_of(communities.first));
  const double pb =
      community_mean_proba(ac, tree, schema, names_of(communities.second));
  return std::abs(pa - pb);
}

}  // namespace detail

/// Mean over cases of |mean P(denied | community A names) -
/// mean P(denied | community B names)|, each mean taken over swap-or-keep
/// vectors. A tree that never tests a name slot gives exactly zero.
inline double fairness_gap(
    const std::vector<AuditCase>& cases, const DecisionTree& tree,
    const NameLexicon& lexicon, const FeatureSchema& schema,
    const std::pair<std::string, std::string>& communities = {"Hindu",
                                                              "Muslim"}) {
  if (cases.empty()) {
    throw std::invalid_argument("fairness_gap: no audit cases");
  }
  double sum = 0.0;
  for (const auto& ac : cases) {
    sum += detail::case_gap(ac, tree, lexicon, schema, communities);
  }
  return sum / static_cast<double>(cases.size());
}

// --- Themed report ----------------------------------------------------------------

/// Per-theme gaps over each requested theme's audit cases (themes with no
/// cases are reported with n=0), the overall gap over all audit cases, and
/// per-theme flip tables. Throws when the dataset yields no audit case at
/// all.
inline FairnessReport themed_audit(
    const Dataset& dataset, const DecisionTree& tree,
    const NameLexicon& lexicon, const std::vector<std::string>& themes,
    const std::pair<std::string, std::string>& communities = {"Hindu",
                                                              "Muslim"},
    unsigned threads = 1) {
  const std::vector<AuditCase> all =
      select_audit_cases(dataset, tree, lexicon);
  if (all.empty()) {
    throw std::runtime_error(
        "themed_audit: no audit cases (no lexicon name appears in any "
        "keyword slot)");
  }

  FairnessReport report;
  report.communities = communities;

  // Per-case gaps and flips, reduced in case order.
  std::vector<double> gaps(all.size());
  std::vector<FlipRecord> flips(all.size());
  const FeatureSchema& schema = dataset.schema;
  parallel_for(all.size(), threads, [&](std::size_t i) {
    gaps[i] = detail::case_gap(all[i], tree, lexicon, schema, communities);
    flips[i] = flip_counts(all[i], tree, lexicon, schema);
  });

  double total = 0.0;
  for (double g : gaps) total += g;
  report.overall_gap = total / static_cast<double>(all.size());
  report.overall_n = all.size();

  for (const auto& theme : themes) {
    ThemeGapRow row;
    row.theme = theme;
    double theme_sum = 0.0;
    std::vector<FlipRecord> theme_flips;
    for (std::size_t i = 0; i < all.size(); ++i) {
      if (all[i].theme != theme) continue;
      ++row.n_cases;
      theme_sum += gaps[i];
      theme_flips.push_back(flips[i]);
    }
    if (row.n_cases > 0) {
      row.gap = theme_sum / static_cast<double>(row.n_cases);
      std::sort(theme_flips.begin(), theme_flips.end(),
                [](const FlipRecord& a, const FlipRecord& b) {
                  if (a.predicted_label != b.predicted_label) {
                    return a.predicted_label < b.predicted_label;
                  }
                  return a.case_id < b.case_id;
                });
      report.flips_by_theme[theme] = std::move(theme_flips);
    }
    report.per_theme.push_back(std::move(row));
  }
  return report;
}

// --- Report files ------------------------------------------------------------------

/// fairness_gap.csv: theme, n_cases, gap, with a final "overall" row.
inline void write_fairness_gap_csv(const FairnessReport& report,
                                   const std::filesystem::path& path) {
  std::string out;
  append_csv_row(out, {"theme", "n_cases", "gap"});
  for (const auto& row : report.per_theme) {
    append_csv_row(out, {row.theme, std::to_string(row.n_cases),
                         row.n_cases > 0 ? fmt_fixed(row.gap, 6) : ""});
  }
  append_csv_row(out, {"overall", std::to_string(report.overall_n),
                       fmt_fixed(report.overall_gap, 6)});
  write_file(path, out);
}

inline std::string flip_column_name(const std::string& community) {
  std::string name;
  for (char c : community) {
    name.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a')
                                          : c);
  }
  return name + "_flips";
}

/// flips_<theme>.csv per audited theme: case_id, predicted_label,
/// changed_label, one flip-count column per community.
inline std::vector<std::filesystem::path> write_flip_csvs(
    const FairnessReport& report, const NameLexicon& lexicon,
    const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  for (const auto& [theme, records] : report.flips_by_theme) {
    std::string out;
    std::vector<std::string> header = {"case_id", "predicted_label",
                                       "changed_label"};
    for (const auto& [community, names] : lexicon.communities) {
      header.push_back(flip_column_name(community));
    }
    append_csv_row(out, header);
    for (const auto& rec : records) {
      std::vector<std::string> fields = {rec.case_id,
                                         std::to_string(rec.predicted_label),
                                         std::to_string(rec.changed_label)};
      for (const auto& [community, names] : lexicon.communities) {
        auto it = rec.flips.find(community);
        fields.push_back(std::to_string(it == rec.flips.end() ? 0
                                                              : it->second));
      }
      append_csv_row(out, fields);
    }
    const auto path = dir / ("flips_" + theme + ".csv");
    write_file(path, out);
    written.push_back(path);
  }
  return written;
}

inline nlohmann::json fairness_report_json(const FairnessReport& report) {
  nlohmann::json j;
  j["communities"] = {report.communities.first, report.communities.second};
  j["overall"] = {{"n_cases", report.overall_n},
                  {"gap", report.overall_gap}};
  nlohmann::json themes = nlohmann::json::array();
  for (const auto& row : report.per_theme) {
    nlohmann::json t;
    t["theme"] = row.theme;
    t["n_cases"] = row.n_cases;
    if (row.n_cases > 0) {
      t["gap"] = row.gap;
    } else {
      t["gap"] = nullptr;
    }
    themes.push_back(std::move(t));
  }
  j["themes"] = std::move(themes);
  nlohmann::json flips;
  for (const auto& [theme, records] : report.flips_by_theme) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& rec : records) {
      rows.push_back({{"case_id", rec.case_id},
                      {"predicted_label", rec.predicted_label},
                      {"changed_label", rec.changed_label},
                      {"flips", rec.flips}});
    }
    flips[theme] = std::move(rows);
  }
  j["flips"] = std::move(flips);
  j["name_lexicon_checksum"] = report.name_lexicon_checksum;
  j["theme_lexicon_checksum"] = report.theme_lexicon_checksum;
  return j;
}

}  // namespace bailaudit

#endif  // BAILAUDIT_AUDIT_HPP_
