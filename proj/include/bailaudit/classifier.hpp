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
// Binary CART over categorical equality splits (left = equal, right = not
// equal), Gini impurity, Laplace-smoothed leaf probabilities, seeded random
// hyperparameter search and standard evaluation metrics.

#ifndef BAILAUDIT_CLASSIFIER_HPP_
#define BAILAUDIT_CLASSIFIER_HPP_

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bailaudit/corpus.hpp"
#include "bailaudit/features.hpp"
#include "bailaudit/io.hpp"
#include "bailaudit/rng.hpp"
#include "bailaudit/threading.hpp"

namespace bailaudit {

struct TreeHyperparams {
  int max_depth = 6;
  int min_samples_leaf = 1;
  double min_impurity_decrease = 0.0;

  void validate() const {
    if (max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
    if (min_samples_leaf < 1) {
      throw std::invalid_argument("min_samples_leaf must be >= 1");
    }
    if (min_impurity_decrease < 0.0) {
      throw std::invalid_argument("min_impurity_decrease must be >= 0");
    }
  }
};

/// Gini impurity 1 - Σ (n_c / n)^2 of a class-count vector.
inline double gini(const std::vector<std::int64_t>& counts) {
  std::int64_t n = 0;
  for (auto c : counts) {
    if (c < 0) throw std::invalid_argument("gini: negative count");
    n += c;
  }
  if (n == 0) throw std::invalid_argument("gini: all counts are zero");
  double sum_sq = 0.0;
  for (auto c : counts) {
    const double f = static_cast<double>(c) / static_cast<double>(n);
    sum_sq += f * f;
  }
  return 1.0 - sum_sq;
}

inline double gini(std::int64_t denied, std::int64_t granted) {
  return gini(std::vector<std::int64_t>{denied, granted});
}

struct TreeNode {
  std::int32_t slot = -1;  // -1 marks a leaf
  std::int32_t code = 0;   // equality test value for internal nodes
  std::int32_t left = -1;  // child for x[slot] == code
  std::int32_t right = -1;
  std::int64_t n_denied = 0;  // training counts reaching this node
  std::int64_t n_granted = 0;

  bool is_leaf() const { return slot < 0; }
};

class DecisionTree {
 public:
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  TreeHyperparams hyperparams;
  std::string schema_hash;

  std::size_t leaf_for(const EncodedRow& x) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
      const auto& n = nodes[i];
      i = static_cast<std::size_t>(
          x[static_cast<std::size_t>(n.slot)] == n.code ? n.left : n.right);
    }
    return i;
  }

  int depth() const { return depth_below(0); }

 private:
  int depth_below(std::size_t i) const {
    if (nodes[i].is_leaf()) return 0;
    return 1 + std::max(depth_below(static_cast<std::size_t>(nodes[i].left)),
                        depth_below(static_cast<std::size_t>(nodes[i].right)));
  }
};

// --- Fitting -----------------------------------------------------------------

namespace detail {

struct SplitChoice {
  bool found = false;
  std::int32_t slot = 0;
  std::int32_t code = 0;
  double decrease = 0.0;
};

inline void fit_node(const std::vector<EncodedRow>& x,
                     const std::vector<BailOutcome>& y,
                     std::vector<std::size_t>& indices, int depth,
                     const TreeHyperparams& hp, DecisionTree& tree,
                     std::size_t node_index) {
  std::int64_t denied = 0, granted = 0;
  for (auto i : indices) {
    (y[i] == BailOutcome::kDenied ? denied : granted) += 1;
  }
  auto& node = tree.nodes[node_index];
  node.n_denied = denied;
  node.n_granted = granted;

  const auto n = static_cast<std::int64_t>(indices.size());
  const bool pure = denied == 0 || granted == 0;
  if (depth >= hp.max_depth || pure ||
      n < 2 * static_cast<std::int64_t>(hp.min_samples_leaf)) {
    return;  // leaf
  }

  const double parent_gini = gini(denied, granted);
  SplitChoice best;
  // Slots ascending, codes ascending: on equal decrease the first candidate
  // wins, which pins the (lower slot, lower code) tie rule.
  for (std::size_t slot = 0; slot < kNumSlots; ++slot) {
    std::set<std::int32_t> codes;
    for (auto i : indices) codes.insert(x[i][slot]);
    if (codes.size() < 2) continue;
    for (const auto code : codes) {
      std::int64_t ld = 0, lg = 0;
      for (auto i : indices) {
        if (x[i][slot] == code) {
          (y[i] == BailOutcome::kDenied ? ld : lg) += 1;
        }
      }
      const std::int64_t ln = ld + lg;
      const std::int64_t rn = n - ln;
      if (ln < hp.min_samples_leaf || rn < hp.min_samples_leaf) continue;
      const std::int64_t rd = denied - ld;
      const std::int64_t rg = granted - lg;
      const double decrease =
          parent_gini -
          (static_cast<double>(ln) / static_cast<double>(n)) * gini(ld, lg) -
          (static_cast<double>(rn) / static_cast<double>(n)) * gini(rd, rg);
      if (!best.found || decrease > best.decrease) {
        best.found = true;
        best.slot = static_cast<std::int32_t>(slot);
        best.code = code;
        best.decrease = decrease;
      }
    }
  }
  if (!best.found || best.decrease <= hp.min_impurity_decrease ||
      best.decrease <= 0.0) {
    return;  // leaf
  }

  std::vector<std::size_t> left_idx, right_idx;
  for (auto i : indices) {
    (x[i][static_cast<std::size_t>(best.slot)] == best.code ? left_idx
                                                            : right_idx)
        .push_back(i);
  }
  indices.clear();
  indices.shrink_to_fit();

  const auto left_node = static_cast<std::int32_t>(tree.nodes.size());
  tree.nodes.emplace_back();
  const auto right_node = static_cast<std::int32_t>(tree.nodes.size());
  tree.nodes.emplace_back();
  auto& parent = tree.nodes[node_index];  // re-take: vector may have moved
  parent.slot = best.slot;
  parent.code = best.code;
  parent.left = left_node;
  parent.right = right_node;
  fit_node(x, y, left_idx, depth + 1, hp, tree,
           static_cast<std::size_t>(left_node));
  fit_node(x, y, right_idx, depth + 1, hp, tree,
           static_cast<std::size_t>(right_node));
}

}  // namespace detail

/// Greedy CART: at every node each observed (slot, code) equality split is
/// scored by weighted Gini decrease; ties go to the lower slot then lower
/// code. Split counts are aggregates, so row order cannot change the tree.
inline DecisionTree fit_tree(const std::vector<EncodedRow>& x,
                             const std::vector<BailOutcome>& y,
                             const TreeHyperparams& hp,
                             std::string schema_hash = "") {
  hp.validate();
  if (x.empty()) throw std::invalid_argument("fit_tree: empty dataset");
  if (x.size() != y.size()) {
    throw std::invalid_argument("fit_tree: feature/label size mismatch");
  }
  DecisionTree tree;
  tree.hyperparams = hp;
  tree.schema_hash = std::move(schema_hash);
  tree.nodes.emplace_back();
  std::vector<std::size_t> indices(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) indices[i] = i;
  detail::fit_node(x, y, indices, 0, hp, tree, 0);
  return tree;
}

// --- Prediction ------------------------------------------------------------------

/// Majority class of the reached leaf; an exact tie predicts Denied (the
/// majority class of the corpus).
inline BailOutcome predict_label(const DecisionTree& tree,
                                 const EncodedRow& x) {
  const auto& leaf = tree.nodes[tree.leaf_for(x)];
  return leaf.n_denied >= leaf.n_granted ? BailOutcome::kDenied
                                         : BailOutcome::kGranted;
}

/// Laplace-smoothed P(denied) of the reached leaf: (n_denied + 1) / (n + 2).
/// Strictly inside (0,1), and >= 0.5 exactly when predict_label says Denied.
inline double predict_proba_denied(const DecisionTree& tree,
                                   const EncodedRow& x) {
  const auto& leaf = tree.nodes[tree.leaf_for(x)];
  return (static_cast<double>(leaf.n_denied) + 1.0) /
         (static_cast<double>(leaf.n_denied + leaf.n_granted) + 2.0);
}

// --- Evaluation -------------------------------------------------------------------

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct EvalMetrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  ClassMetrics denied, granted;
  // confusion[true][predicted], class order (denied=0, granted=1)
  std::array<std::array<std::int64_t, 2>, 2> confusion{};
  std::size_t n = 0;
};

inline EvalMetrics evaluate(const DecisionTree& tree,
                            const std::vector<EncodedRow>& x,
                            const std::vector<BailOutcome>& y) {
  if (x.empty()) throw std::invalid_argument("evaluate: empty test set");
  if (x.size() != y.size()) {
    throw std::invalid_argument("evaluate: feature/label size mismatch");
  }
  EvalMetrics m;
  m.n = x.size();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int truth = outcome_to_int(y[i]);
    const int pred = outcome_to_int(predict_label(tree, x[i]));
    ++m.confusion[static_cast<std::size_t>(truth)]
                 [static_cast<std::size_t>(pred)];
  }
  const auto& c = m.confusion;
  m.accuracy = static_cast<double>(c[0][0] + c[1][1]) /
               static_cast<double>(m.n);
  auto class_metrics = [&](int cls) {
    const auto k = static_cast<std::size_t>(cls);
    const std::int64_t tp = c[k][k];
    const std::int64_t fp = c[1 - k][k];
    const std::int64_t fn = c[k][1 - k];
    ClassMetrics cm;
    cm.precision = (tp + fp) > 0
                       ? static_cast<double>(tp) / static_cast<double>(tp + fp)
                       : 0.0;
    cm.recall = (tp + fn) > 0
                    ? static_cast<double>(tp) / static_cast<double>(tp + fn)
                    : 0.0;
    cm.f1 = (cm.precision + cm.recall) > 0.0
                ? 2.0 * cm.precision * cm.recall / (cm.precision + cm.recall)
                : 0.0;
    return cm;
  };
  m.denied = class_metrics(0);
  m.granted = class_metrics(1);
  m.macro_f1 = (m.denied.f1 + m.granted.f1) / 2.0;
  return m;
}

// --- Hyperparameter search -----------------------------------------------------------

struct TuneSpec {
  int depth_min = 2, depth_max = 12;
  int leaf_min = 1, leaf_max = 50;
  double decrease_min = 0.0, decrease_max = 0.05;
  int trials = 100;
  std::uint64_t seed = 0;
  enum class Objective { kMacroF1, kAccuracy };
  Objective objective = Objective::kMacroF1;

  void validate() const {
    if (trials < 1) throw std::invalid_argument("tune: trials must be >= 1");
    if (depth_min < 1 || depth_min > depth_max || leaf_min < 1 ||
        leaf_min > leaf_max || decrease_min < 0.0 ||
        decrease_min > decrease_max) {
      throw std::invalid_argument("tune: empty search space");
    }
  }
};

struct TrialRecord {
  int trial = 0;
  TreeHyperparams hyperparams;
  double objective = 0.0;
};

struct TuneResult {
  TreeHyperparams best;
  std::vector<TrialRecord> trials;
};

/// Seeded random search. All draws happen up front, trials are evaluated
/// independently (optionally in parallel), and the winner is selected in
/// trial order by objective with ties to (smaller depth, larger
/// min_samples_leaf).
inline TuneResult tune(const std::vector<EncodedRow>& train_x,
                       const std::vector<BailOutcome>& train_y,
                       const std::vector<EncodedRow>& val_x,
                       const std::vector<BailOutcome>& val_y,
                       const TuneSpec& spec, unsigned threads = 1) {
  spec.validate();
  if (val_x.empty()) throw std::invalid_argument("tune: empty validation set");

  Rng rng(spec.seed);
  std::vector<TrialRecord> trials(static_cast<std::size_t>(spec.trials));
  for (int t = 0; t < spec.trials; ++t) {
    TreeHyperparams hp;
    hp.max_depth = spec.depth_min +
                   static_cast<int>(rng.below(static_cast<std::uint64_t>(
                       spec.depth_max - spec.depth_min + 1)));
    hp.min_samples_leaf =
        spec.leaf_min + static_cast<int>(rng.below(static_cast<std::uint64_t>(
                            spec.leaf_max - spec.leaf_min + 1)));
    hp.min_impurity_decrease =
        spec.decrease_min +
        rng.next_double() * (spec.decrease_max - spec.decrease_min);
    trials[static_cast<std::size_t>(t)].trial = t;
    trials[static_cast<std::size_t>(t)].hyperparams = hp;
  }
  parallel_for(trials.size(), threads, [&](std::size_t t) {
    const DecisionTree tree = fit_tree(train_x, train_y, trials[t].hyperparams);
    const EvalMetrics m = evaluate(tree, val_x, val_y);
    trials[t].objective = spec.objective == TuneSpec::Objective::kMacroF1
                              ? m.macro_f1
                              : m.accuracy;
  });
  std::size_t best = 0;
  for (std::size_t t = 1; t < trials.size(); ++t) {
    const auto& cand = trials[t].hyperparams;
    const auto& incumbent = trials[best].hyperparams;
    const bool better =
        trials[t].objective > trials[best].objective ||
        (trials[t].objective == trials[best].objective &&
         (cand.max_depth < incumbent.max_depth ||
          (cand.max_depth == incumbent.max_depth &&
           cand.min_samples_leaf > incumbent.min_samples_leaf)));
    if (better) best = t;
  }
  return {trials[best].hyperparams, std::move(trials)};
}

// --- Artifact --------------------------------------------------------------------------

inline constexpr int kTreeFormatVersion = 1;

inline void save_tree(const DecisionTree& tree,
                      const std::filesystem::path& path) {
  nlohmann::json j;
  j["format"] = "bailaudit.decision_tree";
  j["format_version"] = kTreeFormatVersion;
  j["schema_hash"] = tree.schema_hash;
  j["hyperparams"] = {
      {"max_depth", tree.hyperparams.max_depth},
      {"min_samples_leaf", tree.hyperparams.min_samples_leaf},
      {"min_impurity_decrease", tree.hyperparams.min_impurity_decrease},
  };
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : tree.nodes) {
    nodes.push_back({{"slot", n.slot},
                     {"code", n.code},
                     {"left", n.left},
                     {"right", n.right},
                     {"n_denied", n.n_denied},
                     {"n_granted", n.n_granted}});
  }
  j["nodes"] = std::move(nodes);
  write_file(path, j.dump());
}

inline DecisionTree load_tree(const std::filesystem::path& path) {
  const nlohmann::json j = nlohmann::json::parse(read_file(path));
  if (!j.contains("format") || j["format"] != "bailaudit.decision_tree") {
    throw std::runtime_error(path.string() + ": not a decision tree artifact");
  }
  if (j.at("format_version").get<int>() != kTreeFormatVersion) {
    throw std::runtime_error(path.string() +
                             ": unsupported tree format version");
  }
  DecisionTree tree;
  tree.schema_hash = j.at("schema_hash").get<std::string>();
  const auto& hp = j.at("hyperparams");
  tree.hyperparams.max_depth = hp.at("max_depth").get<int>();
  tree.hyperparams.min_samples_leaf = hp.at("min_samples_leaf").get<int>();
  tree.hyperparams.min_impurity_decrease =
      hp.at("min_impurity_decrease").get<double>();
  for (const auto& n : j.at("nodes")) {
    TreeNode node;
    node.slot = n.at("slot").get<std::int32_t>();
    node.code = n.at("code").get<std::int32_t>();
    node.left = n.at("left").get<std::int32_t>();
    node.right = n.at("right").get<std::int32_t>();
    node.n_denied = n.at("n_denied").get<std::int64_t>();
    node.n_granted = n.at("n_granted").get<std::int64_t>();
    tree.nodes.push_back(node);
  }
  if (tree.nodes.empty()) {
    throw std::runtime_error(path.string() + ": tree has no nodes");
  }
  return tree;
}

inline void write_tuning_log_csv(const std::vector<TrialRecord>& trials,
                                 const std::filesystem::path& path) {
  std::string out;
  append_csv_row(out, {"trial", "max_depth", "min_samples_leaf",
                       "min_impurity_decrease", "objective"});
  for (const auto& t : trials) {
    append_csv_row(out, {std::to_string(t.trial),
                         std::to_string(t.hyperparams.max_depth),
                         std::to_string(t.hyperparams.min_samples_leaf),
                         fmt_double(t.hyperparams.min_impurity_decrease),
                         fmt_double(t.objective)});
  }
  write_file(path, out);
}

}  // namespace bailaudit

#endif  // BAILAUDIT_CLASSIFIER_HPP_
