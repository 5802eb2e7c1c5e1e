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
// End-to-end orchestration: a key=value config file drives the staged
// pipeline (ingest, stats, lda-sweep, lda-train, featurize, train, audit).
// Every stage reads its inputs from upstream artifacts on disk, so stages
// can be re-run in isolation; a single global seed derives per-stage seeds.
// The report bundle under <out>/report/ is byte-deterministic for fixed
// inputs, seed and any thread count.

#ifndef BAILAUDIT_PIPELINE_HPP_
#define BAILAUDIT_PIPELINE_HPP_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bailaudit/audit.hpp"
#include "bailaudit/classifier.hpp"
#include "bailaudit/corpus.hpp"
#include "bailaudit/features.hpp"
#include "bailaudit/hash.hpp"
#include "bailaudit/io.hpp"
#include "bailaudit/threading.hpp"
#include "bailaudit/topics.hpp"
#include "bailaudit/version.hpp"

namespace bailaudit {

struct PipelineConfig {
  std::filesystem::path corpus_path;
  std::filesystem::path stopwords_path;
  std::filesystem::path theme_lexicon_path;
  std::filesystem::path name_lexicon_path;
  std::optional<std::filesystem::path> theme_overrides_path;
  std::filesystem::path out_dir = "out";

  std::optional<std::size_t> sample_n;
  double train_frac = 0.8, val_frac = 0.1, test_frac = 0.1;

  std::optional<int> lda_k;            // fixed K; wins over the sweep choice
  std::vector<int> sweep_ks;           // candidates for the lda-sweep stage
  double lda_alpha = 0.0;              // 0 means 50/K
  double lda_beta = 0.01;
  int lda_iterations = 500;
  int lda_burn_in = 200;
  int fold_in_iterations = 50;

  int tune_trials = 100;
  TuneSpec::Objective tune_objective = TuneSpec::Objective::kMacroF1;

  std::vector<std::string> audit_themes;  // empty: every lexicon theme
  std::pair<std::string, std::string> audit_communities = {"Hindu", "Muslim"};
  std::string audit_split = "test";       // train | val | test | all

  std::uint64_t seed = 0;
  unsigned threads = 1;

  /// Parses a `key = value` config file. Relative paths resolve against the
  /// config file's directory; environment variables are not expanded.
  static PipelineConfig load(const std::filesystem::path& config_path) {
    const auto kv = parse_key_value_file(config_path);
    const auto base = std::filesystem::absolute(config_path).parent_path();
    PipelineConfig cfg;
    auto resolve = [&](const std::string& p) {
      std::filesystem::path path(p);
      return path.is_absolute() ? path : base / path;
    };
    auto get = [&](const char* key) -> std::optional<std::string> {
      auto it = kv.find(key);
      if (it == kv.end() || it->second.empty()) return std::nullopt;
      return it->second;
    };
    auto require = [&](const char* key) {
      auto v = get(key);
      if (!v) {
        throw std::runtime_error(config_path.string() +
                                 ": missing required key `" +
                                 std::string(key) + "`");
      }
      return *v;
    };
    auto bad_value = [&](const char* key, const std::string& value) {
      return std::runtime_error(config_path.string() + ": invalid value \"" +
                                value + "\" for key `" + key + "`");
    };
    auto to_int = [&](const char* key, const std::string& v) {
      try {
        std::size_t used = 0;
        const int n = std::stoi(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return n;
      } catch (const std::exception&) {
        throw bad_value(key, v);
      }
    };
    auto to_u64 = [&](const char* key, const std::string& v) {
      try {
        std::size_t used = 0;
        const std::uint64_t n = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return n;
      } catch (const std::exception&) {
        throw bad_value(key, v);
      }
    };
    auto to_double = [&](const char* key, const std::string& v) {
      try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
      } catch (const std::exception&) {
        throw bad_value(key, v);
      }
    };
    cfg.corpus_path = resolve(require("corpus"));
    cfg.stopwords_path = resolve(require("stopwords"));
    cfg.theme_lexicon_path = resolve(require("theme_lexicon"));
    cfg.name_lexicon_path = resolve(require("name_lexicon"));
    if (auto v = get("theme_overrides")) cfg.theme_overrides_path = resolve(*v);
    if (auto v = get("out")) cfg.out_dir = resolve(*v);
    else cfg.out_dir = base / "out";
    if (auto v = get("sample_n")) cfg.sample_n = to_u64("sample_n", *v);
    if (auto v = get("train_frac")) {
      cfg.train_frac = to_double("train_frac", *v);
    }
    if (auto v = get("val_frac")) cfg.val_frac = to_double("val_frac", *v);
    if (auto v = get("test_frac")) cfg.test_frac = to_double("test_frac", *v);
    if (auto v = get("lda_k")) cfg.lda_k = to_int("lda_k", *v);
    if (auto v = get("lda_sweep_ks")) {
      for (const auto& part : split_on(*v, ',')) {
        const auto t = trim(part);
        if (!t.empty()) cfg.sweep_ks.push_back(to_int("lda_sweep_ks", t));
      }
    }
    if (auto v = get("lda_alpha")) cfg.lda_alpha = to_double("lda_alpha", *v);
    if (auto v = get("lda_beta")) cfg.lda_beta = to_double("lda_beta", *v);
    if (auto v = get("lda_iterations")) {
      cfg.lda_iterations = to_int("lda_iterations", *v);
    }
    if (auto v = get("lda_burn_in")) {
      cfg.lda_burn_in = to_int("lda_burn_in", *v);
    }
    if (auto v = get("fold_in_iterations")) {
      cfg.fold_in_iterations = to_int("fold_in_iterations", *v);
    }
    if (auto v = get("tune_trials")) {
      cfg.tune_trials = to_int("tune_trials", *v);
    }
    if (auto v = get("tune_objective")) {
      if (*v == "macro_f1") {
        cfg.tune_objective = TuneSpec::Objective::kMacroF1;
      } else if (*v == "accuracy") {
        cfg.tune_objective = TuneSpec::Objective::kAccuracy;
      } else {
        throw std::runtime_error(
            "tune_objective must be `macro_f1` or `accuracy`");
      }
    }
    if (auto v = get("audit_themes")) {
      for (const auto& part : split_on(*v, ',')) {
        const auto t = trim(part);
        if (!t.empty()) cfg.audit_themes.push_back(nfc(t));
      }
    }
    if (auto v = get("audit_communities")) {
      const auto parts = split_on(*v, ',');
      if (parts.size() != 2) {
        throw std::runtime_error("audit_communities must list two names");
      }
      cfg.audit_communities = {trim(parts[0]), trim(parts[1])};
    }
    if (auto v = get("audit_split")) cfg.audit_split = *v;
    if (auto v = get("seed")) cfg.seed = to_u64("seed", *v);
    if (auto v = get("threads")) {
      cfg.threads = static_cast<unsigned>(to_u64("threads", *v));
    }
    return cfg;
  }

  /// Fails fast, before any stage work.
  void validate() const {
    auto must_exist = [](const std::filesystem::path& p, const char* what) {
      if (!std::filesystem::exists(p)) {
        throw std::runtime_error(std::string(what) + " not found: " +
                                 p.string());
      }
    };
    must_exist(corpus_path, "corpus file");
    must_exist(stopwords_path, "stopword file");
    must_exist(theme_lexicon_path, "theme lexicon file");
    must_exist(name_lexicon_path, "name lexicon file");
    if (theme_overrides_path) {
      must_exist(*theme_overrides_path, "theme overrides file");
    }
    SplitSpec spec{train_frac, val_frac, test_frac, 0};
    spec.validate();
    if (!lda_k && sweep_ks.empty()) {
      throw std::runtime_error("config needs `lda_k` or `lda_sweep_ks`");
    }
    if (lda_k && *lda_k < 2) throw std::runtime_error("lda_k must be >= 2");
    if (audit_split != "train" && audit_split != "val" &&
        audit_split != "test" && audit_split != "all") {
      throw std::runtime_error(
          "audit_split must be train, val, test, or all");
    }
    if (tune_trials < 1) throw std::runtime_error("tune_trials must be >= 1");
    if (threads < 1) throw std::runtime_error("threads must be >= 1");
  }
};

class Pipeline {
 public:
  explicit Pipeline(PipelineConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    std::filesystem::create_directories(cfg_.out_dir);
    std::filesystem::create_directories(report_dir());
  }

  const PipelineConfig& config() const { return cfg_; }
  std::filesystem::path out_path(const std::string& name) const {
    return cfg_.out_dir / name;
  }
  std::filesystem::path report_dir() const { return cfg_.out_dir / "report"; }
  std::filesystem::path report_path(const std::string& name) const {
    return report_dir() / name;
  }

  // -- stages ---------------------------------------------------------------

  void run_ingest() {
    StageTimer timer(this, "ingest");
    const auto docs = load_corpus(cfg_.corpus_path, cfg_.sample_n,
                                  derive_seed(cfg_.seed, "ingest"));
    std::string out;
    std::size_t granted = 0;
    for (const auto& d : docs) {
      nlohmann::json j;
      j["id"] = d.id;
      j["facts"] = d.facts;
      j["decision"] = outcome_to_string(d.label);
      if (d.district) j["district"] = *d.district;
      out += j.dump();
      out.push_back('\n');
      if (d.label == BailOutcome::kGranted) ++granted;
    }
    write_file(out_path("corpus.jsonl"), out);
    timer.note("n_cases", docs.size());
    timer.note("n_granted", granted);
    timer.artifact("corpus.jsonl");
  }

  void run_stats() {
    StageTimer timer(this, "stats");
    const auto docs = load_ingested();
    const auto tokenized = tokenize_all(docs);
    write_token_stats(docs, report_path("token_stats_original.csv"));
    write_token_stats(tokenized, report_path("token_stats_preprocessed.csv"));
    timer.artifact("report/token_stats_original.csv");
    timer.artifact("report/token_stats_preprocessed.csv");
  }

  void run_lda_sweep() {
    StageTimer timer(this, "lda-sweep");
    if (cfg_.sweep_ks.empty()) {
      throw std::runtime_error("lda-sweep: `lda_sweep_ks` is not configured");
    }
    const auto tokenized = tokenize_all(load_ingested());
    const auto result = sweep_topic_counts(tokenized, cfg_.sweep_ks,
                                           base_lda_config("sweep"),
                                           cfg_.threads,
                                           cfg_.fold_in_iterations);
    write_sweep_artifacts(result);
    timer.note("chosen_k", result.chosen_k);
    timer.artifact("sweep.json");
    timer.artifact("report/sweep.csv");
  }

  void run_lda_train() {
    StageTimer timer(this, "lda-train");
    const auto tokenized = tokenize_all(load_ingested());
    int k = 0;
    if (cfg_.lda_k) {
      k = *cfg_.lda_k;
    } else {
      const auto sweep_file = out_path("sweep.json");
      if (!std::filesystem::exists(sweep_file)) {
        throw std::runtime_error(
            "missing artifact sweep.json: run the `lda-sweep` stage first "
            "(or set `lda_k`)");
      }
      const auto j = nlohmann::json::parse(read_file(sweep_file));
      k = j.at("chosen_k").get<int>();
    }
    LdaConfig config = base_lda_config("lda");
    config.num_topics = k;
    if (cfg_.lda_alpha <= 0.0) config.alpha = 50.0 / k;
    std::size_t empty_docs = 0;
    const LdaModel model = train_lda(tokenized, config, &empty_docs);
    save_lda_model(model, out_path("model.json"));
    // Keep the report bundle complete when no sweep was configured: a
    // single-candidate sweep supplies the model-selection diagnostics.
    if (cfg_.sweep_ks.empty()) {
      const auto result =
          sweep_topic_counts(tokenized, {k}, base_lda_config("sweep"),
                             cfg_.threads, cfg_.fold_in_iterations);
      write_sweep_artifacts(result);
      timer.artifact("sweep.json");
      timer.artifact("report/sweep.csv");
    }
    timer.note("k", k);
    timer.note("empty_docs_skipped", empty_docs);
    timer.artifact("model.json");
  }

  void run_featurize() {
    StageTimer timer(this, "featurize");
    require_artifact("model.json", "lda-train");
    const auto docs = load_ingested();
    const auto tokenized = tokenize_all(docs);
    const LdaModel model = load_lda_model(out_path("model.json"));
    const ThemeLexicon lexicon = ThemeLexicon::load(cfg_.theme_lexicon_path);
    std::map<std::string, std::pair<std::string, std::string>> overrides;
    if (cfg_.theme_overrides_path) {
      std::unordered_set<std::string> ids;
      for (const auto& d : docs) ids.insert(d.id);
      overrides =
          load_external_themes(*cfg_.theme_overrides_path, ids, lexicon);
    }
    const Dataset ds =
        build_dataset(model, tokenized, lexicon, overrides, cfg_.threads);
    write_features_csv(ds, out_path("features.csv"));
    write_schema_json(ds.schema, out_path("feature_schema.json"));
    timer.note("n_rows", ds.rows.size());
    timer.note("n_skipped_empty", ds.skipped_empty_ids.size());
    timer.artifact("features.csv");
    timer.artifact("feature_schema.json");
  }

  void run_train() {
    StageTimer timer(this, "train");
    require_artifact("features.csv", "featurize");
    require_artifact("feature_schema.json", "featurize");
    const auto [rows, schema, encoded, labels] = load_feature_artifacts();

    const SplitIndices split = split_indices(labels);
    auto take = [&](const std::vector<std::size_t>& idx) {
      std::pair<std::vector<EncodedRow>, std::vector<BailOutcome>> out;
      for (auto i : idx) {
        out.first.push_back(encoded[i]);
        out.second.push_back(labels[i]);
      }
      return out;
    };
    const auto [train_x, train_y] = take(split.train);
    const auto [val_x, val_y] = take(split.val);
    const auto [test_x, test_y] = take(split.test);

    TuneSpec spec;
    spec.trials = cfg_.tune_trials;
    spec.seed = derive_seed(cfg_.seed, "tune");
    spec.objective = cfg_.tune_objective;
    const TuneResult tuned =
        tune(train_x, train_y, val_x, val_y, spec, cfg_.threads);
    const DecisionTree tree =
        fit_tree(train_x, train_y, tuned.best, schema.hash());
    save_tree(tree, out_path("tree.json"));
    write_tuning_log_csv(tuned.trials, out_path("tuning_log.csv"));

    const EvalMetrics metrics = evaluate(tree, test_x, test_y);
    write_metrics_json(metrics, out_path("metrics.json"));
    timer.note("train_size", split.train.size());
    timer.note("val_size", split.val.size());
    timer.note("test_size", split.test.size());
    timer.artifact("tree.json");
    timer.artifact("tuning_log.csv");
    timer.artifact("metrics.json");
  }

  void run_audit() {
    StageTimer timer(this, "audit");
    require_artifact("features.csv", "featurize");
    require_artifact("feature_schema.json", "featurize");
    require_artifact("tree.json", "train");
    const auto [rows, schema, encoded, labels] = load_feature_artifacts();
    const DecisionTree tree = load_tree(out_path("tree.json"));
    if (tree.schema_hash != schema.hash()) {
      throw std::runtime_error(
          "tree.json was trained against a different feature schema; re-run "
          "the `train` stage");
    }
    const NameLexicon name_lexicon = NameLexicon::load(cfg_.name_lexicon_path);
    const ThemeLexicon theme_lexicon =
        ThemeLexicon::load(cfg_.theme_lexicon_path);

    Dataset ds;
    ds.rows = rows;
    ds.encoded = encoded;
    ds.schema = schema;
    const Dataset audited = audit_subset(ds, labels);

    std::vector<std::string> themes = cfg_.audit_themes;
    if (themes.empty()) {
      for (const auto& [name, words] : theme_lexicon.themes) {
        themes.push_back(name);
      }
    }
    FairnessReport report =
        themed_audit(audited, tree, name_lexicon, themes,
                     cfg_.audit_communities, cfg_.threads);
    report.name_lexicon_checksum = name_lexicon.checksum();
    report.theme_lexicon_checksum = theme_lexicon.checksum();

    write_fairness_gap_csv(report, report_path("fairness_gap.csv"));
    write_flip_csvs(report, name_lexicon, report_dir());
    write_audit_summary(report);
    write_markdown_report(report, name_lexicon);
    timer.note("audit_cases", report.overall_n);
    timer.artifact("report/fairness_gap.csv");
    timer.artifact("report/audit_summary.json");
    timer.artifact("report/report.md");
  }

  void run_all() {
    run_ingest();
    run_stats();
    if (!cfg_.sweep_ks.empty()) run_lda_sweep();
    run_lda_train();
    run_featurize();
    run_train();
    run_audit();
  }

 private:
  friend class StageTimer;

  class StageTimer {
   public:
    StageTimer(Pipeline* p, std::string stage)
        : pipeline_(p),
          stage_(std::move(stage)),
          start_(std::chrono::steady_clock::now()) {
      entry_["seed"] = derive_seed(p->cfg_.seed, stage_);
    }
    void note(const std::string& key, const nlohmann::json& value) {
      entry_[key] = value;
    }
    void artifact(const std::string& rel) {
      artifacts_.push_back(rel);
    }
    ~StageTimer() {
      const auto elapsed = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - start_)
                               .count();
      entry_["millis"] = elapsed;
      nlohmann::json sums;
      for (const auto& rel : artifacts_) {
        const auto path = pipeline_->cfg_.out_dir / rel;
        if (std::filesystem::exists(path)) {
          sums[rel] = sha256_file_hex(path);
        }
      }
      entry_["artifacts"] = std::move(sums);
      pipeline_->update_manifest(stage_, entry_);
    }

   private:
    Pipeline* pipeline_;
    std::string stage_;
    std::chrono::steady_clock::time_point start_;
    nlohmann::json entry_;
    std::vector<std::string> artifacts_;
  };

  LdaConfig base_lda_config(const std::string& stage) const {
    LdaConfig config;
    config.num_topics = cfg_.lda_k ? *cfg_.lda_k : 2;  // sweep overrides
    config.alpha = cfg_.lda_alpha;
    config.beta = cfg_.lda_beta;
    config.iterations = cfg_.lda_iterations;
    config.burn_in = cfg_.lda_burn_in;
    config.seed = derive_seed(cfg_.seed, stage);
    return config;
  }

  void require_artifact(const std::string& name, const std::string& stage) {
    if (!std::filesystem::exists(out_path(name))) {
      throw std::runtime_error("missing artifact " + name + ": run the `" +
                               stage + "` stage first");
    }
  }

  std::vector<CaseDocument> load_ingested() {
    require_artifact("corpus.jsonl", "ingest");
    return load_corpus(out_path("corpus.jsonl"));
  }

  std::vector<TokenizedCase> tokenize_all(
      const std::vector<CaseDocument>& docs) {
    const StopwordSet stopwords = load_stopwords(cfg_.stopwords_path);
    std::vector<TokenizedCase> out(docs.size());
    parallel_for(docs.size(), cfg_.threads, [&](std::size_t i) {
      out[i] = preprocess(docs[i], stopwords);
    });
    return out;
  }

  SplitSpec split_spec(const std::vector<BailOutcome>&) const {
    return SplitSpec{cfg_.train_frac, cfg_.val_frac, cfg_.test_frac,
                     derive_seed(cfg_.seed, "split")};
  }

  SplitIndices split_indices(const std::vector<BailOutcome>& labels) const {
    std::vector<int> as_int;
    as_int.reserve(labels.size());
    for (auto l : labels) as_int.push_back(outcome_to_int(l));
    return stratified_split_indices(as_int, split_spec(labels));
  }

  Dataset audit_subset(const Dataset& ds,
                       const std::vector<BailOutcome>& labels) const {
    if (cfg_.audit_split == "all") return ds;
    const SplitIndices split = split_indices(labels);
    const std::vector<std::size_t>& idx = cfg_.audit_split == "train"
                                              ? split.train
                                              : cfg_.audit_split == "val"
                                                    ? split.val
                                                    : split.test;
    std::vector<std::size_t> sorted(idx);
    std::sort(sorted.begin(), sorted.end());
    return ds.subset(sorted);
  }

  std::tuple<std::vector<FeatureVector>, FeatureSchema,
             std::vector<EncodedRow>, std::vector<BailOutcome>>
  load_feature_artifacts() {
    auto rows = load_features_csv(out_path("features.csv"));
    auto schema = load_schema_json(out_path("feature_schema.json"));
    std::vector<EncodedRow> encoded;
    std::vector<BailOutcome> labels;
    encoded.reserve(rows.size());
    for (const auto& fv : rows) {
      encoded.push_back(schema.encode(fv));
      labels.push_back(fv.label);
    }
    return {std::move(rows), std::move(schema), std::move(encoded),
            std::move(labels)};
  }

  template <class Cases>
  void write_token_stats(const Cases& cases,
                         const std::filesystem::path& path) {
    auto column = [&](Partition p) -> std::optional<CorpusStats> {
      try {
        return corpus_stats(cases, p);
      } catch (const std::exception&) {
        return std::nullopt;  // empty partition: leave the column blank
      }
    };
    const auto full = column(Partition::kFull);
    const auto granted = column(Partition::kGrantedOnly);
    const auto denied = column(Partition::kDeniedOnly);
    std::string out;
    append_csv_row(out, {"metric", "full", "granted_only", "denied_only"});
    auto row = [&](const char* name, auto getter, auto format) {
      std::vector<std::string> fields{name};
      for (const auto& stats : {full, granted, denied}) {
        fields.push_back(stats ? format(getter(*stats)) : "");
      }
      append_csv_row(out, fields);
    };
    row("mean", [](const CorpusStats& s) { return s.mean; },
        [](double v) { return fmt_fixed(v, 1); });
    row("median", [](const CorpusStats& s) { return s.median; },
        [](double v) { return fmt_double(v); });
    row("min", [](const CorpusStats& s) { return s.min; },
        [](std::int64_t v) { return std::to_string(v); });
    row("max", [](const CorpusStats& s) { return s.max; },
        [](std::int64_t v) { return std::to_string(v); });
    write_file(path, out);
  }

  void write_sweep_artifacts(const SweepResult& result) {
    nlohmann::json j;
    j["format"] = "bailaudit.sweep";
    j["format_version"] = 1;
    j["coherence"] = "umass_mean_eps1";
    j["chosen_k"] = result.chosen_k;
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : result.entries) {
      entries.push_back({{"k", e.num_topics},
                         {"coherence", e.coherence},
                         {"perplexity", e.perplexity}});
    }
    j["entries"] = std::move(entries);
    write_file(out_path("sweep.json"), j.dump());

    std::string csv =
        "# coherence: mean UMass (eps=1) over topics against the sweep "
        "training split; perplexity: held-out fold-in\n";
    append_csv_row(csv, {"k", "coherence", "perplexity"});
    for (const auto& e : result.entries) {
      append_csv_row(csv, {std::to_string(e.num_topics),
                           fmt_double(e.coherence),
                           fmt_double(e.perplexity)});
    }
    write_file(report_path("sweep.csv"), csv);
  }

  void write_metrics_json(const EvalMetrics& m,
                          const std::filesystem::path& path) {
    nlohmann::json j;
    j["n"] = m.n;
    j["accuracy"] = m.accuracy;
    j["macro_f1"] = m.macro_f1;
    auto cls = [](const ClassMetrics& c) {
      return nlohmann::json{{"precision", c.precision},
                            {"recall", c.recall},
                            {"f1", c.f1}};
    };
    j["denied"] = cls(m.denied);
    j["granted"] = cls(m.granted);
    j["confusion"] = {{m.confusion[0][0], m.confusion[0][1]},
                      {m.confusion[1][0], m.confusion[1][1]}};
    write_file(path, j.dump());
  }

  nlohmann::json analysis_config_json() const {
    // Deliberately path-free so report bundles compare byte-equal across
    // output directories; the manifest carries the paths.
    nlohmann::json j;
    j["seed"] = cfg_.seed;
    if (cfg_.sample_n) j["sample_n"] = *cfg_.sample_n;
    j["split"] = {{"train", cfg_.train_frac},
                  {"val", cfg_.val_frac},
                  {"test", cfg_.test_frac}};
    if (cfg_.lda_k) j["lda_k"] = *cfg_.lda_k;
    if (!cfg_.sweep_ks.empty()) j["lda_sweep_ks"] = cfg_.sweep_ks;
    j["lda_alpha"] = cfg_.lda_alpha;
    j["lda_beta"] = cfg_.lda_beta;
    j["lda_iterations"] = cfg_.lda_iterations;
    j["lda_burn_in"] = cfg_.lda_burn_in;
    j["fold_in_iterations"] = cfg_.fold_in_iterations;
    j["tune_trials"] = cfg_.tune_trials;
    j["tune_objective"] =
        cfg_.tune_objective == TuneSpec::Objective::kMacroF1 ? "macro_f1"
                                                             : "accuracy";
    j["audit_split"] = cfg_.audit_split;
    j["audit_communities"] = {cfg_.audit_communities.first,
                              cfg_.audit_communities.second};
    j["input_checksums"] = {
        {"corpus", sha256_file_hex(cfg_.corpus_path)},
        {"stopwords", sha256_file_hex(cfg_.stopwords_path)},
        {"theme_lexicon", sha256_file_hex(cfg_.theme_lexicon_path)},
        {"name_lexicon", sha256_file_hex(cfg_.name_lexicon_path)},
    };
    return j;
  }

  void write_audit_summary(const FairnessReport& report) {
    nlohmann::json j = fairness_report_json(report);
    j["config"] = analysis_config_json();
    j["stage_seeds"] = {
        {"ingest", derive_seed(cfg_.seed, "ingest")},
        {"sweep", derive_seed(cfg_.seed, "sweep")},
        {"lda", derive_seed(cfg_.seed, "lda")},
        {"split", derive_seed(cfg_.seed, "split")},
        {"tune", derive_seed(cfg_.seed, "tune")},
    };
    j["notes"] = methodology_notes();
    write_file(report_path("audit_summary.json"), j.dump(2));
  }

  static std::vector<std::string> methodology_notes() {
    return {
        "Fairness gaps are computed from Laplace-smoothed leaf "
        "probabilities of bail denial; flip tables count predicted-label "
        "changes at the 0.5 threshold (ties predict denied). The two views "
        "are reported separately and are not interchangeable.",
        "Each audited case swaps the lowest-index keyword slot that holds "
        "a lexicon name; additional name-bearing slots are logged but not "
        "swapped.",
        "Flip tables include a column per community, covering both "
        "same-community and cross-community replacements; the probability "
        "gap always contrasts the two configured communities.",
        "Direction of bias is defined only by the flip-table columns and "
        "the probability-gap sign convention. Verbal summaries of "
        "substitution direction are easy to invert, so none are used: a "
        "higher flip count under community X replacements for "
        "denied-baseline cases means the model grants bail more readily "
        "under X names.",
    };
  }

  void write_markdown_report(const FairnessReport& report,
                             const NameLexicon& name_lexicon) {
    // Everything below reads from the artifacts other stages wrote; a
    // partial pipeline is reported as an explicit error listing the gaps.
    std::vector<std::string> missing;
    auto need = [&](const std::filesystem::path& p, const std::string& stage) {
      if (!std::filesystem::exists(p)) {
        missing.push_back(p.filename().string() + " (stage `" + stage + "`)");
      }
    };
    need(report_path("token_stats_original.csv"), "stats");
    need(report_path("token_stats_preprocessed.csv"), "stats");
    need(report_path("sweep.csv"),
         cfg_.sweep_ks.empty() ? "lda-train" : "lda-sweep");
    need(out_path("model.json"), "lda-train");
    need(out_path("metrics.json"), "train");
    if (!missing.empty()) {
      std::string msg = "report: missing artifacts:";
      for (const auto& m : missing) msg += " " + m + ";";
      throw std::runtime_error(msg);
    }

    std::string md;
    md += "# Bail outcome fairness audit\n\n";
    md += "Tool: bailaudit " + std::string(kVersion) + "\n\n";
    md += "Seed: " + std::to_string(cfg_.seed) + "\n\n";
    md += "Corpus checksum (sha256): " + sha256_file_hex(cfg_.corpus_path) +
          "\n\n";

    auto csv_as_table = [&](const std::filesystem::path& p) {
      std::string out;
      bool header = true;
      for (const auto& line : read_lines(p)) {
        if (line.empty() || line[0] == '#') continue;
        const auto fields = parse_csv_row(line);
        out += "|";
        for (const auto& f : fields) out += " " + f + " |";
        out += "\n";
        if (header) {
          out += "|";
          for (std::size_t i = 0; i < fields.size(); ++i) out += " --- |";
          out += "\n";
          header = false;
        }
      }
      return out;
    };

    md += "## Token statistics\n\n";
    md += "Original text:\n\n";
    md += csv_as_table(report_path("token_stats_original.csv"));
    md += "\nPreprocessed text:\n\n";
    md += csv_as_table(report_path("token_stats_preprocessed.csv"));

    const auto model_json =
        nlohmann::json::parse(read_file(out_path("model.json")));
    md += "\n## Topic model\n\n";
    md += "Topics (K): " +
          model_json.at("config").at("num_topics").dump() + "\n\n";
    md += "Model selection (coherence: mean UMass, eps=1; perplexity: "
          "held-out fold-in):\n\n";
    md += csv_as_table(report_path("sweep.csv"));

    const auto metrics =
        nlohmann::json::parse(read_file(out_path("metrics.json")));
    md += "\n## Classifier\n\n";
    md += "| metric | value |\n| --- | --- |\n";
    md += "| test accuracy | " +
          fmt_fixed(metrics.at("accuracy").get<double>(), 4) + " |\n";
    md += "| macro F1 | " +
          fmt_fixed(metrics.at("macro_f1").get<double>(), 4) + " |\n";
    md += "| denied F1 | " +
          fmt_fixed(metrics.at("denied").at("f1").get<double>(), 4) + " |\n";
    md += "| granted F1 | " +
          fmt_fixed(metrics.at("granted").at("f1").get<double>(), 4) +
          " |\n";

    md += "\n## Fairness gap (denial of bail)\n\n";
    md += "Audited split: " + cfg_.audit_split + "; communities: " +
          report.communities.first + " vs " + report.communities.second +
          "\n\n";
    md += "| theme | n cases | gap |\n| --- | --- | --- |\n";
    for (const auto& row : report.per_theme) {
      md += "| " + row.theme + " | " + std::to_string(row.n_cases) + " | " +
            (row.n_cases > 0 ? fmt_fixed(row.gap, 4) : std::string("-")) +
            " |\n";
    }
    md += "| overall | " + std::to_string(report.overall_n) + " | " +
          fmt_fixed(report.overall_gap, 4) + " |\n";

    md += "\n## Label flips under name substitution\n\n";
    for (const auto& [theme, records] : report.flips_by_theme) {
      md += "Theme: " + theme + "\n\n";
      md += "| case | predicted | changed |";
      for (const auto& [community, names] : name_lexicon.communities) {
        md += " " + flip_column_name(community) + " |";
      }
      md += "\n| --- | --- | --- |";
      for (std::size_t i = 0; i < name_lexicon.communities.size(); ++i) {
        md += " --- |";
      }
      md += "\n";
      for (const auto& rec : records) {
        md += "| " + rec.case_id + " | " +
              std::to_string(rec.predicted_label) + " | " +
              std::to_string(rec.changed_label) + " |";
        for (const auto& [community, names] : name_lexicon.communities) {
          auto it = rec.flips.find(community);
          md += " " +
                std::to_string(it == rec.flips.end() ? 0 : it->second) +
                " |";
        }
        md += "\n";
      }
      md += "\n";
    }

    md += "## Lexicon provenance\n\n";
    md += "Name lexicon checksum (sha256): " + report.name_lexicon_checksum +
          "\n\n";
    md += "Theme lexicon checksum (sha256): " +
          report.theme_lexicon_checksum + "\n\n";

    md += "## Methodology notes\n\n";
    int note_no = 0;
    for (const auto& note : methodology_notes()) {
      md += std::to_string(++note_no) + ". " + note + "\n";
    }
    write_file(report_path("report.md"), md);
  }

  void update_manifest(const std::string& stage, const nlohmann::json& entry) {
    const auto path = out_path("manifest.json");
    nlohmann::json manifest;
    if (std::filesystem::exists(path)) {
      try {
        manifest = nlohmann::json::parse(read_file(path));
      } catch (const std::exception&) {
        manifest = nlohmann::json::object();
      }
    }
    manifest["tool"] = "bailaudit";
    manifest["version"] = std::string(kVersion);
    manifest["global_seed"] = cfg_.seed;
    nlohmann::json snapshot = analysis_config_json();
    snapshot.erase("input_checksums");
    snapshot["paths"] = {
        {"corpus", cfg_.corpus_path.string()},
        {"stopwords", cfg_.stopwords_path.string()},
        {"theme_lexicon", cfg_.theme_lexicon_path.string()},
        {"name_lexicon", cfg_.name_lexicon_path.string()},
        {"out", cfg_.out_dir.string()},
    };
    if (cfg_.theme_overrides_path) {
      snapshot["paths"]["theme_overrides"] =
          cfg_.theme_overrides_path->string();
    }
    snapshot["threads"] = cfg_.threads;
    if (!cfg_.audit_themes.empty()) {
      snapshot["audit_themes"] = cfg_.audit_themes;
    }
    manifest["config"] = std::move(snapshot);
    manifest["inputs"] = {
        {"corpus", sha256_file_hex(cfg_.corpus_path)},
        {"stopwords", sha256_file_hex(cfg_.stopwords_path)},
        {"theme_lexicon", sha256_file_hex(cfg_.theme_lexicon_path)},
        {"name_lexicon", sha256_file_hex(cfg_.name_lexicon_path)},
    };
    manifest["stages"][stage] = entry;
    write_file(path, manifest.dump(2));
  }

  PipelineConfig cfg_;
};

}  // namespace bailaudit

#endif  // BAILAUDIT_PIPELINE_HPP_
