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
// Command line driver for the bail-outcome fairness audit pipeline.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bailaudit/pipeline.hpp"
#include "bailaudit/version.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir;
  unsigned threads = 0;
};

void add_common(CLI::App* cmd, CommonOptions* opts) {
  cmd->add_option("--config", opts->config_path, "pipeline config file")
      ->required();
  cmd->add_option("--seed", opts->seed, "override the config seed")
      ->each([opts](const std::string&) { opts->seed_set = true; });
  cmd->add_option("--out", opts->out_dir, "override the output directory");
  cmd->add_option("--threads", opts->threads,
                  "worker thread bound (never affects outputs)");
}

bailaudit::Pipeline make_pipeline(const CommonOptions& opts) {
  auto cfg = bailaudit::PipelineConfig::load(opts.config_path);
  if (opts.seed_set) cfg.seed = opts.seed;
  if (!opts.out_dir.empty()) {
    cfg.out_dir = std::filesystem::absolute(opts.out_dir);
  }
  if (opts.threads > 0) cfg.threads = opts.threads;
  return bailaudit::Pipeline(std::move(cfg));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interpretable bail-outcome classification with a "
               "counterfactual name-substitution fairness audit"};
  app.set_version_flag("--version", std::string(bailaudit::kVersion));
  app.require_subcommand(1);

  struct Stage {
    const char* name;
    const char* help;
    std::function<void(bailaudit::Pipeline&)> run;
  };
  const Stage stages[] = {
      {"ingest", "load, sample and normalize the corpus",
       [](bailaudit::Pipeline& p) { p.run_ingest(); }},
      {"stats", "token statistics for original and preprocessed text",
       [](bailaudit::Pipeline& p) { p.run_stats(); }},
      {"lda-sweep", "train one model per candidate K and pick by coherence",
       [](bailaudit::Pipeline& p) { p.run_lda_sweep(); }},
      {"lda-train", "train the final topic model",
       [](bailaudit::Pipeline& p) { p.run_lda_train(); }},
      {"featurize", "extract the 7 categorical features per case",
       [](bailaudit::Pipeline& p) { p.run_featurize(); }},
      {"train", "tune and fit the decision tree, evaluate on test",
       [](bailaudit::Pipeline& p) { p.run_train(); }},
      {"audit", "name-substitution audit and report bundle",
       [](bailaudit::Pipeline& p) { p.run_audit(); }},
      {"run-all", "run every stage in order",
       [](bailaudit::Pipeline& p) { p.run_all(); }},
  };

  CommonOptions opts[std::size(stages)];
  const Stage* selected = nullptr;
  const CommonOptions* selected_opts = nullptr;
  for (std::size_t i = 0; i < std::size(stages); ++i) {
    CLI::App* cmd = app.add_subcommand(stages[i].name, stages[i].help);
    add_common(cmd, &opts[i]);
    cmd->callback([&, i] {
      selected = &stages[i];
      selected_opts = &opts[i];
    });
  }

  CLI11_PARSE(app, argc, argv);
  try {
    bailaudit::Pipeline pipeline = make_pipeline(*selected_opts);
    selected->run(pipeline);
  } catch (const std::exception& e) {
    std::cerr << "error [" << selected->name << "]: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
