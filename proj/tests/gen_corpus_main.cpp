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
// Regenerates the bundled demo corpus (data/sample_corpus.jsonl): 200
// synthetic cases over the default lexicons with a planted community skew.
// Usage: gen_corpus <output-path> [n_cases] [seed]

#include <cstdlib>
#include <iostream>
#include <string>

#include "bailaudit/io.hpp"
#include "support/synthetic.hpp"

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: gen_corpus <output-path> [n_cases] [seed]\n";
    return 2;
  }
  std::size_t n = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 200;
  std::uint64_t seed = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 42;

  bailaudit::testing::BiasCorpusOptions opt;
  opt.n_cases = n;
  opt.seed = seed;
  // Names from the default name lexicon; Hindu per-name rates average 0.5.
  opt.hindu_names = {"किशोर", "कुलदीप", "जयराम", "धीरेन्द्र", "नितिन"};
  opt.hindu_denial_rates = {0.3, 0.4, 0.5, 0.6, 0.7};
  opt.muslim_names = {"अब्दुल", "अहमद", "रिजवान", "सलीम"};
  opt.muslim_denial_rate = 0.9;

  bailaudit::write_file(argv[1],
                        bailaudit::testing::make_bias_corpus_jsonl(opt));
  std::cout << "wrote " << n << " cases to " << argv[1] << "\n";
  return 0;
}
