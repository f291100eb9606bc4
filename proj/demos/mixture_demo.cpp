// Copyright 2026 The DPPL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Builds a synthetic 4-class mixture, estimates prototypes with the noisy
// mean and with public selection, and prints balanced accuracy per budget.

#include <cstdio>

#include "dppl/dppl.hpp"

int main() {
  dppl::SyntheticMixtureSpec spec;
  spec.seed = 7;
  dppl::ExperimentData data;
  data.train = dppl::MakeMixture(spec);
  spec.sample_stream = 1;
  data.test = dppl::MakeMixture(spec);
  data.candidates = dppl::MakePublicCandidates(spec, 1000, spec.seed);

  std::printf("%-8s %10s %10s\n", "budget", "mean", "public");
  for (double budget : {0.001, 0.01, 0.1, 1.0, 10.0}) {
    dppl::ExperimentConfig cfg;
    cfg.budget = budget;
    cfg.seed = 1;
    cfg.method = dppl::Method::kMean;
    const auto mean = dppl::RunExperiment(cfg, data);
    cfg.method = dppl::Method::kPublic;
    const auto pub = dppl::RunExperiment(cfg, data);
    std::printf("%-8g %10.4f %10.4f\n", budget, mean.balanced_accuracy, pub.balanced_accuracy);
  }
  return 0;
}
