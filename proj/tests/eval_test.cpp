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

#include "dppl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

namespace dppl {
namespace {

TEST(BalancedAccuracyTest, Examples) {
  const std::vector<std::uint32_t> truth = {0, 1, 2, 1, 0};
  EXPECT_DOUBLE_EQ(BalancedAccuracy(truth, truth, 3), 1.0);

  std::vector<std::uint32_t> t(100, 1), p(100, 0);
  std::fill(t.begin(), t.begin() + 10, 0u);
  EXPECT_DOUBLE_EQ(BalancedAccuracy(p, t, 2), 0.5);

  EXPECT_THROW(BalancedAccuracy(std::vector<std::uint32_t>{0}, truth, 3), InvalidArgument);
  EXPECT_THROW(BalancedAccuracy(std::vector<std::uint32_t>{3}, std::vector<std::uint32_t>{0}, 3),
               InvalidArgument);
}

TEST(BalancedAccuracyTest, AbsentClassesExcludedAndReported) {
  const std::vector<std::uint32_t> truth = {0, 0, 2, 2};
  const std::vector<std::uint32_t> pred = {0, 1, 2, 2};
  const auto d = BalancedAccuracyDetail(pred, truth, 3);
  EXPECT_DOUBLE_EQ(d.balanced, 0.75);
  EXPECT_EQ(d.absent, std::vector<std::uint32_t>{1});
  EXPECT_FALSE(d.per_class[1].has_value());
  const auto report = Evaluate(pred, truth, 3, {});
  EXPECT_EQ(report.warnings.size(), 1u);
}

TEST(BalancedAccuracyTest, RandomPredictionsNearChance) {
  Rng rng(1, 0);
  for (std::uint32_t c : {2u, 5u, 10u}) {
    const std::size_t n = 200000;
    std::vector<std::uint32_t> truth(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = static_cast<std::uint32_t>(i % c);
      pred[i] = static_cast<std::uint32_t>(rng.UniformInt(c));
    }
    const double chance = 1.0 / c;
    const double se = std::sqrt(chance * (1 - chance) / n);
    EXPECT_NEAR(BalancedAccuracy(pred, truth, c), chance, 3 * se);
  }
}

TEST(BalancedAccuracyTest, EqualsPlainAccuracyWhenBalanced) {
  Rng rng(2, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = static_cast<std::uint32_t>(1 + rng.UniformInt(8));
    const std::size_t per = 1 + rng.UniformInt(20);
    std::vector<std::uint32_t> truth, pred;
    for (std::uint32_t k = 0; k < c; ++k) {
      for (std::size_t i = 0; i < per; ++i) {
        truth.push_back(k);
        pred.push_back(rng.Uniform() < 0.7 ? k : static_cast<std::uint32_t>(rng.UniformInt(c)));
      }
    }
    std::size_t right = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) right += pred[i] == truth[i];
    EXPECT_NEAR(BalancedAccuracy(pred, truth, c), static_cast<double>(right) / truth.size(), 1e-12);
  }
}

TEST(MinorityAccuracyTest, Examples) {
  const std::vector<std::uint64_t> sizes = {100, 100, 100, 100, 5, 5, 10, 10};
  std::vector<std::uint32_t> truth, pred;
  for (std::uint32_t c = 0; c < 8; ++c) {
    for (int i = 0; i < 10; ++i) {
      truth.push_back(c);
      pred.push_back(c < 4 ? (c + 1) % 4 : c);
    }
  }
  EXPECT_EQ(MinorityClasses(sizes), (std::vector<std::uint32_t>{4, 5}));
  EXPECT_DOUBLE_EQ(MinorityAccuracy(pred, truth, sizes), 1.0);

  const std::vector<std::uint64_t> sizes2 = {9, 9, 9, 9, 1, 1, 1, 1};
  EXPECT_EQ(MinorityClasses(sizes2), (std::vector<std::uint32_t>{4, 5}));
  EXPECT_DOUBLE_EQ(MinorityAccuracy(pred, truth, sizes2), 1.0);

  EXPECT_EQ(MinorityClasses(std::vector<std::uint64_t>(8, 50)), (std::vector<std::uint32_t>{0, 1}));
  EXPECT_EQ(MinorityClasses(std::vector<std::uint64_t>(100, 50)).size(), 25u);
  try {
    MinorityClasses(std::vector<std::uint64_t>{1, 2, 3});
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("minority quartile empty"), std::string::npos);
  }
}

TEST(MinorityAccuracyTest, UsesTrainingSizesNotTestSizes) {
  const std::vector<std::uint64_t> train = {1, 50, 50, 50};
  // Class 0 is the training minority but has many test samples.
  std::vector<std::uint32_t> truth = {0, 0, 0, 0, 0, 1, 2, 3};
  std::vector<std::uint32_t> pred = {0, 0, 0, 0, 0, 0, 0, 0};
  EXPECT_DOUBLE_EQ(MinorityAccuracy(pred, truth, train), 1.0);
}

TEST(MixtureTest, DeterministicAndSeeded) {
  SyntheticMixtureSpec spec;
  spec.seed = 5;
  const auto a = MakeMixture(spec);
  EXPECT_EQ(a.embeddings, MakeMixture(spec).embeddings);
  EXPECT_EQ(a.ClassSizes(), std::vector<std::size_t>(4, 200));
  spec.seed = 6;
  EXPECT_NE(a.embeddings, MakeMixture(spec).embeddings);
}

TEST(MixtureTest, CentersDistinctWithRequestedNorm) {
  for (std::uint32_t c : {4u, 20u, 40u}) {
    SyntheticMixtureSpec spec;
    spec.num_classes = c;
    spec.seed = c;
    const auto centers = MixtureCenters(spec);
    for (std::uint32_t i = 0; i < c; ++i) {
      EXPECT_NEAR(L2Norm(centers.row(i)), spec.center_norm, 1e-9);
      for (std::uint32_t j = 0; j < i; ++j) {
        std::vector<double> diff(spec.dim);
        for (std::size_t t = 0; t < spec.dim; ++t) diff[t] = centers.row(i)[t] - centers.row(j)[t];
        EXPECT_GT(L2Norm(diff), 1e-3);
      }
    }
  }
}

TEST(MixtureTest, VanishingSpreadGivesCenters) {
  SyntheticMixtureSpec spec;
  spec.stddev = 1e-12;
  spec.per_class = 5;
  const auto ds = MakeMixture(spec);
  const auto centers = MixtureCenters(spec);
  for (std::size_t i = 0; i < ds.embeddings.rows(); ++i) {
    for (std::size_t j = 0; j < spec.dim; ++j) {
      EXPECT_NEAR(ds.embeddings.row(i)[j], centers.row(ds.labels[i])[j], 1e-10);
    }
  }
}

ExperimentData Split(SyntheticMixtureSpec spec) {
  ExperimentData data;
  spec.sample_stream = 0;
  data.train = MakeMixture(spec);
  spec.sample_stream = 1;
  data.test = MakeMixture(spec);
  return data;
}

TEST(RunExperimentTest, NonPrivateSeparatesWellSeparatedMixture) {
  const auto data = Split(SyntheticMixtureSpec{});
  ExperimentConfig cfg;
  cfg.method = Method::kNonPrivate;
  const auto report = RunExperiment(cfg, data);
  EXPECT_DOUBLE_EQ(report.balanced_accuracy, 1.0);
  EXPECT_FALSE(report.budget.has_value());
  EXPECT_EQ(report.method, "non-private");
  EXPECT_DOUBLE_EQ(*report.minority_accuracy, 1.0);

  SyntheticMixtureSpec tight;
  tight.stddev = 1e-12;
  EXPECT_DOUBLE_EQ(RunExperiment(cfg, Split(tight)).balanced_accuracy, 1.0);
}

TEST(RunExperimentTest, HugeBudgetMeanMatchesNonPrivate) {
  SyntheticMixtureSpec spec;
  spec.stddev = 4.0;
  spec.seed = 3;
  const auto data = Split(spec);
  ExperimentConfig np;
  np.method = Method::kNonPrivate;
  ExperimentConfig mean;
  mean.method = Method::kMean;
  mean.budget = 1e6;
  // Clip at the largest row norm so clipping is a no-op and the noise is
  // as small as the budget allows.
  mean.mean.clip = 0.0;
  for (std::size_t i = 0; i < data.train.embeddings.rows(); ++i) {
    mean.mean.clip = std::max(mean.mean.clip, L2Norm(data.train.embeddings.row(i)));
  }
  const auto a = RunExperiment(np, data);
  const auto b = RunExperiment(mean, data);
  EXPECT_LT(a.balanced_accuracy, 1.0);
  EXPECT_DOUBLE_EQ(a.balanced_accuracy, b.balanced_accuracy);
  EXPECT_EQ(b.budget, PrivacyBudget::Zcdp(1e6));
}

TEST(RunExperimentTest, PublicWithCentersMatchesNearestCenter) {
  SyntheticMixtureSpec spec;
  spec.stddev = 3.0;
  spec.seed = 4;
  auto data = Split(spec);
  data.candidates = MakePublicCandidates(spec, 200, 9);
  ExperimentConfig cfg;
  cfg.method = Method::kPublic;
  cfg.budget = 1000.0;
  const auto report = RunExperiment(cfg, data);

  PrototypeSet centers(4, 1, spec.dim, Provenance::kNonPrivate);
  const auto c = MixtureCenters(spec);
  for (std::uint32_t k = 0; k < 4; ++k) centers.SetVector(k, 0, c.row(k));
  const auto pred = PredictBatch(data.test.embeddings, centers);
  EXPECT_DOUBLE_EQ(report.balanced_accuracy, BalancedAccuracy(pred, data.test.labels, 4));
  EXPECT_EQ(report.budget, PrivacyBudget::PureDp(1000.0));
}

TEST(RunExperimentTest, SerialAndParallelIdentical) {
  SyntheticMixtureSpec spec;
  spec.stddev = 5.0;
  auto data = Split(spec);
  data.candidates = MakePublicCandidates(spec, 100, 1);
  for (auto method : {Method::kMean, Method::kPublic, Method::kTopK, Method::kCoinPress}) {
    ExperimentConfig cfg;
    cfg.method = method;
    cfg.budget = 0.5;
    cfg.seed = 77;
    cfg.select.k = 3;
    cfg.coinpress.r0 = 20.0;
    cfg.imbalance_ratio = 10.0;
    cfg.threads = 1;
    const auto serial = ToJson(RunExperiment(cfg, data)).dump();
    cfg.threads = 8;
    EXPECT_EQ(ToJson(RunExperiment(cfg, data)).dump(), serial) << MethodName(method);
  }
}

TEST(RunExperimentTest, ImbalanceAppliedToTraining) {
  const auto data = Split(SyntheticMixtureSpec{});
  ExperimentConfig cfg;
  cfg.method = Method::kNonPrivate;
  cfg.imbalance_ratio = 10.0;
  const auto report = RunExperiment(cfg, data);
  EXPECT_EQ(report.train_class_sizes, (std::vector<std::uint64_t>{200, 93, 43, 20}));
}

TEST(RunExperimentTest, ErrorsCarryStage) {
  auto data = Split(SyntheticMixtureSpec{});
  ExperimentConfig cfg;
  cfg.method = Method::kPublic;
  try {
    RunExperiment(cfg, data);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("stage prototypes"), std::string::npos) << e.what();
  }
}

TEST(EvalReportTest, JsonRoundTrip) {
  SyntheticMixtureSpec spec;
  spec.stddev = 6.0;
  auto data = Split(spec);
  ExperimentConfig cfg;
  cfg.budget = 0.01;
  cfg.imbalance_ratio = 4.0;
  const auto report = RunExperiment(cfg, data);
  const auto text = ToJson(report).dump(2);
  EXPECT_EQ(ReportFromJsonObject(Json::parse(text)), report);

  EvalReport sparse;
  sparse.method = "mean";
  sparse.per_class_accuracy = {0.5, std::nullopt};
  sparse.absent_classes = {1};
  EXPECT_EQ(ReportFromJsonObject(Json::parse(ToJson(sparse).dump())), sparse);
  EXPECT_EQ(ToJson(report)["version"], "dppl-report/1");
  auto bad = ToJson(report);
  bad["version"] = "dppl-report/0";
  EXPECT_THROW(ReportFromJsonObject(bad), FormatError);
}

}  // namespace
}  // namespace dppl
