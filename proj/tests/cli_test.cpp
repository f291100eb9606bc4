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

#include "dppl/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

namespace dppl {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome Invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "dppl");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string Slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dppl_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    SyntheticMixtureSpec spec;
    spec.per_class = 60;
    spec.stddev = 2.0;
    spec.seed = 1;
    const auto train = MakeMixture(spec);
    spec.sample_stream = 1;
    spec.per_class = 30;
    const auto test = MakeMixture(spec);
    WriteEmbeddings(P("train.emb"), train.embeddings);
    WriteLabels(P("train.lbl"), train.labels, train.num_classes);
    WriteEmbeddings(P("test.emb"), test.embeddings);
    WriteLabels(P("test.lbl"), test.labels, test.num_classes);
    WriteEmbeddings(P("public.emb"), MakePublicCandidates(spec, 50, 2));
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string P(const std::string& name) const { return (dir_ / name).string(); }

  std::vector<std::string> Files() const {
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(dir_)) names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    return names;
  }

  fs::path dir_;
};

TEST_F(CliTest, BudgetConvert) {
  auto r = Invoke({"budget", "convert", "--from", "pure-dp", "--to", "zcdp", "--value", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = Json::parse(r.out);
  EXPECT_DOUBLE_EQ(j["output"].get<double>(), 0.5);
  EXPECT_TRUE(j.contains("input"));
  EXPECT_TRUE(j.contains("formula"));

  r = Invoke({"budget", "convert", "--from", "zcdp", "--to", "pure-dp", "--value", "0.125"});
  ASSERT_EQ(r.code, 0);
  EXPECT_DOUBLE_EQ(Json::parse(r.out)["output"].get<double>(), 0.5);

  r = Invoke({"budget", "exp-mech", "--epsilon", "2"});
  ASSERT_EQ(r.code, 0);
  EXPECT_DOUBLE_EQ(Json::parse(r.out)["output"].get<double>(), 0.5);

  EXPECT_EQ(Invoke({"budget", "convert", "--from", "pure-dp", "--to", "zcdp", "--value", "0"}).code, 2);
  EXPECT_EQ(Invoke({"budget", "convert", "--from", "x", "--to", "zcdp", "--value", "1"}).code, 2);
}

TEST_F(CliTest, MissingClipNamesFlag) {
  const auto r = Invoke({"protos-mean", "--rho", "1", "--in", P("train.emb"), "--labels",
                      P("train.lbl"), "--seed", "1", "--out", P("m.protos")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--clip"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(P("m.protos")));
}

TEST_F(CliTest, UnknownSubcommandListsSubcommands) {
  const auto r = Invoke({"frobnicate"});
  EXPECT_EQ(r.code, 2);
  for (const char* sub : {"imbalance", "protos-mean", "protos-coinpress", "protos-public",
                          "classify", "eval", "sweep", "budget"}) {
    EXPECT_NE(r.err.find(sub), std::string::npos) << sub;
  }
  EXPECT_EQ(Invoke({}).code, 2);
}

TEST_F(CliTest, HelpListsSubcommands) {
  const auto r = Invoke({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("protos-public"), std::string::npos);
  const auto sub = Invoke({"protos-public", "--help"});
  EXPECT_EQ(sub.code, 0);
  EXPECT_NE(sub.out.find("--dmax"), std::string::npos);
}

TEST_F(CliTest, RandomizedSubcommandsRequireSeed) {
  const std::vector<std::vector<std::string>> commands = {
      {"imbalance", "--ir", "2", "--in", P("train.emb"), "--labels", P("train.lbl"),
       "--out-prefix", P("imb")},
      {"protos-mean", "--rho", "1", "--clip", "1", "--in", P("train.emb"), "--labels",
       P("train.lbl"), "--out", P("m.protos")},
      {"protos-coinpress", "--rho", "1", "--in", P("train.emb"), "--labels", P("train.lbl"),
       "--out", P("c.protos")},
      {"protos-public", "--epsilon", "1", "--private", P("train.emb"), "--labels", P("train.lbl"),
       "--public", P("public.emb"), "--out", P("p.protos")},
  };
  const auto before = Files();
  for (const auto& cmd : commands) {
    const auto r = Invoke(cmd);
    EXPECT_EQ(r.code, 2) << cmd[0];
    EXPECT_NE(r.err.find("--seed"), std::string::npos) << r.err;
  }
  EXPECT_EQ(Files(), before);
}

TEST_F(CliTest, ValidationFailuresWriteNothing) {
  const std::vector<std::vector<std::string>> commands = {
      {"imbalance", "--ir", "0.5", "--seed", "1", "--in", P("train.emb"), "--labels",
       P("train.lbl"), "--out-prefix", P("imb")},
      {"protos-mean", "--rho", "-1", "--clip", "1", "--seed", "1", "--in", P("train.emb"),
       "--labels", P("train.lbl"), "--out", P("m.protos")},
      {"protos-mean", "--rho", "1", "--clip", "1", "--pool", "0", "--seed", "1", "--in",
       P("train.emb"), "--labels", P("train.lbl"), "--out", P("m.protos")},
      {"protos-coinpress", "--rho", "1", "--steps", "0", "--seed", "1", "--in", P("train.emb"),
       "--labels", P("train.lbl"), "--out", P("c.protos")},
      {"protos-public", "--epsilon", "1", "--dmin", "1.5", "--dmax", "1", "--seed", "1",
       "--private", P("train.emb"), "--labels", P("train.lbl"), "--public", P("public.emb"),
       "--out", P("p.protos")},
      {"protos-public", "--epsilon", "1", "--k", "1000", "--seed", "1", "--private",
       P("train.emb"), "--labels", P("train.lbl"), "--public", P("public.emb"), "--out",
       P("p.protos")},
      {"protos-mean", "--rho", "1", "--clip", "1", "--seed", "1", "--in", P("missing.emb"),
       "--labels", P("train.lbl"), "--out", P("m.protos")},
      {"classify", "--protos", P("missing.protos"), "--in", P("test.emb"), "--out", P("pred.csv")},
  };
  const auto before = Files();
  for (const auto& cmd : commands) {
    const auto r = Invoke(cmd);
    EXPECT_EQ(r.code, 2) << cmd[0] << ": " << r.err;
  }
  EXPECT_EQ(Files(), before);
}

TEST_F(CliTest, RuntimeErrorNamesStage) {
  std::ofstream(P("bad.emb"), std::ios::binary) << "DPPLEMB1garbage";
  const auto r = Invoke({"protos-mean", "--rho", "1", "--clip", "1", "--seed", "1", "--in",
                      P("bad.emb"), "--labels", P("train.lbl"), "--out", P("m.protos")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("load"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(P("m.protos")));
}

TEST_F(CliTest, MeanPipelineEndToEnd) {
  auto r = Invoke({"imbalance", "--ir", "4", "--seed", "3", "--in", P("train.emb"), "--labels",
                P("train.lbl"), "--out-prefix", P("imb")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto sizes = ReadJsonFile(P("imb.sizes.json"));
  EXPECT_EQ(sizes["train_class_sizes"].get<std::vector<std::uint64_t>>(),
            (std::vector<std::uint64_t>{60, 38, 24, 15}));
  EXPECT_EQ(LoadLabels(P("imb.lbl")).labels.size(), 137u);

  r = Invoke({"protos-mean", "--rho", "1", "--clip", "15", "--seed", "4", "--in", P("imb.emb"),
           "--labels", P("imb.lbl"), "--out", P("m.protos"), "--threads", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto side = ReadJsonFile(P("m.protos.json"));
  EXPECT_EQ(side["format"], "dppl-protos/1");
  EXPECT_EQ(side["provenance"], "dp-mean");
  EXPECT_EQ(side["ledger"].size(), 4u);
  EXPECT_EQ(side["total_budget"]["value"].get<double>(), 1.0);
  EXPECT_EQ(side["reports"][0]["mechanism"], "gaussian-mean");

  r = Invoke({"classify", "--protos", P("m.protos"), "--in", P("test.emb"), "--out", P("pred.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream csv(Slurp(P("pred.csv")));
  std::size_t lines = 0;
  for (std::string line; std::getline(csv, line);) ++lines;
  EXPECT_EQ(lines, 120u);

  r = Invoke({"eval", "--protos", P("m.protos"), "--test", P("test.emb"), "--test-labels",
           P("test.lbl"), "--train-sizes", P("imb.sizes.json"), "--out", P("report.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = ReportFromJsonObject(ReadJsonFile(P("report.json")));
  EXPECT_GT(report.balanced_accuracy, 0.9);
  EXPECT_TRUE(report.minority_accuracy.has_value());
  EXPECT_EQ(report.budget, PrivacyBudget::Zcdp(1.0));
  EXPECT_EQ(report.seeds, std::vector<std::uint64_t>{4});
}

TEST_F(CliTest, PublicAndTopKSidecars) {
  auto r = Invoke({"protos-public", "--epsilon", "5", "--seed", "2", "--private", P("train.emb"),
                "--labels", P("train.lbl"), "--public", P("public.emb"), "--out", P("p.protos")});
  ASSERT_EQ(r.code, 0) << r.err;
  auto side = ReadJsonFile(P("p.protos.json"));
  EXPECT_EQ(side["public_ids"].size(), 4u);
  EXPECT_EQ(side["reports"][0]["mechanism"], "exponential");
  EXPECT_EQ(LoadPrototypeSet(P("p.protos")).per_class(), 1u);

  r = Invoke({"protos-public", "--epsilon", "5", "--k", "3", "--dmin", "0.5", "--dmax", "1.8",
           "--seed", "2", "--private", P("train.emb"), "--labels", P("train.lbl"), "--public",
           P("public.emb"), "--out", P("k.protos")});
  ASSERT_EQ(r.code, 0) << r.err;
  side = ReadJsonFile(P("k.protos.json"));
  EXPECT_EQ(side["public_ids"].size(), 12u);
  EXPECT_EQ(side["reports"][0]["doubled_cost"], true);
  const auto set = LoadPrototypeSet(P("k.protos"));
  EXPECT_EQ(set.per_class(), 3u);
  EXPECT_EQ(set.provenance(), Provenance::kDpPublic);

  r = Invoke({"classify", "--protos", P("k.protos"), "--in", P("test.emb"), "--out", P("pred.csv")});
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST_F(CliTest, CoinPressDiagnostics) {
  auto r = Invoke({"protos-coinpress", "--rho", "1e-9", "--r0", "4", "--seed", "5", "--in",
                P("train.emb"), "--labels", P("train.lbl"), "--out", P("c.protos")});
  ASSERT_EQ(r.code, 0) << r.err;
  auto diag = ReadJsonFile(P("c.protos.diagnostics.json"));
  EXPECT_EQ(diag["diverged"], true);
  EXPECT_EQ(diag["classes"].size(), 4u);
  EXPECT_TRUE(diag["classes"][0].contains("radii"));

  r = Invoke({"protos-coinpress", "--rho", "100", "--steps", "4", "--seed", "5", "--in",
           P("train.emb"), "--labels", P("train.lbl"), "--out", P("c2.protos")});
  ASSERT_EQ(r.code, 0) << r.err;
  diag = ReadJsonFile(P("c2.protos.diagnostics.json"));
  EXPECT_EQ(diag["diverged"], false);
  EXPECT_EQ(diag["classes"][0]["radii"].size(), 5u);
  EXPECT_EQ(ReadJsonFile(P("c2.protos.json"))["provenance"], "coinpress");
}

TEST_F(CliTest, SweepWritesReportsAndSummary) {
  Json grid{{"method", "mean"},
            {"budgets", {0.01, 1.0}},
            {"seeds", {0, 1, 2}},
            {"clip", 12.0},
            {"out_dir", P("sweep")},
            {"data", {{"mixture", {{"per_class", 50}, {"seed", 3}}}}}};
  WriteJsonFile(P("grid.json"), grid);
  const auto r = Invoke({"sweep", "--grid", P("grid.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = Slurp(P("sweep/summary.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "method,epsilon_or_rho,seed,balanced_acc,minority_acc");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
  for (int i = 0; i < 6; ++i) {
    EXPECT_TRUE(fs::exists(P("sweep/report_" + std::to_string(i) + ".json")));
  }
  const auto agg = ReadJsonFile(P("sweep/aggregate.json"));
  ASSERT_EQ(agg.size(), 2u);
  EXPECT_LE(agg[0]["q25"].get<double>(), agg[0]["median"].get<double>());
  EXPECT_LE(agg[0]["median"].get<double>(), agg[0]["q75"].get<double>());

  WriteJsonFile(P("bad_grid.json"), Json{{"method", "mean"}, {"budgets", Json::array()},
                                         {"out_dir", P("sweep2")}, {"data", Json::object()}});
  EXPECT_EQ(Invoke({"sweep", "--grid", P("bad_grid.json")}).code, 2);
  EXPECT_FALSE(fs::exists(P("sweep2")));
}

}  // namespace
}  // namespace dppl
