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

// The `dppl` command line. RunCli is the whole program; main() only forwards
// to it, which lets tests drive the CLI in-process.
//
// Exit codes: 0 success, 1 runtime failure (message names the stage),
// 2 usage error (message names the flag or lists the subcommands).
// Every flag is validated before any work starts, and output files are only
// written once all computation succeeded.

#ifndef DPPL_CLI_HPP_
#define DPPL_CLI_HPP_

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dppl/classify.hpp"
#include "dppl/data.hpp"
#include "dppl/eval.hpp"
#include "dppl/mean.hpp"
#include "dppl/privacy.hpp"
#include "dppl/select.hpp"
#include "dppl/serialize.hpp"

namespace dppl::cli {

// Bad flag values; reported with exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

inline constexpr const char* kSubcommands =
    "imbalance, protos-mean, protos-coinpress, protos-public, classify, eval, sweep, budget";

namespace internal {

inline void RequireFlag(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

inline void RequireInput(const std::string& flag, const std::string& path) {
  RequireFlag(std::filesystem::is_regular_file(path),
              flag + ": input file '" + path + "' does not exist");
}

template <typename Fn>
auto Stage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(std::string(stage) + ": " + e.what());
  }
}

inline std::string Dump(const Json& j) { return j.dump(2); }

struct ImbalanceArgs {
  double ir = 1.0;
  std::uint64_t seed = 0;
  std::string in, labels, out_prefix;
  std::optional<std::uint64_t> n_max;
};

struct MeanArgs {
  double rho = 0.0, clip = 0.0;
  std::size_t pool = 1;
  std::string in, labels, out;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct CoinPressArgs {
  double rho = 0.0;
  std::size_t steps = 10;
  std::optional<double> r0;
  double tail = 0.99;
  std::string in, labels, out;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct PublicArgs {
  double epsilon = 0.0, dmin = 0.0, dmax = 2.0;
  std::size_t k = 1;
  std::string priv, labels, pub, out;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::size_t block = 4096;
};

struct ClassifyArgs {
  std::string protos, in, out;
  unsigned threads = 1;
};

struct EvalArgs {
  std::string protos, test, test_labels, train_sizes, out;
  unsigned threads = 1;
};

struct BudgetArgs {
  std::string from = "pure-dp", to = "zcdp";
  double value = 0.0;
  double epsilon = 0.0;
};

inline int DoImbalance(const ImbalanceArgs& a, std::ostream& out, std::ostream& err) {
  RequireInput("--in", a.in);
  RequireInput("--labels", a.labels);
  RequireFlag(std::isfinite(a.ir) && a.ir >= 1.0, "--ir must be >= 1");
  RequireFlag(!a.n_max || *a.n_max >= 1, "--n-max must be >= 1");
  const auto ds = Stage("load", [&] { return LoadDataset(a.in, a.labels); });
  const auto sizes = ds.ClassSizes();
  RequireFlag(ds.num_classes >= 1 && !sizes.empty(), "--labels: no classes");
  ImbalanceSpec spec{a.ir, ds.num_classes,
                     a.n_max ? *a.n_max : *std::min_element(sizes.begin(), sizes.end()), a.seed};
  RequireFlag(spec.max_class_size >= 1, "--in: the smallest class is empty; pass --n-max");
  const auto result = Stage("imbalance", [&] { return ApplyImbalance(ds, spec); });
  const auto targets = ImbalanceClassSizes(spec);
  Json summary{{"imbalance_ratio", a.ir},
               {"lambda", ImbalanceDecay(spec)},
               {"max_class_size", spec.max_class_size},
               {"seed", a.seed},
               {"class_sizes", targets},
               {"median", MedianCount(targets)},
               {"min", *std::min_element(targets.begin(), targets.end())}};
  Stage("write", [&] {
    WriteEmbeddings(a.out_prefix + ".emb", result.embeddings);
    WriteLabels(a.out_prefix + ".lbl", result.labels, result.num_classes);
    WriteJsonFile(a.out_prefix + ".sizes.json", Json{{"train_class_sizes", targets}});
    return 0;
  });
  out << Dump(summary) << '\n';
  err << "imbalance: kept " << result.labels.size() << " of " << ds.labels.size() << " rows\n";
  return 0;
}

inline int DoMean(const MeanArgs& a, std::ostream& out, std::ostream& err) {
  RequireInput("--in", a.in);
  RequireInput("--labels", a.labels);
  RequireFlag(std::isfinite(a.rho) && a.rho > 0.0, "--rho must be positive");
  RequireFlag(std::isfinite(a.clip) && a.clip > 0.0, "--clip must be positive");
  RequireFlag(a.pool >= 1, "--pool must be >= 1");
  const auto ds = Stage("load", [&] { return LoadDataset(a.in, a.labels); });
  const MeanConfig cfg{a.rho, a.clip, a.pool};
  const auto protos = Stage("estimate", [&] {
    return DpplMeanAll(ds, cfg, RngState{a.seed, 0}, a.threads);
  });
  Stage("write", [&] {
    WritePrototypeSet(a.out, protos);
    return 0;
  });
  const auto total = ComposeParallel(protos.ledger());
  out << Dump(Json{{"prototypes", a.out}, {"total_budget", ToJson(total.total)}}) << '\n';
  err << "protos-mean: " << protos.num_classes() << " prototypes at rho=" << a.rho << "\n";
  return 0;
}

inline int DoCoinPress(const CoinPressArgs& a, std::ostream& out, std::ostream& err) {
  RequireInput("--in", a.in);
  RequireInput("--labels", a.labels);
  RequireFlag(std::isfinite(a.rho) && a.rho > 0.0, "--rho must be positive");
  RequireFlag(a.steps >= 1, "--steps must be >= 1");
  RequireFlag(!a.r0 || (std::isfinite(*a.r0) && *a.r0 > 0.0), "--r0 must be positive");
  RequireFlag(a.tail > 0.0 && a.tail < 1.0, "--tail must lie in (0, 1)");
  const auto ds = Stage("load", [&] { return LoadDataset(a.in, a.labels); });
  CoinPressConfig cfg;
  cfg.rho = a.rho;
  cfg.steps = a.steps;
  cfg.r0 = a.r0 ? *a.r0 : std::sqrt(static_cast<double>(ds.embeddings.cols()));
  cfg.tail_quantile = a.tail;
  const auto result = Stage("estimate", [&] {
    return CoinPressAll(ds, cfg, RngState{a.seed, 0}, a.threads);
  });
  Json diag = Json::array();
  bool any_diverged = false;
  for (const auto& d : result.diagnostics) {
    diag.push_back(ToJson(d));
    any_diverged = any_diverged || d.diverged;
  }
  Stage("write", [&] {
    WritePrototypeSet(a.out, result.prototypes, Json{{"diagnostics", diag}});
    WriteJsonFile(a.out + ".diagnostics.json", Json{{"diverged", any_diverged}, {"classes", diag}});
    return 0;
  });
  out << Dump(Json{{"prototypes", a.out}, {"diverged", any_diverged}}) << '\n';
  if (any_diverged) err << "protos-coinpress: radius diverged for at least one class\n";
  return 0;
}

inline int DoPublic(const PublicArgs& a, std::ostream& out, std::ostream& err) {
  RequireInput("--private", a.priv);
  RequireInput("--labels", a.labels);
  RequireInput("--public", a.pub);
  RequireFlag(std::isfinite(a.epsilon) && a.epsilon > 0.0, "--epsilon must be positive");
  RequireFlag(a.dmin >= 0.0, "--dmin must be >= 0");
  RequireFlag(a.dmax > 0.0 && a.dmax <= 2.0, "--dmax must lie in (0, 2]");
  RequireFlag(a.dmin < a.dmax, "--dmin must be smaller than --dmax");
  RequireFlag(a.k >= 1, "--k must be >= 1");
  RequireFlag(a.block >= 1, "--block must be >= 1");
  RequireFlag(FormatFromPath(a.pub) == EmbeddingFormat::kBinary,
              "--public must be a binary DPPLEMB1 file");
  const auto ds = Stage("load", [&] { return LoadDataset(a.priv, a.labels); });
  const auto candidates = Stage("load", [&] { return EmbeddingBlockReader(a.pub).rows(); });
  RequireFlag(a.k <= candidates, "--k exceeds the public candidate count");
  SelectConfig cfg;
  cfg.epsilon = a.epsilon;
  cfg.d_min = a.dmin;
  cfg.d_max = a.dmax;
  cfg.k = a.k;
  cfg.block_size = a.block;
  const auto protos = Stage("select", [&] {
    return SelectAllClassesFromFile(ds, a.pub, cfg, RngState{a.seed, 0}, a.threads);
  });
  Stage("write", [&] {
    WritePrototypeSet(a.out, protos);
    return 0;
  });
  const auto total = ComposeParallel(protos.ledger());
  out << Dump(Json{{"prototypes", a.out},
                   {"public_ids", protos.public_ids()},
                   {"total_budget", ToJson(total.total)}})
      << '\n';
  err << "protos-public: selected " << protos.public_ids().size() << " of " << candidates
      << " candidates\n";
  return 0;
}

inline std::string LabelsCsv(const std::vector<std::uint32_t>& labels) {
  std::string s;
  for (auto l : labels) {
    s += std::to_string(l);
    s += '\n';
  }
  return s;
}

inline int DoClassify(const ClassifyArgs& a, std::ostream& out, std::ostream& err) {
  RequireInput("--protos", a.protos);
  RequireInput("--in", a.in);
  const auto protos = Stage("load", [&] { return LoadPrototypeSet(a.protos); });
  const auto x = Stage("load", [&] { return LoadEmbeddings(a.in); });
  const auto pred = Stage("predict", [&] { return PredictBatch(x, protos, a.threads); });
  Stage("write", [&] {
    std::ofstream f(a.out, std::ios::binary | std::ios::trunc);
    if (!f) throw FormatError("cannot write " + a.out);
    f << LabelsCsv(pred);
    return 0;
  });
  out << Dump(Json{{"predictions", a.out}, {"rows", pred.size()}}) << '\n';
  err << "classify: " << pred.size() << " rows\n";
  return 0;
}

inline std::vector<std::uint64_t> LoadTrainSizes(const std::string& path) {
  const auto j = ReadJsonFile(path);
  const Json& arr = j.is_array() ? j : j.at("train_class_sizes");
  return arr.get<std::vector<std::uint64_t>>();
}

inline int DoEval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  RequireInput("--protos", a.protos);
  RequireInput("--test", a.test);
  RequireInput("--test-labels", a.test_labels);
  RequireInput("--train-sizes", a.train_sizes);
  const auto protos = Stage("load", [&] { return LoadPrototypeSet(a.protos); });
  const auto test = Stage("load", [&] { return LoadDataset(a.test, a.test_labels); });
  const auto sizes = Stage("load", [&] { return LoadTrainSizes(a.train_sizes); });
  const auto pred = Stage("predict", [&] { return PredictBatch(test.embeddings, protos, a.threads); });
  auto report = Stage("metrics", [&] {
    return Evaluate(pred, test.labels, test.num_classes, sizes);
  });
  report.method = ProvenanceName(protos.provenance());
  if (!protos.ledger().empty()) report.budget = ComposeParallel(protos.ledger()).total;
  for (const auto& r : protos.reports()) {
    if (std::find(report.seeds.begin(), report.seeds.end(), r.seed) == report.seeds.end()) {
      report.seeds.push_back(r.seed);
    }
  }
  report.config = Json{{"protos", a.protos}, {"test", a.test}};
  Stage("write", [&] {
    WriteJsonFile(a.out, ToJson(report));
    return 0;
  });
  out << Dump(Json{{"report", a.out}, {"balanced_accuracy", report.balanced_accuracy}}) << '\n';
  err << "eval: balanced accuracy " << report.balanced_accuracy << "\n";
  return 0;
}

// Quantile with linear interpolation between order statistics.
inline double Quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline std::string CsvNumber(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

// Grid file:
//   {"method": "mean", "budgets": [...], "seeds": [...] | "num_seeds": 10,
//    "data": {"mixture": {...}, "public_distractors": 1000}
//          | {"train", "train_labels", "test", "test_labels", "public"},
//    "clip", "pool", "dmin", "dmax", "k", "steps", "r0", "imbalance_ratio",
//    "out_dir"}
inline int DoSweep(const std::string& grid_path, unsigned threads, std::ostream& out,
                   std::ostream& err) {
  RequireInput("--grid", grid_path);
  const Json grid = Stage("load", [&] { return ReadJsonFile(grid_path); });
  Method method{};
  std::vector<double> budgets;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path out_dir;
  ExperimentConfig base;
  try {
    method = ParseMethod(grid.at("method").get<std::string>());
    budgets = grid.at("budgets").get<std::vector<double>>();
    if (grid.contains("seeds")) {
      seeds = grid.at("seeds").get<std::vector<std::uint64_t>>();
    } else {
      const auto n = grid.value("num_seeds", std::size_t{10});
      for (std::uint64_t s = 0; s < n; ++s) seeds.push_back(s);
    }
    out_dir = grid.at("out_dir").get<std::string>();
    base.method = method;
    base.threads = threads;
    base.mean.clip = grid.value("clip", 1.0);
    base.mean.pool = grid.value("pool", std::size_t{1});
    base.select.d_min = grid.value("dmin", 0.0);
    base.select.d_max = grid.value("dmax", 2.0);
    base.select.k = grid.value("k", std::size_t{1});
    base.coinpress.steps = grid.value("steps", std::size_t{10});
    if (grid.contains("imbalance_ratio")) base.imbalance_ratio = grid.at("imbalance_ratio").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("--grid: ") + e.what());
  }
  RequireFlag(!budgets.empty(), "--grid: budgets is empty");
  RequireFlag(!seeds.empty(), "--grid: no seeds");
  for (double b : budgets) RequireFlag(std::isfinite(b) && b > 0.0, "--grid: budgets must be positive");
  RequireFlag(base.mean.clip > 0.0 && base.mean.pool >= 1, "--grid: invalid clip/pool");
  try {
    base.select.Validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(std::string("--grid: ") + e.what());
  }
  RequireFlag(!base.imbalance_ratio || *base.imbalance_ratio >= 1.0,
              "--grid: imbalance_ratio must be >= 1");

  ExperimentData data = Stage("load", [&] {
    ExperimentData d;
    const Json& src = grid.at("data");
    if (src.contains("mixture")) {
      const Json& m = src.at("mixture");
      SyntheticMixtureSpec spec;
      spec.num_classes = m.value("classes", 4u);
      spec.dim = m.value("dim", std::size_t{16});
      spec.center_norm = m.value("center_norm", 10.0);
      spec.stddev = m.value("stddev", 1.0);
      spec.per_class = m.value("per_class", std::size_t{200});
      spec.seed = m.value("seed", std::uint64_t{0});
      d.train = MakeMixture(spec);
      spec.sample_stream = 1;
      d.test = MakeMixture(spec);
      d.candidates = MakePublicCandidates(spec, src.value("public_distractors", std::size_t{1000}),
                                          spec.seed);
    } else {
      d.train = LoadDataset(src.at("train").get<std::string>(),
                            src.at("train_labels").get<std::string>());
      d.test = LoadDataset(src.at("test").get<std::string>(),
                           src.at("test_labels").get<std::string>());
      if (src.contains("public")) d.candidates = LoadEmbeddings(src.at("public").get<std::string>());
    }
    return d;
  });
  if (method == Method::kCoinPress) {
    base.coinpress.r0 = grid.value("r0", std::sqrt(static_cast<double>(data.train.embeddings.cols())));
  }
  if (method == Method::kPublic || method == Method::kTopK) {
    RequireFlag(data.candidates.has_value(), "--grid: public methods need a public set");
  }

  struct Row {
    double budget;
    std::uint64_t seed;
    EvalReport report;
  };
  std::vector<Row> rows;
  for (double b : budgets) {
    for (auto s : seeds) {
      ExperimentConfig cfg = base;
      cfg.budget = b;
      cfg.seed = s;
      rows.push_back({b, s, Stage("experiment", [&] { return RunExperiment(cfg, data); })});
    }
  }

  Stage("write", [&] {
    std::filesystem::create_directories(out_dir);
    std::string csv = "method,epsilon_or_rho,seed,balanced_acc,minority_acc\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      WriteJsonFile(out_dir / ("report_" + std::to_string(i) + ".json"), ToJson(r.report));
      csv += std::string(MethodName(method)) + "," + CsvNumber(r.budget) + "," +
             std::to_string(r.seed) + "," + CsvNumber(r.report.balanced_accuracy) + "," +
             (r.report.minority_accuracy ? CsvNumber(*r.report.minority_accuracy) : "") + "\n";
    }
    std::ofstream f(out_dir / "summary.csv", std::ios::binary | std::ios::trunc);
    if (!f) throw FormatError("cannot write summary.csv");
    f << csv;
    return 0;
  });

  Json aggregate = Json::array();
  for (double b : budgets) {
    std::vector<double> acc;
    for (const auto& r : rows) {
      if (r.budget == b) acc.push_back(r.report.balanced_accuracy);
    }
    aggregate.push_back(Json{{"budget", b},
                             {"median", Quantile(acc, 0.5)},
                             {"q25", Quantile(acc, 0.25)},
                             {"q75", Quantile(acc, 0.75)}});
  }
  Stage("write", [&] {
    WriteJsonFile(out_dir / "aggregate.json", aggregate);
    return 0;
  });
  out << Dump(aggregate) << '\n';
  err << "sweep: " << rows.size() << " runs written to " << out_dir.string() << "\n";
  return 0;
}

inline int DoBudgetConvert(const BudgetArgs& a, std::ostream& out) {
  RequireFlag(std::isfinite(a.value) && a.value > 0.0, "--value must be positive");
  Json j;
  if (a.from == "pure-dp" && a.to == "zcdp") {
    j = Json{{"input", Json{{"kind", "pure-dp"}, {"epsilon", a.value}}},
             {"output", PureDpToZcdp(a.value)},
             {"formula", "rho = epsilon^2 / 2"}};
  } else if (a.from == "zcdp" && a.to == "pure-dp") {
    j = Json{{"input", Json{{"kind", "zcdp"}, {"rho", a.value}}},
             {"output", ZcdpToPureDpEquivalent(a.value)},
             {"formula", "epsilon = sqrt(2 rho)"},
             {"note", "comparison axis only; does not imply a pure-DP guarantee"}};
  } else if (a.from == a.to) {
    throw UsageError("--from and --to must differ");
  } else {
    throw UsageError("--from/--to must be pure-dp or zcdp");
  }
  out << Dump(j) << '\n';
  return 0;
}

inline int DoBudgetExpMech(const BudgetArgs& a, std::ostream& out) {
  RequireFlag(std::isfinite(a.epsilon) && a.epsilon > 0.0, "--epsilon must be positive");
  out << Dump(Json{{"input", Json{{"kind", "pure-dp"}, {"epsilon", a.epsilon}}},
                   {"output", ExpMechZcdp(a.epsilon)},
                   {"formula", "rho = epsilon^2 / 8"}})
      << '\n';
  return 0;
}

}  // namespace internal

inline int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  using namespace internal;
  CLI::App app{"Differentially private prototype learning over embedding vectors", "dppl"};
  app.require_subcommand(1);
  app.footer(std::string("Subcommands: ") + kSubcommands);

  auto seed_opt = [](CLI::App* sub, std::uint64_t& seed) {
    sub->add_option("--seed", seed, "RNG seed (required)")->required();
  };
  auto threads_opt = [](CLI::App* sub, unsigned& threads) {
    sub->add_option("--threads", threads, "worker cap; results do not depend on it")
        ->check(CLI::Range(1u, 1024u));
  };

  ImbalanceArgs imb;
  auto* imbalance = app.add_subcommand("imbalance", "exponential long-tail subsampling");
  imbalance->add_option("--ir", imb.ir, "imbalance ratio >= 1")->required();
  seed_opt(imbalance, imb.seed);
  imbalance->add_option("--in", imb.in, "embedding file")->required();
  imbalance->add_option("--labels", imb.labels, "label file")->required();
  imbalance->add_option("--out-prefix", imb.out_prefix, "writes <prefix>.emb/.lbl/.sizes.json")
      ->required();
  imbalance->add_option("--n-max", imb.n_max, "size of class 0 (default: smallest class)");

  MeanArgs mean;
  auto* pmean = app.add_subcommand("protos-mean", "noisy clipped class means (rho-zCDP)");
  pmean->add_option("--rho", mean.rho, "zCDP budget")->required();
  pmean->add_option("--clip", mean.clip, "l2 clip norm")->required();
  pmean->add_option("--pool", mean.pool, "average pooling kernel");
  pmean->add_option("--in", mean.in, "embedding file")->required();
  pmean->add_option("--labels", mean.labels, "label file")->required();
  seed_opt(pmean, mean.seed);
  pmean->add_option("--out", mean.out, "prototype file")->required();
  threads_opt(pmean, mean.threads);

  CoinPressArgs cp;
  auto* pcoin = app.add_subcommand("protos-coinpress", "iterative CoinPress class means");
  pcoin->add_option("--rho", cp.rho, "total zCDP budget")->required();
  pcoin->add_option("--steps", cp.steps, "iterations");
  pcoin->add_option("--r0", cp.r0, "initial radius (default sqrt(d))");
  pcoin->add_option("--tail", cp.tail, "Gaussian norm quantile");
  pcoin->add_option("--in", cp.in, "embedding file")->required();
  pcoin->add_option("--labels", cp.labels, "label file")->required();
  seed_opt(pcoin, cp.seed);
  pcoin->add_option("--out", cp.out, "prototype file")->required();
  threads_opt(pcoin, cp.threads);

  PublicArgs pub;
  auto* ppub = app.add_subcommand("protos-public", "private selection of public prototypes");
  ppub->add_option("--epsilon", pub.epsilon, "pure-DP budget")->required();
  ppub->add_option("--dmin", pub.dmin, "lower similarity clip");
  ppub->add_option("--dmax", pub.dmax, "upper similarity clip");
  ppub->add_option("--k", pub.k, "prototypes per class (joint top-K when > 1)");
  ppub->add_option("--private", pub.priv, "private embedding file")->required();
  ppub->add_option("--labels", pub.labels, "private label file")->required();
  ppub->add_option("--public", pub.pub, "public embedding file")->required();
  seed_opt(ppub, pub.seed);
  ppub->add_option("--out", pub.out, "prototype file")->required();
  ppub->add_option("--block", pub.block, "candidates per utility block");
  threads_opt(ppub, pub.threads);

  ClassifyArgs cls;
  auto* classify = app.add_subcommand("classify", "nearest-prototype prediction");
  classify->add_option("--protos", cls.protos, "prototype file")->required();
  classify->add_option("--in", cls.in, "embedding file")->required();
  classify->add_option("--out", cls.out, "CSV of predicted labels")->required();
  threads_opt(classify, cls.threads);

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "balanced and minority accuracy report");
  eval->add_option("--protos", ev.protos, "prototype file")->required();
  eval->add_option("--test", ev.test, "test embedding file")->required();
  eval->add_option("--test-labels", ev.test_labels, "test label file")->required();
  eval->add_option("--train-sizes", ev.train_sizes, "JSON list of training class sizes")
      ->required();
  eval->add_option("--out", ev.out, "report JSON")->required();
  threads_opt(eval, ev.threads);

  std::string grid;
  unsigned sweep_threads = 1;
  auto* sweep = app.add_subcommand("sweep", "budget x seed grid with CSV summary");
  sweep->add_option("--grid", grid, "grid JSON")->required();
  threads_opt(sweep, sweep_threads);

  BudgetArgs bud;
  auto* budget = app.add_subcommand("budget", "privacy budget conversions");
  budget->require_subcommand(1);
  auto* convert = budget->add_subcommand("convert", "pure DP <-> zCDP");
  convert->add_option("--from", bud.from, "pure-dp | zcdp")->required();
  convert->add_option("--to", bud.to, "pure-dp | zcdp")->required();
  convert->add_option("--value", bud.value, "epsilon or rho")->required();
  auto* expmech = budget->add_subcommand("exp-mech", "zCDP cost of the exponential mechanism");
  expmech->add_option("--epsilon", bud.epsilon, "pure-DP epsilon")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    if (app.get_subcommands().empty()) err << "subcommands: " << kSubcommands << '\n';
    return 2;
  }

  try {
    if (imbalance->parsed()) return DoImbalance(imb, out, err);
    if (pmean->parsed()) return DoMean(mean, out, err);
    if (pcoin->parsed()) return DoCoinPress(cp, out, err);
    if (ppub->parsed()) return DoPublic(pub, out, err);
    if (classify->parsed()) return DoClassify(cls, out, err);
    if (eval->parsed()) return DoEval(ev, out, err);
    if (sweep->parsed()) return DoSweep(grid, sweep_threads, out, err);
    if (convert->parsed()) return DoBudgetConvert(bud, out);
    if (expmech->parsed()) return DoBudgetExpMech(bud, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  err << "usage error: no subcommand; subcommands: " << kSubcommands << '\n';
  return 2;
}

}  // namespace dppl::cli

#endif  // DPPL_CLI_HPP_
