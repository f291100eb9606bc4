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

// Metrics, synthetic Gaussian mixtures, and the end-to-end experiment
// pipeline (imbalance -> prototypes -> prediction -> metrics).

#ifndef DPPL_EVAL_HPP_
#define DPPL_EVAL_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dppl/classify.hpp"
#include "dppl/common.hpp"
#include "dppl/data.hpp"
#include "dppl/mean.hpp"
#include "dppl/privacy.hpp"
#include "dppl/rng.hpp"
#include "dppl/select.hpp"
#include "dppl/serialize.hpp"

namespace dppl {

struct AccuracyBreakdown {
  double balanced = 0.0;
  // Per-class accuracy; nullopt for classes absent from the test labels.
  std::vector<std::optional<double>> per_class;
  std::vector<std::uint32_t> absent;
};

// Mean of per-class accuracies over classes that occur in `truth`.
inline AccuracyBreakdown BalancedAccuracyDetail(std::span<const std::uint32_t> pred,
                                                std::span<const std::uint32_t> truth,
                                                std::uint32_t num_classes) {
  Require(pred.size() == truth.size(), "prediction count " + std::to_string(pred.size()) +
                                           " does not match label count " +
                                           std::to_string(truth.size()));
  std::vector<std::size_t> total(num_classes, 0);
  std::vector<std::size_t> right(num_classes, 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    Require(truth[i] < num_classes && pred[i] < num_classes,
            "label out of range at index " + std::to_string(i));
    ++total[truth[i]];
    if (pred[i] == truth[i]) ++right[truth[i]];
  }
  AccuracyBreakdown out;
  out.per_class.resize(num_classes);
  double sum = 0.0;
  std::size_t present = 0;
  for (std::uint32_t c = 0; c < num_classes; ++c) {
    if (total[c] == 0) {
      out.absent.push_back(c);
      continue;
    }
    out.per_class[c] = static_cast<double>(right[c]) / static_cast<double>(total[c]);
    sum += *out.per_class[c];
    ++present;
  }
  Require(present > 0, "test set is empty");
  out.balanced = sum / static_cast<double>(present);
  return out;
}

inline double BalancedAccuracy(std::span<const std::uint32_t> pred,
                               std::span<const std::uint32_t> truth, std::uint32_t num_classes) {
  return BalancedAccuracyDetail(pred, truth, num_classes).balanced;
}

// The floor(C/4) classes with the fewest training samples, ties broken by
// class id; returned in increasing id order.
inline std::vector<std::uint32_t> MinorityClasses(std::span<const std::uint64_t> train_sizes) {
  const std::size_t count = train_sizes.size() / 4;
  if (count == 0) throw InvalidArgument("minority quartile empty");
  std::vector<std::uint32_t> ids(train_sizes.size());
  std::iota(ids.begin(), ids.end(), 0u);
  std::stable_sort(ids.begin(), ids.end(), [&](std::uint32_t a, std::uint32_t b) {
    return train_sizes[a] < train_sizes[b];
  });
  ids.resize(count);
  std::sort(ids.begin(), ids.end());
  return ids;
}

// Balanced accuracy restricted to test samples of the minority classes.
inline double MinorityAccuracy(std::span<const std::uint32_t> pred,
                               std::span<const std::uint32_t> truth,
                               std::span<const std::uint64_t> train_sizes) {
  Require(pred.size() == truth.size(), "prediction count does not match label count");
  const auto minority = MinorityClasses(train_sizes);
  const auto num_classes = static_cast<std::uint32_t>(train_sizes.size());
  std::vector<std::uint32_t> p;
  std::vector<std::uint32_t> t;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (std::binary_search(minority.begin(), minority.end(), truth[i])) {
      p.push_back(pred[i]);
      t.push_back(truth[i]);
    }
  }
  Require(!t.empty(), "test set holds no minority-class samples");
  const auto detail = BalancedAccuracyDetail(p, t, num_classes);
  return detail.balanced;
}

// ---------------------------------------------------------------------------
// Synthetic data

struct SyntheticMixtureSpec {
  std::uint32_t num_classes = 4;
  std::size_t dim = 16;
  double center_norm = 10.0;
  double stddev = 1.0;
  std::size_t per_class = 200;
  std::uint64_t seed = 0;
  // Selects the sample draw; centers depend on `seed` only, so splits drawn
  // with different streams share their class centers.
  std::uint64_t sample_stream = 0;

  void Validate() const {
    Require(num_classes >= 1, "mixture needs at least one class");
    Require(dim >= 1, "mixture dimension must be >= 1");
    Require(std::isfinite(center_norm) && center_norm > 0.0, "center norm must be positive");
    Require(std::isfinite(stddev) && stddev > 0.0, "standard deviation must be positive");
    Require(per_class >= 1, "samples per class must be >= 1");
  }
};

// Class centers of norm center_norm. Random Gaussian directions,
// orthogonalized by Gram-Schmidt while C <= d.
inline EmbeddingMatrix MixtureCenters(const SyntheticMixtureSpec& spec) {
  spec.Validate();
  Rng rng(spec.seed, DeriveStream(0x63656E74ULL, 0));
  std::vector<std::vector<double>> dirs;
  for (std::uint32_t c = 0; c < spec.num_classes; ++c) {
    for (;;) {
      std::vector<double> v(spec.dim);
      for (auto& x : v) x = rng.Normal();
      if (c < spec.dim) {
        for (const auto& u : dirs) {
          double dot = 0.0;
          for (std::size_t j = 0; j < v.size(); ++j) dot += v[j] * u[j];
          for (std::size_t j = 0; j < v.size(); ++j) v[j] -= dot * u[j];
        }
      }
      const double norm = L2Norm(v);
      if (norm < 1e-8) continue;
      for (auto& x : v) x /= norm;
      dirs.push_back(std::move(v));
      break;
    }
  }
  EmbeddingMatrix centers(0, spec.dim);
  for (auto& d : dirs) {
    for (auto& x : d) x *= spec.center_norm;
    centers.AppendRow(d);
  }
  return centers;
}

// per_class samples from N(center_c, stddev^2 I) for each class, class-major.
inline LabeledDataset MakeMixture(const SyntheticMixtureSpec& spec) {
  const auto centers = MixtureCenters(spec);
  LabeledDataset ds;
  ds.num_classes = spec.num_classes;
  ds.embeddings = EmbeddingMatrix(0, spec.dim);
  Rng rng(spec.seed, DeriveStream(0x73616D70ULL, spec.sample_stream));
  std::vector<double> row(spec.dim);
  for (std::uint32_t c = 0; c < spec.num_classes; ++c) {
    const auto center = centers.row(c);
    for (std::size_t i = 0; i < spec.per_class; ++i) {
      for (std::size_t j = 0; j < spec.dim; ++j) row[j] = center[j] + spec.stddev * rng.Normal();
      ds.embeddings.AppendRow(row);
      ds.labels.push_back(c);
    }
  }
  return ds;
}

// Mixture centers followed by `distractors` random Gaussian directions of
// the same norm.
inline EmbeddingMatrix MakePublicCandidates(const SyntheticMixtureSpec& spec,
                                            std::size_t distractors, std::uint64_t seed) {
  auto out = MixtureCenters(spec);
  Rng rng(seed, DeriveStream(0x7075626CULL, 0));
  std::vector<double> v(spec.dim);
  for (std::size_t i = 0; i < distractors; ++i) {
    double norm = 0.0;
    while (!(norm > 1e-8)) {
      for (auto& x : v) x = rng.Normal();
      norm = L2Norm(v);
    }
    for (auto& x : v) x *= spec.center_norm / norm;
    out.AppendRow(v);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Experiments

enum class Method { kMean, kPublic, kTopK, kCoinPress, kNonPrivate };

inline const char* MethodName(Method m) {
  switch (m) {
    case Method::kMean: return "mean";
    case Method::kPublic: return "public";
    case Method::kTopK: return "topk";
    case Method::kCoinPress: return "coinpress";
    case Method::kNonPrivate: return "non-private";
  }
  return "unknown";
}

inline Method ParseMethod(const std::string& name) {
  for (auto m : {Method::kMean, Method::kPublic, Method::kTopK, Method::kCoinPress,
                 Method::kNonPrivate}) {
    if (name == MethodName(m)) return m;
  }
  throw InvalidArgument("unknown method '" + name + "'");
}

struct ExperimentConfig {
  Method method = Method::kMean;
  double budget = 1.0;  // rho for mean/coinpress, epsilon for public/topk
  std::uint64_t seed = 0;
  MeanConfig mean;                      // rho is taken from `budget`
  SelectConfig select;                  // epsilon is taken from `budget`
  CoinPressConfig coinpress;            // rho is taken from `budget`
  std::optional<double> imbalance_ratio;
  unsigned threads = 1;
};

struct ExperimentData {
  LabeledDataset train;
  LabeledDataset test;
  std::optional<EmbeddingMatrix> candidates;  // public set for public/topk
};

struct EvalReport {
  std::string method;
  double balanced_accuracy = 0.0;
  std::vector<std::optional<double>> per_class_accuracy;
  std::optional<double> minority_accuracy;
  std::vector<std::uint32_t> absent_classes;
  std::vector<std::uint64_t> train_class_sizes;
  std::optional<PrivacyBudget> budget;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> warnings;
  Json config = Json::object();

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

inline constexpr const char* kReportVersion = "dppl-report/1";

inline Json ToJson(const EvalReport& r) {
  Json j{{"version", kReportVersion}, {"method", r.method},
         {"balanced_accuracy", r.balanced_accuracy}};
  Json per = Json::array();
  for (const auto& a : r.per_class_accuracy) per.push_back(a ? Json(*a) : Json(nullptr));
  j["per_class_accuracy"] = std::move(per);
  j["minority_accuracy"] = r.minority_accuracy ? Json(*r.minority_accuracy) : Json(nullptr);
  j["absent_classes"] = r.absent_classes;
  j["train_class_sizes"] = r.train_class_sizes;
  j["budget"] = r.budget ? ToJson(*r.budget) : Json(nullptr);
  j["seeds"] = r.seeds;
  j["warnings"] = r.warnings;
  j["config"] = r.config;
  return j;
}

inline EvalReport ReportFromJsonObject(const Json& j) {
  if (j.value("version", "") != kReportVersion) {
    throw FormatError("unsupported report version");
  }
  EvalReport r;
  r.method = j.at("method").get<std::string>();
  r.balanced_accuracy = j.at("balanced_accuracy").get<double>();
  for (const auto& a : j.at("per_class_accuracy")) {
    r.per_class_accuracy.push_back(a.is_null() ? std::nullopt
                                               : std::optional<double>(a.get<double>()));
  }
  if (!j.at("minority_accuracy").is_null()) {
    r.minority_accuracy = j.at("minority_accuracy").get<double>();
  }
  r.absent_classes = j.at("absent_classes").get<std::vector<std::uint32_t>>();
  r.train_class_sizes = j.at("train_class_sizes").get<std::vector<std::uint64_t>>();
  if (!j.at("budget").is_null()) r.budget = BudgetFromJson(j.at("budget"));
  r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  r.config = j.at("config");
  return r;
}

// Metrics for predictions on a test set, with minority accuracy when the
// training class sizes allow a non-empty quartile.
inline EvalReport Evaluate(std::span<const std::uint32_t> pred,
                           std::span<const std::uint32_t> truth, std::uint32_t num_classes,
                           std::vector<std::uint64_t> train_sizes) {
  EvalReport r;
  const auto detail = BalancedAccuracyDetail(pred, truth, num_classes);
  r.balanced_accuracy = detail.balanced;
  r.per_class_accuracy = detail.per_class;
  r.absent_classes = detail.absent;
  if (!detail.absent.empty()) {
    r.warnings.push_back(std::to_string(detail.absent.size()) +
                         " class(es) absent from the test set were excluded");
  }
  if (!train_sizes.empty()) {
    Require(train_sizes.size() == num_classes, "train size list has the wrong length");
    if (num_classes >= 4) r.minority_accuracy = MinorityAccuracy(pred, truth, train_sizes);
  }
  r.train_class_sizes = std::move(train_sizes);
  return r;
}

inline Json ConfigSnapshot(const ExperimentConfig& cfg) {
  Json j{{"method", MethodName(cfg.method)}, {"budget", cfg.budget}, {"seed", cfg.seed}};
  switch (cfg.method) {
    case Method::kMean:
      j["clip"] = cfg.mean.clip;
      j["pool"] = cfg.mean.pool;
      break;
    case Method::kPublic:
    case Method::kTopK:
      j["dmin"] = cfg.select.d_min;
      j["dmax"] = cfg.select.d_max;
      j["k"] = cfg.select.k;
      break;
    case Method::kCoinPress:
      j["steps"] = cfg.coinpress.steps;
      j["r0"] = cfg.coinpress.r0;
      j["tail_quantile"] = cfg.coinpress.tail_quantile;
      break;
    case Method::kNonPrivate:
      j["pool"] = cfg.mean.pool;
      break;
  }
  j["imbalance_ratio"] = cfg.imbalance_ratio ? Json(*cfg.imbalance_ratio) : Json(nullptr);
  return j;
}

// Builds prototypes on the (optionally imbalanced) training set.
inline PrototypeSet BuildPrototypes(const ExperimentConfig& cfg, const LabeledDataset& train,
                                    const std::optional<EmbeddingMatrix>& candidates) {
  const RngState base{cfg.seed, 0};
  switch (cfg.method) {
    case Method::kMean: {
      MeanConfig m = cfg.mean;
      m.rho = cfg.budget;
      return DpplMeanAll(train, m, base, cfg.threads);
    }
    case Method::kPublic:
    case Method::kTopK: {
      Require(candidates.has_value(), "public method needs a candidate set");
      SelectConfig s = cfg.select;
      s.epsilon = cfg.budget;
      if (cfg.method == Method::kPublic) s.k = 1;
      return SelectAllClasses(train, *candidates, s, base, cfg.threads);
    }
    case Method::kCoinPress: {
      CoinPressConfig c = cfg.coinpress;
      c.rho = cfg.budget;
      return CoinPressAll(train, c, base, cfg.threads).prototypes;
    }
    case Method::kNonPrivate:
      return NonPrivateMeans(train, cfg.mean.pool);
  }
  throw InvalidArgument("unknown method");
}

namespace internal {

template <typename Fn>
auto RunStage(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const std::exception& e) {
    throw Error(std::string("stage ") + stage + ": " + e.what());
  }
}

}  // namespace internal

// imbalance (optional) -> prototypes -> PredictBatch -> metrics. Errors are
// prefixed with the failing stage. The result depends only on (cfg, data).
inline EvalReport RunExperiment(const ExperimentConfig& cfg, const ExperimentData& data) {
  LabeledDataset train = internal::RunStage("imbalance", [&] {
    if (!cfg.imbalance_ratio) return data.train;
    const auto sizes = data.train.ClassSizes();
    ImbalanceSpec spec{*cfg.imbalance_ratio, data.train.num_classes,
                       *std::min_element(sizes.begin(), sizes.end()), cfg.seed};
    return ApplyImbalance(data.train, spec);
  });
  const auto protos = internal::RunStage(
      "prototypes", [&] { return BuildPrototypes(cfg, train, data.candidates); });
  const auto pred = internal::RunStage(
      "predict", [&] { return PredictBatch(data.test.embeddings, protos, cfg.threads); });
  return internal::RunStage("metrics", [&] {
    std::vector<std::uint64_t> sizes;
    for (auto s : train.ClassSizes()) sizes.push_back(s);
    auto report = Evaluate(pred, data.test.labels, data.test.num_classes, std::move(sizes));
    report.method = MethodName(cfg.method);
    if (!protos.ledger().empty()) {
      const auto total = ComposeParallel(protos.ledger());
      report.budget = total.total;
      for (const auto& w : total.warnings) report.warnings.push_back(w);
    }
    report.seeds = {cfg.seed};
    report.config = ConfigSnapshot(cfg);
    return report;
  });
}

}  // namespace dppl

#endif  // DPPL_EVAL_HPP_
