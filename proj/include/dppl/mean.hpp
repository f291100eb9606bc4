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

// Private class prototypes as noisy means.
//
// DpplMeanPrototype pools each row, clips it to l2 norm r, averages, and adds
// N(0, 2 r^2 / (n^2 rho)) per coordinate. With add/remove neighbors the mean
// of n clipped rows has l2 sensitivity 2r/n, so each class spends rho-zCDP;
// classes are disjoint and the whole run costs rho by parallel composition.
//
// CoinPressMean is the iterative estimator that clips around a moving center
// and shrinks the radius step by step. It is kept for comparison and for its
// divergence diagnostics at small budgets.

#ifndef DPPL_MEAN_HPP_
#define DPPL_MEAN_HPP_

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "dppl/common.hpp"
#include "dppl/data.hpp"
#include "dppl/mechanisms.hpp"
#include "dppl/privacy.hpp"
#include "dppl/prototypes.hpp"
#include "dppl/rng.hpp"

namespace dppl {

inline double L2Norm(std::span<const double> x) {
  long double s = 0.0L;
  for (double v : x) s += static_cast<long double>(v) * v;
  return static_cast<double>(std::sqrt(s));
}

// Projects x onto the l2 ball of radius r.
inline std::vector<double> ClipL2(std::span<const double> x, double r) {
  Require(std::isfinite(r) && r > 0.0, "clip norm must be positive");
  std::vector<double> out(x.begin(), x.end());
  const double norm = L2Norm(x);
  if (norm > r) {
    const double scale = r / norm;
    for (auto& v : out) v *= scale;
  }
  return out;
}

// Average pooling with kernel k. The last window may be shorter than k and
// is averaged over the coordinates it actually covers.
inline std::vector<double> AvgPool(std::span<const double> x, std::size_t k) {
  Require(k >= 1, "pooling kernel must be >= 1");
  if (k == 1) return {x.begin(), x.end()};
  std::vector<double> out((x.size() + k - 1) / k);
  for (std::size_t j = 0; j < out.size(); ++j) {
    const std::size_t lo = j * k;
    const std::size_t hi = std::min(lo + k, x.size());
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += x[i];
    out[j] = s / static_cast<double>(hi - lo);
  }
  return out;
}

inline std::size_t PooledDim(std::size_t d, std::size_t k) { return (d + k - 1) / k; }

struct MeanConfig {
  double rho = 1.0;       // zCDP budget per class
  double clip = 1.0;      // l2 clip norm in the pooled space
  std::size_t pool = 1;   // average pooling kernel

  void Validate() const {
    Require(std::isfinite(rho) && rho > 0.0, "rho must be positive");
    Require(std::isfinite(clip) && clip > 0.0, "clip norm must be positive");
    Require(pool >= 1, "pooling kernel must be >= 1");
  }
};

// Mean of the pooled, clipped rows; the deterministic part of the estimator.
inline std::vector<double> ClippedPooledMean(const EmbeddingMatrix& rows, double clip,
                                             std::size_t pool) {
  Require(rows.rows() >= 1, "class has no private samples");
  const std::size_t dim = PooledDim(rows.cols(), pool);
  std::vector<long double> acc(dim, 0.0L);
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    const auto clipped = ClipL2(AvgPool(rows.row(i), pool), clip);
    for (std::size_t j = 0; j < dim; ++j) acc[j] += clipped[j];
  }
  std::vector<double> out(dim);
  const auto n = static_cast<long double>(rows.rows());
  for (std::size_t j = 0; j < dim; ++j) out[j] = static_cast<double>(acc[j] / n);
  return out;
}

struct PrototypeEstimate {
  std::vector<double> prototype;
  MechanismReport report;
};

inline PrototypeEstimate DpplMeanPrototype(const EmbeddingMatrix& rows, const MeanConfig& cfg,
                                           RngState state) {
  cfg.Validate();
  if (rows.rows() == 0) throw InvalidArgument("class has no private samples");
  const auto n = static_cast<double>(rows.rows());
  const Sensitivity delta = Sensitivity::L2(2.0 * cfg.clip / n);
  const double sigma = GaussianSigmaForZcdp(delta, cfg.rho);

  PrototypeEstimate out;
  out.prototype = ClippedPooledMean(rows, cfg.clip, cfg.pool);
  Rng rng(state);
  const auto noise = GaussianNoise(out.prototype.size(), sigma, rng);
  for (std::size_t j = 0; j < noise.size(); ++j) out.prototype[j] += noise[j];

  out.report.mechanism = "gaussian-mean";
  out.report.budget = PrivacyBudget::Zcdp(cfg.rho);
  out.report.sensitivity = delta.value;
  out.report.noise_scale = sigma;
  out.report.seed = state.seed;
  out.report.stream = state.stream;
  out.report.dimension = out.prototype.size();
  return out;
}

// Per-class stream used by every per-class mechanism.
inline RngState ClassStream(RngState base, std::uint32_t class_id) {
  return DeriveState(base, class_id);
}

// One noisy mean per class. Classes run on up to `threads` workers with
// streams keyed by class id, so the output does not depend on the count.
inline PrototypeSet DpplMeanAll(const LabeledDataset& ds, const MeanConfig& cfg, RngState base,
                                unsigned threads = 1) {
  cfg.Validate();
  const auto classes = SplitByClass(ds);
  for (std::uint32_t c = 0; c < classes.size(); ++c) {
    if (classes[c].rows() == 0) {
      throw InvalidArgument("class " + std::to_string(c) + " has no private samples");
    }
  }
  std::vector<PrototypeEstimate> estimates(classes.size());
  ParallelFor(classes.size(), threads, [&](std::size_t c) {
    estimates[c] = DpplMeanPrototype(classes[c], cfg,
                                     ClassStream(base, static_cast<std::uint32_t>(c)));
  });

  const std::size_t dim = PooledDim(ds.embeddings.cols(), cfg.pool);
  PrototypeSet set(ds.num_classes, 1, dim, Provenance::kDpMean);
  set.set_pool(cfg.pool);
  AccountingLedger ledger;
  std::vector<MechanismReport> reports;
  for (std::uint32_t c = 0; c < estimates.size(); ++c) {
    set.SetVector(c, 0, estimates[c].prototype);
    estimates[c].report.class_id = c;
    reports.push_back(estimates[c].report);
    ledger = ledger.Append({"gaussian-mean", c, PrivacyBudget::Zcdp(cfg.rho)});
  }
  set.set_ledger(std::move(ledger));
  set.set_reports(std::move(reports));
  return set;
}

// Exact class means without clipping or noise, after pooling.
inline PrototypeSet NonPrivateMeans(const LabeledDataset& ds, std::size_t pool = 1) {
  const auto classes = SplitByClass(ds);
  PrototypeSet set(ds.num_classes, 1, PooledDim(ds.embeddings.cols(), pool),
                   Provenance::kNonPrivate);
  set.set_pool(pool);
  for (std::uint32_t c = 0; c < classes.size(); ++c) {
    if (classes[c].rows() == 0) {
      throw InvalidArgument("class " + std::to_string(c) + " has no samples");
    }
    std::vector<long double> acc(set.dim(), 0.0L);
    for (std::size_t i = 0; i < classes[c].rows(); ++i) {
      const auto pooled = AvgPool(classes[c].row(i), pool);
      for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += pooled[j];
    }
    std::vector<double> mean(acc.size());
    for (std::size_t j = 0; j < acc.size(); ++j) {
      mean[j] = static_cast<double>(acc[j] / static_cast<long double>(classes[c].rows()));
    }
    set.SetVector(c, 0, mean);
  }
  return set;
}

// ---------------------------------------------------------------------------
// CoinPress

// gamma with Pr[||N(0, I_d)||_2 < gamma] = p, i.e. the chi quantile.
inline double GaussianNormQuantile(std::size_t d, double p) {
  Require(d >= 1, "dimension must be >= 1");
  Require(p > 0.0 && p < 1.0, "tail quantile must lie in (0, 1)");
  boost::math::chi_squared dist(static_cast<double>(d));
  return std::sqrt(boost::math::quantile(dist, p));
}

struct RadiusUpdateInput {
  std::size_t n = 0;
  std::size_t dim = 0;
  double sigma = 0.0;   // noise scale used in the step
  double gamma = 0.0;   // Gaussian norm quantile
  double radius = 0.0;  // radius entering the step
};

using RadiusUpdate = std::function<double(const RadiusUpdateInput&)>;

// Radius of the Gaussian tail ball around the new center: the center is a
// mean of n unit-covariance points plus N(0, sigma^2 I), so its error has
// covariance (1/n + sigma^2) I.
inline double DefaultRadiusUpdate(const RadiusUpdateInput& in) {
  return std::sqrt(1.0 / static_cast<double>(in.n) + in.sigma * in.sigma) * in.gamma;
}

struct CoinPressConfig {
  double rho = 1.0;                 // total zCDP budget
  std::size_t steps = 10;
  std::vector<double> fractions;    // empty: equal split over steps
  double r0 = 1.0;
  std::vector<double> c0;           // empty: origin
  double tail_quantile = 0.99;
  RadiusUpdate radius_update = DefaultRadiusUpdate;

  std::vector<double> ResolvedFractions() const {
    if (fractions.empty()) return std::vector<double>(steps, 1.0 / static_cast<double>(steps));
    return fractions;
  }

  void Validate(std::size_t dim) const {
    Require(std::isfinite(rho) && rho > 0.0, "rho must be positive");
    Require(steps >= 1, "CoinPress needs at least one step");
    Require(std::isfinite(r0) && r0 > 0.0, "initial radius must be positive");
    Require(tail_quantile > 0.0 && tail_quantile < 1.0, "tail quantile must lie in (0, 1)");
    Require(c0.empty() || c0.size() == dim, "initial center has the wrong dimension");
    Require(static_cast<bool>(radius_update), "radius update rule is empty");
    if (!fractions.empty()) {
      Require(fractions.size() == steps, "need one budget fraction per step");
      double total = 0.0;
      for (double f : fractions) {
        Require(std::isfinite(f) && f > 0.0, "budget fractions must be positive");
        total += f;
      }
      Require(std::abs(total - 1.0) <= 1e-9, "budget fractions must sum to 1");
    }
  }
};

struct MeanDiagnostics {
  std::vector<double> radii;             // r_0, r_1, ...
  std::vector<double> clipped_fraction;  // one entry per executed step
  bool diverged = false;
};

struct CoinPressResult {
  std::vector<double> estimate;
  MeanDiagnostics diagnostics;
  std::vector<MechanismReport> reports;  // one per step
};

inline CoinPressResult CoinPressMean(const EmbeddingMatrix& rows, const CoinPressConfig& cfg,
                                     RngState state) {
  Require(rows.rows() >= 1, "class has no private samples");
  const std::size_t d = rows.cols();
  cfg.Validate(d);
  const std::size_t n = rows.rows();
  const double gamma = GaussianNormQuantile(d, cfg.tail_quantile);
  const auto fractions = cfg.ResolvedFractions();

  CoinPressResult out;
  std::vector<double> center = cfg.c0.empty() ? std::vector<double>(d, 0.0) : cfg.c0;
  double radius = cfg.r0;
  out.diagnostics.radii.push_back(radius);
  Rng rng(state);

  std::vector<double> shifted(d);
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    const double clip = radius + gamma;
    std::vector<long double> acc(d, 0.0L);
    std::size_t clipped = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto x = rows.row(i);
      for (std::size_t j = 0; j < d; ++j) shifted[j] = x[j] - center[j];
      const double dist = L2Norm(shifted);
      const double scale = dist > clip ? clip / dist : 1.0;
      if (dist > clip) ++clipped;
      for (std::size_t j = 0; j < d; ++j) acc[j] += center[j] + shifted[j] * scale;
    }
    const double step_rho = cfg.rho * fractions[step];
    const Sensitivity delta = Sensitivity::L2(2.0 * clip / static_cast<double>(n));
    const double sigma = GaussianSigmaForZcdp(delta, step_rho);
    const auto noise = GaussianNoise(d, sigma, rng);

    std::vector<double> next(d);
    bool finite = true;
    for (std::size_t j = 0; j < d; ++j) {
      next[j] = static_cast<double>(acc[j] / static_cast<long double>(n)) + noise[j];
      finite = finite && std::isfinite(next[j]);
    }
    const double next_radius = cfg.radius_update({n, d, sigma, gamma, radius});

    MechanismReport report;
    report.mechanism = "coinpress-step";
    report.budget = PrivacyBudget::Zcdp(step_rho);
    report.sensitivity = delta.value;
    report.noise_scale = sigma;
    report.seed = state.seed;
    report.stream = state.stream;
    report.dimension = d;
    report.neighborhood = "substitute";
    out.reports.push_back(report);
    out.diagnostics.clipped_fraction.push_back(static_cast<double>(clipped) /
                                               static_cast<double>(n));

    if (!finite || !std::isfinite(next_radius)) {
      out.diagnostics.diverged = true;
      break;
    }
    out.diagnostics.radii.push_back(next_radius);
    if (next_radius > radius) out.diagnostics.diverged = true;
    center = std::move(next);
    radius = next_radius;
  }
  out.estimate = std::move(center);
  return out;
}

// CoinPress per class, streams keyed by class id. Diagnostics per class.
struct CoinPressAllResult {
  PrototypeSet prototypes;
  std::vector<MeanDiagnostics> diagnostics;
};

inline CoinPressAllResult CoinPressAll(const LabeledDataset& ds, const CoinPressConfig& cfg,
                                       RngState base, unsigned threads = 1) {
  const auto classes = SplitByClass(ds);
  for (std::uint32_t c = 0; c < classes.size(); ++c) {
    if (classes[c].rows() == 0) {
      throw InvalidArgument("class " + std::to_string(c) + " has no private samples");
    }
  }
  std::vector<CoinPressResult> results(classes.size());
  ParallelFor(classes.size(), threads, [&](std::size_t c) {
    results[c] = CoinPressMean(classes[c], cfg, ClassStream(base, static_cast<std::uint32_t>(c)));
  });
  CoinPressAllResult out{PrototypeSet(ds.num_classes, 1, ds.embeddings.cols(),
                                      Provenance::kCoinPress),
                         {}};
  AccountingLedger ledger;
  std::vector<MechanismReport> reports;
  for (std::uint32_t c = 0; c < results.size(); ++c) {
    out.prototypes.SetVector(c, 0, results[c].estimate);
    out.diagnostics.push_back(results[c].diagnostics);
    for (auto r : results[c].reports) {
      r.class_id = c;
      reports.push_back(r);
    }
    ledger = ledger.Append({"coinpress", c, PrivacyBudget::Zcdp(cfg.rho)});
  }
  out.prototypes.set_ledger(std::move(ledger));
  out.prototypes.set_reports(std::move(reports));
  return out;
}

}  // namespace dppl

#endif  // DPPL_MEAN_HPP_
