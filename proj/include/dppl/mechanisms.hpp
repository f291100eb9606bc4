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

// Randomized primitives: Gaussian noise, the exponential mechanism (inverse
// CDF and Gumbel-max samplers) and the joint exponential mechanism over
// unordered K-subsets.

#ifndef DPPL_MECHANISMS_HPP_
#define DPPL_MECHANISMS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "dppl/common.hpp"
#include "dppl/privacy.hpp"
#include "dppl/rng.hpp"

namespace dppl {

// d i.i.d. N(0, sigma^2) draws; equals sigma times the standard-normal
// sequence of the same generator.
inline std::vector<double> GaussianNoise(std::size_t dim, double sigma, Rng& rng) {
  Require(std::isfinite(sigma) && sigma > 0.0, "noise scale must be positive");
  Require(dim >= 1, "noise dimension must be at least 1");
  std::vector<double> out(dim);
  for (auto& v : out) v = sigma * rng.Normal();
  return out;
}

inline std::vector<double> GaussianNoise(std::size_t dim, double sigma, RngState state) {
  Rng rng(state);
  return GaussianNoise(dim, sigma, rng);
}

// Candidate utilities for the exponential mechanism. `monotonic` asserts
// that adding a private record can only raise utilities, which halves the
// privacy cost of sampling.
struct UtilityVector {
  std::vector<double> utilities;
  Sensitivity sensitivity = Sensitivity::Range(1.0);
  bool monotonic = false;

  void Validate() const {
    Require(!utilities.empty(), "empty candidate set");
    Require(sensitivity.value > 0.0, "utility sensitivity must be positive");
    for (std::size_t i = 0; i < utilities.size(); ++i) {
      Require(std::isfinite(utilities[i]),
              "non-finite utility for candidate " + std::to_string(i));
    }
  }
};

// eps / delta_u for monotonic utilities, eps / (2 delta_u) otherwise.
inline double ExpMechExponentScale(const UtilityVector& u, double epsilon) {
  Require(std::isfinite(epsilon) && epsilon > 0.0, "epsilon must be positive");
  return (u.monotonic ? epsilon : epsilon / 2.0) / u.sensitivity.value;
}

inline std::vector<double> ExpMechLogWeights(const UtilityVector& u, double epsilon) {
  u.Validate();
  const double scale = ExpMechExponentScale(u, epsilon);
  std::vector<double> out(u.utilities.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale * u.utilities[i];
  return out;
}

// Normalizes log-weights with max subtraction. Entries of -inf get 0.
inline std::vector<double> SoftmaxFromLog(std::span<const double> log_weights) {
  Require(!log_weights.empty(), "empty candidate set");
  const double top = *std::max_element(log_weights.begin(), log_weights.end());
  Require(std::isfinite(top), "no candidate has finite weight");
  std::vector<double> p(log_weights.size());
  long double total = 0.0L;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(log_weights[i] - top);
    total += p[i];
  }
  for (auto& v : p) v = static_cast<double>(v / total);
  return p;
}

// Exact output distribution of the exponential mechanism.
inline std::vector<double> ExpMechProbabilities(const UtilityVector& u, double epsilon) {
  const auto lw = ExpMechLogWeights(u, epsilon);
  return SoftmaxFromLog(lw);
}

// Draws an index with probability proportional to exp(log_weights[i]) by
// inverting the cumulative distribution with a single uniform.
inline std::size_t SampleLogCategorical(std::span<const double> log_weights, Rng& rng) {
  Require(!log_weights.empty(), "empty candidate set");
  const double top = *std::max_element(log_weights.begin(), log_weights.end());
  Require(std::isfinite(top), "no candidate has finite weight");
  std::vector<double> w(log_weights.size());
  long double total = 0.0L;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(log_weights[i] - top);
    total += w[i];
  }
  const long double target = static_cast<long double>(rng.Uniform()) * total;
  long double acc = 0.0L;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] <= 0.0) continue;
    acc += w[i];
    last_positive = i;
    if (target < acc) return i;
  }
  return last_positive;
}

inline std::size_t ExpMechSample(const UtilityVector& u, double epsilon, Rng& rng) {
  const auto lw = ExpMechLogWeights(u, epsilon);
  return SampleLogCategorical(lw, rng);
}

inline std::size_t ExpMechSample(const UtilityVector& u, double epsilon, RngState state) {
  Rng rng(state);
  return ExpMechSample(u, epsilon, rng);
}

// argmax_i (exponent_i + G_i) with G_i standard Gumbel. Same output
// distribution as ExpMechSample. Ties go to the lowest index.
inline std::size_t GumbelMaxSample(const UtilityVector& u, double epsilon, Rng& rng) {
  const auto lw = ExpMechLogWeights(u, epsilon);
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lw.size(); ++i) {
    const double score = lw[i] + rng.Gumbel();
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  return best;
}

inline std::size_t GumbelMaxSample(const UtilityVector& u, double epsilon, RngState state) {
  Rng rng(state);
  return GumbelMaxSample(u, epsilon, rng);
}

// ---------------------------------------------------------------------------
// Joint exponential mechanism over unordered K-subsets

// Utilities in decreasing order (ties by candidate id) together with the
// permutation back to candidate ids.
class TopKUtility {
 public:
  TopKUtility(std::span<const double> utilities, std::size_t k) : k_(k) {
    Require(!utilities.empty(), "empty candidate set");
    Require(k >= 1, "K must be at least 1");
    Require(k <= utilities.size(), "K = " + std::to_string(k) + " exceeds candidate count " +
                                       std::to_string(utilities.size()));
    order_.resize(utilities.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      return utilities[a] > utilities[b];
    });
    sorted_.reserve(order_.size());
    for (auto id : order_) {
      Require(std::isfinite(utilities[id]), "non-finite utility for candidate " + std::to_string(id));
      sorted_.push_back(utilities[id]);
    }
    by_id_.assign(utilities.begin(), utilities.end());
  }

  std::size_t k() const { return k_; }
  std::size_t size() const { return sorted_.size(); }
  // Utility at 0-based sorted rank.
  double sorted(std::size_t rank) const { return sorted_[rank]; }
  std::size_t candidate(std::size_t rank) const { return order_[rank]; }
  double utility_of(std::size_t id) const { return by_id_.at(id); }
  // The K-th best utility.
  double kth_best() const { return sorted_[k_ - 1]; }

 private:
  std::size_t k_;
  std::vector<std::size_t> order_;
  std::vector<double> sorted_;
  std::vector<double> by_id_;
};

// min_{s in S} u_s - u_K for a set of K distinct candidate ids; -inf if S
// repeats an id.
inline double SetUtility(const TopKUtility& t, std::span<const std::size_t> set) {
  Require(set.size() == t.k(), "set has " + std::to_string(set.size()) +
                                   " elements, expected K = " + std::to_string(t.k()));
  std::vector<std::size_t> sorted(set.begin(), set.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    return -std::numeric_limits<double>::infinity();
  }
  double lowest = std::numeric_limits<double>::infinity();
  for (auto id : sorted) {
    Require(id < t.size(), "candidate id out of range");
    lowest = std::min(lowest, t.utility_of(id));
  }
  return lowest - t.kth_best();
}

inline double LogChoose(std::size_t n, std::size_t k) {
  if (k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

// Log-weight of each anchor rank y (0-based, y >= K-1): the number of sets
// whose lowest-ranked member sits at y, C(y, K-1), times exp(scale * u_y).
// Ranks below K-1 get -inf.
inline std::vector<double> TopKAnchorLogWeights(const TopKUtility& t, double exponent_scale) {
  std::vector<double> lw(t.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t y = t.k() - 1; y < t.size(); ++y) {
    lw[y] = LogChoose(y, t.k() - 1) + exponent_scale * (t.sorted(y) - t.kth_best());
  }
  return lw;
}

// Samples a K-subset S with P[S] proportional to exp(eps U(S) / (2 delta_u)):
// an anchor rank is drawn from TopKAnchorLogWeights, then the other K-1
// members are drawn uniformly without replacement from the ranks above it.
// Returns candidate ids in increasing order.
inline std::vector<std::size_t> TopKJointSample(const TopKUtility& t, double epsilon,
                                                Sensitivity delta_u, Rng& rng) {
  Require(std::isfinite(epsilon) && epsilon > 0.0, "epsilon must be positive");
  Require(delta_u.value > 0.0, "utility sensitivity must be positive");
  const double scale = epsilon / (2.0 * delta_u.value);
  const auto lw = TopKAnchorLogWeights(t, scale);
  const std::size_t anchor = SampleLogCategorical(lw, rng);

  // Floyd's algorithm: K-1 distinct ranks from [0, anchor).
  const std::size_t m = anchor;
  const std::size_t need = t.k() - 1;
  std::unordered_set<std::size_t> picked;
  picked.reserve(need * 2);
  std::vector<std::size_t> ranks;
  ranks.reserve(t.k());
  for (std::size_t j = m - need; j < m; ++j) {
    const std::size_t r = rng.UniformInt(j + 1);
    const std::size_t chosen = picked.count(r) ? j : r;
    picked.insert(chosen);
    ranks.push_back(chosen);
  }
  ranks.push_back(anchor);

  std::vector<std::size_t> ids;
  ids.reserve(ranks.size());
  for (auto r : ranks) ids.push_back(t.candidate(r));
  std::sort(ids.begin(), ids.end());
  return ids;
}

inline std::vector<std::size_t> TopKJointSample(const TopKUtility& t, double epsilon,
                                                Sensitivity delta_u, RngState state) {
  Rng rng(state);
  return TopKJointSample(t, epsilon, delta_u, rng);
}

}  // namespace dppl

#endif  // DPPL_MECHANISMS_HPP_
