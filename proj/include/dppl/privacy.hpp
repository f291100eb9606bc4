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

// Privacy budgets (pure DP and zCDP), conversions between them, and
// parallel-composition accounting over disjoint classes.
//
// Approximate (epsilon, delta) guarantees are deliberately not representable.

#ifndef DPPL_PRIVACY_HPP_
#define DPPL_PRIVACY_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dppl/common.hpp"

namespace dppl {

enum class BudgetKind { kPureDp, kZcdp };

inline const char* BudgetKindName(BudgetKind kind) {
  return kind == BudgetKind::kPureDp ? "pure-dp" : "zcdp";
}

// epsilon (pure DP) or rho (zCDP); always positive and finite.
class PrivacyBudget {
 public:
  static PrivacyBudget PureDp(double epsilon) { return {BudgetKind::kPureDp, epsilon}; }
  static PrivacyBudget Zcdp(double rho) { return {BudgetKind::kZcdp, rho}; }

  BudgetKind kind() const { return kind_; }
  double value() const { return value_; }

  friend bool operator==(const PrivacyBudget&, const PrivacyBudget&) = default;

 private:
  PrivacyBudget(BudgetKind kind, double value) : kind_(kind), value_(value) {
    Require(std::isfinite(value) && value > 0.0,
            std::string(BudgetKindName(kind)) + " budget must be positive and finite");
  }

  BudgetKind kind_;
  double value_;
};

enum class SensitivityNorm { kL2, kRange };

struct Sensitivity {
  double value = 0.0;
  SensitivityNorm norm = SensitivityNorm::kL2;

  static Sensitivity L2(double v) { return Make(v, SensitivityNorm::kL2); }
  static Sensitivity Range(double v) { return Make(v, SensitivityNorm::kRange); }

 private:
  static Sensitivity Make(double v, SensitivityNorm norm) {
    Require(std::isfinite(v) && v >= 0.0, "sensitivity must be finite and >= 0");
    Sensitivity s;
    s.value = v;
    s.norm = norm;
    return s;
  }
};

namespace internal {
inline void RequirePositive(double v, const char* name) {
  Require(std::isfinite(v) && v > 0.0, std::string(name) + " must be positive and finite");
}
}  // namespace internal

// rho = eps^2 / 2.
inline double PureDpToZcdp(double epsilon) {
  internal::RequirePositive(epsilon, "epsilon");
  return epsilon * epsilon / 2.0;
}

// eps = sqrt(2 rho). A comparison axis only: a rho-zCDP mechanism does not
// satisfy pure DP at the returned epsilon.
inline double ZcdpToPureDpEquivalent(double rho) {
  internal::RequirePositive(rho, "rho");
  return std::sqrt(2.0 * rho);
}

// The eps-DP exponential mechanism is eps^2/8-zCDP.
inline double ExpMechZcdp(double epsilon) {
  internal::RequirePositive(epsilon, "epsilon");
  return epsilon * epsilon / 8.0;
}

// Gaussian mechanism with l2 sensitivity delta and noise scale sigma is
// delta^2 / (2 sigma^2)-zCDP.
inline double GaussianMechZcdp(Sensitivity delta, double sigma) {
  Require(delta.norm == SensitivityNorm::kL2, "Gaussian mechanism needs l2 sensitivity");
  internal::RequirePositive(delta.value, "sensitivity");
  internal::RequirePositive(sigma, "sigma");
  return delta.value * delta.value / (2.0 * sigma * sigma);
}

// Noise scale at which the Gaussian mechanism spends exactly rho.
inline double GaussianSigmaForZcdp(Sensitivity delta, double rho) {
  Require(delta.norm == SensitivityNorm::kL2, "Gaussian mechanism needs l2 sensitivity");
  internal::RequirePositive(delta.value, "sensitivity");
  internal::RequirePositive(rho, "rho");
  return delta.value / std::sqrt(2.0 * rho);
}

// ---------------------------------------------------------------------------
// Accounting

struct LedgerEntry {
  std::string mechanism;
  std::optional<std::uint32_t> class_id;  // nullopt: the whole dataset
  PrivacyBudget budget;

  friend bool operator==(const LedgerEntry&, const LedgerEntry&) = default;
};

// Immutable list of spent budgets. Append returns a new ledger.
class AccountingLedger {
 public:
  AccountingLedger() = default;
  explicit AccountingLedger(std::vector<LedgerEntry> entries) : entries_(std::move(entries)) {}

  [[nodiscard]] AccountingLedger Append(LedgerEntry entry) const {
    auto copy = entries_;
    copy.push_back(std::move(entry));
    return AccountingLedger(std::move(copy));
  }

  const std::vector<LedgerEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  friend bool operator==(const AccountingLedger&, const AccountingLedger&) = default;

 private:
  std::vector<LedgerEntry> entries_;
};

struct Composition {
  PrivacyBudget total;
  std::vector<std::string> warnings;
};

// Parallel composition over disjoint subsets: the total is the largest entry.
// Entries must share one budget kind and name distinct classes; a single
// whole-dataset entry composes to itself. Unequal per-class budgets are
// accepted with a warning.
inline Composition ComposeParallel(const AccountingLedger& ledger) {
  const auto& entries = ledger.entries();
  Require(!entries.empty(), "cannot compose an empty ledger");
  const BudgetKind kind = entries.front().budget.kind();
  std::set<std::uint32_t> seen;
  bool has_global = false;
  for (const auto& e : entries) {
    Require(e.budget.kind() == kind, "ledger mixes pure-dp and zcdp entries");
    if (e.class_id) {
      Require(seen.insert(*e.class_id).second,
              "duplicate class id " + std::to_string(*e.class_id) + " in ledger");
    } else {
      has_global = true;
    }
  }
  Require(!has_global || entries.size() == 1,
          "a whole-dataset entry cannot be composed in parallel with other entries");

  double total = 0.0;
  bool uniform = true;
  for (const auto& e : entries) {
    if (e.budget.value() != entries.front().budget.value()) uniform = false;
    total = std::max(total, e.budget.value());
  }
  Composition out{kind == BudgetKind::kPureDp ? PrivacyBudget::PureDp(total)
                                              : PrivacyBudget::Zcdp(total),
                  {}};
  if (!uniform) out.warnings.push_back("per-class budgets differ; total is their maximum");
  return out;
}

// Audit record of one mechanism invocation.
struct MechanismReport {
  std::string mechanism;
  PrivacyBudget budget = PrivacyBudget::PureDp(1.0);
  double sensitivity = 0.0;
  std::optional<double> noise_scale;      // Gaussian sigma
  std::optional<double> exponent_scale;   // exponential mechanism eps / (k * delta_u)
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::optional<std::uint64_t> candidates;
  std::optional<std::uint64_t> dimension;
  std::optional<std::uint32_t> class_id;
  bool doubled_cost = false;
  std::string neighborhood = "add-remove";

  friend bool operator==(const MechanismReport&, const MechanismReport&) = default;
};

}  // namespace dppl

#endif  // DPPL_PRIVACY_HPP_
