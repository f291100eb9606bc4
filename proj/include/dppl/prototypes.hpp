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

#ifndef DPPL_PROTOTYPES_HPP_
#define DPPL_PROTOTYPES_HPP_

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dppl/common.hpp"
#include "dppl/privacy.hpp"

namespace dppl {

enum class Provenance { kDpMean, kDpPublic, kCoinPress, kNonPrivate };

inline const char* ProvenanceName(Provenance p) {
  switch (p) {
    case Provenance::kDpMean: return "dp-mean";
    case Provenance::kDpPublic: return "dp-public";
    case Provenance::kCoinPress: return "coinpress";
    case Provenance::kNonPrivate: return "non-private";
  }
  return "unknown";
}

inline Provenance ParseProvenance(const std::string& name) {
  if (name == "dp-mean") return Provenance::kDpMean;
  if (name == "dp-public") return Provenance::kDpPublic;
  if (name == "coinpress") return Provenance::kCoinPress;
  if (name == "non-private") return Provenance::kNonPrivate;
  throw InvalidArgument("unknown provenance '" + name + "'");
}

// K prototype vectors of dimension d for each of C classes, stored
// class-major: vector (c, k) starts at ((c * K) + k) * d.
class PrototypeSet {
 public:
  PrototypeSet(std::uint32_t num_classes, std::uint32_t per_class, std::size_t dim,
               Provenance provenance)
      : num_classes_(num_classes), per_class_(per_class), dim_(dim), provenance_(provenance),
        values_(std::size_t{num_classes} * per_class * dim, 0.0) {
    Require(per_class >= 1, "prototypes per class must be >= 1");
    Require(dim >= 1, "prototype dimension must be >= 1");
  }

  std::uint32_t num_classes() const { return num_classes_; }
  std::uint32_t per_class() const { return per_class_; }
  std::size_t dim() const { return dim_; }
  Provenance provenance() const { return provenance_; }

  // Pooling kernel the prototypes were built with; queries in the original
  // embedding space are pooled the same way before comparison.
  std::size_t pool() const { return pool_; }
  void set_pool(std::size_t k) {
    Require(k >= 1, "pooling kernel must be >= 1");
    pool_ = k;
  }

  std::span<const double> vector(std::uint32_t c, std::uint32_t k) const {
    return {values_.data() + Offset(c, k), dim_};
  }
  const std::vector<double>& values() const { return values_; }

  void SetVector(std::uint32_t c, std::uint32_t k, std::span<const double> v) {
    Require(v.size() == dim_, "prototype dimension mismatch");
    for (double x : v) Require(std::isfinite(x), "prototype has a non-finite entry");
    std::copy(v.begin(), v.end(), values_.begin() + static_cast<std::ptrdiff_t>(Offset(c, k)));
  }

  const AccountingLedger& ledger() const { return ledger_; }
  void set_ledger(AccountingLedger ledger) { ledger_ = std::move(ledger); }

  // Mechanism audit records, one per class-level invocation.
  const std::vector<MechanismReport>& reports() const { return reports_; }
  void set_reports(std::vector<MechanismReport> r) { reports_ = std::move(r); }

  // For public selection: candidate ids behind vector (c, k), class-major.
  const std::vector<std::uint64_t>& public_ids() const { return public_ids_; }
  void set_public_ids(std::vector<std::uint64_t> ids) { public_ids_ = std::move(ids); }

  friend bool operator==(const PrototypeSet&, const PrototypeSet&) = default;

 private:
  std::size_t Offset(std::uint32_t c, std::uint32_t k) const {
    Require(c < num_classes_ && k < per_class_, "prototype index out of range");
    return (std::size_t{c} * per_class_ + k) * dim_;
  }

  std::uint32_t num_classes_;
  std::uint32_t per_class_;
  std::size_t dim_;
  Provenance provenance_;
  std::size_t pool_ = 1;
  std::vector<double> values_;
  AccountingLedger ledger_;
  std::vector<MechanismReport> reports_;
  std::vector<std::uint64_t> public_ids_;
};

}  // namespace dppl

#endif  // DPPL_PROTOTYPES_HPP_
