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

// Private selection of public prototypes.
//
// For class c and public candidate x', the utility is
//
//   u_c(x') = sum_{x in E_c} (clip(1 + cos(x, x'), d_min, d_max) - d_min).
//
// Each summand lies in [0, d_max - d_min], so inserting a private row raises
// every utility by at most delta_u = d_max - d_min and never lowers one. For
// such monotonic utilities the exponential mechanism with exponent
// eps * u / delta_u is eps-DP. Classes are disjoint, so the run costs eps.
//
// Top-K selection samples K-subsets jointly. The set utility is not
// monotonic, so its exponent uses eps / (2 delta_u).

#ifndef DPPL_SELECT_HPP_
#define DPPL_SELECT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dppl/common.hpp"
#include "dppl/data.hpp"
#include "dppl/mean.hpp"
#include "dppl/mechanisms.hpp"
#include "dppl/privacy.hpp"
#include "dppl/prototypes.hpp"
#include "dppl/rng.hpp"

namespace dppl {

struct SelectConfig {
  double epsilon = 1.0;   // pure-DP budget per class
  double d_min = 0.0;
  double d_max = 2.0;
  std::size_t k = 1;      // prototypes per class
  std::size_t block_size = 4096;  // candidates per utility block; no semantic effect

  double utility_range() const { return d_max - d_min; }

  void Validate() const {
    Require(std::isfinite(epsilon) && epsilon > 0.0, "epsilon must be positive");
    Require(d_min >= 0.0 && d_min < d_max, "need 0 <= d_min < d_max");
    Require(d_max <= 2.0, "d_max must not exceed 2");
    Require(k >= 1, "K must be at least 1");
    Require(block_size >= 1, "block size must be at least 1");
  }
};

namespace internal {

inline double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double ShiftedCosineWithNorms(std::span<const double> a, double norm_a,
                                     std::span<const double> b, double norm_b) {
  return std::clamp(1.0 + Dot(a, b) / (norm_a * norm_b), 0.0, 2.0);
}

inline std::vector<double> RowNorms(const EmbeddingMatrix& m, const char* what,
                                    std::size_t first_row = 0) {
  std::vector<double> norms(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    norms[i] = L2Norm(m.row(i));
    if (!(norms[i] > 0.0)) {
      throw InvalidArgument(std::string("zero-norm ") + what + " row " +
                            std::to_string(first_row + i));
    }
  }
  return norms;
}

}  // namespace internal

// 1 + cosine similarity, in [0, 2].
inline double ShiftedCosine(std::span<const double> a, std::span<const double> b) {
  Require(a.size() == b.size(), "dimension mismatch");
  const double na = L2Norm(a);
  const double nb = L2Norm(b);
  if (!(na > 0.0)) throw InvalidArgument("shifted cosine: first argument has zero norm");
  if (!(nb > 0.0)) throw InvalidArgument("shifted cosine: second argument has zero norm");
  return internal::ShiftedCosineWithNorms(a, na, b, nb);
}

// Accumulates class utilities over candidate blocks. Each candidate's sum
// runs over the private rows in input order with a long double accumulator,
// so the result is independent of the block size and of the thread count.
class UtilityAccumulator {
 public:
  UtilityAccumulator(std::vector<EmbeddingMatrix> classes, const SelectConfig& cfg)
      : classes_(std::move(classes)), cfg_(cfg), utilities_(classes_.size()) {
    cfg.Validate();
    for (std::size_t c = 0; c < classes_.size(); ++c) {
      try {
        norms_.push_back(internal::RowNorms(classes_[c], "private"));
      } catch (const InvalidArgument& e) {
        throw InvalidArgument("class " + std::to_string(c) + ": " + e.what());
      }
    }
  }

  // Adds the utilities of the next block of candidates.
  void Consume(const EmbeddingMatrix& block, unsigned threads = 1) {
    const auto norms = internal::RowNorms(block, "public", offset_);
    for (std::size_t c = 0; c < classes_.size(); ++c) {
      Require(classes_[c].rows() == 0 || classes_[c].cols() == block.cols(),
              "public and private dimensions differ");
      utilities_[c].resize(offset_ + block.rows());
    }
    const std::size_t bs = cfg_.block_size;
    const std::size_t n_blocks = (block.rows() + bs - 1) / bs;
    const std::size_t work = n_blocks * classes_.size();
    ParallelFor(work, threads, [&](std::size_t item) {
      const std::size_t c = item / n_blocks;
      const std::size_t b = item % n_blocks;
      const std::size_t lo = b * bs;
      const std::size_t hi = std::min(lo + bs, block.rows());
      const auto& priv = classes_[c];
      for (std::size_t j = lo; j < hi; ++j) {
        long double acc = 0.0L;
        for (std::size_t i = 0; i < priv.rows(); ++i) {
          const double sim = internal::ShiftedCosineWithNorms(priv.row(i), norms_[c][i],
                                                              block.row(j), norms[j]);
          acc += std::clamp(sim, cfg_.d_min, cfg_.d_max) - cfg_.d_min;
        }
        utilities_[c][offset_ + j] = static_cast<double>(acc);
      }
    });
    offset_ += block.rows();
  }

  std::size_t candidates() const { return offset_; }
  const std::vector<std::vector<double>>& utilities() const { return utilities_; }
  std::vector<std::vector<double>> Release() && { return std::move(utilities_); }

 private:
  std::vector<EmbeddingMatrix> classes_;
  SelectConfig cfg_;
  std::vector<std::vector<double>> norms_;
  std::vector<std::vector<double>> utilities_;
  std::size_t offset_ = 0;
};

// Utility of every public candidate for one class.
inline std::vector<double> ClassUtilities(const EmbeddingMatrix& class_rows,
                                          const EmbeddingMatrix& candidates,
                                          const SelectConfig& cfg, unsigned threads = 1) {
  Require(class_rows.rows() >= 1, "class has no private samples");
  Require(candidates.rows() >= 1, "empty public candidate set");
  UtilityAccumulator acc({class_rows}, cfg);
  acc.Consume(candidates, threads);
  return std::move(acc).Release().front();
}

inline UtilityVector MakeSelectionUtility(std::vector<double> utilities, const SelectConfig& cfg) {
  return UtilityVector{std::move(utilities), Sensitivity::Range(cfg.utility_range()), true};
}

// Exact probability of selecting each candidate (single prototype).
inline std::vector<double> SelectionProbabilities(const EmbeddingMatrix& class_rows,
                                                  const EmbeddingMatrix& candidates,
                                                  const SelectConfig& cfg) {
  return ExpMechProbabilities(
      MakeSelectionUtility(ClassUtilities(class_rows, candidates, cfg), cfg), cfg.epsilon);
}

struct Selection {
  std::vector<std::uint64_t> ids;  // one id, or K ids in increasing order
  MechanismReport report;
};

// Samples from precomputed utilities: the exponential mechanism, or the
// joint top-K mechanism when `joint` is set (always for K > 1).
inline Selection SelectFromUtilities(std::vector<double> utilities, const SelectConfig& cfg,
                                     RngState state, bool joint = false) {
  cfg.Validate();
  Require(!utilities.empty(), "empty public candidate set");
  Require(cfg.k <= utilities.size(), "K = " + std::to_string(cfg.k) +
                                         " exceeds the candidate count " +
                                         std::to_string(utilities.size()));
  Selection out;
  out.report.budget = PrivacyBudget::PureDp(cfg.epsilon);
  out.report.sensitivity = cfg.utility_range();
  out.report.seed = state.seed;
  out.report.stream = state.stream;
  out.report.candidates = utilities.size();
  Rng rng(state);
  if (cfg.k == 1 && !joint) {
    const auto u = MakeSelectionUtility(std::move(utilities), cfg);
    out.report.mechanism = "exponential";
    out.report.exponent_scale = ExpMechExponentScale(u, cfg.epsilon);
    out.ids.push_back(ExpMechSample(u, cfg.epsilon, rng));
  } else {
    const TopKUtility t(utilities, cfg.k);
    out.report.mechanism = "joint-exponential-topk";
    out.report.exponent_scale = cfg.epsilon / (2.0 * cfg.utility_range());
    out.report.doubled_cost = true;
    for (auto id : TopKJointSample(t, cfg.epsilon, Sensitivity::Range(cfg.utility_range()), rng)) {
      out.ids.push_back(id);
    }
  }
  return out;
}

inline Selection SelectPublicPrototype(const EmbeddingMatrix& class_rows,
                                       const EmbeddingMatrix& candidates,
                                       const SelectConfig& cfg, RngState state) {
  Require(cfg.k == 1, "single-prototype selection needs K = 1");
  return SelectFromUtilities(ClassUtilities(class_rows, candidates, cfg), cfg, state);
}

// Joint top-K selection. K = 1 is allowed and still uses the set mechanism,
// i.e. exponent eps / (2 delta_u) rather than eps / delta_u.
inline Selection SelectPublicTopK(const EmbeddingMatrix& class_rows,
                                  const EmbeddingMatrix& candidates, const SelectConfig& cfg,
                                  RngState state) {
  Require(cfg.k <= candidates.rows(), "K = " + std::to_string(cfg.k) +
                                          " exceeds the candidate count " +
                                          std::to_string(candidates.rows()));
  return SelectFromUtilities(ClassUtilities(class_rows, candidates, cfg), cfg, state,
                             /*joint=*/true);
}

namespace internal {

inline std::vector<EmbeddingMatrix> NonEmptyClasses(const LabeledDataset& ds) {
  auto classes = SplitByClass(ds);
  for (std::uint32_t c = 0; c < classes.size(); ++c) {
    if (classes[c].rows() == 0) {
      throw InvalidArgument("class " + std::to_string(c) + " has no private samples");
    }
  }
  return classes;
}

inline std::vector<Selection> SampleAllClasses(std::vector<std::vector<double>> utilities,
                                               const SelectConfig& cfg, RngState base,
                                               unsigned threads) {
  std::vector<Selection> selections(utilities.size());
  ParallelFor(utilities.size(), threads, [&](std::size_t c) {
    selections[c] = SelectFromUtilities(std::move(utilities[c]), cfg,
                                        ClassStream(base, static_cast<std::uint32_t>(c)));
    selections[c].report.class_id = static_cast<std::uint32_t>(c);
  });
  return selections;
}

template <typename RowLookup>
PrototypeSet AssembleSelection(const std::vector<Selection>& selections, const SelectConfig& cfg,
                               std::size_t dim, RowLookup&& lookup) {
  PrototypeSet set(static_cast<std::uint32_t>(selections.size()),
                   static_cast<std::uint32_t>(cfg.k), dim, Provenance::kDpPublic);
  AccountingLedger ledger;
  std::vector<MechanismReport> reports;
  std::vector<std::uint64_t> ids;
  for (std::uint32_t c = 0; c < selections.size(); ++c) {
    for (std::uint32_t k = 0; k < selections[c].ids.size(); ++k) {
      set.SetVector(c, k, lookup(selections[c].ids[k]));
      ids.push_back(selections[c].ids[k]);
    }
    reports.push_back(selections[c].report);
    ledger = ledger.Append({selections[c].report.mechanism, c, PrivacyBudget::PureDp(cfg.epsilon)});
  }
  set.set_ledger(std::move(ledger));
  set.set_reports(std::move(reports));
  set.set_public_ids(std::move(ids));
  return set;
}

}  // namespace internal

// Independent per-class selection with streams keyed by class id. The
// prototype vectors are the selected public embeddings.
inline PrototypeSet SelectAllClasses(const LabeledDataset& ds, const EmbeddingMatrix& candidates,
                                     const SelectConfig& cfg, RngState base,
                                     unsigned threads = 1) {
  cfg.Validate();
  Require(candidates.rows() >= 1, "empty public candidate set");
  Require(cfg.k <= candidates.rows(), "K exceeds the candidate count");
  UtilityAccumulator acc(internal::NonEmptyClasses(ds), cfg);
  acc.Consume(candidates, threads);
  const auto selections = internal::SampleAllClasses(std::move(acc).Release(), cfg, base, threads);
  return internal::AssembleSelection(selections, cfg, candidates.cols(), [&](std::uint64_t id) {
    return candidates.row(id);
  });
}

// As SelectAllClasses, streaming the public set from a binary embedding
// file in blocks of `read_rows` rows; selected rows are fetched in a
// second pass.
inline PrototypeSet SelectAllClassesFromFile(const LabeledDataset& ds,
                                             const std::filesystem::path& public_path,
                                             const SelectConfig& cfg, RngState base,
                                             unsigned threads = 1,
                                             std::size_t read_rows = 1 << 16) {
  cfg.Validate();
  UtilityAccumulator acc(internal::NonEmptyClasses(ds), cfg);
  std::size_t dim = 0;
  {
    EmbeddingBlockReader reader(public_path);
    dim = reader.cols();
    Require(dim == ds.embeddings.cols(), "public and private dimensions differ");
    while (!reader.done()) acc.Consume(reader.ReadBlock(read_rows), threads);
  }
  Require(acc.candidates() >= 1, "empty public candidate set");
  Require(cfg.k <= acc.candidates(), "K exceeds the candidate count");
  const auto selections = internal::SampleAllClasses(std::move(acc).Release(), cfg, base, threads);

  std::vector<std::uint64_t> wanted;
  for (const auto& s : selections) wanted.insert(wanted.end(), s.ids.begin(), s.ids.end());
  std::sort(wanted.begin(), wanted.end());
  wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());
  std::vector<std::vector<double>> rows(wanted.size());
  {
    EmbeddingBlockReader reader(public_path);
    std::size_t w = 0;
    while (!reader.done() && w < wanted.size()) {
      const std::size_t start = reader.position();
      const auto block = reader.ReadBlock(read_rows);
      while (w < wanted.size() && wanted[w] < start + block.rows()) {
        const auto r = block.row(wanted[w] - start);
        rows[w].assign(r.begin(), r.end());
        ++w;
      }
    }
  }
  return internal::AssembleSelection(selections, cfg, dim, [&](std::uint64_t id) {
    const auto it = std::lower_bound(wanted.begin(), wanted.end(), id);
    return std::span<const double>(rows[static_cast<std::size_t>(it - wanted.begin())]);
  });
}

}  // namespace dppl

#endif  // DPPL_SELECT_HPP_
