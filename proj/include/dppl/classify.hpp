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

// Nearest-prototype classification in cosine geometry. Prediction only reads
// the prototype set, so it is post-processing and spends no budget.

#ifndef DPPL_CLASSIFY_HPP_
#define DPPL_CLASSIFY_HPP_

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dppl/common.hpp"
#include "dppl/data.hpp"
#include "dppl/mean.hpp"
#include "dppl/prototypes.hpp"
#include "dppl/select.hpp"

namespace dppl {

// Noisy prototypes may have (near) zero norm; their norm is floored here.
inline constexpr double kPrototypeNormFloor = 1e-12;

// 2 - shifted cosine, in [0, 2].
inline double CosineDistance(std::span<const double> x, double norm_x,
                             std::span<const double> p) {
  const double norm_p = std::max(L2Norm(p), kPrototypeNormFloor);
  return 2.0 - internal::ShiftedCosineWithNorms(x, norm_x, p, norm_p);
}

// Mean distance to each class's K prototypes.
// Queries are pooled with the set's kernel first.
inline std::vector<double> ClassScores(std::span<const double> query,
                                       const PrototypeSet& protos) {
  std::vector<double> pooled;
  std::span<const double> x = query;
  if (protos.pool() > 1) {
    pooled = AvgPool(query, protos.pool());
    x = pooled;
  }
  Require(x.size() == protos.dim(), "query dimension " + std::to_string(query.size()) +
                                        " does not match prototype dimension " +
                                        std::to_string(protos.dim()) + " (pool " +
                                        std::to_string(protos.pool()) + ")");
  const double norm_x = L2Norm(x);
  if (!(norm_x > 0.0)) throw InvalidArgument("zero-norm query");
  std::vector<double> scores(protos.num_classes());
  for (std::uint32_t c = 0; c < protos.num_classes(); ++c) {
    double s = 0.0;
    for (std::uint32_t k = 0; k < protos.per_class(); ++k) {
      s += CosineDistance(x, norm_x, protos.vector(c, k));
    }
    scores[c] = s / protos.per_class();
  }
  return scores;
}

// argmin over classes of the mean prototype distance; ties go to the lowest
// class id.
inline std::uint32_t Predict(std::span<const double> x, const PrototypeSet& protos) {
  Require(protos.num_classes() >= 1, "empty prototype set");
  const auto scores = ClassScores(x, protos);
  return static_cast<std::uint32_t>(std::min_element(scores.begin(), scores.end()) -
                                    scores.begin());
}

inline std::vector<std::uint32_t> PredictBatch(const EmbeddingMatrix& queries,
                                               const PrototypeSet& protos,
                                               unsigned threads = 1) {
  std::vector<std::uint32_t> out(queries.rows());
  constexpr std::size_t kChunk = 256;
  ParallelFor((queries.rows() + kChunk - 1) / kChunk, threads, [&](std::size_t b) {
    const std::size_t hi = std::min(queries.rows(), (b + 1) * kChunk);
    for (std::size_t i = b * kChunk; i < hi; ++i) {
      try {
        out[i] = Predict(queries.row(i), protos);
      } catch (const InvalidArgument& e) {
        throw InvalidArgument("row " + std::to_string(i) + ": " + e.what());
      }
    }
  });
  return out;
}

}  // namespace dppl

#endif  // DPPL_CLASSIFY_HPP_
