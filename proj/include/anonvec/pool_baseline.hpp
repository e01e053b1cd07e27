// anonvec/pool_baseline.hpp

// Copyright 2026  The anonvec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Selection baseline: rank an external pool by distance from the source
// speaker, keep the K nearest or K farthest candidates, and average them into
// a pseudo-speaker.

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "anonvec/embedding.hpp"
#include "anonvec/error.hpp"
#include "anonvec/random.hpp"

namespace anonvec {

enum class Direction { Near, Far };
enum class Metric { Cosine };

struct SelectionConfig {
  std::size_t k = 1;
  Direction direction = Direction::Far;
  Metric metric = Metric::Cosine;
};

struct RankedCandidate {
  std::size_t index;
  double distance;
};

inline double distance(Metric metric, std::span<const double> a,
                       std::span<const double> b) {
  switch (metric) {
    case Metric::Cosine: return cosine_distance(a, b);
  }
  fail(ErrorKind::InvalidArgument, "unknown metric");
}

/// Pool candidates by increasing distance from `source`; equal distances
/// keep ascending candidate index.
inline std::vector<RankedCandidate> rank_candidates(
    const SpeakerLevelEmbedding &source, const EmbeddingPool &pool,
    Metric metric = Metric::Cosine) {
  if (pool.empty()) fail(ErrorKind::EmptyPool, "candidate pool is empty");
  if (pool.dim() != source.vector.size())
    fail(ErrorKind::DimensionMismatch,
         "source dimension " + std::to_string(source.vector.size()) +
             ", pool dimension " + std::to_string(pool.dim()));
  std::vector<RankedCandidate> ranked;
  ranked.reserve(pool.pool_size());
  for (std::size_t i = 0; i < pool.pool_size(); ++i)
    ranked.push_back({i, distance(metric, source.vector, pool[i].vector)});
  std::sort(ranked.begin(), ranked.end(),
            [](const RankedCandidate &l, const RankedCandidate &r) {
              if (l.distance != r.distance) return l.distance < r.distance;
              return l.index < r.index;
            });
  return ranked;
}

/// Indices (ascending) of the candidates the baseline averages.
inline std::vector<std::size_t> select_candidates(
    const SpeakerLevelEmbedding &source, const EmbeddingPool &pool,
    const SelectionConfig &cfg) {
  if (pool.empty()) fail(ErrorKind::EmptyPool, "candidate pool is empty");
  if (cfg.k == 0) fail(ErrorKind::InvalidArgument, "k must be positive");
  if (cfg.k > pool.pool_size())
    fail(ErrorKind::KTooLarge, "k = " + std::to_string(cfg.k) +
                                   " exceeds pool size " +
                                   std::to_string(pool.pool_size()));
  const auto ranked = rank_candidates(source, pool, cfg.metric);
  std::vector<std::size_t> chosen;
  chosen.reserve(cfg.k);
  if (cfg.direction == Direction::Near) {
    for (std::size_t i = 0; i < cfg.k; ++i) chosen.push_back(ranked[i].index);
  } else {
    for (std::size_t i = ranked.size() - cfg.k; i < ranked.size(); ++i)
      chosen.push_back(ranked[i].index);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

/// Pseudo-speaker vector: mean of the selected candidates, summed in
/// ascending candidate index.
inline Vector anonymize_baseline(const SpeakerLevelEmbedding &source,
                                 const EmbeddingPool &pool,
                                 const SelectionConfig &cfg) {
  const auto chosen = select_candidates(source, pool, cfg);
  Vector mean(pool.dim(), 0.0);
  for (std::size_t idx : chosen)
    for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += pool[idx].vector[d];
  const double k = static_cast<double>(chosen.size());
  for (double &x : mean) x /= k;
  return mean;
}

/// Copy of `pool` with candidates permuted by a seeded shuffle. Used to give
/// two anonymizer instances independent candidate orders.
inline EmbeddingPool shuffled_pool(const EmbeddingPool &pool,
                                   std::uint64_t seed) {
  auto candidates = pool.candidates();
  Rng rng(seed);
  shuffle(candidates.begin(), candidates.end(), rng);
  return EmbeddingPool(std::move(candidates));
}

}  // namespace anonvec
