// anonvec/embedding.hpp

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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "anonvec/error.hpp"

namespace anonvec {

using Vector = std::vector<double>;

/// Embedding dimension used when nothing else is declared.
inline constexpr std::size_t kDefaultDim = 512;

/// Norms below this are treated as zero by the cosine functions.
inline constexpr double kZeroNormThreshold = 1e-12;

/// One utterance's representation. `cond` carries opaque conditioning
/// features for the synthesis proxy and is usually empty.
struct UtteranceEmbedding {
  std::string speaker_id;
  std::string utterance_id;
  Vector vector;
  Vector cond;

  friend bool operator==(const UtteranceEmbedding &,
                         const UtteranceEmbedding &) = default;
};

/// Mean of one speaker's utterance vectors; the unit every anonymizer works
/// on.
struct SpeakerLevelEmbedding {
  std::string speaker_id;
  Vector vector;
  std::size_t utterance_count = 1;

  friend bool operator==(const SpeakerLevelEmbedding &,
                         const SpeakerLevelEmbedding &) = default;
};

inline void check_same_dim(std::span<const double> a, std::span<const double> b,
                           const char *where) {
  if (a.size() != b.size())
    fail(ErrorKind::DimensionMismatch,
         std::string(where) + ": " + std::to_string(a.size()) + " vs " +
             std::to_string(b.size()));
}

inline bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  check_same_dim(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double l2_norm(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s += x * x;
  return std::sqrt(s);
}

/// Cosine of the angle between a and b, in [-1, 1].
inline double cosine_similarity(std::span<const double> a,
                                std::span<const double> b) {
  check_same_dim(a, b, "cosine");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  const double na = std::sqrt(aa), nb = std::sqrt(bb);
  if (na < kZeroNormThreshold || nb < kZeroNormThreshold)
    fail(ErrorKind::ZeroNorm, "cosine of a zero-norm vector");
  return std::clamp(ab / (na * nb), -1.0, 1.0);
}

/// 1 - cos(a, b), in [0, 2]. Symmetric.
inline double cosine_distance(std::span<const double> a,
                              std::span<const double> b) {
  return 1.0 - cosine_similarity(a, b);
}

/// Coordinate-wise mean of one speaker's utterances. The sum runs in
/// utterance_id order so the result does not depend on input order.
inline SpeakerLevelEmbedding speaker_level_average(
    std::span<const UtteranceEmbedding> utterances,
    const std::string &speaker_id) {
  if (utterances.empty())
    fail(ErrorKind::EmptyInput, "no utterances for speaker " + speaker_id);
  const std::size_t dim = utterances.front().vector.size();
  std::vector<const UtteranceEmbedding *> order;
  order.reserve(utterances.size());
  for (const auto &u : utterances) {
    if (u.speaker_id != speaker_id)
      fail(ErrorKind::MixedSpeakers, "utterance " + u.utterance_id +
                                         " belongs to " + u.speaker_id +
                                         ", expected " + speaker_id);
    if (u.vector.size() != dim)
      fail(ErrorKind::DimensionMismatch,
           "utterance " + u.utterance_id + " has dimension " +
               std::to_string(u.vector.size()) + ", expected " +
               std::to_string(dim));
    order.push_back(&u);
  }
  std::stable_sort(order.begin(), order.end(), [](auto *l, auto *r) {
    return l->utterance_id < r->utterance_id;
  });

  SpeakerLevelEmbedding out{speaker_id, Vector(dim, 0.0), utterances.size()};
  for (const auto *u : order)
    for (std::size_t d = 0; d < dim; ++d) out.vector[d] += u->vector[d];
  const double n = static_cast<double>(utterances.size());
  for (double &x : out.vector) x /= n;
  return out;
}

/// Splits a dataset by speaker, keyed and ordered by speaker_id.
inline std::map<std::string, std::vector<UtteranceEmbedding>> group_by_speaker(
    std::span<const UtteranceEmbedding> utterances) {
  std::map<std::string, std::vector<UtteranceEmbedding>> groups;
  for (const auto &u : utterances) groups[u.speaker_id].push_back(u);
  return groups;
}

/// Speaker-level averages for every speaker in the dataset, ordered by id.
inline std::vector<SpeakerLevelEmbedding> speaker_level_all(
    std::span<const UtteranceEmbedding> utterances) {
  std::vector<SpeakerLevelEmbedding> out;
  for (const auto &[id, utts] : group_by_speaker(utterances))
    out.push_back(speaker_level_average(utts, id));
  return out;
}

/// External candidate pool for the selection baseline.
class EmbeddingPool {
 public:
  EmbeddingPool() = default;

  explicit EmbeddingPool(std::vector<SpeakerLevelEmbedding> candidates)
      : candidates_(std::move(candidates)) {
    std::set<std::string> seen;
    for (const auto &c : candidates_) {
      if (!seen.insert(c.speaker_id).second)
        fail(ErrorKind::InvalidArgument,
             "duplicate pool candidate " + c.speaker_id);
      if (c.vector.size() != candidates_.front().vector.size())
        fail(ErrorKind::DimensionMismatch,
             "pool candidate " + c.speaker_id + " has dimension " +
                 std::to_string(c.vector.size()));
    }
  }

  /// Groups an utterance-level (or speaker-level) dataset into candidates.
  static EmbeddingPool from_utterances(
      std::span<const UtteranceEmbedding> utterances) {
    return EmbeddingPool(speaker_level_all(utterances));
  }

  std::size_t pool_size() const { return candidates_.size(); }
  bool empty() const { return candidates_.empty(); }
  std::size_t dim() const {
    return candidates_.empty() ? 0 : candidates_.front().vector.size();
  }
  const std::vector<SpeakerLevelEmbedding> &candidates() const {
    return candidates_;
  }
  const SpeakerLevelEmbedding &operator[](std::size_t i) const {
    return candidates_[i];
  }

 private:
  std::vector<SpeakerLevelEmbedding> candidates_;
};

}  // namespace anonvec
