// anonvec/synthetic.hpp

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

// Synthetic speaker clusters: each speaker has a Gaussian center and each
// utterance adds independent Gaussian noise around it. Controls the
// inter-speaker spread (center_scale) and intra-speaker spread (utt_scale)
// per coordinate.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "anonvec/embedding.hpp"
#include "anonvec/random.hpp"

namespace anonvec {

struct ClusterSpec {
  std::size_t num_speakers = 20;
  std::size_t utts_per_speaker = 10;
  std::size_t dim = kDefaultDim;
  std::size_t cond_dim = 0;
  double center_scale = 0.01;
  double utt_scale = 0.01;
  double cond_scale = 0.5;
  std::uint64_t seed = 0;
  std::string speaker_prefix = "spk";
};

inline std::string speaker_name(const std::string &prefix, std::size_t i) {
  std::string n = std::to_string(i);
  return prefix + std::string(n.size() < 3 ? 3 - n.size() : 0, '0') + n;
}

inline std::vector<UtteranceEmbedding> make_clusters(const ClusterSpec &spec) {
  Rng rng(spec.seed);
  std::vector<UtteranceEmbedding> out;
  out.reserve(spec.num_speakers * spec.utts_per_speaker);
  for (std::size_t s = 0; s < spec.num_speakers; ++s) {
    Vector center(spec.dim);
    for (double &c : center) c = rng.normal(0.0, spec.center_scale);
    const std::string spk = speaker_name(spec.speaker_prefix, s);
    for (std::size_t u = 0; u < spec.utts_per_speaker; ++u) {
      UtteranceEmbedding e{spk, spk + "-u" + speaker_name("", u), center, {}};
      for (double &x : e.vector) x += rng.normal(0.0, spec.utt_scale);
      e.cond.resize(spec.cond_dim);
      for (double &c : e.cond) c = rng.normal(0.0, spec.cond_scale);
      out.push_back(std::move(e));
    }
  }
  return out;
}

/// Splits each speaker's utterances: the first `n_enroll` (by utterance id)
/// go to enrollment, the rest to trial.
inline void split_enroll_trial(const std::vector<UtteranceEmbedding> &all,
                               std::size_t n_enroll,
                               std::vector<UtteranceEmbedding> &enroll,
                               std::vector<UtteranceEmbedding> &trial) {
  enroll.clear();
  trial.clear();
  for (auto &[id, utts] : group_by_speaker(all)) {
    std::stable_sort(utts.begin(), utts.end(), [](auto &l, auto &r) {
      return l.utterance_id < r.utterance_id;
    });
    for (std::size_t i = 0; i < utts.size(); ++i)
      (i < n_enroll ? enroll : trial).push_back(utts[i]);
  }
}

}  // namespace anonvec
