// anonvec/privacy_eval.hpp

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

// Cosine trial scoring, equal error rate, and the three attack scenarios:
//
//   OO  original enrollment vs original trial (reference)
//   OA  original enrollment vs anonymized trial (ignorant attacker)
//   AA  enrollment anonymized by a second, independently seeded anonymizer
//       vs trial anonymized by the experiment's anonymizer (lazy-informed)

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "anonvec/embedding.hpp"
#include "anonvec/embedding_io.hpp"
#include "anonvec/error.hpp"

namespace anonvec {

enum class Label { Genuine, Impostor };
enum class Scenario { OO, OA, AA };

inline std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::OO: return "OO";
    case Scenario::OA: return "OA";
    case Scenario::AA: return "AA";
  }
  return "?";
}

struct Trial {
  std::string enrollment_speaker_id;
  std::string trial_speaker_id;
  Label label = Label::Impostor;
};

struct ScoreSet {
  std::vector<double> genuine;
  std::vector<double> impostor;
};

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
};

struct ScenarioResult {
  Scenario scenario = Scenario::OO;
  double eer = 0.0;
  double threshold = 0.0;
  std::size_t n_genuine = 0;
  std::size_t n_impostor = 0;
};

/// Cosine similarity; higher means "same speaker".
inline double score_trial(std::span<const double> enrollment,
                          std::span<const double> trial) {
  return cosine_similarity(enrollment, trial);
}

/// Equal error rate by a threshold sweep over the sorted union of scores.
///
/// At threshold t, FAR(t) is the share of impostor scores >= t and FRR(t)
/// the share of genuine scores < t. Candidates are every distinct score plus
/// one just above the maximum (FAR = 0, FRR = 1). The first candidate where
/// FAR <= FRR brackets the crossing with its predecessor; the EER is read off
/// the straight line between the two points, or taken directly when
/// FAR == FRR there.
///
/// Counts are kept as integers and the interpolation is done in a single
/// division, so rational EERs such as 1/2 come out exact.
inline EerResult compute_eer(const ScoreSet &scores) {
  if (scores.genuine.empty() || scores.impostor.empty())
    fail(ErrorKind::EmptyScores, "EER needs genuine and impostor scores");
  for (const auto *list : {&scores.genuine, &scores.impostor})
    if (!all_finite(*list))
      fail(ErrorKind::InvalidArgument, "non-finite score");

  std::vector<double> gen = scores.genuine, imp = scores.impostor;
  std::sort(gen.begin(), gen.end());
  std::sort(imp.begin(), imp.end());
  std::vector<double> thresholds;
  thresholds.reserve(gen.size() + imp.size() + 1);
  std::merge(gen.begin(), gen.end(), imp.begin(), imp.end(),
             std::back_inserter(thresholds));
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());
  thresholds.push_back(std::nextafter(thresholds.back(),
                                      std::numeric_limits<double>::infinity()));

  const auto ng = static_cast<std::int64_t>(gen.size());
  const auto ni = static_cast<std::int64_t>(imp.size());
  std::int64_t prev_fa = 0, prev_diff = 0;
  double prev_t = 0.0;
  std::size_t gi = 0, ii = 0;
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    const double t = thresholds[k];
    while (gi < gen.size() && gen[gi] < t) ++gi;
    while (ii < imp.size() && imp[ii] < t) ++ii;
    const std::int64_t fa = ni - static_cast<std::int64_t>(ii);
    const std::int64_t fr = static_cast<std::int64_t>(gi);
    // (FAR - FRR) * ng * ni
    const std::int64_t diff = fa * ng - fr * ni;
    if (diff == 0)
      return {static_cast<double>(fa) / static_cast<double>(ni), t};
    if (diff < 0) {
      // k > 0: the lowest threshold has FRR = 0 < FAR = 1
      const std::int64_t span = prev_diff - diff;
      const double num = static_cast<double>(prev_fa * span +
                                             prev_diff * (fa - prev_fa));
      const double eer =
          num / (static_cast<double>(span) * static_cast<double>(ni));
      const double alpha =
          static_cast<double>(prev_diff) / static_cast<double>(span);
      return {eer, prev_t + alpha * (t - prev_t)};
    }
    prev_fa = fa;
    prev_diff = diff;
    prev_t = t;
  }
  // unreachable: the sentinel threshold always has FAR = 0 < FRR = 1
  fail(ErrorKind::InvalidArgument, "EER sweep found no crossing");
}

/// Maps a speaker-level embedding to its pseudo-speaker vector.
using Anonymizer = std::function<Vector(const SpeakerLevelEmbedding &)>;

inline Vector identity_anonymizer(const SpeakerLevelEmbedding &s) {
  return s.vector;
}

/// The trial-side anonymizer and the independently instantiated one an AA
/// attacker applies to enrollment data.
struct AnonymizerPair {
  Anonymizer trial = identity_anonymizer;
  Anonymizer enrollment = identity_anonymizer;
};

using SpeakerMap = std::map<std::string, SpeakerLevelEmbedding>;

inline SpeakerMap speaker_map(std::span<const UtteranceEmbedding> utterances) {
  SpeakerMap out;
  for (auto &s : speaker_level_all(utterances)) {
    auto id = s.speaker_id;
    out.emplace(std::move(id), std::move(s));
  }
  return out;
}

/// Scores every listed trial at speaker level and returns the scenario EER.
/// Each speaker is anonymized once, so all of a speaker's trials share one
/// pseudo-speaker.
inline ScenarioResult run_scenario(Scenario scenario, const SpeakerMap &enroll,
                                   const SpeakerMap &trial,
                                   const AnonymizerPair &anonymizers,
                                   std::span<const Trial> trials) {
  std::map<std::string, Vector> enroll_vec, trial_vec;
  auto lookup = [](const SpeakerMap &m, const std::string &id,
                   const char *side) -> const SpeakerLevelEmbedding & {
    auto it = m.find(id);
    if (it == m.end())
      fail(ErrorKind::UnknownSpeaker,
           std::string(side) + " speaker '" + id + "' not in dataset");
    return it->second;
  };

  ScoreSet scores;
  for (const auto &t : trials) {
    const auto &e = lookup(enroll, t.enrollment_speaker_id, "enrollment");
    const auto &x = lookup(trial, t.trial_speaker_id, "trial");
    auto eit = enroll_vec.find(e.speaker_id);
    if (eit == enroll_vec.end())
      eit = enroll_vec
                .emplace(e.speaker_id, scenario == Scenario::AA
                                           ? anonymizers.enrollment(e)
                                           : e.vector)
                .first;
    auto tit = trial_vec.find(x.speaker_id);
    if (tit == trial_vec.end())
      tit = trial_vec
                .emplace(x.speaker_id, scenario == Scenario::OO
                                           ? x.vector
                                           : anonymizers.trial(x))
                .first;
    const double s = score_trial(eit->second, tit->second);
    (t.label == Label::Genuine ? scores.genuine : scores.impostor).push_back(s);
  }
  const auto eer = compute_eer(scores);
  return {scenario, eer.eer, eer.threshold, scores.genuine.size(),
          scores.impostor.size()};
}

// Trial list: "enrollment_id<TAB>trial_id<TAB>genuine|impostor" per line.

inline std::vector<Trial> read_trials(std::istream &in) {
  std::vector<Trial> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const auto tab = text.find('\t', start);
      fields.push_back(text.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty())
      fail(ErrorKind::ParseError,
           "trial line must have three tab-separated fields", line);
    Trial t{fields[0], fields[1], Label::Impostor};
    if (fields[2] == "genuine")
      t.label = Label::Genuine;
    else if (fields[2] != "impostor")
      fail(ErrorKind::ParseError,
           "label must be 'genuine' or 'impostor', got '" + fields[2] + "'",
           line);
    if ((t.label == Label::Genuine) !=
        (t.enrollment_speaker_id == t.trial_speaker_id))
      fail(ErrorKind::ParseError,
           "label contradicts speaker ids (genuine iff ids are equal)", line);
    out.push_back(std::move(t));
  }
  return out;
}

inline std::vector<Trial> load_trials(const std::string &path) {
  auto in = detail::open_input(path);
  try {
    return read_trials(in);
  } catch (const Error &e) {
    throw Error(e.kind(),
                path + ":" + std::to_string(e.line()) + ": " + e.message(),
                e.line());
  }
}

inline void write_trials(std::ostream &out, std::span<const Trial> trials) {
  for (const auto &t : trials)
    out << t.enrollment_speaker_id << '\t' << t.trial_speaker_id << '\t'
        << (t.label == Label::Genuine ? "genuine" : "impostor") << '\n';
}

/// Every enrollment speaker against every trial speaker.
inline std::vector<Trial> all_pairs_trials(const SpeakerMap &enroll,
                                           const SpeakerMap &trial) {
  std::vector<Trial> out;
  for (const auto &[e, _] : enroll)
    for (const auto &[t, __] : trial)
      out.push_back({e, t, e == t ? Label::Genuine : Label::Impostor});
  return out;
}

inline double round6(double x) { return std::round(x * 1e6) / 1e6; }

inline Json to_json(const ScenarioResult &r) {
  return {{"scenario", std::string(to_string(r.scenario))},
          {"eer", round6(r.eer)},
          {"threshold", r.threshold},
          {"n_genuine", r.n_genuine},
          {"n_impostor", r.n_impostor}};
}

}  // namespace anonvec
