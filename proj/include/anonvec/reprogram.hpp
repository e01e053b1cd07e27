// anonvec/reprogram.hpp

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

// Embedding reprogramming.
//
// A speaker-level vector X is mapped to X' = X + theta with theta = w (.) mask.
// Training minimises, over a set of (X, cond, target) records,
//
//   J(w) = mean_r L(f(X_r + theta, cond_r), target_r) - lambda * mae(theta)
//   s.t.  mae(theta) <= epsilon,     mae(theta) = (1/D) sum_d |w_d mask_d|
//
// where f is a frozen ProxyModel and L its squared-error loss. The solver is
// projected gradient descent with optional step halving. The feasible set is
// an L1 ball of radius epsilon * D over the mask-1 coordinates.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "anonvec/embedding.hpp"
#include "anonvec/embedding_io.hpp"
#include "anonvec/error.hpp"
#include "anonvec/proxy_model.hpp"
#include "anonvec/random.hpp"

namespace anonvec {

inline constexpr double kDefaultEpsilon = 0.1;

using Mask = std::vector<std::uint8_t>;

struct ReprogramParams {
  Vector w;
  Mask mask;
  double epsilon = kDefaultEpsilon;

  std::size_t dim() const { return w.size(); }

  /// Number of trainable scalars (mask-1 coordinates).
  std::size_t trainable_count() const {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));
  }

  Vector theta() const {
    Vector t(w.size());
    for (std::size_t d = 0; d < w.size(); ++d) t[d] = mask[d] ? w[d] : 0.0;
    return t;
  }

  void validate() const {
    if (w.size() != mask.size())
      fail(ErrorKind::DimensionMismatch, "w and mask lengths differ");
    if (w.empty()) fail(ErrorKind::InvalidArgument, "empty parameter vector");
    if (std::any_of(mask.begin(), mask.end(), [](auto m) { return m > 1; }))
      fail(ErrorKind::InvalidArgument, "mask entries must be 0 or 1");
    if (trainable_count() == 0)
      fail(ErrorKind::InvalidArgument, "mask selects no coordinates");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
      fail(ErrorKind::InvalidArgument, "epsilon must be positive");
    if (!all_finite(w)) fail(ErrorKind::InvalidArgument, "non-finite w");
  }

  /// w = 0 with an all-ones mask.
  static ReprogramParams zeros(std::size_t dim = kDefaultDim,
                               double epsilon = kDefaultEpsilon) {
    return {Vector(dim, 0.0), Mask(dim, 1), epsilon};
  }

  friend bool operator==(const ReprogramParams &,
                         const ReprogramParams &) = default;
};

enum class InitKind { Zeros, SeededUniform };

struct OptimizerConfig {
  double step_size = 1.0;
  std::size_t max_iters = 200;
  std::uint64_t seed = 0;
  double tol = 1e-12;
  InitKind init = InitKind::Zeros;
  double init_scale = 0.1;  // half-width of the SeededUniform draw
  bool backtracking = true;
  std::size_t max_halvings = 60;

  void validate() const {
    if (!(step_size > 0.0))
      fail(ErrorKind::InvalidArgument, "step_size must be positive");
    if (max_iters < 1)
      fail(ErrorKind::InvalidArgument, "max_iters must be at least 1");
    if (!(tol >= 0.0)) fail(ErrorKind::InvalidArgument, "tol must be >= 0");
    if (init == InitKind::SeededUniform && !(init_scale >= 0.0))
      fail(ErrorKind::InvalidArgument, "init_scale must be >= 0");
  }
};

struct TrainingRecord {
  SpeakerLevelEmbedding speaker;
  Vector cond;
  ProxyTarget target;
};

using TrainingSet = std::vector<TrainingRecord>;

struct TraceEntry {
  double objective;
  double synthesis;  // mean proxy loss
  double distance;   // lambda * mae(theta), the subtracted term
  double mae;
};

using OptimizationTrace = std::vector<TraceEntry>;

// ---------------------------------------------------------------------------

inline Vector apply_theta(std::span<const double> x, const ReprogramParams &params) {
  if (x.size() != params.dim())
    fail(ErrorKind::DimensionMismatch,
         "embedding dimension " + std::to_string(x.size()) +
             ", parameter dimension " + std::to_string(params.dim()));
  Vector out(x.begin(), x.end());
  for (std::size_t d = 0; d < out.size(); ++d)
    if (params.mask[d]) out[d] += params.w[d];
  return out;
}

inline double mae_masked(const ReprogramParams &params) {
  double s = 0.0;
  for (std::size_t d = 0; d < params.w.size(); ++d)
    if (params.mask[d]) s += std::abs(params.w[d]);
  return s / static_cast<double>(params.w.size());
}

/// Euclidean projection of the masked coordinates of w onto
/// {mae_masked <= epsilon}. Sort-based L1-ball projection; mask-0
/// coordinates are left as they are.
inline ReprogramParams project(const ReprogramParams &params) {
  if (mae_masked(params) <= params.epsilon) return params;
  const double radius = params.epsilon * static_cast<double>(params.dim());

  Vector mags;
  mags.reserve(params.dim());
  for (std::size_t d = 0; d < params.dim(); ++d)
    if (params.mask[d]) mags.push_back(std::abs(params.w[d]));
  std::sort(mags.begin(), mags.end(), std::greater<>());

  // largest rho with mags[rho-1] > (sum_{i<rho} mags[i] - radius) / rho
  double cumsum = 0.0, tau = 0.0;
  for (std::size_t j = 0; j < mags.size(); ++j) {
    cumsum += mags[j];
    const double t = (cumsum - radius) / static_cast<double>(j + 1);
    if (mags[j] > t) tau = t;
    else break;
  }

  ReprogramParams out = params;
  for (std::size_t d = 0; d < out.dim(); ++d) {
    if (!out.mask[d]) continue;
    const double shrunk = std::max(std::abs(out.w[d]) - tau, 0.0);
    out.w[d] = std::copysign(shrunk, out.w[d]);
    if (shrunk == 0.0) out.w[d] = 0.0;
  }
  return out;
}

struct ObjectiveValue {
  double value = 0.0;
  double synthesis = 0.0;
  double distance = 0.0;
  double mae = 0.0;
  Vector grad;  // d value / d w

  TraceEntry trace() const { return {value, synthesis, distance, mae}; }
};

inline ObjectiveValue objective(const ReprogramParams &params,
                                const TrainingSet &training_set,
                                const ProxyModel &model, double lambda_dist) {
  if (training_set.empty())
    fail(ErrorKind::EmptyTrainingSet, "training set is empty");
  const std::size_t dim = params.dim();
  if (model.embedding_dim() != dim)
    fail(ErrorKind::DimensionMismatch,
         "proxy embedding dimension " + std::to_string(model.embedding_dim()) +
             ", parameter dimension " + std::to_string(dim));

  ObjectiveValue out;
  out.grad.assign(dim, 0.0);
  for (const auto &rec : training_set) {
    const Vector x_prime = apply_theta(rec.speaker.vector, params);
    const auto lg = loss_and_grad(model, x_prime, rec.cond, rec.target);
    out.synthesis += lg.loss;
    for (std::size_t d = 0; d < dim; ++d) out.grad[d] += lg.grad[d];
  }
  const double n = static_cast<double>(training_set.size());
  out.synthesis /= n;
  out.mae = mae_masked(params);
  out.distance = lambda_dist * out.mae;
  out.value = out.synthesis - out.distance;

  const double dist_scale = lambda_dist / static_cast<double>(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    if (!params.mask[d]) {
      out.grad[d] = 0.0;
      continue;
    }
    const double w = params.w[d];
    const double sign = w > 0.0 ? 1.0 : (w < 0.0 ? -1.0 : 0.0);
    out.grad[d] = out.grad[d] / n - dist_scale * sign;
  }
  return out;
}

struct OptimizeResult {
  ReprogramParams params;
  OptimizationTrace trace;
  std::size_t iters_run = 0;
};

inline ReprogramParams initial_params(std::size_t dim, const Mask &mask,
                                      double epsilon,
                                      const OptimizerConfig &cfg) {
  ReprogramParams p{Vector(dim, 0.0), mask.empty() ? Mask(dim, 1) : mask,
                    epsilon};
  if (cfg.init == InitKind::SeededUniform) {
    Rng rng(sub_seed(cfg.seed, "theta-init"));
    for (double &w : p.w) w = rng.uniform(-cfg.init_scale, cfg.init_scale);
  }
  p.validate();
  return project(p);
}

/// Projected gradient descent. Each iteration tries w - step * grad,
/// projects, and (with backtracking) halves the step until the objective
/// does not increase. Stops after max_iters, or once the improvement drops
/// below tol.
inline OptimizeResult optimize(const TrainingSet &training_set,
                               const ProxyModel &model,
                               const OptimizerConfig &cfg, double epsilon,
                               double lambda_dist, const Mask &mask = {}) {
  cfg.validate();
  if (training_set.empty())
    fail(ErrorKind::EmptyTrainingSet, "training set is empty");
  if (!(epsilon > 0.0))
    fail(ErrorKind::InvalidArgument, "epsilon must be positive");

  OptimizeResult result;
  result.params =
      initial_params(model.embedding_dim(), mask, epsilon, cfg);
  auto current = objective(result.params, training_set, model, lambda_dist);
  if (!std::isfinite(current.value))
    fail(ErrorKind::NonFiniteObjective, "objective at the initial point");

  for (std::size_t it = 0; it < cfg.max_iters; ++it) {
    double step = cfg.step_size;
    std::optional<ReprogramParams> accepted;
    std::optional<ObjectiveValue> accepted_value;
    for (std::size_t h = 0; h <= cfg.max_halvings; ++h, step *= 0.5) {
      ReprogramParams cand = result.params;
      for (std::size_t d = 0; d < cand.dim(); ++d)
        cand.w[d] -= step * current.grad[d];
      cand = project(cand);
      auto val = objective(cand, training_set, model, lambda_dist);
      if (!std::isfinite(val.value))
        fail(ErrorKind::NonFiniteObjective,
             "objective diverged at iteration " + std::to_string(it));
      if (!cfg.backtracking || val.value <= current.value) {
        accepted = std::move(cand);
        accepted_value = std::move(val);
        break;
      }
    }
    ++result.iters_run;
    if (!accepted) {
      // no non-increasing step at any scale: treat as converged
      result.trace.push_back(current.trace());
      break;
    }
    const double improvement = current.value - accepted_value->value;
    result.params = std::move(*accepted);
    current = std::move(*accepted_value);
    result.trace.push_back(current.trace());
    if (improvement < cfg.tol) break;
  }
  return result;
}

/// One theta per speaker, each trained on that speaker's records only with
/// a speaker-specific sub-seed.
inline std::map<std::string, OptimizeResult> optimize_per_speaker(
    const TrainingSet &training_set, const ProxyModel &model,
    const OptimizerConfig &cfg, double epsilon, double lambda_dist,
    const Mask &mask = {}) {
  std::map<std::string, TrainingSet> by_speaker;
  for (const auto &rec : training_set)
    by_speaker[rec.speaker.speaker_id].push_back(rec);
  std::map<std::string, OptimizeResult> out;
  for (const auto &[id, records] : by_speaker) {
    OptimizerConfig c = cfg;
    c.seed = sub_seed(cfg.seed, "speaker:" + id);
    out.emplace(id, optimize(records, model, c, epsilon, lambda_dist, mask));
  }
  return out;
}

/// Pseudo-speaker vector for one speaker under a trained theta.
inline Vector anonymize_reprogram(const SpeakerLevelEmbedding &speaker,
                                  const ReprogramParams &params) {
  return apply_theta(speaker.vector, params);
}

/// One record per utterance: the utterance's speaker-level vector, its cond
/// features, and the proxy output for the unmodified speaker as target.
inline TrainingSet build_training_set(
    std::span<const UtteranceEmbedding> utterances, const ProxyModel &model) {
  TrainingSet ts;
  for (const auto &[id, utts] : group_by_speaker(utterances)) {
    const auto spk = speaker_level_average(utts, id);
    std::vector<const UtteranceEmbedding *> order;
    for (const auto &u : utts) order.push_back(&u);
    std::stable_sort(order.begin(), order.end(), [](auto *l, auto *r) {
      return l->utterance_id < r->utterance_id;
    });
    for (const auto *u : order) {
      ProxyTarget target{forward(model, spk.vector, u->cond)};
      ts.push_back({spk, u->cond, std::move(target)});
    }
  }
  return ts;
}

// Checkpoint file: {"dim","epsilon","mask","w","seed","iters_run", ...}.
// Writers may add provenance fields; readers ignore unknown keys.

inline Json checkpoint_json(const ReprogramParams &params, std::uint64_t seed,
                            std::size_t iters_run) {
  Json mask = Json::array();
  for (auto m : params.mask) mask.push_back(static_cast<int>(m));
  return {{"dim", params.dim()}, {"epsilon", params.epsilon},
          {"mask", std::move(mask)}, {"w", params.w},
          {"seed", seed},           {"iters_run", iters_run}};
}

struct Checkpoint {
  ReprogramParams params;
  std::uint64_t seed = 0;
  std::size_t iters_run = 0;
};

inline Checkpoint checkpoint_from_json(const Json &j) {
  auto need = [&](const char *key) -> const Json & {
    if (!j.is_object() || !j.contains(key))
      fail(ErrorKind::ParseError,
           std::string("checkpoint is missing '") + key + "'");
    return j.at(key);
  };
  Checkpoint c;
  try {
    const auto dim = need("dim").get<std::size_t>();
    c.params.epsilon = need("epsilon").get<double>();
    c.params.w = detail::parse_number_array(need("w"), "w", 0);
    for (const auto &m : need("mask")) {
      if (!m.is_number_integer() || (m != 0 && m != 1))
        fail(ErrorKind::ParseError, "mask entries must be 0 or 1");
      c.params.mask.push_back(static_cast<std::uint8_t>(m.get<int>()));
    }
    c.seed = need("seed").get<std::uint64_t>();
    c.iters_run = need("iters_run").get<std::size_t>();
    if (c.params.w.size() != dim || c.params.mask.size() != dim)
      fail(ErrorKind::DimensionMismatch,
           "checkpoint arrays do not match dim " + std::to_string(dim));
  } catch (const Json::exception &e) {
    fail(ErrorKind::ParseError, e.what());
  }
  c.params.validate();
  return c;
}

inline Checkpoint load_checkpoint(const std::string &path) {
  auto in = detail::open_input(path);
  try {
    return checkpoint_from_json(Json::parse(in));
  } catch (const Json::parse_error &e) {
    fail(ErrorKind::ParseError, path + ": " + e.what());
  } catch (const Error &e) {
    throw Error(e.kind(), path + ": " + e.message());
  }
}

}  // namespace anonvec
