// anonvec/experiment.hpp

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

// Batch pipeline behind the anonvec tool: train-theta, anonymize, evaluate
// and report. One JSON config drives every stage. Precedence is
// flag > config file > built-in default, and every artifact written embeds
// the fully resolved config and seed.
//
// Randomness flows from the single config seed through named sub-seeds:
//   theta-init     initial w of the experiment's theta
//   pool-shuffle   candidate order of the trial-side baseline pool
//   aa-enrollment  the attacker's independent anonymizer in AA

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "anonvec/embedding.hpp"
#include "anonvec/embedding_io.hpp"
#include "anonvec/error.hpp"
#include "anonvec/pool_baseline.hpp"
#include "anonvec/privacy_eval.hpp"
#include "anonvec/proxy_model.hpp"
#include "anonvec/random.hpp"
#include "anonvec/reprogram.hpp"
#include "anonvec/synthetic.hpp"

namespace anonvec {

enum class AnonymizerKind { Identity, BaselineNear, BaselineFar, Reprogram };

inline std::string_view to_string(AnonymizerKind k) {
  switch (k) {
    case AnonymizerKind::Identity: return "identity";
    case AnonymizerKind::BaselineNear: return "baseline-near";
    case AnonymizerKind::BaselineFar: return "baseline-far";
    case AnonymizerKind::Reprogram: return "reprogram";
  }
  return "?";
}

inline AnonymizerKind parse_anonymizer(const std::string &s) {
  for (auto k : {AnonymizerKind::Identity, AnonymizerKind::BaselineNear,
                 AnonymizerKind::BaselineFar, AnonymizerKind::Reprogram})
    if (s == to_string(k)) return k;
  fail(ErrorKind::InvalidArgument,
       "anonymizer must be identity, baseline-near, baseline-far or "
       "reprogram; got '" + s + "'");
}

struct ExperimentConfig {
  std::string train;          // utterances theta is trained on
  std::string enroll;         // enrollment utterances
  std::string trial;          // trial utterances
  std::string pool;           // baseline candidate pool
  std::string trials;         // trial list
  std::string proxy;          // proxy weight file
  std::string input;          // dataset to anonymize
  std::string checkpoint;     // trained theta for anonymize / evaluate
  std::string aa_checkpoint;  // attacker's theta; trained on demand if empty
  AnonymizerKind anonymizer = AnonymizerKind::Reprogram;
  std::size_t k = 10;
  double epsilon = kDefaultEpsilon;
  double lambda_dist = 1.0;
  bool per_speaker = false;
  OptimizerConfig optimizer = [] {
    OptimizerConfig c;
    c.init = InitKind::SeededUniform;
    c.init_scale = kDefaultEpsilon;
    return c;
  }();
  std::uint64_t seed = 0;
  std::string out = "out";
};

inline Json to_json(const ExperimentConfig &c) {
  return {
      {"train", c.train},
      {"enroll", c.enroll},
      {"trial", c.trial},
      {"pool", c.pool},
      {"trials", c.trials},
      {"proxy", c.proxy},
      {"input", c.input},
      {"checkpoint", c.checkpoint},
      {"aa_checkpoint", c.aa_checkpoint},
      {"anonymizer", std::string(to_string(c.anonymizer))},
      {"k", c.k},
      {"epsilon", c.epsilon},
      {"lambda_dist", c.lambda_dist},
      {"per_speaker", c.per_speaker},
      {"optimizer",
       {{"step_size", c.optimizer.step_size},
        {"max_iters", c.optimizer.max_iters},
        {"tol", c.optimizer.tol},
        {"init", c.optimizer.init == InitKind::Zeros ? "zeros" : "uniform"},
        {"init_scale", c.optimizer.init_scale},
        {"backtracking", c.optimizer.backtracking}}},
      {"seed", c.seed},
      {"out", c.out},
  };
}

namespace detail {

template <typename T>
T get_field(const Json &j, const std::string &key) {
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception &) {
    fail(ErrorKind::InvalidArgument, "config field '" + key +
                                         "' has the wrong type: " +
                                         j.at(key).dump());
  }
}

inline void reject_unknown(const Json &given, const Json &known,
                           const std::string &prefix) {
  for (const auto &[key, value] : given.items()) {
    if (!known.contains(key))
      fail(ErrorKind::InvalidArgument,
           "unknown config field '" + prefix + key + "'");
    if (value.is_object() && known.at(key).is_object())
      reject_unknown(value, known.at(key), prefix + key + ".");
  }
}

}  // namespace detail

inline ExperimentConfig config_from_json(const Json &patch) {
  if (!patch.is_object())
    fail(ErrorKind::InvalidArgument, "config must be a JSON object");
  const Json defaults = to_json(ExperimentConfig{});
  detail::reject_unknown(patch, defaults, "");
  Json j = defaults;
  j.merge_patch(patch);

  using detail::get_field;
  ExperimentConfig c;
  c.train = get_field<std::string>(j, "train");
  c.enroll = get_field<std::string>(j, "enroll");
  c.trial = get_field<std::string>(j, "trial");
  c.pool = get_field<std::string>(j, "pool");
  c.trials = get_field<std::string>(j, "trials");
  c.proxy = get_field<std::string>(j, "proxy");
  c.input = get_field<std::string>(j, "input");
  c.checkpoint = get_field<std::string>(j, "checkpoint");
  c.aa_checkpoint = get_field<std::string>(j, "aa_checkpoint");
  c.anonymizer = parse_anonymizer(get_field<std::string>(j, "anonymizer"));
  c.k = get_field<std::size_t>(j, "k");
  c.epsilon = get_field<double>(j, "epsilon");
  c.lambda_dist = get_field<double>(j, "lambda_dist");
  c.per_speaker = get_field<bool>(j, "per_speaker");
  const Json &o = j.at("optimizer");
  c.optimizer.step_size = get_field<double>(o, "step_size");
  c.optimizer.max_iters = get_field<std::size_t>(o, "max_iters");
  c.optimizer.tol = get_field<double>(o, "tol");
  const auto init = get_field<std::string>(o, "init");
  if (init == "zeros")
    c.optimizer.init = InitKind::Zeros;
  else if (init == "uniform")
    c.optimizer.init = InitKind::SeededUniform;
  else
    fail(ErrorKind::InvalidArgument, "optimizer.init must be zeros or uniform");
  c.optimizer.init_scale = get_field<double>(o, "init_scale");
  c.optimizer.backtracking = get_field<bool>(o, "backtracking");
  c.seed = get_field<std::uint64_t>(j, "seed");
  c.out = get_field<std::string>(j, "out");

  c.optimizer.validate();
  if (!(c.epsilon > 0.0))
    fail(ErrorKind::InvalidArgument, "epsilon must be positive");
  if (c.k == 0) fail(ErrorKind::InvalidArgument, "k must be positive");
  return c;
}

/// Applies "a.b.c=value" to a JSON patch. The value is parsed as JSON when
/// it parses, otherwise taken as a string.
inline void apply_override(Json &patch, const std::string &assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    fail(ErrorKind::InvalidArgument,
         "--set expects key=value, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  Json value = Json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  Json *node = &patch;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty())
      fail(ErrorKind::InvalidArgument, "malformed --set key '" + key + "'");
    if (!node->is_object()) *node = Json::object();
    if (dot == std::string::npos) {
      (*node)[part] = std::move(value);
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

inline Json read_json_file(const std::string &path) {
  auto in = detail::open_input(path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error &e) {
    fail(ErrorKind::ParseError, path + ": " + e.what());
  }
}

/// Resolves defaults <- config file <- --seed/--out <- --set overrides.
inline ExperimentConfig resolve_config(
    const std::string &config_path, const std::optional<std::uint64_t> &seed,
    const std::optional<std::string> &out,
    const std::vector<std::string> &overrides) {
  Json patch = config_path.empty() ? Json::object() : read_json_file(config_path);
  if (!patch.is_object())
    fail(ErrorKind::InvalidArgument, config_path + ": config must be an object");
  if (seed) patch["seed"] = *seed;
  if (out) patch["out"] = *out;
  for (const auto &o : overrides) apply_override(patch, o);
  return config_from_json(patch);
}

// ---------------------------------------------------------------------------

namespace detail {

inline const std::string &require_path(const std::string &path,
                                       const char *field) {
  if (path.empty())
    fail(ErrorKind::InvalidArgument,
         std::string("config field '") + field + "' is required");
  if (!std::filesystem::exists(path))
    fail(ErrorKind::Io,
         std::string(field) + " file not found: " + path);
  return path;
}

inline std::filesystem::path out_path(const ExperimentConfig &c,
                                      const char *name) {
  std::filesystem::create_directories(c.out);
  return std::filesystem::path(c.out) / name;
}

inline Json provenance(const ExperimentConfig &c) {
  return {{"config", to_json(c)}, {"seed", c.seed}};
}

inline void write_text(const std::filesystem::path &p, const std::string &s) {
  auto out = open_output(p.string());
  out << s;
  if (!out) fail(ErrorKind::Io, "write failed: " + p.string());
}

}  // namespace detail

inline OptimizerConfig seeded(OptimizerConfig c, std::uint64_t seed) {
  c.seed = seed;
  return c;
}

struct TrainOutcome {
  OptimizeResult result;
  std::string checkpoint_path;
  std::string trace_path;
};

inline std::string trace_tsv(const OptimizationTrace &trace,
                             const Json &provenance) {
  std::ostringstream os;
  os << "# " << provenance.dump() << '\n';
  os << "iter\tobjective\tsynthesis\tdistance\tmae\n";
  char buf[160];
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto &t = trace[i];
    std::snprintf(buf, sizeof buf, "%zu\t%.17g\t%.17g\t%.17g\t%.17g\n", i + 1,
                  t.objective, t.synthesis, t.distance, t.mae);
    os << buf;
  }
  return os.str();
}

inline TrainOutcome cmd_train_theta(const ExperimentConfig &cfg) {
  const auto model = load_proxy(detail::require_path(cfg.proxy, "proxy"));
  const auto data = load_embeddings(detail::require_path(cfg.train, "train"));
  const auto ts = build_training_set(data, model);

  TrainOutcome o;
  o.result = optimize(ts, model, seeded(cfg.optimizer, cfg.seed), cfg.epsilon,
                      cfg.lambda_dist);
  Json ck = checkpoint_json(o.result.params, cfg.seed, o.result.iters_run);
  ck.update(detail::provenance(cfg));
  ck["seed"] = cfg.seed;

  o.checkpoint_path = detail::out_path(cfg, "theta.json").string();
  o.trace_path = detail::out_path(cfg, "trace.tsv").string();
  detail::write_text(o.checkpoint_path, ck.dump() + "\n");
  detail::write_text(o.trace_path,
                     trace_tsv(o.result.trace, detail::provenance(cfg)));
  return o;
}

// ---------------------------------------------------------------------------

namespace detail {

inline Anonymizer baseline_anonymizer(EmbeddingPool pool, std::size_t k,
                                      Direction dir) {
  auto shared = std::make_shared<const EmbeddingPool>(std::move(pool));
  SelectionConfig sel{k, dir, Metric::Cosine};
  return [shared, sel](const SpeakerLevelEmbedding &s) {
    return anonymize_baseline(s, *shared, sel);
  };
}

inline Anonymizer reprogram_anonymizer(ReprogramParams params) {
  return [p = std::move(params)](const SpeakerLevelEmbedding &s) {
    return anonymize_reprogram(s, p);
  };
}

/// Per-speaker mode: each speaker of `data` gets its own theta trained on
/// its own records.
inline Anonymizer per_speaker_anonymizer(
    const std::vector<UtteranceEmbedding> &data, const ProxyModel &model,
    const ExperimentConfig &cfg, std::uint64_t seed) {
  const auto ts = build_training_set(data, model);
  auto trained = optimize_per_speaker(ts, model, seeded(cfg.optimizer, seed),
                                      cfg.epsilon, cfg.lambda_dist);
  auto params = std::make_shared<std::map<std::string, ReprogramParams>>();
  for (auto &[id, r] : trained) params->emplace(id, std::move(r.params));
  return [params](const SpeakerLevelEmbedding &s) {
    auto it = params->find(s.speaker_id);
    if (it == params->end())
      fail(ErrorKind::UnknownSpeaker,
           "no per-speaker theta for '" + s.speaker_id + "'");
    return anonymize_reprogram(s, it->second);
  };
}

inline ReprogramParams train_or_load(const ExperimentConfig &cfg,
                                     const std::string &checkpoint,
                                     std::uint64_t seed) {
  if (!checkpoint.empty())
    return load_checkpoint(require_path(checkpoint, "checkpoint")).params;
  const auto model = load_proxy(require_path(cfg.proxy, "proxy"));
  const auto data = load_embeddings(require_path(cfg.train, "train"));
  return optimize(build_training_set(data, model), model,
                  seeded(cfg.optimizer, seed), cfg.epsilon, cfg.lambda_dist)
      .params;
}

}  // namespace detail

struct AnonymizeOutcome {
  std::vector<UtteranceEmbedding> records;
  std::string output_path;
};

inline AnonymizeOutcome cmd_anonymize(const ExperimentConfig &cfg) {
  const auto ds = load_dataset(detail::require_path(cfg.input, "input"));
  const auto speakers = speaker_level_all(ds.utterances);

  Anonymizer anon = identity_anonymizer;
  switch (cfg.anonymizer) {
    case AnonymizerKind::Identity: break;
    case AnonymizerKind::BaselineNear:
    case AnonymizerKind::BaselineFar: {
      const auto pool = EmbeddingPool::from_utterances(
          load_embeddings(detail::require_path(cfg.pool, "pool")));
      anon = detail::baseline_anonymizer(
          shuffled_pool(pool, sub_seed(cfg.seed, "pool-shuffle")), cfg.k,
          cfg.anonymizer == AnonymizerKind::BaselineNear ? Direction::Near
                                                         : Direction::Far);
      break;
    }
    case AnonymizerKind::Reprogram:
      if (cfg.per_speaker) {
        const auto model = load_proxy(detail::require_path(cfg.proxy, "proxy"));
        anon = detail::per_speaker_anonymizer(ds.utterances, model, cfg,
                                              cfg.seed);
      } else {
        if (cfg.checkpoint.empty())
          fail(ErrorKind::MissingCheckpoint,
               "anonymizer 'reprogram' needs a checkpoint (config field "
               "'checkpoint')");
        anon = detail::reprogram_anonymizer(
            load_checkpoint(detail::require_path(cfg.checkpoint, "checkpoint"))
                .params);
      }
      break;
  }

  AnonymizeOutcome o;
  std::vector<SpeakerLevelEmbedding> pseudo;
  pseudo.reserve(speakers.size());
  for (const auto &s : speakers)
    pseudo.push_back({s.speaker_id, anon(s), s.utterance_count});
  o.records = as_records(pseudo);
  o.output_path = detail::out_path(cfg, "anonymized.jsonl").string();
  save_embeddings(o.records, o.output_path, ds.dim, detail::provenance(cfg));
  return o;
}

// ---------------------------------------------------------------------------

/// Trial-side and attacker-side anonymizers for an evaluation.
inline AnonymizerPair make_anonymizers(
    const ExperimentConfig &cfg,
    const std::vector<UtteranceEmbedding> &enroll_data,
    const std::vector<UtteranceEmbedding> &trial_data) {
  const std::uint64_t aa_seed = sub_seed(cfg.seed, "aa-enrollment");
  AnonymizerPair pair;
  switch (cfg.anonymizer) {
    case AnonymizerKind::Identity: break;
    case AnonymizerKind::BaselineNear:
    case AnonymizerKind::BaselineFar: {
      const auto pool = EmbeddingPool::from_utterances(
          load_embeddings(detail::require_path(cfg.pool, "pool")));
      const auto dir = cfg.anonymizer == AnonymizerKind::BaselineNear
                           ? Direction::Near
                           : Direction::Far;
      pair.trial = detail::baseline_anonymizer(
          shuffled_pool(pool, sub_seed(cfg.seed, "pool-shuffle")), cfg.k, dir);
      pair.enrollment = detail::baseline_anonymizer(
          shuffled_pool(pool, aa_seed), cfg.k, dir);
      break;
    }
    case AnonymizerKind::Reprogram:
      if (cfg.per_speaker) {
        const auto model = load_proxy(detail::require_path(cfg.proxy, "proxy"));
        pair.trial =
            detail::per_speaker_anonymizer(trial_data, model, cfg, cfg.seed);
        pair.enrollment =
            detail::per_speaker_anonymizer(enroll_data, model, cfg, aa_seed);
      } else {
        pair.trial = detail::reprogram_anonymizer(
            detail::train_or_load(cfg, cfg.checkpoint, cfg.seed));
        pair.enrollment = detail::reprogram_anonymizer(
            detail::train_or_load(cfg, cfg.aa_checkpoint, aa_seed));
      }
      break;
  }
  return pair;
}

struct EvaluationReport {
  Json config;
  std::uint64_t seed = 0;
  std::vector<ScenarioResult> results;
};

inline Json to_json(const EvaluationReport &r) {
  Json results = Json::array();
  for (const auto &s : r.results) results.push_back(to_json(s));
  return {{"config", r.config}, {"seed", r.seed}, {"results", results}};
}

inline std::string render_report(const Json &report) {
  std::ostringstream os;
  char buf[200];
  os << "anonvec privacy report\n";
  os << "seed:       " << report.at("seed").dump() << '\n';
  const auto &cfg = report.at("config");
  if (cfg.contains("anonymizer"))
    os << "anonymizer: " << cfg.at("anonymizer").get<std::string>() << '\n';
  os << '\n';
  std::snprintf(buf, sizeof buf, "%-9s %-10s %-14s %9s %10s\n", "scenario",
                "eer", "threshold", "genuine", "impostor");
  os << buf;
  for (const auto &r : report.at("results")) {
    std::snprintf(buf, sizeof buf, "%-9s %-10.6f %-14.6f %9zu %10zu\n",
                  r.at("scenario").get<std::string>().c_str(),
                  r.at("eer").get<double>(), r.at("threshold").get<double>(),
                  r.at("n_genuine").get<std::size_t>(),
                  r.at("n_impostor").get<std::size_t>());
    os << buf;
  }
  os << "\nconfig: " << cfg.dump() << '\n';
  return os.str();
}

struct EvaluateOutcome {
  EvaluationReport report;
  std::string json_path;
  std::string text_path;
};

inline EvaluateOutcome cmd_evaluate(const ExperimentConfig &cfg) {
  const auto enroll_data =
      load_embeddings(detail::require_path(cfg.enroll, "enroll"));
  const auto trial_data =
      load_embeddings(detail::require_path(cfg.trial, "trial"));
  const auto trials = load_trials(detail::require_path(cfg.trials, "trials"));
  const auto enroll = speaker_map(enroll_data);
  const auto trial = speaker_map(trial_data);
  const auto anonymizers = make_anonymizers(cfg, enroll_data, trial_data);

  EvaluateOutcome o;
  o.report.config = to_json(cfg);
  o.report.seed = cfg.seed;
  for (auto sc : {Scenario::OO, Scenario::OA, Scenario::AA})
    o.report.results.push_back(
        run_scenario(sc, enroll, trial, anonymizers, trials));

  const Json j = to_json(o.report);
  o.json_path = detail::out_path(cfg, "report.json").string();
  o.text_path = detail::out_path(cfg, "report.txt").string();
  detail::write_text(o.json_path, j.dump(2) + "\n");
  detail::write_text(o.text_path, render_report(j));
  return o;
}

// ---------------------------------------------------------------------------

/// Desk-scale synthetic experiment: clustered enrollment/trial speakers, a
/// disjoint candidate pool, a disjoint training set, an all-pairs trial
/// list and a seeded proxy.
struct FixtureSpec {
  std::size_t dim = kDefaultDim;
  std::size_t cond_dim = 16;
  std::size_t eval_speakers = 20;
  std::size_t utts_per_speaker = 10;
  std::size_t enroll_utts = 5;
  std::size_t pool_speakers = 20;
  std::size_t train_speakers = 10;
  std::size_t hidden = 64;
  std::size_t output = 32;
  double center_scale = 0.01;
  double utt_scale = 0.01;
  std::uint64_t seed = 0;
};

struct Fixture {
  std::vector<UtteranceEmbedding> train, enroll, trial, pool;
  std::vector<Trial> trials;
  ProxyModel proxy;
};

inline Fixture make_fixture(const FixtureSpec &spec) {
  auto cluster = [&](std::size_t n, const char *prefix, const char *name) {
    ClusterSpec c;
    c.num_speakers = n;
    c.utts_per_speaker = spec.utts_per_speaker;
    c.dim = spec.dim;
    c.cond_dim = spec.cond_dim;
    c.center_scale = spec.center_scale;
    c.utt_scale = spec.utt_scale;
    c.seed = sub_seed(spec.seed, name);
    c.speaker_prefix = prefix;
    return make_clusters(c);
  };
  Fixture f;
  split_enroll_trial(cluster(spec.eval_speakers, "spk", "fixture-eval"),
                     spec.enroll_utts, f.enroll, f.trial);
  f.pool = cluster(spec.pool_speakers, "pool", "fixture-pool");
  f.train = cluster(spec.train_speakers, "train", "fixture-train");
  f.trials = all_pairs_trials(speaker_map(f.enroll), speaker_map(f.trial));
  f.proxy = random_proxy(spec.dim, spec.cond_dim, spec.hidden, spec.output,
                         sub_seed(spec.seed, "fixture-proxy"));
  return f;
}

/// Writes a fixture into `dir` plus a config.json pointing at it.
inline ExperimentConfig write_fixture(const Fixture &f,
                                      const std::filesystem::path &dir,
                                      std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  auto p = [&](const char *name) { return (dir / name).string(); };
  save_embeddings(f.train, p("train.jsonl"));
  save_embeddings(f.enroll, p("enroll.jsonl"));
  save_embeddings(f.trial, p("trial.jsonl"));
  save_embeddings(f.pool, p("pool.jsonl"));
  {
    auto out = detail::open_output(p("trials.tsv"));
    write_trials(out, f.trials);
  }
  save_proxy(f.proxy, p("proxy.json"));

  ExperimentConfig c;
  c.train = p("train.jsonl");
  c.enroll = p("enroll.jsonl");
  c.trial = p("trial.jsonl");
  c.pool = p("pool.jsonl");
  c.trials = p("trials.tsv");
  c.proxy = p("proxy.json");
  c.input = p("trial.jsonl");
  c.k = 10;
  c.seed = seed;
  c.out = (dir / "out").string();
  detail::write_text(dir / "config.json", to_json(c).dump(2) + "\n");
  return c;
}

}  // namespace anonvec
