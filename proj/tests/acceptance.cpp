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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Everything runs on synthetic data.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "anonvec/anonvec.hpp"
#include "oracles.hpp"

namespace {

using namespace anonvec;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(const char *name, bool ok, const std::string &detail) {
  std::printf("%s  %-28s %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

/// Runs a criterion; an escaping exception counts as a failure.
void criterion(const char *name,
               const std::function<bool(std::ostringstream &)> &body) {
  std::ostringstream detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception &e) {
    detail << "exception: " << e.what();
  }
  report(name, ok, detail.str());
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// ---------------------------------------------------------------------------

bool gradient_correctness(std::ostringstream &detail) {
  const auto t0 = Clock::now();
  Rng rng(1001);
  double worst = 0.0;
  int draws = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t dim = 2 + rng.below(15), cond = rng.below(4);
    const auto model = random_proxy(dim, cond, 2 + rng.below(12),
                                    1 + rng.below(6), rng.engine()());
    const Vector x = oracle::random_vector(rng, dim);
    const Vector c = oracle::random_vector(rng, cond);
    const ProxyTarget t{oracle::random_vector(rng, model.output_dim())};

    // proxy gradient w.r.t. its input
    const Vector g = grad_wrt_input(model, x, c, t);
    const Vector fd = oracle::central_difference(
        [&](const Vector &p) { return oracle::loss_nested(model, p, c, t.target); },
        x, 1e-6);
    for (std::size_t i = 0; i < dim; ++i)
      worst = std::max(worst, oracle::rel_err(g[i], fd[i]));

    // full objective gradient w.r.t. w, including the masked-MAE term
    TrainingSet ts;
    for (int r = 0, n = 1 + static_cast<int>(rng.below(3)); r < n; ++r)
      ts.push_back({{"s", oracle::random_vector(rng, dim), 1},
                    oracle::random_vector(rng, cond),
                    {oracle::random_vector(rng, model.output_dim())}});
    Vector w = oracle::random_vector(rng, dim, 0.3);
    for (double &v : w)
      if (std::abs(v) < 1e-2) v = std::copysign(1e-2, v);
    Mask mask(dim);
    for (auto &m : mask) m = rng.below(4) != 0;
    mask[0] = 1;
    const double lambda = rng.uniform(0.0, 2.0);
    auto params = [&](const Vector &ww) {
      return ReprogramParams{ww, mask, 0.1};
    };
    const Vector og = objective(params(w), ts, model, lambda).grad;
    const Vector ofd = oracle::central_difference(
        [&](const Vector &ww) {
          return objective(params(ww), ts, model, lambda).value;
        },
        w, 1e-6);
    for (std::size_t i = 0; i < dim; ++i)
      worst = std::max(worst, oracle::rel_err(og[i], ofd[i]));
    draws += 2;
  }
  const double secs = seconds_since(t0);
  detail << draws << " draws, worst rel err " << worst << ", " << secs << " s";
  return worst < 1e-5 && secs < 10.0;
}

bool constraint_satisfaction(std::ostringstream &detail) {
  Rng rng(1002);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t dim = 8 + rng.below(120), cond = rng.below(5);
    const auto model = random_proxy(dim, cond, 4 + rng.below(16),
                                    2 + rng.below(8), rng.engine()());
    TrainingSet ts;
    for (int r = 0, n = 1 + static_cast<int>(rng.below(6)); r < n; ++r)
      ts.push_back({{"s", oracle::random_vector(rng, dim), 1},
                    oracle::random_vector(rng, cond),
                    {oracle::random_vector(rng, model.output_dim())}});
    OptimizerConfig cfg;
    cfg.seed = rng.engine()();
    cfg.init = InitKind::SeededUniform;
    cfg.init_scale = 1.0;  // start far outside the ball
    cfg.step_size = rng.uniform(0.5, 10.0);
    cfg.max_iters = 50;
    const auto res = optimize(ts, model, cfg, 0.1, rng.uniform(0.0, 2.0));
    worst = std::max(worst, mae_masked(res.params));
  }
  detail << "20 configs, max mae " << worst;
  return worst <= 0.1 + 1e-9;
}

bool parameter_budget(std::ostringstream &detail) {
  const auto p = ReprogramParams::zeros();
  const ExperimentConfig cfg;
  detail << "dim " << p.dim() << ", trainable " << p.trainable_count()
         << ", epsilon " << cfg.epsilon;
  return p.dim() == 512 && p.trainable_count() == 512 && p.w.size() == 512 &&
         kDefaultDim == 512;
}

bool projection_optimality(std::ostringstream &detail) {
  Rng rng(1004);
  double worst = 0.0;
  int infeasible = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const double eps = rng.uniform(0.02, 0.4);
    const Vector w = oracle::random_vector(rng, 8, rng.uniform(0.05, 1.5));
    double l1 = 0.0;
    for (double v : w) l1 += std::abs(v);
    infeasible += l1 > eps * 8;
    const auto got = project(ReprogramParams{w, Mask(8, 1), eps});
    worst = std::max(worst, oracle::l2_distance(
                                got.w, oracle::l1_projection_by_faces(w, eps * 8)));
  }
  detail << "50 instances (" << infeasible << " infeasible), max distance "
         << worst;
  return worst <= 1e-6;
}

bool baseline_oracle(std::ostringstream &detail) {
  Rng rng(1005);
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(20), k = 1 + rng.below(n);
    const std::size_t dim = 2 + rng.below(6);
    std::vector<Vector> vs;
    std::vector<SpeakerLevelEmbedding> cands;
    for (std::size_t i = 0; i < n; ++i) {
      // every third pool duplicates an earlier candidate to force ties
      Vector v = (trial % 3 == 0 && i > 0 && rng.below(3) == 0)
                     ? vs[rng.below(i)]
                     : oracle::random_vector(rng, dim);
      vs.push_back(v);
      cands.push_back({"c" + std::to_string(i), v, 1});
    }
    const EmbeddingPool pool(cands);
    const SpeakerLevelEmbedding src{"src", oracle::random_vector(rng, dim), 1};
    const auto dist = oracle::distances(src.vector, vs);
    for (bool far : {false, true}) {
      const Vector got = anonymize_baseline(
          src, pool, {k, far ? Direction::Far : Direction::Near, Metric::Cosine});
      const Vector ref =
          oracle::baseline_by_subset_enumeration(src.vector, vs, k, far, dist);
      mismatches += got != ref;
    }
  }
  detail << "100 pools x {near, far}, " << mismatches << " mismatches";
  return mismatches == 0;
}

bool eer_oracle(std::ostringstream &detail) {
  Rng rng(1006);
  int mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    ScoreSet s;
    const std::size_t ng = 1 + rng.below(200), ni = 1 + rng.below(200);
    const double shift = rng.uniform(0.0, 2.0);
    const bool ties = trial % 4 == 0;
    auto draw = [&](double mu) {
      const double x = rng.normal(mu, 1.0);
      return ties ? std::round(x * 4) / 4 : x;
    };
    for (std::size_t i = 0; i < ng; ++i) s.genuine.push_back(draw(shift));
    for (std::size_t i = 0; i < ni; ++i) s.impostor.push_back(draw(0.0));
    const auto got = compute_eer(s);
    const auto ref = oracle::eer_by_full_sweep(s.genuine, s.impostor);
    mismatches += got.eer != ref.eer || got.threshold != ref.threshold;
  }
  const double zero = compute_eer({{0.9, 0.8, 0.7}, {0.1, 0.2, 0.3}}).eer;
  const double half = compute_eer({{0.5, 0.5}, {0.5, 0.5}}).eer;
  detail << "200 sets, " << mismatches << " mismatches; separated " << zero
         << ", identical " << half;
  return mismatches == 0 && zero == 0.0 && half == 0.5;
}

bool directional_privacy(std::ostringstream &detail) {
  const auto t0 = Clock::now();
  const fs::path dir = fs::temp_directory_path() / "anonvec_acceptance_dir";
  fs::remove_all(dir);
  FixtureSpec spec;  // 20 speakers x 10 utterances, D = 512, pool of 20
  spec.seed = 1;
  auto cfg = write_fixture(make_fixture(spec), dir, spec.seed);
  cfg.k = spec.pool_speakers / 2;

  bool ok = true;
  for (auto kind : {AnonymizerKind::BaselineFar, AnonymizerKind::Reprogram}) {
    cfg.anonymizer = kind;
    const auto o = cmd_evaluate(cfg);
    double e[3] = {0, 0, 0};
    for (const auto &r : o.report.results)
      e[static_cast<int>(r.scenario)] = r.eer;
    const double oo = e[0], oa = e[1], aa = e[2];
    detail << to_string(kind) << " OO " << oo << " OA " << oa << " AA " << aa
           << "; ";
    ok = ok && oa > oo && aa > oo && oo < 0.05;
  }
  const double secs = seconds_since(t0);
  detail << secs << " s";
  fs::remove_all(dir);
  return ok && secs < 60.0;
}

bool determinism(std::ostringstream &detail) {
  const fs::path dir = fs::temp_directory_path() / "anonvec_acceptance_det";
  fs::remove_all(dir);
  FixtureSpec spec;
  spec.seed = 7;
  write_fixture(make_fixture(spec), dir, spec.seed);
  const std::string cli = ANONVEC_CLI;
  const std::string common =
      " --config " + (dir / "config.json").string() + " --seed 7" +
      " --set checkpoint=" + (dir / "out" / "theta.json").string() +
      " >/dev/null 2>&1";

  std::string reports[2], anonymized[2];
  for (int run = 0; run < 2; ++run) {
    fs::remove_all(dir / "out");
    for (const char *cmd : {"train-theta", "anonymize", "evaluate"}) {
      const int rc = std::system((cli + " " + cmd + common).c_str());
      if (rc != 0) {
        detail << cmd << " exited with status " << rc;
        return false;
      }
    }
    reports[run] = slurp(dir / "out" / "report.json") +
                   slurp(dir / "out" / "report.txt");
    anonymized[run] = slurp(dir / "out" / "anonymized.jsonl");
  }
  fs::remove_all(dir);
  detail << "report " << reports[0].size() << " bytes, "
         << (reports[0] == reports[1] ? "identical" : "DIFFERENT")
         << "; anonymized output "
         << (anonymized[0] == anonymized[1] ? "identical" : "DIFFERENT");
  return !reports[0].empty() && reports[0] == reports[1] &&
         anonymized[0] == anonymized[1];
}

bool monotone_descent(std::ostringstream &detail) {
  Rng rng(1009);
  int violations = 0;
  std::size_t steps = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t dim = 4 + rng.below(60), cond = rng.below(5);
    const auto model = random_proxy(dim, cond, 4 + rng.below(16),
                                    2 + rng.below(8), rng.engine()());
    TrainingSet ts;
    for (int r = 0, n = 1 + static_cast<int>(rng.below(6)); r < n; ++r)
      ts.push_back({{"s", oracle::random_vector(rng, dim), 1},
                    oracle::random_vector(rng, cond),
                    {oracle::random_vector(rng, model.output_dim())}});
    OptimizerConfig cfg;
    cfg.seed = rng.engine()();
    cfg.init = InitKind::SeededUniform;
    cfg.step_size = rng.uniform(0.5, 20.0);  // large steps force backtracking
    cfg.max_iters = 80;
    cfg.backtracking = true;
    const auto res =
        optimize(ts, model, cfg, rng.uniform(0.02, 0.3), rng.uniform(0.0, 2.0));
    for (std::size_t i = 1; i < res.trace.size(); ++i)
      violations += res.trace[i].objective > res.trace[i - 1].objective;
    steps += res.trace.size();
  }
  detail << "20 configs, " << steps << " trace entries, " << violations
         << " increases";
  return violations == 0;
}

}  // namespace

int main() {
  criterion("gradient-correctness", gradient_correctness);
  criterion("constraint-satisfaction", constraint_satisfaction);
  criterion("parameter-budget", parameter_budget);
  criterion("projection-optimality", projection_optimality);
  criterion("baseline-oracle-equivalence", baseline_oracle);
  criterion("eer-oracle-equivalence", eer_oracle);
  criterion("directional-privacy", directional_privacy);
  criterion("determinism", determinism);
  criterion("monotone-descent", monotone_descent);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
