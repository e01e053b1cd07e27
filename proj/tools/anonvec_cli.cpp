// tools/anonvec_cli.cpp

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

// Exit codes: 0 success, 1 internal error, 2 user or input error.
// ANONVEC_LOG=error|info|debug sets log verbosity (default info).

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "anonvec/anonvec.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUser = 2;

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::vector<std::string> overrides;
};

void add_common(CLI::App *cmd, CommonOptions &opts) {
  cmd->add_option("--config", opts.config, "JSON config file")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", opts.seed, "Experiment seed (overrides config)");
  cmd->add_option("--out", opts.out, "Output directory (overrides config)");
  cmd->add_option("--set", opts.overrides,
                  "Override a config field, e.g. --set optimizer.max_iters=50")
      ->take_all();
}

anonvec::ExperimentConfig resolve(const CommonOptions &opts) {
  auto cfg = anonvec::resolve_config(opts.config, opts.seed, opts.out,
                                     opts.overrides);
  spdlog::debug("resolved config: {}", anonvec::to_json(cfg).dump());
  return cfg;
}

void setup_logging() {
  auto logger = spdlog::stderr_logger_mt("anonvec");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  const char *env = std::getenv("ANONVEC_LOG");
  const std::string level = env ? env : "info";
  if (level == "debug")
    spdlog::set_level(spdlog::level::debug);
  else if (level == "error")
    spdlog::set_level(spdlog::level::err);
  else
    spdlog::set_level(spdlog::level::info);
}

int run_train_theta(const CommonOptions &opts) {
  const auto cfg = resolve(opts);
  const auto o = anonvec::cmd_train_theta(cfg);
  const auto &trace = o.result.trace;
  spdlog::info("trained theta: {} iterations, objective {:.6g}, mae {:.6g}",
               o.result.iters_run, trace.empty() ? 0.0 : trace.back().objective,
               anonvec::mae_masked(o.result.params));
  spdlog::info("wrote {} and {}", o.checkpoint_path, o.trace_path);
  return kExitOk;
}

int run_anonymize(const CommonOptions &opts) {
  const auto cfg = resolve(opts);
  const auto o = anonvec::cmd_anonymize(cfg);
  spdlog::info("anonymized {} speakers with {} -> {}", o.records.size(),
               anonvec::to_string(cfg.anonymizer), o.output_path);
  return kExitOk;
}

int run_evaluate(const CommonOptions &opts) {
  const auto cfg = resolve(opts);
  const auto o = anonvec::cmd_evaluate(cfg);
  std::cout << anonvec::render_report(anonvec::to_json(o.report));
  spdlog::info("wrote {} and {}", o.text_path, o.json_path);
  return kExitOk;
}

int run_report(const CommonOptions &opts, const std::string &path) {
  std::string report_path = path;
  if (report_path.empty()) {
    const auto cfg = resolve(opts);
    report_path = (std::filesystem::path(cfg.out) / "report.json").string();
  }
  std::cout << anonvec::render_report(anonvec::read_json_file(report_path));
  return kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
  setup_logging();

  CLI::App app{"anonvec: speaker-embedding anonymization and privacy "
               "evaluation"};
  app.require_subcommand(1);

  CommonOptions train_opts, anon_opts, eval_opts, report_opts;
  auto *train = app.add_subcommand(
      "train-theta", "Train the reprogramming perturbation on the train set");
  add_common(train, train_opts);

  auto *anon = app.add_subcommand(
      "anonymize", "Write one pseudo-speaker record per input speaker");
  add_common(anon, anon_opts);

  auto *eval = app.add_subcommand(
      "evaluate", "Compute OO/OA/AA equal error rates and write a report");
  add_common(eval, eval_opts);

  std::string report_path;
  auto *report =
      app.add_subcommand("report", "Print a saved report.json as a table");
  add_common(report, report_opts);
  report->add_option("report", report_path,
                     "report.json (default: <out>/report.json)");

  anonvec::FixtureSpec fixture;
  std::string fixture_dir = "fixture";
  std::uint64_t fixture_seed = 0;
  auto *mkfix = app.add_subcommand(
      "make-fixture", "Generate a synthetic clustered experiment + config");
  mkfix->add_option("--out", fixture_dir, "Directory to write into");
  mkfix->add_option("--seed", fixture_seed, "Fixture and experiment seed");
  mkfix->add_option("--dim", fixture.dim, "Embedding dimension");
  mkfix->add_option("--cond-dim", fixture.cond_dim, "Conditioning dimension");
  mkfix->add_option("--speakers", fixture.eval_speakers,
                    "Enrollment/trial speakers");
  mkfix->add_option("--pool-speakers", fixture.pool_speakers,
                    "Candidate pool speakers");
  mkfix->add_option("--train-speakers", fixture.train_speakers,
                    "Training speakers");

  std::size_t proxy_dim = anonvec::kDefaultDim, proxy_cond = 16,
              proxy_hidden = 64, proxy_output = 32;
  std::uint64_t proxy_seed = 0;
  std::string proxy_path;
  auto *mkproxy = app.add_subcommand(
      "make-proxy", "Write a seeded tanh->identity proxy weight file");
  mkproxy->add_option("path", proxy_path, "Output file")->required();
  mkproxy->add_option("--dim", proxy_dim, "Embedding dimension");
  mkproxy->add_option("--cond-dim", proxy_cond, "Conditioning dimension");
  mkproxy->add_option("--hidden", proxy_hidden, "Hidden width");
  mkproxy->add_option("--output-dim", proxy_output, "Output dimension");
  mkproxy->add_option("--seed", proxy_seed, "Weight seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUser;
  }

  try {
    if (train->parsed()) return run_train_theta(train_opts);
    if (anon->parsed()) return run_anonymize(anon_opts);
    if (eval->parsed()) return run_evaluate(eval_opts);
    if (report->parsed()) return run_report(report_opts, report_path);
    if (mkfix->parsed()) {
      fixture.seed = fixture_seed;
      const auto f = anonvec::make_fixture(fixture);
      anonvec::write_fixture(f, fixture_dir, fixture_seed);
      spdlog::info("wrote fixture to {} (config.json)", fixture_dir);
      return kExitOk;
    }
    if (mkproxy->parsed()) {
      anonvec::save_proxy(anonvec::random_proxy(proxy_dim, proxy_cond,
                                                proxy_hidden, proxy_output,
                                                proxy_seed),
                          proxy_path);
      spdlog::info("wrote proxy to {}", proxy_path);
      return kExitOk;
    }
  } catch (const anonvec::Error &e) {
    spdlog::error("{}", e.what());
    return e.kind() == anonvec::ErrorKind::NonFiniteObjective ? kExitInternal
                                                              : kExitUser;
  } catch (const std::exception &e) {
    spdlog::error("internal error: {}", e.what());
    return kExitInternal;
  }
  return kExitInternal;
}
