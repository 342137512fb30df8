// Copyright (c) 2026 The EdgeFlow Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end over the EdgeFlow C API.
//
// Exit codes: 0 success, 2 config/usage error, 3 numeric failure,
// 4 acceptance (eval threshold) failure.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "edgeflow/edgeflow.h"

namespace {

int exit_code_of(ef_status status) {
  switch (status) {
    case EF_OK:
      return 0;
    case EF_ERROR_NUMERIC:
      return 3;
    case EF_ERROR_ACCEPTANCE:
      return 4;
    default:
      return 2;  // config, IO, format and usage problems
  }
}

int fail(ef_status status) {
  std::fprintf(stderr, "error: %s\n", ef_last_error());
  return exit_code_of(status);
}

ef_status open_session(const std::string& config, const std::string& checkpoint,
                       std::int64_t seed, ef_session** session) {
  if (!checkpoint.empty()) return ef_session_open(checkpoint.c_str(), session);
  return ef_session_create(config.c_str(), nullptr, seed, session);
}

struct SessionGuard {
  ef_session* handle = nullptr;
  ~SessionGuard() { ef_session_close(handle); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EdgeFlow: latent-graph trajectory sampler with a toy conditional denoiser"};
  app.require_subcommand(1);

  std::string config;
  std::string checkpoint;
  std::string out_dir = "out";
  std::string extra_edges;
  std::string suite;
  std::uint64_t samples = 0;
  std::int64_t seed = -1;
  std::uint64_t steps = 0;
  double eps = 1e-5;

  auto* train = app.add_subcommand("train", "Train from a config (or resume a checkpoint)");
  train->add_option("--config", config, "Config file");
  train->add_option("--checkpoint", checkpoint, "Checkpoint to resume from");
  train->add_option("--seed", seed, "Override the config seed");
  train->add_option("--out-dir", out_dir, "Output directory for logs and checkpoints");
  train->add_option("--steps", steps, "Override max_steps");

  auto* sample = app.add_subcommand("sample", "Sample trajectories and generate data");
  sample->add_option("--checkpoint", checkpoint, "Checkpoint to sample from")->required();
  sample->add_option("--samples", samples, "Trajectory count override (M)");
  sample->add_option("--extra-edges", extra_edges,
                     "Comma-separated edges appended to every trajectory");
  sample->add_option("--seed", seed, "Sampling seed");
  sample->add_option("--out-dir", out_dir, "Output directory for samples.csv");

  auto* eval = app.add_subcommand("eval", "Run an evaluation suite");
  eval->add_option("suite", suite, "proportionality|residuals|diversity")->required();
  eval->add_option("--checkpoint", checkpoint, "Checkpoint to evaluate")->required();
  eval->add_option("--samples", samples, "Sample count (suite default when omitted)");
  eval->add_option("--seed", seed, "Evaluation seed");
  eval->add_option("--out-dir", out_dir, "Output directory for reports");

  auto* enumerate = app.add_subcommand("enumerate-check", "Enumeration preflight report");
  enumerate->add_option("--config", config, "Config file");
  enumerate->add_option("--checkpoint", checkpoint, "Checkpoint (instead of config)");
  enumerate->add_option("--seed", seed, "Override the config seed");
  enumerate->add_option("--out-dir", out_dir, "Output directory for enumerate.json");

  auto* gradcheck = app.add_subcommand("grad-check", "Finite-difference gradient audit");
  gradcheck->add_option("--config", config, "Config file");
  gradcheck->add_option("--checkpoint", checkpoint, "Checkpoint (instead of config)");
  gradcheck->add_option("--seed", seed, "Override the config seed");
  gradcheck->add_option("--eps", eps, "Finite-difference step (in [1e-7, 1e-3])");

  CLI11_PARSE(app, argc, argv);

  if ((config.empty() && checkpoint.empty()) || (!config.empty() && !checkpoint.empty())) {
    if (app.got_subcommand(train) || app.got_subcommand(enumerate) ||
        app.got_subcommand(gradcheck)) {
      std::fprintf(stderr, "error: provide exactly one of --config or --checkpoint\n");
      return 2;
    }
  }

  SessionGuard guard;
  ef_status status = open_session(config, checkpoint, seed, &guard.handle);
  if (status != EF_OK) return fail(status);

  if (app.got_subcommand(train)) {
    status = ef_session_train(guard.handle, out_dir.c_str(), steps);
    if (status != EF_OK) return fail(status);
    std::uint64_t step = 0;
    ef_session_step(guard.handle, &step);
    std::printf("trained to step %" PRIu64 "; outputs in %s\n", step, out_dir.c_str());
  } else if (app.got_subcommand(sample)) {
    std::filesystem::create_directories(out_dir);
    const std::string path = out_dir + "/samples.csv";
    status = ef_session_sample(guard.handle, static_cast<std::uint32_t>(samples),
                               extra_edges.c_str(), seed < 0 ? 0 : static_cast<std::uint64_t>(seed),
                               path.c_str());
    if (status != EF_OK) return fail(status);
    std::printf("wrote %s\n", path.c_str());
  } else if (app.got_subcommand(eval)) {
    status = ef_session_eval(guard.handle, suite.c_str(),
                             seed < 0 ? 0 : static_cast<std::uint64_t>(seed),
                             static_cast<std::uint32_t>(samples), out_dir.c_str());
    if (status == EF_ERROR_ACCEPTANCE) {
      std::fprintf(stderr, "suite %s: FAIL (%s)\n", suite.c_str(), ef_last_error());
      return 4;
    }
    if (status != EF_OK) return fail(status);
    std::printf("suite %s: PASS; reports in %s\n", suite.c_str(), out_dir.c_str());
  } else if (app.got_subcommand(enumerate)) {
    std::filesystem::create_directories(out_dir);
    const std::string path = out_dir + "/enumerate.json";
    status = ef_session_enumerate_check(guard.handle, path.c_str());
    if (status != EF_OK) return fail(status);
    std::printf("wrote %s\n", path.c_str());
  } else if (app.got_subcommand(gradcheck)) {
    double err = 0.0;
    status = ef_session_grad_check(guard.handle, eps, &err);
    if (status != EF_OK) return fail(status);
    std::printf("max relative gradient error: %.3e\n", err);
    if (!(err < 1e-4)) {
      std::fprintf(stderr, "grad-check: FAIL (threshold 1e-4)\n");
      return 4;
    }
  }
  return 0;
}
