// Copyright (c) 2026 The EdgeFlow Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef EDGEFLOW_SESSION_HPP
#define EDGEFLOW_SESSION_HPP

#include <memory>
#include <string>
#include <vector>

#include "checkpoint.hpp"
#include "config.hpp"
#include "decoder.hpp"
#include "diffusion.hpp"
#include "metrics.hpp"
#include "nn.hpp"
#include "policy.hpp"

namespace edgeflow {

struct StepStats {
  double loss_gfn = 0.0;
  double loss_ldm = 0.0;
  double loss_total = 0.0;
  std::vector<double> log_rewards;
};

struct SampleRow {
  std::vector<int> trajectory;     // insertion order
  std::vector<double> c_hat;       // blended condition representation
  std::vector<double> generated;   // reverse-diffusion output
};

struct EvalReport {
  std::vector<MetricRow> rows;
  bool failed = false;
  std::string csv;
  std::string json;
  std::string samples_csv;  // diversity suite: condition fields then data coords
};

struct EnumerateReport {
  std::uint64_t terminal_sets = 0;
  bool bijection_ok = false;
  double probability_sum = 0.0;
  double min_probability = 0.0;
  double max_probability = 0.0;
  double reward_ratio = 0.0;  // best/worst terminal reward (analytic mode)
};

// One training/evaluation run: owns the parameters, optimizer, schedule,
// reward oracle, synthetic data and the RNG stream. Checkpoints capture the
// entire state, so save -> load -> continue matches an uninterrupted run.
class Session {
 public:
  static std::unique_ptr<Session> create(const TrainConfig& config);
  static std::unique_ptr<Session> open(const std::string& checkpoint_path);
  static std::unique_ptr<Session> from_checkpoint(const Checkpoint& checkpoint);

  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const TrainConfig& config() const { return cfg_; }
  std::uint64_t step() const { return step_; }
  std::string instance_name() const;

  // One optimizer step over a freshly sampled batch. Returns all losses and
  // the per-trajectory log-rewards of the sampled batch.
  StepStats train_step();

  // Runs train_step until the step counter reaches max_steps (or the
  // override), logging and checkpointing into out_dir when it is nonempty.
  void train(const std::string& out_dir, std::uint64_t steps_override = 0);

  void save(const std::string& path) const;
  Checkpoint to_checkpoint() const;

  // Pure-policy sampling: rolls out trajectories, decodes them (optionally
  // with extra appended edges), and draws one reverse-diffusion sample per
  // trajectory.
  std::vector<SampleRow> sample(int m_override, const std::vector<int>& extra_edges,
                                std::uint64_t seed);
  static std::string sample_rows_to_csv(const std::vector<SampleRow>& rows);

  // suite: "proportionality" | "residuals" | "diversity".
  EvalReport eval(const std::string& suite, std::uint64_t seed, int num_samples);

  // Finite-difference audit of the composite loss gradient on a frozen
  // batch; returns the max relative error over all trainable parameters.
  double grad_check_composite(double eps);

  EnumerateReport enumerate_check();

  // Component access for tests and the metrics layer.
  const PolicyNet& policy() const { return policy_; }
  const DecoderNet& decoder() const { return decoder_; }
  const DenoiserNet& denoiser() const { return denoiser_; }
  const NoiseSchedule& schedule() const { return schedule_; }
  const MixtureReward& mixture() const { return mixture_; }
  const Tensor& condition() const { return condition_; }
  const ToyDataset& dataset() const { return dataset_; }
  ParameterStore& parameters() { return store_; }
  Rng& rng() { return rng_; }

  // Reward-proportional target over all terminal sets (analytic mode only).
  TerminalDistribution target() const;

  // Log-reward of one terminal edge set under the analytic oracle.
  double terminal_log_reward(const std::vector<int>& terminal_set) const;

 private:
  explicit Session(TrainConfig cfg);
  void build();
  void resolve_mixture();
  double current_explore() const;
  Tensor generate_batch(int count, const Tensor& c_hat_rows, Rng& rng) const;

  TrainConfig cfg_;
  ParameterStore store_;
  PolicyNet policy_;
  DecoderNet decoder_;
  DenoiserNet denoiser_;
  NoiseSchedule schedule_;
  MixtureReward mixture_;
  ToyDataset dataset_;
  Tensor condition_;
  Adam optimizer_;
  Rng rng_;
  std::uint64_t step_ = 0;
};

}  // namespace edgeflow

#endif  // EDGEFLOW_SESSION_HPP
