// Copyright (c) 2026 The EdgeFlow Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef EDGEFLOW_POLICY_HPP
#define EDGEFLOW_POLICY_HPP

#include <optional>
#include <vector>

#include "latent_graph.hpp"
#include "nn.hpp"
#include "rng.hpp"
#include "tape.hpp"

namespace edgeflow {

struct PolicyDims {
  std::size_t condition_dim = 16;  // S_c
  std::size_t h_c = 64;
  std::size_t h_g = 64;
  std::size_t total_edges = 6;  // E

  std::size_t hidden() const { return h_c + h_g; }
};

// The graphs generator: condition encoder, graph-state encoder, forward
// head (E forward logits + trailing log state-flow column) and backward
// head (E logits). Parameters live in a ParameterStore under "policy/...".
struct PolicyNet {
  PolicyDims dims;
  Linear condition_encoder;  // S_c -> h_c
  Linear state_encoder;      // E -> h_g  (input: multi-hot of added edges)
  Linear forward_hidden0;    // h -> h
  Linear forward_hidden1;    // h -> h
  Linear forward_out;        // h -> E+1
  Linear backward_hidden0;   // h -> h
  Linear backward_hidden1;   // h -> h
  Linear backward_out;       // h -> E

  static PolicyNet create(ParameterStore& store, const PolicyDims& dims, Rng& rng);
};

// Per-step policy outputs for M trajectories. log_forward rows normalize
// over the not-yet-added edges; log_backward (present once at least one
// edge was added) normalizes over exactly the added edges; log_flow is a
// free real per trajectory.
struct PolicyOutputs {
  Var log_forward;                 // {M, E}
  std::optional<Var> log_backward; // {M, E}
  Var log_flow;                    // {M, 1}
};

// Deterministic encoding of the condition vector, reused across all steps
// of a rollout.
Var encode_condition(Tape& tape, const PolicyNet& net, const Tensor& condition);

PolicyOutputs policy_forward(Tape& tape, const PolicyNet& net,
                             const TrajectorySet& set, Var condition_encoding);

// One multinomial draw per trajectory from exp(log_forward), optionally
// mixed with a uniform distribution over legal edges (exploration). Returns
// 1-based edge indices.
std::vector<int> sample_actions(const Tensor& log_forward,
                                const std::vector<std::uint8_t>& forward_mask,
                                double explore, Rng& rng);

// The (S+1) x M log-likelihood-difference accumulator of the detailed-
// balance objective. Row 0 is reserved for the initial state and stays
// zero; rows 1..S collect the per-transition terms.
class LLDiff {
 public:
  static LLDiff init(Tape& tape, int budget, int num_trajectories);

  // Applies the step-i update: row i gains log_flow + log_forward at the
  // new actions; for i > 1 row i-1 loses log_flow - log_backward at the
  // previous step's actions (the edges whose removal undoes transition i-1).
  void accumulate(Tape& tape, int step, const PolicyOutputs& outputs,
                  const std::vector<int>& actions,
                  const std::vector<int>& previous_actions);

  // Terminal correction: row S -= log R, one value per trajectory.
  void subtract_terminal_log_reward(Tape& tape,
                                    const std::vector<double>& log_rewards);

  // Mean of squared entries over the full (S+1) x M accumulator.
  Var squared_mean(Tape& tape) const;

  Tensor row_value(const Tape& tape, int row) const;
  int budget() const { return static_cast<int>(rows_.size()) - 1; }
  int trajectories() const { return m_; }

 private:
  std::vector<Var> rows_;  // rows_[0] is the untouched zero row
  int m_ = 0;
};

// Samples one complete trajectory set from the policy (no gradient use).
TrajectorySet rollout_trajectories(const PolicyNet& net, const GraphConfig& graph,
                                   const Tensor& condition, double explore, Rng& rng);

// Same rollout, but returns only the terminal edge sets, sorted within each
// trajectory.
std::vector<std::vector<int>> rollout_terminal_sets(const PolicyNet& net,
                                                    const GraphConfig& graph,
                                                    const Tensor& condition,
                                                    double explore, Rng& rng);

}  // namespace edgeflow

#endif  // EDGEFLOW_POLICY_HPP
