// Copyright (c) 2026 The EdgeFlow Authors
// SPDX-License-Identifier: Apache-2.0

#include "policy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace edgeflow {

PolicyNet PolicyNet::create(ParameterStore& store, const PolicyDims& dims, Rng& rng) {
  PolicyNet net;
  net.dims = dims;
  const std::size_t h = dims.hidden();
  net.condition_encoder = make_linear(store, "policy/cond_enc", dims.condition_dim, dims.h_c, rng);
  net.state_encoder = make_linear(store, "policy/state_enc", dims.total_edges, dims.h_g, rng);
  net.forward_hidden0 = make_linear(store, "policy/fw/hidden0", h, h, rng);
  net.forward_hidden1 = make_linear(store, "policy/fw/hidden1", h, h, rng);
  net.forward_out = make_linear(store, "policy/fw/out", h, dims.total_edges + 1, rng);
  net.backward_hidden0 = make_linear(store, "policy/bw/hidden0", h, h, rng);
  net.backward_hidden1 = make_linear(store, "policy/bw/hidden1", h, h, rng);
  net.backward_out = make_linear(store, "policy/bw/out", h, dims.total_edges, rng);
  return net;
}

Var encode_condition(Tape& tape, const PolicyNet& net, const Tensor& condition) {
  if (condition.size() != net.dims.condition_dim)
    throw ShapeError("encode_condition: expected condition of size " +
                     std::to_string(net.dims.condition_dim));
  if (!condition.all_finite())
    throw NumericError("encode_condition: condition has non-finite entries");
  Tensor row({1, net.dims.condition_dim});
  for (std::size_t i = 0; i < condition.size(); ++i) row[i] = condition[i];
  Var x = tape.input(std::move(row), "condition");
  return tape.tanh_(apply_linear(tape, net.condition_encoder, x));
}

namespace {

Var mlp_two_hidden(Tape& tape, const Linear& l0, const Linear& l1,
                   const Linear& out, Var x) {
  Var h0 = tape.tanh_(apply_linear(tape, l0, x));
  Var h1 = tape.tanh_(apply_linear(tape, l1, h0));
  return apply_linear(tape, out, h1);
}

}  // namespace

PolicyOutputs policy_forward(Tape& tape, const PolicyNet& net,
                             const TrajectorySet& set, Var condition_encoding) {
  const std::size_t m = static_cast<std::size_t>(set.size());
  const std::size_t e = static_cast<std::size_t>(set.total_edges);
  if (e != net.dims.total_edges)
    throw ShapeError("policy_forward: trajectory set edge count mismatch");
  if (set.length() >= set.budget)
    throw ContractError("policy_forward: no legal forward action, budget reached");

  // Multi-hot state representation: the forward mask read as doubles.
  Tensor state({m, e});
  for (std::size_t i = 0; i < m * e; ++i)
    state[i] = set.forward_mask[i] ? 1.0 : 0.0;
  Var state_var = tape.input(std::move(state), "graph_state");
  Var rep_g = tape.tanh_(apply_linear(tape, net.state_encoder, state_var));
  Var rep_c = tape.repeat_row(condition_encoding, m);
  Var rep = tape.concat_cols(rep_g, rep_c);

  Var pred = mlp_two_hidden(tape, net.forward_hidden0, net.forward_hidden1,
                            net.forward_out, rep);
  Var forward_logits = tape.slice_cols(pred, 0, e);
  Var log_flow = tape.slice_cols(pred, e, e + 1);

  PolicyOutputs outputs;
  outputs.log_forward = tape.masked_log_softmax(forward_logits, set.forward_mask);
  outputs.log_flow = log_flow;
  if (set.length() > 0) {
    Var backward_logits = mlp_two_hidden(tape, net.backward_hidden0,
                                         net.backward_hidden1, net.backward_out, rep);
    outputs.log_backward = tape.masked_log_softmax(backward_logits, set.backward_mask);
  }
  return outputs;
}

std::vector<int> sample_actions(const Tensor& log_forward,
                                const std::vector<std::uint8_t>& forward_mask,
                                double explore, Rng& rng) {
  const std::size_t m = log_forward.rows();
  const std::size_t e = log_forward.cols();
  if (forward_mask.size() != m * e)
    throw ShapeError("sample_actions: mask size mismatch");
  if (explore < 0.0 || explore > 1.0)
    throw ContractError("sample_actions: explore outside [0,1]");

  std::vector<int> actions(m, 0);
  std::vector<double> probs(e);
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t legal = 0;
    for (std::size_t j = 0; j < e; ++j)
      if (!forward_mask[i * e + j]) ++legal;
    if (legal == 0)
      throw ContractError("sample_actions: fully masked row");
    double total = 0.0;
    for (std::size_t j = 0; j < e; ++j) {
      if (forward_mask[i * e + j]) {
        probs[j] = 0.0;
        continue;
      }
      const double p = std::exp(log_forward.at(i, j));
      probs[j] = (1.0 - explore) * p + explore / static_cast<double>(legal);
      total += probs[j];
    }
    const double u = rng.uniform01() * total;
    double acc = 0.0;
    int chosen = -1;
    for (std::size_t j = 0; j < e; ++j) {
      if (probs[j] <= 0.0) continue;
      acc += probs[j];
      chosen = static_cast<int>(j);
      if (u < acc) break;
    }
    actions[i] = chosen + 1;  // 1-based edge index
  }
  return actions;
}

LLDiff LLDiff::init(Tape& tape, int budget, int num_trajectories) {
  if (budget < 1) throw ContractError("LLDiff: budget must be at least 1");
  if (num_trajectories < 1) throw ContractError("LLDiff: need trajectories");
  LLDiff acc;
  acc.m_ = num_trajectories;
  acc.rows_.resize(static_cast<std::size_t>(budget) + 1);
  for (int i = 0; i <= budget; ++i)
    acc.rows_[static_cast<std::size_t>(i)] = tape.input(
        Tensor::zeros({static_cast<std::size_t>(num_trajectories), 1}),
        "ll_diff_row_" + std::to_string(i));
  return acc;
}

namespace {

std::vector<std::size_t> to_zero_based(const std::vector<int>& actions) {
  std::vector<std::size_t> idx(actions.size());
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (actions[i] < 1) throw IndexError("action index must be 1-based");
    idx[i] = static_cast<std::size_t>(actions[i] - 1);
  }
  return idx;
}

}  // namespace

void LLDiff::accumulate(Tape& tape, int step, const PolicyOutputs& outputs,
                        const std::vector<int>& actions,
                        const std::vector<int>& previous_actions) {
  const int budget = this->budget();
  if (step < 1 || step > budget)
    throw ContractError("LLDiff::accumulate: step outside 1..S");
  if (static_cast<int>(actions.size()) != m_)
    throw ShapeError("LLDiff::accumulate: one action per trajectory required");

  Var forward_term = tape.take_per_row(outputs.log_forward, to_zero_based(actions));
  rows_[static_cast<std::size_t>(step)] = tape.add(
      rows_[static_cast<std::size_t>(step)], tape.add(outputs.log_flow, forward_term));

  if (step > 1) {
    if (!outputs.log_backward)
      throw ContractError("LLDiff::accumulate: missing backward distribution");
    if (static_cast<int>(previous_actions.size()) != m_)
      throw ShapeError("LLDiff::accumulate: previous actions size mismatch");
    Var backward_term =
        tape.take_per_row(*outputs.log_backward, to_zero_based(previous_actions));
    rows_[static_cast<std::size_t>(step - 1)] =
        tape.sub(rows_[static_cast<std::size_t>(step - 1)],
                 tape.sub(outputs.log_flow, backward_term));
  }
}

void LLDiff::subtract_terminal_log_reward(Tape& tape,
                                          const std::vector<double>& log_rewards) {
  if (static_cast<int>(log_rewards.size()) != m_)
    throw ShapeError("terminal log rewards: one value per trajectory required");
  Tensor r({static_cast<std::size_t>(m_), 1});
  for (std::size_t i = 0; i < log_rewards.size(); ++i) {
    if (!std::isfinite(log_rewards[i]))
      throw NumericError("terminal log reward is non-finite");
    r.at(i, 0) = log_rewards[i];
  }
  Var rv = tape.input(std::move(r), "log_rewards");
  rows_.back() = tape.sub(rows_.back(), rv);
}

Var LLDiff::squared_mean(Tape& tape) const {
  // Row 0 is identically zero but still counts toward the mean.
  Var total = tape.sum_all(tape.square(rows_[0]));
  for (std::size_t i = 1; i < rows_.size(); ++i)
    total = tape.add(total, tape.sum_all(tape.square(rows_[i])));
  const double denom = static_cast<double>(rows_.size()) * static_cast<double>(m_);
  return tape.affine(total, 1.0 / denom, 0.0);
}

Tensor LLDiff::row_value(const Tape& tape, int row) const {
  return tape.value(rows_.at(static_cast<std::size_t>(row)));
}

TrajectorySet rollout_trajectories(const PolicyNet& net, const GraphConfig& graph,
                                   const Tensor& condition, double explore, Rng& rng) {
  Tape tape;
  TrajectorySet set = init_trajectories(graph);
  Var c_enc = encode_condition(tape, net, condition);
  const int budget = graph.steps();
  for (int i = 1; i <= budget; ++i) {
    PolicyOutputs outputs = policy_forward(tape, net, set, c_enc);
    std::vector<int> actions =
        sample_actions(tape.value(outputs.log_forward), set.forward_mask, explore, rng);
    append_edges(set, actions);
  }
  return set;
}

std::vector<std::vector<int>> rollout_terminal_sets(const PolicyNet& net,
                                                    const GraphConfig& graph,
                                                    const Tensor& condition,
                                                    double explore, Rng& rng) {
  TrajectorySet set = rollout_trajectories(net, graph, condition, explore, rng);
  std::vector<std::vector<int>> result;
  result.reserve(set.edges.size());
  for (auto t : set.edges) {
    std::sort(t.begin(), t.end());
    result.push_back(std::move(t));
  }
  return result;
}

}  // namespace edgeflow
