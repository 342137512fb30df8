// Copyright (c) 2026 The EdgeFlow Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef EDGEFLOW_METRICS_HPP
#define EDGEFLOW_METRICS_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "decoder.hpp"
#include "diffusion.hpp"
#include "latent_graph.hpp"
#include "policy.hpp"
#include "tensor.hpp"

namespace edgeflow {

// Distribution over terminal edge sets. Support entries are sorted edge
// tuples, listed in lexicographic order for exhaustive distributions and in
// first-seen order for empirical ones.
struct TerminalDistribution {
  std::vector<std::vector<int>> support;
  std::vector<double> probability;

  void check_normalized(double tol = 1e-9) const;
};

// Exhaustive reward-proportional target p(x) = R(x)/Z over all C(E,S)
// terminal sets, with R evaluated through decode -> blend -> mixture reward.
TerminalDistribution target_distribution(const MixtureReward& mixture,
                                         const GraphConfig& graph,
                                         const DecoderNet& decoder,
                                         const Tensor& condition, double gamma,
                                         std::uint64_t enumeration_cap);

// Frequencies of terminal sets over pure-policy rollouts. Rollouts are run
// until at least num_sets sets are collected (each rollout contributes M).
TerminalDistribution empirical_terminal_distribution(const PolicyNet& policy,
                                                     const GraphConfig& graph,
                                                     const Tensor& condition,
                                                     int num_sets, Rng& rng);

// Half L1 distance between two distributions over the union support.
double tv_distance(const TerminalDistribution& p, const TerminalDistribution& q);

// Policy evaluation at one enumerated state, used by the residual audit.
struct StateEvaluation {
  double log_flow = 0.0;
  std::vector<double> log_forward;   // over all E edges
  std::vector<double> log_backward;  // over all E edges (added edges meaningful)
};

using StateEvaluator = std::function<StateEvaluation(const std::vector<int>&)>;
using TerminalLogReward = std::function<double(const std::vector<int>&)>;

struct ResidualStats {
  double max_abs = 0.0;
  double mean_square = 0.0;
  std::uint64_t transitions = 0;
};

// Evaluates the flow-consistency residual of every legal transition over
// the exhaustively enumerated state space (set identity), including the
// terminal reward-matching terms. The per-transition residual follows the
// same index/sign convention the training accumulator uses, so a checkpoint
// with zero training loss on full support has zero residuals here.
ResidualStats db_residuals(const StateEvaluator& evaluate, int total_edges,
                           int budget, const TerminalLogReward& terminal_log_reward,
                           std::uint64_t enumeration_cap);

// Wraps a policy network as a StateEvaluator over sorted edge-set states.
StateEvaluator make_policy_evaluator(const PolicyNet& policy, const GraphConfig& graph,
                                     const Tensor& condition);

enum class VendiKernel { kNormalizedLinear, kRbf };

// exp of the Shannon entropy of the eigenvalues of K/n. bandwidth <= 0
// selects the median pairwise distance for the RBF kernel.
double vendi_score(const Tensor& samples, VendiKernel kernel, double bandwidth = 0.0);

struct EdgeFrequencyDelta {
  int edge = 0;
  double frequency_a = 0.0;
  double frequency_b = 0.0;

  double delta() const { return frequency_a - frequency_b; }
};

// Top-k edges ranked by inclusion-frequency difference between two
// trajectory collections; ties break toward the smaller edge index.
std::vector<EdgeFrequencyDelta> edge_frequency_delta(
    const std::vector<std::vector<int>>& trajectories_a,
    const std::vector<std::vector<int>>& trajectories_b, int top_k, int total_edges);

// Fraction of centers with at least one sample within the given radius.
double mode_coverage(const Tensor& samples, const Tensor& centers, double radius);

// Report plumbing: metric rows serialized as CSV and a JSON mirror.
struct MetricRow {
  std::string metric;
  std::string instance;
  std::uint64_t seed = 0;
  double value = 0.0;
};

std::string metrics_to_csv(const std::vector<MetricRow>& rows);
std::string metrics_to_json(const std::vector<MetricRow>& rows);

// Exact double formatting used across every emitted file.
std::string format_double(double v);

}  // namespace edgeflow

#endif  // EDGEFLOW_METRICS_HPP
