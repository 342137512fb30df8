// Copyright (c) 2026 The EdgeFlow Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef EDGEFLOW_LATENT_GRAPH_HPP
#define EDGEFLOW_LATENT_GRAPH_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "error.hpp"

namespace edgeflow {

// Number of undirected non-self-loop edges of an N-node graph: N(N-1)/2.
int edge_count(int num_nodes);

// Per-trajectory edge budget floor((1 - rho) * N(N-1)/2). Callers may
// override the result via GraphConfig::step_override when a published
// configuration disagrees with the formula.
int step_budget(int num_nodes, double sparsity);

// 1-based edge index <-> node pair under row-major upper-triangle order:
// 1 <-> (0,1), 2 <-> (0,2), ..., E <-> (N-2, N-1). Index 0 is reserved as
// the start sentinel and is never a valid argument here.
std::pair<int, int> edge_to_pair(int edge, int num_nodes);
int pair_to_edge(int i, int j, int num_nodes);

// Static description of the latent graph instance.
struct GraphConfig {
  int num_nodes = 4;
  double sparsity = 2.0 / 3.0;
  int step_override = 0;  // 0 = derive the budget from sparsity
  int num_trajectories = 4;

  int total_edges() const { return edge_count(num_nodes); }
  int steps() const;
  void validate() const;
};

// M growing edge trajectories plus the availability masks used by the
// policy heads. Mask bytes follow exclude-marked semantics: forward_mask
// is 1 where an edge was already added (so it is excluded from the forward
// distribution); backward_mask starts all-ones and drops to 0 exactly on
// added edges (so only those remain available to the backward head).
struct TrajectorySet {
  int total_edges = 0;  // E
  int budget = 0;       // S
  std::vector<std::vector<int>> edges;
  std::vector<std::uint8_t> forward_mask;   // M x E
  std::vector<std::uint8_t> backward_mask;  // M x E

  int size() const { return static_cast<int>(edges.size()); }
  int length() const;  // common current length of all trajectories
  bool complete() const { return length() == budget; }
  bool contains(int trajectory, int edge) const;

  // Asserts the without-replacement/mask invariants; throws on violation.
  void check_invariants() const;
};

TrajectorySet init_trajectories(int num_trajectories, int total_edges, int budget);
TrajectorySet init_trajectories(const GraphConfig& graph);

// Extends every trajectory by one edge (one action per trajectory) and
// updates both masks.
void append_edges(TrajectorySet& set, const std::vector<int>& actions);

// All C(E,S) size-S subsets of {1..E} in lexicographic order. Throws
// EnumerationError when the count exceeds cap.
std::vector<std::vector<int>> enumerate_terminal_sets(int total_edges,
                                                      int subset_size,
                                                      std::uint64_t cap);

// C(n,k), saturating at UINT64_MAX.
std::uint64_t binomial(int n, int k);

}  // namespace edgeflow

#endif  // EDGEFLOW_LATENT_GRAPH_HPP
