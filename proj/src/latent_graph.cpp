// Copyright (c) 2026 The EdgeFlow Authors
// SPDX-License-Identifier: Apache-2.0

#include "latent_graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace edgeflow {

int edge_count(int num_nodes) {
  if (num_nodes < 2)
    throw ConfigError("invalid graph: need at least 2 nodes, got " +
                      std::to_string(num_nodes));
  return num_nodes * (num_nodes - 1) / 2;
}

int step_budget(int num_nodes, double sparsity) {
  if (sparsity < 0.0 || sparsity >= 1.0)
    throw ConfigError("sparsity must lie in [0,1)");
  const int total = edge_count(num_nodes);
  const int s = static_cast<int>(std::floor((1.0 - sparsity) * total));
  if (s < 1)
    throw ConfigError("invalid sparsity: step budget would be zero");
  return s;
}

std::pair<int, int> edge_to_pair(int edge, int num_nodes) {
  const int total = edge_count(num_nodes);
  if (edge < 1 || edge > total)
    throw IndexError("edge index " + std::to_string(edge) + " out of range 1.." +
                     std::to_string(total));
  int e = edge;
  for (int i = 0; i < num_nodes - 1; ++i) {
    const int row = num_nodes - 1 - i;  // pairs (i, i+1..N-1)
    if (e <= row) return {i, i + e};
    e -= row;
  }
  throw IndexError("edge_to_pair: unreachable");  // guarded by range check
}

int pair_to_edge(int i, int j, int num_nodes) {
  if (i < 0 || j <= i || j >= num_nodes)
    throw IndexError("pair (" + std::to_string(i) + "," + std::to_string(j) +
                     ") is not a valid upper-triangle pair");
  // Edges before row i: sum of (N-1-k) for k < i.
  const int before = i * (num_nodes - 1) - i * (i - 1) / 2;
  return before + (j - i);
}

int GraphConfig::steps() const {
  if (step_override > 0) return step_override;
  return step_budget(num_nodes, sparsity);
}

void GraphConfig::validate() const {
  const int total = edge_count(num_nodes);
  const int s = steps();
  if (s < 1 || s > total)
    throw ConfigError("step budget " + std::to_string(s) +
                      " outside 1..E (E=" + std::to_string(total) + ")");
  if (num_trajectories < 1)
    throw ConfigError("num_trajectories must be at least 1");
}

int TrajectorySet::length() const {
  if (edges.empty()) return 0;
  const std::size_t len = edges.front().size();
  for (const auto& t : edges)
    if (t.size() != len)
      throw ContractError("trajectories have unequal lengths");
  return static_cast<int>(len);
}

bool TrajectorySet::contains(int trajectory, int edge) const {
  const auto& t = edges[static_cast<std::size_t>(trajectory)];
  return std::find(t.begin(), t.end(), edge) != t.end();
}

void TrajectorySet::check_invariants() const {
  const std::size_t e = static_cast<std::size_t>(total_edges);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    std::vector<int> sorted = edges[i];
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw MaskViolationError("repeated edge in trajectory " + std::to_string(i));
    for (int edge : sorted)
      if (edge < 1 || edge > total_edges)
        throw IndexError("edge index out of range in trajectory " + std::to_string(i));
    std::size_t fw_ones = 0;
    for (std::size_t j = 0; j < e; ++j) {
      const bool added = forward_mask[i * e + j] != 0;
      const bool open_backward = backward_mask[i * e + j] == 0;
      if (added != open_backward)
        throw MaskViolationError("masks disagree at trajectory " + std::to_string(i));
      const bool in_list =
          std::binary_search(sorted.begin(), sorted.end(), static_cast<int>(j) + 1);
      if (added != in_list)
        throw MaskViolationError("forward mask does not match edges of trajectory " +
                                 std::to_string(i));
      if (added) ++fw_ones;
    }
    if (fw_ones != edges[i].size())
      throw MaskViolationError("forward mask popcount mismatch");
  }
}

TrajectorySet init_trajectories(int num_trajectories, int total_edges, int budget) {
  if (num_trajectories < 1)
    throw ConfigError("invalid config: need at least one trajectory");
  if (total_edges < 1) throw ConfigError("invalid config: no edges");
  if (budget < 0 || budget > total_edges)
    throw ConfigError("invalid config: budget outside 0..E");
  TrajectorySet set;
  set.total_edges = total_edges;
  set.budget = budget;
  set.edges.assign(static_cast<std::size_t>(num_trajectories), {});
  const std::size_t cells =
      static_cast<std::size_t>(num_trajectories) * static_cast<std::size_t>(total_edges);
  set.forward_mask.assign(cells, 0);
  set.backward_mask.assign(cells, 1);
  return set;
}

TrajectorySet init_trajectories(const GraphConfig& graph) {
  graph.validate();
  return init_trajectories(graph.num_trajectories, graph.total_edges(), graph.steps());
}

void append_edges(TrajectorySet& set, const std::vector<int>& actions) {
  if (static_cast<int>(actions.size()) != set.size())
    throw ShapeError("append_edges: one action per trajectory required");
  if (set.length() >= set.budget)
    throw BudgetError("append_edges: trajectories already hold " +
                      std::to_string(set.budget) + " edges");
  const std::size_t e = static_cast<std::size_t>(set.total_edges);
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const int edge = actions[i];
    if (edge < 1 || edge > set.total_edges)
      throw IndexError("append_edges: edge index out of range");
    const std::size_t cell = i * e + static_cast<std::size_t>(edge - 1);
    if (set.forward_mask[cell])
      throw MaskViolationError("append_edges: edge " + std::to_string(edge) +
                               " already present in trajectory " + std::to_string(i));
  }
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const int edge = actions[i];
    const std::size_t cell = i * e + static_cast<std::size_t>(edge - 1);
    set.edges[i].push_back(edge);
    set.forward_mask[cell] = 1;
    set.backward_mask[cell] = 0;
  }
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
    if (r > UINT64_MAX) return UINT64_MAX;
  }
  return static_cast<std::uint64_t>(r);
}

std::vector<std::vector<int>> enumerate_terminal_sets(int total_edges,
                                                      int subset_size,
                                                      std::uint64_t cap) {
  if (subset_size < 0 || subset_size > total_edges)
    throw ContractError("enumerate_terminal_sets: subset size outside 0..E");
  const std::uint64_t count = binomial(total_edges, subset_size);
  if (count > cap)
    throw EnumerationError("enumeration too large: C(" + std::to_string(total_edges) +
                           "," + std::to_string(subset_size) + ") = " +
                           std::to_string(count) + " exceeds cap " +
                           std::to_string(cap));
  std::vector<std::vector<int>> sets;
  sets.reserve(static_cast<std::size_t>(count));
  std::vector<int> cur(static_cast<std::size_t>(subset_size));
  for (int i = 0; i < subset_size; ++i) cur[static_cast<std::size_t>(i)] = i + 1;
  if (subset_size == 0) {
    sets.push_back({});
    return sets;
  }
  while (true) {
    sets.push_back(cur);
    int i = subset_size - 1;
    while (i >= 0 && cur[static_cast<std::size_t>(i)] == total_edges - (subset_size - 1 - i))
      --i;
    if (i < 0) break;
    ++cur[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < subset_size; ++j)
      cur[static_cast<std::size_t>(j)] = cur[static_cast<std::size_t>(j - 1)] + 1;
  }
  return sets;
}

}  // namespace edgeflow
