// Copyright (c) 2026 The EdgeFlow Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "latent_graph.hpp"
#include "rng.hpp"

using namespace edgeflow;

TEST_CASE("edge_count follows N(N-1)/2") {
  CHECK(edge_count(20) == 190);
  CHECK(edge_count(8) == 28);
  CHECK(edge_count(2) == 1);
  CHECK_THROWS_AS(edge_count(1), ConfigError);
  CHECK_THROWS_AS(edge_count(0), ConfigError);
}

TEST_CASE("step_budget reproduces the published configurations") {
  CHECK(step_budget(20, 0.83) == 32);
  CHECK(step_budget(8, 0.70) == 8);
  CHECK(step_budget(4, 2.0 / 3.0) == 2);
  CHECK_THROWS_AS(step_budget(2, 0.999), ConfigError);  // budget would be 0
  CHECK_THROWS_AS(step_budget(4, 1.0), ConfigError);
  CHECK_THROWS_AS(step_budget(4, -0.1), ConfigError);
}

TEST_CASE("the chest-x-ray row needs an explicit override") {
  // floor((1-0.82)*190) = 34, not the published 33; the override wins.
  CHECK(step_budget(20, 0.82) == 34);
  GraphConfig graph;
  graph.num_nodes = 20;
  graph.sparsity = 0.82;
  graph.step_override = 33;
  graph.num_trajectories = 10;
  CHECK(graph.steps() == 33);
  graph.validate();
}

TEST_CASE("edge index <-> pair under row-major upper-triangle order") {
  CHECK(edge_to_pair(1, 4) == std::pair<int, int>{0, 1});
  CHECK(edge_to_pair(6, 4) == std::pair<int, int>{2, 3});
  CHECK(edge_to_pair(4, 4) == std::pair<int, int>{1, 2});
  CHECK(pair_to_edge(0, 1, 4) == 1);
  CHECK(pair_to_edge(2, 3, 4) == 6);
  CHECK_THROWS_AS(edge_to_pair(0, 4), IndexError);
  CHECK_THROWS_AS(edge_to_pair(7, 4), IndexError);
  CHECK_THROWS_AS(pair_to_edge(2, 2, 4), IndexError);
  CHECK_THROWS_AS(pair_to_edge(1, 4, 4), IndexError);
}

TEST_CASE("edge index <-> pair round-trips for several graph sizes") {
  for (int n : {2, 3, 4, 5, 8, 11, 20}) {
    std::set<int> seen;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const int e = pair_to_edge(i, j, n);
        CHECK(edge_to_pair(e, n) == std::pair<int, int>{i, j});
        seen.insert(e);
      }
    CHECK(static_cast<int>(seen.size()) == edge_count(n));
    CHECK(*seen.begin() == 1);
    CHECK(*seen.rbegin() == edge_count(n));
  }
}

TEST_CASE("init_trajectories starts empty with Alg-style masks") {
  TrajectorySet set = init_trajectories(3, 6, 2);
  CHECK(set.size() == 3);
  CHECK(set.length() == 0);
  for (std::uint8_t b : set.forward_mask) CHECK(b == 0);
  for (std::uint8_t b : set.backward_mask) CHECK(b == 1);
  set.check_invariants();

  CHECK(init_trajectories(1, 6, 2).size() == 1);
  CHECK(init_trajectories(40, 190, 32).size() == 40);
  CHECK_THROWS_AS(init_trajectories(0, 6, 2), ConfigError);
}

TEST_CASE("append_edges updates both masks and rejects duplicates") {
  TrajectorySet set = init_trajectories(3, 6, 3);
  append_edges(set, {2, 5, 2});
  CHECK(set.length() == 1);
  CHECK(set.forward_mask[0 * 6 + 1] == 1);
  CHECK(set.forward_mask[1 * 6 + 4] == 1);
  CHECK(set.forward_mask[2 * 6 + 1] == 1);
  CHECK(set.backward_mask[0 * 6 + 1] == 0);
  set.check_invariants();

  CHECK_THROWS_AS(append_edges(set, {2, 1, 1}), MaskViolationError);
  // Failed append must not half-apply.
  CHECK(set.length() == 1);
  set.check_invariants();

  append_edges(set, {1, 1, 1});
  append_edges(set, {3, 3, 3});
  CHECK(set.length() == 3);
  CHECK(set.complete());
  CHECK_THROWS_AS(append_edges(set, {4, 4, 4}), BudgetError);
  CHECK_THROWS_AS(append_edges(set, {9, 1, 1}), IndexError);
}

TEST_CASE("S sequential appends reach the full budget") {
  const int budget = 5;
  TrajectorySet set = init_trajectories(2, 10, budget);
  for (int i = 1; i <= budget; ++i) append_edges(set, {i, i + 5});
  CHECK(set.length() == budget);
  set.check_invariants();
}

TEST_CASE("enumerate_terminal_sets is exhaustive, sorted, duplicate-free") {
  auto sets = enumerate_terminal_sets(6, 2, 1000);
  CHECK(sets.size() == 15);
  CHECK(sets.front() == std::vector<int>{1, 2});
  CHECK(sets.back() == std::vector<int>{5, 6});
  std::set<std::vector<int>> unique(sets.begin(), sets.end());
  CHECK(unique.size() == sets.size());
  CHECK(std::is_sorted(sets.begin(), sets.end()));

  CHECK(enumerate_terminal_sets(3, 3, 10) ==
        std::vector<std::vector<int>>{{1, 2, 3}});
  CHECK(enumerate_terminal_sets(6, 0, 10).size() == 1);
  CHECK(enumerate_terminal_sets(6, 0, 10).front().empty());
  CHECK_THROWS_AS(enumerate_terminal_sets(30, 15, 1000), EnumerationError);
}

TEST_CASE("binomial saturates instead of overflowing") {
  CHECK(binomial(6, 2) == 15);
  CHECK(binomial(190, 32) == UINT64_MAX);
  CHECK(binomial(5, 0) == 1);
  CHECK(binomial(5, 6) == 0);
}

TEST_CASE("property: random rollouts never violate mask invariants") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + static_cast<int>(rng.below(4));  // 3..6 nodes
    const int total = edge_count(n);
    const int budget = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(total)));
    const int m = 1 + static_cast<int>(rng.below(5));
    TrajectorySet set = init_trajectories(m, total, budget);
    for (int i = 0; i < budget; ++i) {
      std::vector<int> actions(static_cast<std::size_t>(m));
      for (int k = 0; k < m; ++k) {
        // Draw uniformly among the not-yet-added edges of trajectory k.
        std::vector<int> open;
        for (int e = 1; e <= total; ++e)
          if (!set.forward_mask[static_cast<std::size_t>(k) * total + e - 1])
            open.push_back(e);
        actions[static_cast<std::size_t>(k)] =
            open[static_cast<std::size_t>(rng.below(open.size()))];
      }
      append_edges(set, actions);
      set.check_invariants();
    }
    CHECK(set.complete());
  }
}
