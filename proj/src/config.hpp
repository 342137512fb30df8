// Copyright (c) 2026 The EdgeFlow Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef EDGEFLOW_CONFIG_HPP
#define EDGEFLOW_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "decoder.hpp"
#include "latent_graph.hpp"

namespace edgeflow {

enum class RewardMode { kDenoiserMse, kAnalyticMixture };

// Explicit or automatically anchored mixture specification for the
// analytic reward. With `auto_modes` > 0 the centers are placed at the
// decoded representations of well-separated terminal sets at session
// creation and the shared sigma is solved so the best/worst reward ratio
// over all terminal sets hits `auto_target_ratio`.
struct MixtureSpec {
  std::vector<std::vector<double>> centers;
  std::vector<double> sigmas;
  std::vector<double> weights;
  int auto_modes = 0;
  double auto_target_ratio = 8.0;
};

// Full training configuration. Field defaults are the desk-scale defaults;
// serialize() emits a canonical text form that parses back identically.
struct TrainConfig {
  // [graph]
  GraphConfig graph;

  // [policy]
  std::size_t h_g = 64;
  std::size_t h_c = 64;
  double eps_explore_start = 0.05;
  double eps_explore_end = 0.0;

  // [decoder]
  std::size_t d_dim = 32;
  std::size_t s_c = 16;
  double gamma = 0.5;
  Pooling pooling = Pooling::kMean;

  // [diffusion]
  int t_steps = 100;
  std::size_t data_dim = 2;
  double a_start = 0.999;
  double a_end = 0.9;
  bool freeze_denoiser = false;
  std::size_t denoiser_hidden = 64;
  int data_modes = 4;
  double data_scale = 0.8;
  double data_sigma = 0.12;

  // [train]
  double alpha = 1.0;
  double beta = 1.0;
  double learning_rate = 1e-3;
  std::uint64_t max_steps = 1000;
  std::uint64_t seed = 1;
  std::uint64_t log_every = 100;
  std::uint64_t checkpoint_every = 1000;
  std::uint64_t avg_window = 50;

  // [reward]
  RewardMode reward_mode = RewardMode::kDenoiserMse;
  OrderMode order_mode = OrderMode::kSet;
  MixtureSpec mixture;

  // [eval]
  std::uint64_t enumeration_cap = 200000;
  double tv_threshold = 0.05;
  double residual_threshold = 0.01;
  double coverage_radius = 0.3;

  void validate() const;
  std::string serialize() const;

  static TrainConfig parse(const std::string& text);
  static TrainConfig load(const std::string& path);
};

}  // namespace edgeflow

#endif  // EDGEFLOW_CONFIG_HPP
