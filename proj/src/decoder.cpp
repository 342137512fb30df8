// Copyright (c) 2026 The EdgeFlow Authors
// SPDX-License-Identifier: Apache-2.0

#include "decoder.hpp"

#include <algorithm>
#include <string>

namespace edgeflow {

DecoderNet DecoderNet::create(ParameterStore& store, const DecoderDims& dims,
                              Pooling pooling, Rng& rng) {
  DecoderNet net;
  net.dims = dims;
  net.pooling = pooling;
  const std::size_t d = dims.embed_dim;
  // Edge embeddings start as small random vectors; training assigns meaning.
  net.embedding = &store.add("decoder/embedding",
                             normal_tensor({dims.total_edges + 1, d}, 0.02, rng));
  net.update_x = make_linear(store, "decoder/gru/update_x", d, d, rng);
  net.update_h = make_linear(store, "decoder/gru/update_h", d, d, rng);
  net.reset_x = make_linear(store, "decoder/gru/reset_x", d, d, rng);
  net.reset_h = make_linear(store, "decoder/gru/reset_h", d, d, rng);
  net.cand_x = make_linear(store, "decoder/gru/cand_x", d, d, rng);
  net.cand_h = make_linear(store, "decoder/gru/cand_h", d, d, rng);
  net.projection = make_linear(store, "decoder/projection", d, dims.condition_dim, rng);
  return net;
}

namespace {

std::vector<int> ordered_indices(const std::vector<int>& trajectory, OrderMode order) {
  std::vector<int> idx = trajectory;
  if (order == OrderMode::kSet) std::sort(idx.begin(), idx.end());
  return idx;
}

void check_indices(const std::vector<int>& idx, std::size_t total_edges) {
  for (int e : idx)
    if (e < 1 || e > static_cast<int>(total_edges))
      throw IndexError("edge index " + std::to_string(e) + " out of range 1.." +
                       std::to_string(total_edges));
}

// One gated recurrent step over a batch of embeddings x: {M, d}.
Var gru_step(Tape& tape, const DecoderNet& net, Var x, Var h) {
  Var z = tape.sigmoid(tape.add(apply_linear(tape, net.update_x, x),
                                apply_linear(tape, net.update_h, h)));
  Var r = tape.sigmoid(tape.add(apply_linear(tape, net.reset_x, x),
                                apply_linear(tape, net.reset_h, h)));
  Var cand = tape.tanh_(tape.add(apply_linear(tape, net.cand_x, x),
                                 apply_linear(tape, net.cand_h, tape.mul(r, h))));
  // h' = (1 - z) * cand + z * h
  return tape.add(tape.mul(tape.affine(z, -1.0, 1.0), cand), tape.mul(z, h));
}

}  // namespace

Var embed_edges(Tape& tape, const DecoderNet& net, const std::vector<int>& trajectory,
                OrderMode order) {
  std::vector<int> idx = ordered_indices(trajectory, order);
  check_indices(idx, net.dims.total_edges);
  std::vector<std::size_t> rows(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) rows[i] = static_cast<std::size_t>(idx[i]);
  return tape.gather_rows(tape.param(*net.embedding), std::move(rows));
}

Var decode_trajectories(Tape& tape, const DecoderNet& net, const TrajectorySet& set,
                        OrderMode order) {
  if (!set.complete())
    throw ContractError("decode_trajectories: incomplete trajectories (length " +
                        std::to_string(set.length()) + " of " +
                        std::to_string(set.budget) + ")");
  const std::size_t m = static_cast<std::size_t>(set.size());
  const std::size_t len = static_cast<std::size_t>(set.length());
  if (len == 0) throw ContractError("decode_trajectories: empty trajectories");

  std::vector<std::vector<int>> ordered(m);
  for (std::size_t i = 0; i < m; ++i) {
    ordered[i] = ordered_indices(set.edges[i], order);
    check_indices(ordered[i], net.dims.total_edges);
  }

  Var table = tape.param(*net.embedding);
  Var h = tape.input(Tensor::zeros({m, net.dims.embed_dim}), "gru_h0");
  Var pooled = h;
  for (std::size_t t = 0; t < len; ++t) {
    std::vector<std::size_t> rows(m);
    for (std::size_t i = 0; i < m; ++i)
      rows[i] = static_cast<std::size_t>(ordered[i][t]);
    Var x = tape.gather_rows(table, std::move(rows));
    h = gru_step(tape, net, x, h);
    if (net.pooling == Pooling::kMean)
      pooled = (t == 0) ? h : tape.add(pooled, h);
  }
  if (net.pooling == Pooling::kMean)
    pooled = tape.affine(pooled, 1.0 / static_cast<double>(len), 0.0);
  else
    pooled = h;
  return apply_linear(tape, net.projection, pooled);
}

Var blend(Tape& tape, Var decoded, const Tensor& condition, double gamma) {
  if (gamma < 0.0 || gamma > 1.0)
    throw ConfigError("blend: gamma outside [0,1]");
  const Tensor& d = tape.value(decoded);
  if (d.rank() != 2 || d.cols() != condition.size())
    throw ShapeError("blend: decoded width does not match condition size");
  Tensor base({1, condition.size()});
  for (std::size_t j = 0; j < condition.size(); ++j)
    base[j] = (1.0 - gamma) * condition[j];
  Var base_rows = tape.repeat_row(tape.input(std::move(base), "blend_base"), d.rows());
  return tape.add(tape.affine(decoded, gamma, 0.0), base_rows);
}

Var append_and_decode(Tape& tape, const DecoderNet& net, const TrajectorySet& set,
                      const std::vector<int>& extra_edges, const Tensor& condition,
                      double gamma, OrderMode order) {
  TrajectorySet extended = set;
  extended.budget = set.budget + static_cast<int>(extra_edges.size());
  for (int edge : extra_edges) {
    std::vector<int> action(static_cast<std::size_t>(extended.size()), edge);
    append_edges(extended, action);
  }
  return blend(tape, decode_trajectories(tape, net, extended, order), condition, gamma);
}

}  // namespace edgeflow
