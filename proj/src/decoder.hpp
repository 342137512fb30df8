// Copyright (c) 2026 The EdgeFlow Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef EDGEFLOW_DECODER_HPP
#define EDGEFLOW_DECODER_HPP

#include <vector>

#include "latent_graph.hpp"
#include "nn.hpp"
#include "tape.hpp"

namespace edgeflow {

// Whether trajectory identity is the edge set (edges consumed in sorted
// order, enabling exact enumeration) or the insertion sequence.
enum class OrderMode { kSet, kSequence };

enum class Pooling { kMean, kLast };

struct DecoderDims {
  std::size_t total_edges = 6;    // E; the embedding table has E+1 rows
  std::size_t embed_dim = 32;     // d_dim
  std::size_t condition_dim = 16; // S_c
};

// Trajectory decoder: edge-embedding lookup, a gated recurrent pass over
// the edge sequence, pooling over hidden states and a linear projection to
// the condition width. Parameters live under "decoder/...".
struct DecoderNet {
  DecoderDims dims;
  Pooling pooling = Pooling::kMean;
  Parameter* embedding = nullptr;  // {E+1, d}; row 0 is the start sentinel
  Linear update_x, update_h;       // z gate
  Linear reset_x, reset_h;         // r gate
  Linear cand_x, cand_h;           // candidate state
  Linear projection;               // d -> S_c

  static DecoderNet create(ParameterStore& store, const DecoderDims& dims,
                           Pooling pooling, Rng& rng);
};

// Embeds one trajectory as a {len, d} tensor. In set mode indices are
// sorted ascending before lookup.
Var embed_edges(Tape& tape, const DecoderNet& net, const std::vector<int>& trajectory,
                OrderMode order);

// Decodes all trajectories of a complete set into {M, S_c}.
Var decode_trajectories(Tape& tape, const DecoderNet& net, const TrajectorySet& set,
                        OrderMode order);

// Convex combination gamma * decoded + (1 - gamma) * condition, row-wise.
Var blend(Tape& tape, Var decoded, const Tensor& condition, double gamma);

// Appends extra edges to a copy of the set (budget extended accordingly),
// then decodes and blends. The original set is untouched.
Var append_and_decode(Tape& tape, const DecoderNet& net, const TrajectorySet& set,
                      const std::vector<int>& extra_edges, const Tensor& condition,
                      double gamma, OrderMode order);

}  // namespace edgeflow

#endif  // EDGEFLOW_DECODER_HPP
