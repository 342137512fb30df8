// Copyright (c) 2026 The EdgeFlow Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef EDGEFLOW_TAPE_HPP
#define EDGEFLOW_TAPE_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace edgeflow {

struct Parameter;

// Handle to a tensor recorded on a Tape.
struct Var {
  int idx = -1;
  bool valid() const { return idx >= 0; }
};

// Reverse-mode differentiation tape. One tape serves one forward pass and at
// most one backward() call; a training step builds a fresh tape. Nodes are
// created in topological order, so the backward sweep is a reverse walk.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaves -----------------------------------------------------------------
  Var input(Tensor value, std::string label = "input");
  Var param(Parameter& p);

  // Elementwise / structural ops -------------------------------------------
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var affine(Var a, double scale, double shift);  // scale*x + shift
  Var matmul(Var a, Var b);
  Var add_row(Var m, Var row);  // broadcast row over the rows of m
  Var relu(Var a);
  Var tanh_(Var a);
  Var sigmoid(Var a);
  Var square(Var a);
  Var concat_cols(Var a, Var b);
  Var slice_cols(Var a, std::size_t begin, std::size_t end);
  Var mean_all(Var a);
  Var sum_all(Var a);
  Var mean_rows(Var a);                       // {M,N} -> {M,1}
  Var repeat_row(Var row, std::size_t m);     // {N} or {1,N} -> {M,N}
  Var gather_rows(Var table, std::vector<std::size_t> rows);
  Var take_per_row(Var m, std::vector<std::size_t> cols);  // {M,N} -> {M,1}
  Var mse(Var a, Var b);  // mean((a-b)^2), scalar

  // Row-wise log-softmax with additive -1e30 on entries whose mask byte is
  // nonzero (mask semantics: exclude-marked). Rows must keep at least one
  // unmasked entry.
  Var masked_log_softmax(Var logits, const std::vector<std::uint8_t>& mask);

  // Access -------------------------------------------------------------------
  const Tensor& value(Var v) const;
  const Tensor& grad(Var v) const;  // valid after backward()

  // Reverse sweep from a scalar loss. Accumulates into Parameter::grad for
  // every bound parameter leaf. A second call on the same tape is an error.
  void backward(Var loss);

  bool backward_done() const { return backward_done_; }
  std::size_t node_count() const { return nodes_.size(); }

  // Label of the first node (in creation order) holding a non-finite value,
  // or empty string when the whole tape is finite.
  std::string first_non_finite_label() const;

 private:
  struct Node {
    Tensor value;
    Tensor grad;  // allocated on demand during backward
    std::string label;
    Parameter* bound = nullptr;
    std::function<void(Tape&, const Tensor& out_grad)> back;
  };

  Var push(Tensor value, std::string label,
           std::function<void(Tape&, const Tensor&)> back);
  Node& node(Var v);
  const Node& node(Var v) const;
  Tensor& grad_buffer(Var v);
  void accumulate(Var v, const Tensor& g);

  static double big_negative() { return 1e30; }

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace edgeflow

#endif  // EDGEFLOW_TAPE_HPP
