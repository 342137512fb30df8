// Copyright (c) 2026 The EdgeFlow Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef EDGEFLOW_TENSOR_HPP
#define EDGEFLOW_TENSOR_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "error.hpp"

namespace edgeflow {

// Dense row-major tensor of doubles. Rank 1 is a vector, rank 2 a matrix;
// a scalar is shape {1}. This is a plain value type; differentiation is
// handled by the Tape, which stores Tensors in its nodes.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> shape)
      : shape_(std::move(shape)), data_(checked_size(shape_), 0.0) {}

  Tensor(std::vector<std::size_t> shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != checked_size(shape_))
      throw ShapeError("tensor data length does not match shape");
  }

  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  static Tensor zeros(std::vector<std::size_t> shape) {
    return Tensor(std::move(shape));
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::size_t rank() const { return shape_.size(); }

  // Matrix accessors; a rank-1 tensor is treated as a single row.
  std::size_t rows() const {
    if (rank() == 2) return shape_[0];
    if (rank() == 1) return 1;
    throw ShapeError("rows() needs rank 1 or 2");
  }
  std::size_t cols() const {
    if (rank() == 2) return shape_[1];
    if (rank() == 1) return shape_[0];
    throw ShapeError("cols() needs rank 1 or 2");
  }

  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  double item() const {
    if (size() != 1) throw ContractError("item() requires a scalar tensor");
    return data_[0];
  }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  void fill(double v) {
    for (double& x : data_) x = v;
  }

  std::string shape_string() const {
    std::string s = "{";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(shape_[i]);
    }
    s += "}";
    return s;
  }

 private:
  static std::size_t checked_size(const std::vector<std::size_t>& shape) {
    if (shape.empty()) return 0;
    std::size_t n = 1;
    for (std::size_t d : shape) {
      if (d == 0) throw ShapeError("zero dimension in tensor shape");
      n *= d;
    }
    return n;
  }

  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

}  // namespace edgeflow

#endif  // EDGEFLOW_TENSOR_HPP
