// Copyright (c) 2026 The EdgeFlow Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef EDGEFLOW_NN_HPP
#define EDGEFLOW_NN_HPP

#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "rng.hpp"
#include "tape.hpp"
#include "tensor.hpp"

namespace edgeflow {

// Named learnable tensor with its gradient buffer.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  bool trainable = true;

  void zero_grad() { grad.fill(0.0); }
};

// Owns all parameters of a model in a stable registration order. The order
// defines checkpoint layout and optimizer moment indexing.
class ParameterStore {
 public:
  Parameter& add(const std::string& name, Tensor init, bool trainable = true);
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  Parameter* find(const std::string& name);

  std::size_t count() const { return items_.size(); }
  Parameter& at(std::size_t i) { return *items_[i]; }
  const Parameter& at(std::size_t i) const { return *items_[i]; }

  void zero_grads();
  std::size_t total_values() const;

 private:
  std::vector<std::unique_ptr<Parameter>> items_;
  std::unordered_map<std::string, Parameter*> by_name_;
};

// Initializers ---------------------------------------------------------------

// Uniform in +-sqrt(6/(fan_in+fan_out)), shape {fan_in, fan_out}.
Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);
Tensor normal_tensor(std::vector<std::size_t> shape, double stddev, Rng& rng);

// Affine layer helpers --------------------------------------------------------

struct Linear {
  Parameter* weight = nullptr;  // {in, out}
  Parameter* bias = nullptr;    // {out}
};

Linear make_linear(ParameterStore& store, const std::string& prefix,
                   std::size_t in, std::size_t out, Rng& rng);
Var apply_linear(Tape& tape, const Linear& layer, Var x);

// Adam ------------------------------------------------------------------------

// Adaptive-moment optimizer with bias correction. Moment buffers are stored
// per parameter in store order and serialize into checkpoints.
class Adam {
 public:
  Adam() = default;
  Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void attach(const ParameterStore& store);
  void step(ParameterStore& store);

  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }
  long long step_count() const { return t_; }

  std::vector<Tensor>& first_moments() { return m_; }
  std::vector<Tensor>& second_moments() { return v_; }
  const std::vector<Tensor>& first_moments() const { return m_; }
  const std::vector<Tensor>& second_moments() const { return v_; }
  void set_step_count(long long t) { t_ = t; }

 private:
  double lr_ = 1e-3;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  long long t_ = 0;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

// Gradient checking ------------------------------------------------------------

// Compares analytic gradients of a scalar-valued build against central finite
// differences over every coordinate of the given parameters. Returns the max
// of |analytic - numeric| / max(1, |analytic|). The builder must be a
// deterministic function of the parameter values.
double grad_check(const std::function<Var(Tape&)>& build_loss,
                  const std::vector<Parameter*>& params, double eps);

}  // namespace edgeflow

#endif  // EDGEFLOW_NN_HPP
