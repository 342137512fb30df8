// Copyright (c) 2026 The EdgeFlow Authors
// SPDX-License-Identifier: Apache-2.0

#include "nn.hpp"

#include <cmath>

#include "error.hpp"

namespace edgeflow {

Parameter& ParameterStore::add(const std::string& name, Tensor init, bool trainable) {
  if (by_name_.count(name))
    throw ContractError("duplicate parameter name: " + name);
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->grad = Tensor::zeros(init.shape());
  p->value = std::move(init);
  p->trainable = trainable;
  Parameter* raw = p.get();
  items_.push_back(std::move(p));
  by_name_[name] = raw;
  return *raw;
}

Parameter& ParameterStore::get(const std::string& name) {
  Parameter* p = find(name);
  if (!p) throw ContractError("unknown parameter: " + name);
  return *p;
}

const Parameter& ParameterStore::get(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) throw ContractError("unknown parameter: " + name);
  return *it->second;
}

Parameter* ParameterStore::find(const std::string& name) {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : it->second;
}

void ParameterStore::zero_grads() {
  for (auto& p : items_) p->zero_grad();
}

std::size_t ParameterStore::total_values() const {
  std::size_t n = 0;
  for (const auto& p : items_) n += p->value.size();
  return n;
}

Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t({fan_in, fan_out});
  for (double& x : t.data()) x = (2.0 * rng.uniform01() - 1.0) * bound;
  return t;
}

Tensor normal_tensor(std::vector<std::size_t> shape, double stddev, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& x : t.data()) x = stddev * rng.normal();
  return t;
}

Linear make_linear(ParameterStore& store, const std::string& prefix,
                   std::size_t in, std::size_t out, Rng& rng) {
  Linear layer;
  layer.weight = &store.add(prefix + "/weight", glorot_uniform(in, out, rng));
  layer.bias = &store.add(prefix + "/bias", Tensor::zeros({out}));
  return layer;
}

Var apply_linear(Tape& tape, const Linear& layer, Var x) {
  return tape.add_row(tape.matmul(x, tape.param(*layer.weight)),
                      tape.param(*layer.bias));
}

void Adam::attach(const ParameterStore& store) {
  m_.clear();
  v_.clear();
  m_.reserve(store.count());
  v_.reserve(store.count());
  for (std::size_t i = 0; i < store.count(); ++i) {
    m_.push_back(Tensor::zeros(store.at(i).value.shape()));
    v_.push_back(Tensor::zeros(store.at(i).value.shape()));
  }
  t_ = 0;
}

void Adam::step(ParameterStore& store) {
  if (m_.size() != store.count())
    throw ContractError("Adam not attached to this parameter store");
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < store.count(); ++i) {
    Parameter& p = store.at(i);
    if (!p.trainable) continue;
    if (!p.grad.same_shape(p.value))
      throw ShapeError("Adam: gradient shape mismatch for " + p.name);
    Tensor& m = m_[i];
    Tensor& v = v_[i];
    for (std::size_t j = 0; j < p.value.size(); ++j) {
      const double g = p.grad[j];
      m[j] = beta1_ * m[j] + (1.0 - beta1_) * g;
      v[j] = beta2_ * v[j] + (1.0 - beta2_) * g * g;
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      p.value[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

double grad_check(const std::function<Var(Tape&)>& build_loss,
                  const std::vector<Parameter*>& params, double eps) {
  if (eps < 1e-7 || eps > 1e-3)
    throw ContractError("grad_check: eps must lie in [1e-7, 1e-3]");

  const auto eval = [&]() {
    Tape tape;
    Var loss = build_loss(tape);
    const double v = tape.value(loss).item();
    if (!std::isfinite(v))
      throw NumericError("grad_check: loss evaluated to a non-finite value");
    return v;
  };

  // Analytic pass.
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  {
    for (Parameter* p : params) p->zero_grad();
    Tape tape;
    Var loss = build_loss(tape);
    if (!std::isfinite(tape.value(loss).item()))
      throw NumericError("grad_check: loss evaluated to a non-finite value");
    tape.backward(loss);
    for (Parameter* p : params) analytic.push_back(p->grad);
    for (Parameter* p : params) p->zero_grad();
  }

  double worst = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter* p = params[pi];
    for (std::size_t j = 0; j < p->value.size(); ++j) {
      const double saved = p->value[j];
      p->value[j] = saved + eps;
      const double fp = eval();
      p->value[j] = saved - eps;
      const double fm = eval();
      p->value[j] = saved;
      const double numeric = (fp - fm) / (2.0 * eps);
      const double a = analytic[pi][j];
      const double err = std::abs(a - numeric) / std::max(1.0, std::abs(a));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace edgeflow
