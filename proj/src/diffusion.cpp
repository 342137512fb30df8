// Copyright (c) 2026 The EdgeFlow Authors
// SPDX-License-Identifier: Apache-2.0

#include "diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace edgeflow {

double NoiseSchedule::a(int t) const {
  if (t < 1 || t > t_steps) throw IndexError("timestep outside 1..T");
  return retain[static_cast<std::size_t>(t - 1)];
}

double NoiseSchedule::abar(int t) const {
  if (t < 0 || t > t_steps) throw IndexError("timestep outside 0..T");
  return retain_cum[static_cast<std::size_t>(t)];
}

NoiseSchedule make_schedule(int t_steps, double a_start, double a_end) {
  if (t_steps < 1) throw ConfigError("schedule needs at least one step");
  if (!(a_end > 0.0 && a_end <= a_start && a_start <= 1.0))
    throw ConfigError("schedule endpoints must satisfy 0 < a_end <= a_start <= 1");
  NoiseSchedule s;
  s.t_steps = t_steps;
  s.retain.resize(static_cast<std::size_t>(t_steps));
  for (int t = 1; t <= t_steps; ++t) {
    const double frac =
        t_steps == 1 ? 0.0 : static_cast<double>(t - 1) / static_cast<double>(t_steps - 1);
    s.retain[static_cast<std::size_t>(t - 1)] = a_start + (a_end - a_start) * frac;
  }
  s.retain_cum.resize(static_cast<std::size_t>(t_steps) + 1);
  s.retain_cum[0] = 1.0;
  for (int t = 1; t <= t_steps; ++t)
    s.retain_cum[static_cast<std::size_t>(t)] =
        s.retain_cum[static_cast<std::size_t>(t - 1)] * s.retain[static_cast<std::size_t>(t - 1)];
  return s;
}

NoisedSample add_noise(const Tensor& z0, int t, const NoiseSchedule& schedule, Rng& rng) {
  const double abar = schedule.abar(t);
  const double keep = std::sqrt(abar);
  const double spread = std::sqrt(1.0 - abar);
  NoisedSample out;
  out.eps = Tensor(z0.shape());
  out.z_t = Tensor(z0.shape());
  for (std::size_t i = 0; i < z0.size(); ++i) {
    out.eps[i] = rng.normal();
    out.z_t[i] = keep * z0[i] + spread * out.eps[i];
  }
  return out;
}

DenoiserNet DenoiserNet::create(ParameterStore& store, const DenoiserDims& dims, Rng& rng) {
  DenoiserNet net;
  net.dims = dims;
  const std::size_t in = dims.data_dim + DenoiserDims::timestep_features + dims.condition_dim;
  net.hidden0 = make_linear(store, "denoiser/hidden0", in, dims.hidden, rng);
  net.hidden1 = make_linear(store, "denoiser/hidden1", dims.hidden, dims.hidden, rng);
  net.out = make_linear(store, "denoiser/out", dims.hidden, dims.data_dim, rng);
  return net;
}

Var predict_noise(Tape& tape, const DenoiserNet& net, const Tensor& z_t, int t,
                  const NoiseSchedule& schedule, Var condition_rows) {
  if (z_t.size() != net.dims.data_dim)
    throw ShapeError("predict_noise: z_t size does not match data_dim");
  const Tensor& c = tape.value(condition_rows);
  if (c.rank() != 2 || c.cols() != net.dims.condition_dim)
    throw ShapeError("predict_noise: condition rows must be {M, S_c}");
  const std::size_t m = c.rows();
  const double abar = schedule.abar(t);

  Tensor z_row({1, net.dims.data_dim});
  for (std::size_t j = 0; j < z_t.size(); ++j) z_row[j] = z_t[j];
  Tensor t_row({1, DenoiserDims::timestep_features});
  t_row[0] = std::sqrt(abar);
  t_row[1] = std::sqrt(1.0 - abar);

  Var z_rows = tape.repeat_row(tape.input(std::move(z_row), "z_t"), m);
  Var t_rows = tape.repeat_row(tape.input(std::move(t_row), "t_features"), m);
  Var x = tape.concat_cols(tape.concat_cols(z_rows, t_rows), condition_rows);
  Var h0 = tape.tanh_(apply_linear(tape, net.hidden0, x));
  Var h1 = tape.tanh_(apply_linear(tape, net.hidden1, h0));
  return apply_linear(tape, net.out, h1);
}

LdmLossTerms ldm_loss(Tape& tape, Var eps_hat, const Tensor& eps) {
  const Tensor& pred = tape.value(eps_hat);
  if (pred.rank() != 2 || pred.cols() != eps.size())
    throw ShapeError("ldm_loss: prediction rows must match noise size");
  Tensor e_row({1, eps.size()});
  for (std::size_t j = 0; j < eps.size(); ++j) e_row[j] = eps[j];
  Var eps_rows = tape.repeat_row(tape.input(std::move(e_row), "eps"), pred.rows());
  LdmLossTerms terms;
  terms.per_trajectory = tape.mean_rows(tape.square(tape.sub(eps_rows, eps_hat)));
  terms.mean = tape.mean_all(terms.per_trajectory);
  return terms;
}

std::vector<double> log_reward(const std::vector<double>& mse_per_trajectory) {
  std::vector<double> out(mse_per_trajectory.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double mse = mse_per_trajectory[i];
    if (!(mse >= 0.0) || !std::isfinite(mse))
      throw ContractError("log_reward: mse must be finite and nonnegative");
    out[i] = -mse;
  }
  return out;
}

void MixtureReward::validate(std::size_t condition_dim) const {
  if (centers.empty()) throw ConfigError("mixture reward needs at least one mode");
  if (sigmas.size() != centers.size() || weights.size() != centers.size())
    throw ConfigError("mixture reward: weights/sigmas/centers size mismatch");
  for (const Tensor& c : centers)
    if (c.size() != condition_dim)
      throw ConfigError("mixture center width does not match condition width");
  for (double s : sigmas)
    if (!(s > 0.0)) throw ConfigError("mixture sigma must be positive");
  for (double w : weights)
    if (!(w > 0.0)) throw ConfigError("mixture weight must be positive");
}

std::vector<double> analytic_log_reward(const Tensor& c_hat_rows,
                                        const MixtureReward& mixture) {
  if (c_hat_rows.rank() != 2)
    throw ShapeError("analytic_log_reward: {M, S_c} rows required");
  if (!c_hat_rows.all_finite())
    throw NumericError("analytic_log_reward: non-finite condition row");
  mixture.validate(c_hat_rows.cols());
  const std::size_t m = c_hat_rows.rows();
  const std::size_t k = mixture.centers.size();
  std::vector<double> out(m);
  std::vector<double> terms(k);
  for (std::size_t i = 0; i < m; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k; ++j) {
      double d2 = 0.0;
      const Tensor& mu = mixture.centers[j];
      for (std::size_t c = 0; c < mu.size(); ++c) {
        const double diff = c_hat_rows.at(i, c) - mu[c];
        d2 += diff * diff;
      }
      terms[j] = std::log(mixture.weights[j]) -
                 d2 / (2.0 * mixture.sigmas[j] * mixture.sigmas[j]);
      mx = std::max(mx, terms[j]);
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) sum += std::exp(terms[j] - mx);
    out[i] = mx + std::log(sum);
  }
  return out;
}

Tensor sample_reverse(const Tensor& z_terminal, const Tensor& condition_row,
                      const DenoiserNet& net, const NoiseSchedule& schedule, Rng& rng) {
  if (z_terminal.size() != net.dims.data_dim)
    throw ShapeError("sample_reverse: latent size does not match data_dim");
  if (condition_row.size() != net.dims.condition_dim)
    throw ShapeError("sample_reverse: condition size mismatch");

  Tensor z = z_terminal;
  Tensor c_row({1, condition_row.size()});
  for (std::size_t j = 0; j < condition_row.size(); ++j) c_row[j] = condition_row[j];

  for (int t = schedule.t_steps; t >= 1; --t) {
    Tape tape;
    Var c = tape.input(c_row, "c_hat");
    Var eps_hat = predict_noise(tape, net, z, t, schedule, c);
    const Tensor& pred = tape.value(eps_hat);

    const double a_t = schedule.a(t);
    const double abar_t = schedule.abar(t);
    const double one_minus_a = 1.0 - a_t;
    // With no noise at step t there is nothing to strip from z_t.
    const double coef =
        one_minus_a == 0.0 ? 0.0 : one_minus_a / std::sqrt(1.0 - abar_t);
    const double inv_sqrt_a = 1.0 / std::sqrt(a_t);
    const double sigma_t = t > 1 ? std::sqrt(one_minus_a) : 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      const double noise = sigma_t > 0.0 ? sigma_t * rng.normal() : 0.0;
      z[j] = inv_sqrt_a * (z[j] - coef * pred.at(0, j)) + noise;
    }
  }
  return z;
}

Tensor ToyDataset::draw(Rng& rng) const {
  const std::size_t k = centers.rows();
  const std::size_t d = centers.cols();
  const std::size_t mode = static_cast<std::size_t>(rng.below(k));
  Tensor x({d});
  for (std::size_t j = 0; j < d; ++j)
    x[j] = centers.at(mode, j) + sigma * rng.normal();
  return x;
}

ToyDataset make_dataset(int modes, std::size_t data_dim, double scale, double sigma,
                        Rng& rng) {
  if (modes < 1) throw ConfigError("dataset needs at least one mode");
  if (data_dim < 1) throw ConfigError("dataset needs data_dim >= 1");
  if (!(sigma >= 0.0)) throw ConfigError("dataset sigma must be nonnegative");
  ToyDataset ds;
  ds.sigma = sigma;
  ds.centers = Tensor({static_cast<std::size_t>(modes), data_dim});
  if (data_dim == 2) {
    for (int k = 0; k < modes; ++k) {
      const double theta = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(modes);
      ds.centers.at(static_cast<std::size_t>(k), 0) = scale * std::cos(theta);
      ds.centers.at(static_cast<std::size_t>(k), 1) = scale * std::sin(theta);
    }
  } else {
    // Random directions of fixed norm for other data widths.
    for (int k = 0; k < modes; ++k) {
      double norm2 = 0.0;
      std::vector<double> dir(data_dim);
      for (std::size_t j = 0; j < data_dim; ++j) {
        dir[j] = rng.normal();
        norm2 += dir[j] * dir[j];
      }
      const double inv = norm2 > 0.0 ? scale / std::sqrt(norm2) : 0.0;
      for (std::size_t j = 0; j < data_dim; ++j)
        ds.centers.at(static_cast<std::size_t>(k), j) = dir[j] * inv;
    }
  }
  return ds;
}

}  // namespace edgeflow
