// Copyright (c) 2026 The EdgeFlow Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef EDGEFLOW_DIFFUSION_HPP
#define EDGEFLOW_DIFFUSION_HPP

#include <string>
#include <vector>

#include "nn.hpp"
#include "rng.hpp"
#include "tape.hpp"

namespace edgeflow {

// Per-step retention coefficients a_t in (0,1] and their cumulative
// products. (The schedule coefficient is called a_t here; alpha is the
// GFlowNet loss weight elsewhere.)
struct NoiseSchedule {
  int t_steps = 0;
  std::vector<double> retain;      // a_1..a_T, retain[t-1]
  std::vector<double> retain_cum;  // abar_0..abar_T, retain_cum[t]

  double a(int t) const;     // a_t, 1-based
  double abar(int t) const;  // cumulative product through t, abar(0) == 1
};

// Linear interpolation between the endpoint retention coefficients.
NoiseSchedule make_schedule(int t_steps, double a_start, double a_end);

struct NoisedSample {
  Tensor z_t;
  Tensor eps;
};

// Closed-form forward noising z_t = sqrt(abar_t) z0 + sqrt(1-abar_t) eps.
// Returns both the noised vector and the drawn noise.
NoisedSample add_noise(const Tensor& z0, int t, const NoiseSchedule& schedule, Rng& rng);

struct DenoiserDims {
  std::size_t data_dim = 2;
  std::size_t condition_dim = 16;  // S_c
  std::size_t hidden = 64;
  static constexpr std::size_t timestep_features = 2;  // [sqrt(abar), sqrt(1-abar)]
};

// Conditional noise predictor: an MLP over [z_t | timestep features | c_hat].
// Parameters live under "denoiser/...".
struct DenoiserNet {
  DenoiserDims dims;
  Linear hidden0;  // in -> hidden
  Linear hidden1;  // hidden -> hidden
  Linear out;      // hidden -> data_dim

  static DenoiserNet create(ParameterStore& store, const DenoiserDims& dims, Rng& rng);
};

// Predicts the noise for M condition rows sharing one (z_t, t). Output {M, D}.
Var predict_noise(Tape& tape, const DenoiserNet& net, const Tensor& z_t, int t,
                  const NoiseSchedule& schedule, Var condition_rows);

struct LdmLossTerms {
  Var per_trajectory;  // {M, 1} mean squared error rows
  Var mean;            // scalar batch mean
};

// Per-trajectory MSE between the shared drawn noise and each prediction,
// plus the batch mean (the denoising loss term of the total loss).
LdmLossTerms ldm_loss(Tape& tape, Var eps_hat, const Tensor& eps);

// log R = -mse, computed in the log domain.
std::vector<double> log_reward(const std::vector<double>& mse_per_trajectory);

// Analytic multimodal reward surrogate: R(x) = sum_k w_k exp(-|x-mu_k|^2 / 2 sigma_k^2).
struct MixtureReward {
  std::vector<Tensor> centers;  // each {S_c}
  std::vector<double> sigmas;
  std::vector<double> weights;

  void validate(std::size_t condition_dim) const;
};

// Log-reward of each row of c_hat under the mixture, log-sum-exp stabilized.
std::vector<double> analytic_log_reward(const Tensor& c_hat_rows,
                                        const MixtureReward& mixture);

// Iterative reverse pass from t = T down to 1; the final step adds no noise.
Tensor sample_reverse(const Tensor& z_terminal, const Tensor& condition_row,
                      const DenoiserNet& net, const NoiseSchedule& schedule, Rng& rng);

// Synthetic conditional point-cloud dataset: K cluster centers with
// isotropic Gaussian jitter. For 2-d data the centers sit on a circle.
struct ToyDataset {
  Tensor centers;  // {K, D}
  double sigma = 0.1;

  Tensor draw(Rng& rng) const;  // one {D} sample
};

ToyDataset make_dataset(int modes, std::size_t data_dim, double scale, double sigma,
                        Rng& rng);

}  // namespace edgeflow

#endif  // EDGEFLOW_DIFFUSION_HPP
