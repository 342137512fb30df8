// Copyright (c) 2026 The EdgeFlow Authors
// SPDX-License-Identifier: Apache-2.0

#include "metrics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>

namespace edgeflow {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void TerminalDistribution::check_normalized(double tol) const {
  if (support.size() != probability.size())
    throw ContractError("terminal distribution: support/probability size mismatch");
  double total = 0.0;
  for (double p : probability) {
    if (!(p >= 0.0)) throw ContractError("terminal distribution: negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > tol)
    throw ContractError("terminal distribution does not sum to 1 (got " +
                        format_double(total) + ")");
}

TerminalDistribution target_distribution(const MixtureReward& mixture,
                                         const GraphConfig& graph,
                                         const DecoderNet& decoder,
                                         const Tensor& condition, double gamma,
                                         std::uint64_t enumeration_cap) {
  graph.validate();
  const int total = graph.total_edges();
  const int budget = graph.steps();
  TerminalDistribution dist;
  dist.support = enumerate_terminal_sets(total, budget, enumeration_cap);

  std::vector<double> log_rewards;
  log_rewards.reserve(dist.support.size());

  // Decode in batches; each terminal set becomes one trajectory.
  const std::size_t batch = 64;
  for (std::size_t begin = 0; begin < dist.support.size(); begin += batch) {
    const std::size_t end = std::min(begin + batch, dist.support.size());
    const int m = static_cast<int>(end - begin);
    TrajectorySet set = init_trajectories(m, total, budget);
    for (int step = 0; step < budget; ++step) {
      std::vector<int> actions(static_cast<std::size_t>(m));
      for (std::size_t i = 0; i < actions.size(); ++i)
        actions[i] = dist.support[begin + i][static_cast<std::size_t>(step)];
      append_edges(set, actions);
    }
    Tape tape;
    Var c_hat = blend(tape, decode_trajectories(tape, decoder, set, OrderMode::kSet),
                      condition, gamma);
    std::vector<double> lr = analytic_log_reward(tape.value(c_hat), mixture);
    log_rewards.insert(log_rewards.end(), lr.begin(), lr.end());
  }

  // Normalize via log-sum-exp.
  const double mx = *std::max_element(log_rewards.begin(), log_rewards.end());
  double z = 0.0;
  for (double lr : log_rewards) z += std::exp(lr - mx);
  dist.probability.resize(log_rewards.size());
  for (std::size_t i = 0; i < log_rewards.size(); ++i)
    dist.probability[i] = std::exp(log_rewards[i] - mx) / z;
  return dist;
}

TerminalDistribution empirical_terminal_distribution(const PolicyNet& policy,
                                                     const GraphConfig& graph,
                                                     const Tensor& condition,
                                                     int num_sets, Rng& rng) {
  if (num_sets < 1) throw ContractError("empirical distribution needs samples");
  std::map<std::vector<int>, std::uint64_t> counts;
  std::uint64_t collected = 0;
  std::vector<std::vector<int>> order;
  while (collected < static_cast<std::uint64_t>(num_sets)) {
    auto sets = rollout_terminal_sets(policy, graph, condition, 0.0, rng);
    for (auto& s : sets) {
      auto it = counts.find(s);
      if (it == counts.end()) {
        order.push_back(s);
        counts.emplace(std::move(s), 1);
      } else {
        ++it->second;
      }
      ++collected;
    }
  }
  TerminalDistribution dist;
  dist.support.reserve(order.size());
  dist.probability.reserve(order.size());
  for (const auto& s : order) {
    dist.support.push_back(s);
    dist.probability.push_back(static_cast<double>(counts[s]) /
                               static_cast<double>(collected));
  }
  return dist;
}

double tv_distance(const TerminalDistribution& p, const TerminalDistribution& q) {
  p.check_normalized();
  q.check_normalized();
  std::map<std::vector<int>, double> diff;
  for (std::size_t i = 0; i < p.support.size(); ++i) diff[p.support[i]] += p.probability[i];
  for (std::size_t i = 0; i < q.support.size(); ++i) diff[q.support[i]] -= q.probability[i];
  double total = 0.0;
  for (const auto& [_, d] : diff) total += std::abs(d);
  return 0.5 * total;
}

ResidualStats db_residuals(const StateEvaluator& evaluate, int total_edges,
                           int budget, const TerminalLogReward& terminal_log_reward,
                           std::uint64_t enumeration_cap) {
  if (budget < 1) throw ContractError("db_residuals: budget must be at least 1");
  // Total states across levels 0..S must stay under the cap.
  std::uint64_t states = 0;
  for (int level = 0; level <= budget; ++level) {
    const std::uint64_t c = binomial(total_edges, level);
    if (c > enumeration_cap - states)
      throw EnumerationError("db_residuals: state space exceeds enumeration cap");
    states += c;
  }

  ResidualStats stats;
  double sum_sq = 0.0;

  std::map<std::vector<int>, StateEvaluation> next_level_cache;
  for (int level = budget - 1; level >= 0; --level) {
    auto current = enumerate_terminal_sets(total_edges, level, enumeration_cap);
    std::map<std::vector<int>, StateEvaluation> current_cache;
    for (auto& state : current) {
      StateEvaluation eval = evaluate(state);
      for (int edge = 1; edge <= total_edges; ++edge) {
        if (std::binary_search(state.begin(), state.end(), edge)) continue;
        std::vector<int> child = state;
        child.insert(std::upper_bound(child.begin(), child.end(), edge), edge);
        double residual;
        const double forward_part =
            eval.log_flow + eval.log_forward[static_cast<std::size_t>(edge - 1)];
        if (level + 1 == budget) {
          residual = forward_part - terminal_log_reward(child);
        } else {
          const StateEvaluation& child_eval = next_level_cache.at(child);
          residual = forward_part - child_eval.log_flow +
                     child_eval.log_backward[static_cast<std::size_t>(edge - 1)];
        }
        stats.max_abs = std::max(stats.max_abs, std::abs(residual));
        sum_sq += residual * residual;
        ++stats.transitions;
      }
      current_cache.emplace(std::move(state), std::move(eval));
    }
    next_level_cache = std::move(current_cache);
  }
  stats.mean_square = stats.transitions ? sum_sq / static_cast<double>(stats.transitions) : 0.0;
  return stats;
}

StateEvaluator make_policy_evaluator(const PolicyNet& policy, const GraphConfig& graph,
                                     const Tensor& condition) {
  return [&policy, graph, condition](const std::vector<int>& state) {
    Tape tape;
    TrajectorySet set = init_trajectories(1, graph.total_edges(), graph.steps());
    for (int edge : state) append_edges(set, {edge});
    Var c_enc = encode_condition(tape, policy, condition);
    PolicyOutputs out = policy_forward(tape, policy, set, c_enc);
    StateEvaluation eval;
    eval.log_flow = tape.value(out.log_flow).at(0, 0);
    const Tensor& lf = tape.value(out.log_forward);
    eval.log_forward.assign(lf.data().begin(), lf.data().end());
    if (out.log_backward) {
      const Tensor& lb = tape.value(*out.log_backward);
      eval.log_backward.assign(lb.data().begin(), lb.data().end());
    } else {
      eval.log_backward.assign(static_cast<std::size_t>(graph.total_edges()), 0.0);
    }
    return eval;
  };
}

double vendi_score(const Tensor& samples, VendiKernel kernel, double bandwidth) {
  if (samples.rank() != 2) throw ShapeError("vendi_score: {n, d} samples required");
  const std::size_t n = samples.rows();
  const std::size_t d = samples.cols();

  Eigen::MatrixXd gram(n, n);
  if (kernel == VendiKernel::kNormalizedLinear) {
    std::vector<double> norms(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += samples.at(i, j) * samples.at(i, j);
      norms[i] = std::sqrt(s);
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        double k;
        if (i == j) {
          k = 1.0;
        } else if (norms[i] == 0.0 || norms[j] == 0.0) {
          k = 0.0;
        } else {
          double dot = 0.0;
          for (std::size_t c = 0; c < d; ++c) dot += samples.at(i, c) * samples.at(j, c);
          k = dot / (norms[i] * norms[j]);
        }
        gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = k;
        gram(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = k;
      }
    }
  } else {
    double bw = bandwidth;
    if (bw <= 0.0) {
      // Median pairwise distance.
      std::vector<double> dists;
      dists.reserve(n * (n - 1) / 2);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
          double s = 0.0;
          for (std::size_t c = 0; c < d; ++c) {
            const double diff = samples.at(i, c) - samples.at(j, c);
            s += diff * diff;
          }
          dists.push_back(std::sqrt(s));
        }
      if (!dists.empty()) {
        std::nth_element(dists.begin(), dists.begin() + dists.size() / 2, dists.end());
        bw = dists[dists.size() / 2];
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        double k;
        if (i == j) {
          k = 1.0;
        } else {
          double s = 0.0;
          for (std::size_t c = 0; c < d; ++c) {
            const double diff = samples.at(i, c) - samples.at(j, c);
            s += diff * diff;
          }
          k = bw > 0.0 ? std::exp(-s / (2.0 * bw * bw)) : (s == 0.0 ? 1.0 : 0.0);
        }
        gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = k;
        gram(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = k;
      }
    }
  }

  gram /= static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw NumericError("vendi_score: eigendecomposition failed");

  double entropy = 0.0;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    double lambda = solver.eigenvalues()[i];
    if (lambda < -1e-10)
      throw NumericError("vendi_score: Gram matrix has eigenvalue " +
                         format_double(lambda));
    if (lambda <= 0.0) continue;  // clamp the small negative band to zero
    entropy -= lambda * std::log(lambda);
  }
  return std::exp(entropy);
}

std::vector<EdgeFrequencyDelta> edge_frequency_delta(
    const std::vector<std::vector<int>>& trajectories_a,
    const std::vector<std::vector<int>>& trajectories_b, int top_k, int total_edges) {
  if (trajectories_a.empty() || trajectories_b.empty())
    throw ContractError("edge_frequency_delta: both trajectory sets must be nonempty");
  if (top_k < 1 || top_k > total_edges)
    throw ContractError("edge_frequency_delta: k outside 1..E");

  const auto frequencies = [total_edges](const std::vector<std::vector<int>>& trajs) {
    std::vector<double> freq(static_cast<std::size_t>(total_edges), 0.0);
    for (const auto& t : trajs) {
      std::vector<int> unique = t;
      std::sort(unique.begin(), unique.end());
      unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
      for (int e : unique) {
        if (e < 1 || e > total_edges)
          throw IndexError("edge_frequency_delta: edge index out of range");
        freq[static_cast<std::size_t>(e - 1)] += 1.0;
      }
    }
    for (double& f : freq) f /= static_cast<double>(trajs.size());
    return freq;
  };

  const std::vector<double> fa = frequencies(trajectories_a);
  const std::vector<double> fb = frequencies(trajectories_b);

  std::vector<int> order(static_cast<std::size_t>(total_edges));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    const double dx = fa[static_cast<std::size_t>(x)] - fb[static_cast<std::size_t>(x)];
    const double dy = fa[static_cast<std::size_t>(y)] - fb[static_cast<std::size_t>(y)];
    if (dx != dy) return dx > dy;
    return x < y;
  });

  std::vector<EdgeFrequencyDelta> out;
  out.reserve(static_cast<std::size_t>(top_k));
  for (int i = 0; i < top_k; ++i) {
    const std::size_t e = static_cast<std::size_t>(order[static_cast<std::size_t>(i)]);
    out.push_back({static_cast<int>(e) + 1, fa[e], fb[e]});
  }
  return out;
}

double mode_coverage(const Tensor& samples, const Tensor& centers, double radius) {
  if (radius <= 0.0) throw ContractError("mode_coverage: radius must be positive");
  if (samples.rank() != 2 || centers.rank() != 2 || samples.cols() != centers.cols())
    throw ShapeError("mode_coverage: samples and centers must share width");
  const std::size_t k = centers.rows();
  std::size_t hit = 0;
  for (std::size_t c = 0; c < k; ++c) {
    bool found = false;
    for (std::size_t i = 0; i < samples.rows() && !found; ++i) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < samples.cols(); ++j) {
        const double diff = samples.at(i, j) - centers.at(c, j);
        d2 += diff * diff;
      }
      found = d2 <= radius * radius;
    }
    if (found) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(k);
}

namespace {

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else {
      out += c;
    }
  }
  return out;
}

}  // namespace

std::string metrics_to_csv(const std::vector<MetricRow>& rows) {
  std::string out = "metric,instance,seed,value\n";
  for (const auto& r : rows) {
    out += r.metric;
    out += ',';
    out += r.instance;
    out += ',';
    out += std::to_string(r.seed);
    out += ',';
    out += format_double(r.value);
    out += '\n';
  }
  return out;
}

std::string metrics_to_json(const std::vector<MetricRow>& rows) {
  std::string out = "[\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out += "  {\"metric\": \"" + json_escape(rows[i].metric) + "\", \"instance\": \"" +
           json_escape(rows[i].instance) + "\", \"seed\": " + std::to_string(rows[i].seed) +
           ", \"value\": " + format_double(rows[i].value) + "}";
    if (i + 1 < rows.size()) out += ",";
    out += "\n";
  }
  out += "]\n";
  return out;
}

}  // namespace edgeflow
