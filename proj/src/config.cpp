// Copyright (c) 2026 The EdgeFlow Authors
// SPDX-License-Identifier: Apache-2.0

#include "config.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "metrics.hpp"

namespace edgeflow {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  if (out.size() == 1 && out[0].empty()) out.clear();
  return out;
}

class KeyValues {
 public:
  void set(const std::string& section, const std::string& key, const std::string& value) {
    values_[section + "." + key] = value;
  }

  bool has(const std::string& section, const std::string& key) const {
    return values_.count(section + "." + key) > 0;
  }

  std::string raw(const std::string& section, const std::string& key) const {
    return values_.at(section + "." + key);
  }

  double number(const std::string& section, const std::string& key, double fallback) {
    if (!has(section, key)) return fallback;
    consumed_.insert(section + "." + key);
    const std::string v = raw(section, key);
    try {
      std::size_t pos = 0;
      const double d = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw ConfigError("config key " + section + "." + key + " is not a number: " + v);
    }
  }

  std::uint64_t integer(const std::string& section, const std::string& key,
                        std::uint64_t fallback) {
    if (!has(section, key)) return fallback;
    consumed_.insert(section + "." + key);
    const std::string v = raw(section, key);
    try {
      std::size_t pos = 0;
      const long long d = std::stoll(v, &pos);
      if (pos != v.size() || d < 0) throw std::invalid_argument(v);
      return static_cast<std::uint64_t>(d);
    } catch (const std::exception&) {
      throw ConfigError("config key " + section + "." + key +
                        " is not a nonnegative integer: " + v);
    }
  }

  bool boolean(const std::string& section, const std::string& key, bool fallback) {
    if (!has(section, key)) return fallback;
    consumed_.insert(section + "." + key);
    const std::string v = raw(section, key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("config key " + section + "." + key + " is not a boolean: " + v);
  }

  std::string text(const std::string& section, const std::string& key,
                   const std::string& fallback) {
    if (!has(section, key)) return fallback;
    consumed_.insert(section + "." + key);
    return raw(section, key);
  }

  void check_all_consumed() const {
    for (const auto& [k, _] : values_)
      if (!consumed_.count(k)) throw ConfigError("unknown config key: " + k);
  }

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> consumed_;
};

KeyValues parse_ini(const std::string& text) {
  KeyValues kv;
  std::istringstream is(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError("malformed section header at line " + std::to_string(line_no));
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key = value at line " + std::to_string(line_no));
    if (section.empty())
      throw ConfigError("key outside any section at line " + std::to_string(line_no));
    kv.set(section, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return kv;
}

std::string join_numbers(const std::vector<double>& v, char sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += format_double(v[i]);
  }
  return out;
}

std::vector<double> parse_numbers(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const std::string& piece : split(text, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(piece, &pos));
      if (pos != piece.size()) throw std::invalid_argument(piece);
    } catch (const std::exception&) {
      throw ConfigError("bad number '" + piece + "' in " + what);
    }
  }
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  graph.validate();
  if (h_g < 1 || h_c < 1) throw ConfigError("policy widths must be positive");
  if (eps_explore_start < 0.0 || eps_explore_start > 1.0 || eps_explore_end < 0.0 ||
      eps_explore_end > 1.0)
    throw ConfigError("exploration rates must lie in [0,1]");
  if (d_dim < 1 || s_c < 1) throw ConfigError("decoder widths must be positive");
  if (gamma < 0.0 || gamma > 1.0) throw ConfigError("gamma outside [0,1]");
  if (t_steps < 1) throw ConfigError("t_steps must be positive");
  if (data_dim < 1) throw ConfigError("data_dim must be positive");
  if (!(a_end > 0.0 && a_end <= a_start && a_start <= 1.0))
    throw ConfigError("schedule endpoints must satisfy 0 < a_end <= a_start <= 1");
  if (alpha < 0.0 || beta < 0.0) throw ConfigError("loss weights must be nonnegative");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (data_modes < 1) throw ConfigError("data_modes must be positive");
  if (!(data_sigma >= 0.0)) throw ConfigError("data_sigma must be nonnegative");
  if (reward_mode == RewardMode::kAnalyticMixture) {
    const bool has_explicit = !mixture.centers.empty();
    const bool has_auto = mixture.auto_modes > 0;
    if (has_explicit == has_auto)
      throw ConfigError(
          "analytic-mixture reward needs either explicit centers or mixture = auto");
    if (has_explicit) {
      if (mixture.centers.size() != mixture.sigmas.size() ||
          mixture.centers.size() != mixture.weights.size())
        throw ConfigError("mixture centers/sigmas/weights must have equal counts");
      for (const auto& c : mixture.centers)
        if (c.size() != s_c)
          throw ConfigError("mixture centers must have s_c entries");
    }
    if (has_auto && mixture.auto_target_ratio <= 1.0)
      throw ConfigError("auto mixture target ratio must exceed 1");
  }
  if (tv_threshold <= 0.0 || residual_threshold <= 0.0 || coverage_radius <= 0.0)
    throw ConfigError("eval thresholds must be positive");
  if (enumeration_cap < 1) throw ConfigError("enumeration cap must be positive");
}

std::string TrainConfig::serialize() const {
  std::string out;
  out += "[graph]\n";
  out += "n = " + std::to_string(graph.num_nodes) + "\n";
  out += "rho = " + format_double(graph.sparsity) + "\n";
  out += "s_override = " + std::to_string(graph.step_override) + "\n";
  out += "m = " + std::to_string(graph.num_trajectories) + "\n";
  out += "\n[policy]\n";
  out += "h_g = " + std::to_string(h_g) + "\n";
  out += "h_c = " + std::to_string(h_c) + "\n";
  out += "eps_explore_start = " + format_double(eps_explore_start) + "\n";
  out += "eps_explore_end = " + format_double(eps_explore_end) + "\n";
  out += "\n[decoder]\n";
  out += "d_dim = " + std::to_string(d_dim) + "\n";
  out += "s_c = " + std::to_string(s_c) + "\n";
  out += "gamma = " + format_double(gamma) + "\n";
  out += std::string("pooling = ") + (pooling == Pooling::kMean ? "mean" : "last") + "\n";
  out += "\n[diffusion]\n";
  out += "t_steps = " + std::to_string(t_steps) + "\n";
  out += "data_dim = " + std::to_string(data_dim) + "\n";
  out += "a_start = " + format_double(a_start) + "\n";
  out += "a_end = " + format_double(a_end) + "\n";
  out += std::string("freeze_denoiser = ") + (freeze_denoiser ? "true" : "false") + "\n";
  out += "denoiser_hidden = " + std::to_string(denoiser_hidden) + "\n";
  out += "data_modes = " + std::to_string(data_modes) + "\n";
  out += "data_scale = " + format_double(data_scale) + "\n";
  out += "data_sigma = " + format_double(data_sigma) + "\n";
  out += "\n[train]\n";
  out += "alpha = " + format_double(alpha) + "\n";
  out += "beta = " + format_double(beta) + "\n";
  out += "lr = " + format_double(learning_rate) + "\n";
  out += "max_steps = " + std::to_string(max_steps) + "\n";
  out += "seed = " + std::to_string(seed) + "\n";
  out += "log_every = " + std::to_string(log_every) + "\n";
  out += "checkpoint_every = " + std::to_string(checkpoint_every) + "\n";
  out += "avg_window = " + std::to_string(avg_window) + "\n";
  out += "\n[reward]\n";
  out += std::string("mode = ") +
         (reward_mode == RewardMode::kDenoiserMse ? "denoiser-mse" : "analytic-mixture") +
         "\n";
  out += std::string("order = ") + (order_mode == OrderMode::kSet ? "set" : "sequence") + "\n";
  if (mixture.auto_modes > 0) {
    out += "mixture = auto\n";
    out += "auto_modes = " + std::to_string(mixture.auto_modes) + "\n";
    out += "auto_target_ratio = " + format_double(mixture.auto_target_ratio) + "\n";
  } else if (!mixture.centers.empty()) {
    std::string centers;
    for (std::size_t i = 0; i < mixture.centers.size(); ++i) {
      if (i) centers += "; ";
      centers += join_numbers(mixture.centers[i], ',');
    }
    out += "mixture_centers = " + centers + "\n";
    out += "mixture_sigmas = " + join_numbers(mixture.sigmas, ',') + "\n";
    out += "mixture_weights = " + join_numbers(mixture.weights, ',') + "\n";
  }
  out += "\n[eval]\n";
  out += "enumeration_cap = " + std::to_string(enumeration_cap) + "\n";
  out += "tv_threshold = " + format_double(tv_threshold) + "\n";
  out += "residual_threshold = " + format_double(residual_threshold) + "\n";
  out += "coverage_radius = " + format_double(coverage_radius) + "\n";
  return out;
}

TrainConfig TrainConfig::parse(const std::string& text) {
  KeyValues kv = parse_ini(text);
  TrainConfig cfg;

  cfg.graph.num_nodes = static_cast<int>(kv.integer("graph", "n", 4));
  cfg.graph.sparsity = kv.number("graph", "rho", cfg.graph.sparsity);
  cfg.graph.step_override = static_cast<int>(kv.integer("graph", "s_override", 0));
  cfg.graph.num_trajectories = static_cast<int>(kv.integer("graph", "m", 4));

  cfg.h_g = kv.integer("policy", "h_g", cfg.h_g);
  cfg.h_c = kv.integer("policy", "h_c", cfg.h_c);
  cfg.eps_explore_start = kv.number("policy", "eps_explore_start", cfg.eps_explore_start);
  cfg.eps_explore_end = kv.number("policy", "eps_explore_end", cfg.eps_explore_end);

  cfg.d_dim = kv.integer("decoder", "d_dim", cfg.d_dim);
  cfg.s_c = kv.integer("decoder", "s_c", cfg.s_c);
  cfg.gamma = kv.number("decoder", "gamma", cfg.gamma);
  const std::string pooling = kv.text("decoder", "pooling", "mean");
  if (pooling == "mean")
    cfg.pooling = Pooling::kMean;
  else if (pooling == "last")
    cfg.pooling = Pooling::kLast;
  else
    throw ConfigError("decoder.pooling must be mean or last");

  cfg.t_steps = static_cast<int>(kv.integer("diffusion", "t_steps", 100));
  cfg.data_dim = kv.integer("diffusion", "data_dim", cfg.data_dim);
  cfg.a_start = kv.number("diffusion", "a_start", cfg.a_start);
  cfg.a_end = kv.number("diffusion", "a_end", cfg.a_end);
  cfg.freeze_denoiser = kv.boolean("diffusion", "freeze_denoiser", cfg.freeze_denoiser);
  cfg.denoiser_hidden = kv.integer("diffusion", "denoiser_hidden", cfg.denoiser_hidden);
  cfg.data_modes = static_cast<int>(kv.integer("diffusion", "data_modes", 4));
  cfg.data_scale = kv.number("diffusion", "data_scale", cfg.data_scale);
  cfg.data_sigma = kv.number("diffusion", "data_sigma", cfg.data_sigma);

  cfg.alpha = kv.number("train", "alpha", cfg.alpha);
  cfg.beta = kv.number("train", "beta", cfg.beta);
  cfg.learning_rate = kv.number("train", "lr", cfg.learning_rate);
  cfg.max_steps = kv.integer("train", "max_steps", cfg.max_steps);
  cfg.seed = kv.integer("train", "seed", cfg.seed);
  cfg.log_every = kv.integer("train", "log_every", cfg.log_every);
  cfg.checkpoint_every = kv.integer("train", "checkpoint_every", cfg.checkpoint_every);
  cfg.avg_window = kv.integer("train", "avg_window", cfg.avg_window);

  const std::string mode = kv.text("reward", "mode", "denoiser-mse");
  if (mode == "denoiser-mse")
    cfg.reward_mode = RewardMode::kDenoiserMse;
  else if (mode == "analytic-mixture")
    cfg.reward_mode = RewardMode::kAnalyticMixture;
  else
    throw ConfigError("reward.mode must be denoiser-mse or analytic-mixture");
  const std::string order = kv.text("reward", "order", "set");
  if (order == "set")
    cfg.order_mode = OrderMode::kSet;
  else if (order == "sequence")
    cfg.order_mode = OrderMode::kSequence;
  else
    throw ConfigError("reward.order must be set or sequence");

  const std::string mixture = kv.text("reward", "mixture", "");
  if (mixture == "auto") {
    cfg.mixture.auto_modes = static_cast<int>(kv.integer("reward", "auto_modes", 2));
    cfg.mixture.auto_target_ratio =
        kv.number("reward", "auto_target_ratio", cfg.mixture.auto_target_ratio);
  } else if (!mixture.empty()) {
    throw ConfigError("reward.mixture must be 'auto' or omitted");
  }
  const std::string centers = kv.text("reward", "mixture_centers", "");
  if (!centers.empty()) {
    for (const std::string& row : split(centers, ';'))
      cfg.mixture.centers.push_back(parse_numbers(row, "reward.mixture_centers"));
    cfg.mixture.sigmas =
        parse_numbers(kv.text("reward", "mixture_sigmas", ""), "reward.mixture_sigmas");
    cfg.mixture.weights =
        parse_numbers(kv.text("reward", "mixture_weights", ""), "reward.mixture_weights");
  }

  cfg.enumeration_cap = kv.integer("eval", "enumeration_cap", cfg.enumeration_cap);
  cfg.tv_threshold = kv.number("eval", "tv_threshold", cfg.tv_threshold);
  cfg.residual_threshold = kv.number("eval", "residual_threshold", cfg.residual_threshold);
  cfg.coverage_radius = kv.number("eval", "coverage_radius", cfg.coverage_radius);

  kv.check_all_consumed();
  cfg.validate();
  return cfg;
}

TrainConfig TrainConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace edgeflow
