// Copyright (c) 2026 The EdgeFlow Authors
// SPDX-License-Identifier: Apache-2.0

#include "session.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <set>

namespace edgeflow {

namespace {

constexpr std::uint64_t kAuxSeedSalt = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kGradCheckSalt = 0x5EEDF00DCAFEBEEFULL;

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += format_double(v[i]);
  }
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(v[i]);
  }
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << content;
  if (!out) throw IoError("failed writing: " + path);
}

}  // namespace

Session::Session(TrainConfig cfg) : cfg_(std::move(cfg)) {}

std::unique_ptr<Session> Session::create(const TrainConfig& config) {
  config.validate();
  std::unique_ptr<Session> s(new Session(config));
  s->build();
  s->resolve_mixture();
  return s;
}

void Session::build() {
  rng_ = Rng(cfg_.seed);

  PolicyDims pd;
  pd.condition_dim = cfg_.s_c;
  pd.h_c = cfg_.h_c;
  pd.h_g = cfg_.h_g;
  pd.total_edges = static_cast<std::size_t>(cfg_.graph.total_edges());
  policy_ = PolicyNet::create(store_, pd, rng_);

  DecoderDims dd;
  dd.total_edges = pd.total_edges;
  dd.embed_dim = cfg_.d_dim;
  dd.condition_dim = cfg_.s_c;
  decoder_ = DecoderNet::create(store_, dd, cfg_.pooling, rng_);

  DenoiserDims nd;
  nd.data_dim = cfg_.data_dim;
  nd.condition_dim = cfg_.s_c;
  nd.hidden = cfg_.denoiser_hidden;
  denoiser_ = DenoiserNet::create(store_, nd, rng_);
  if (cfg_.freeze_denoiser) {
    for (std::size_t i = 0; i < store_.count(); ++i) {
      Parameter& p = store_.at(i);
      if (p.name.rfind("denoiser/", 0) == 0) p.trainable = false;
    }
  }

  schedule_ = make_schedule(cfg_.t_steps, cfg_.a_start, cfg_.a_end);

  // Condition and dataset come from a side stream so that the main RNG
  // state stays a pure function of (seed, completed steps).
  Rng aux(cfg_.seed ^ kAuxSeedSalt);
  condition_ = normal_tensor({cfg_.s_c}, 0.5, aux);
  dataset_ = make_dataset(cfg_.data_modes, cfg_.data_dim, cfg_.data_scale,
                          cfg_.data_sigma, aux);

  optimizer_ = Adam(cfg_.learning_rate);
  optimizer_.attach(store_);
}

namespace {

// Decoded and blended representations of every terminal set, one row each.
Tensor decode_terminal_rows(const std::vector<std::vector<int>>& sets,
                            const DecoderNet& decoder, const GraphConfig& graph,
                            const Tensor& condition, double gamma) {
  const std::size_t s_c = decoder.dims.condition_dim;
  Tensor rows({sets.size(), s_c});
  const std::size_t batch = 64;
  const int budget = static_cast<int>(sets.front().size());
  for (std::size_t begin = 0; begin < sets.size(); begin += batch) {
    const std::size_t end = std::min(begin + batch, sets.size());
    const int m = static_cast<int>(end - begin);
    TrajectorySet set = init_trajectories(m, graph.total_edges(), budget);
    for (int step = 0; step < budget; ++step) {
      std::vector<int> actions(static_cast<std::size_t>(m));
      for (std::size_t i = 0; i < actions.size(); ++i)
        actions[i] = sets[begin + i][static_cast<std::size_t>(step)];
      append_edges(set, actions);
    }
    Tape tape;
    Var c_hat = blend(tape, decode_trajectories(tape, decoder, set, OrderMode::kSet),
                      condition, gamma);
    const Tensor& v = tape.value(c_hat);
    for (std::size_t i = 0; i < static_cast<std::size_t>(m); ++i)
      for (std::size_t j = 0; j < s_c; ++j) rows.at(begin + i, j) = v.at(i, j);
  }
  return rows;
}

double reward_ratio_for_sigma(const Tensor& rows, const std::vector<std::size_t>& anchors,
                              double sigma) {
  MixtureReward mix;
  for (std::size_t a : anchors) {
    Tensor center({rows.cols()});
    for (std::size_t j = 0; j < rows.cols(); ++j) center[j] = rows.at(a, j);
    mix.centers.push_back(std::move(center));
    mix.sigmas.push_back(sigma);
    mix.weights.push_back(1.0);
  }
  std::vector<double> lr = analytic_log_reward(rows, mix);
  const auto [mn, mx] = std::minmax_element(lr.begin(), lr.end());
  return std::exp(*mx - *mn);
}

}  // namespace

void Session::resolve_mixture() {
  mixture_ = MixtureReward{};
  if (cfg_.reward_mode != RewardMode::kAnalyticMixture) return;

  if (!cfg_.mixture.centers.empty()) {
    for (const auto& c : cfg_.mixture.centers) {
      Tensor center({c.size()});
      for (std::size_t j = 0; j < c.size(); ++j) center[j] = c[j];
      mixture_.centers.push_back(std::move(center));
    }
    mixture_.sigmas = cfg_.mixture.sigmas;
    mixture_.weights = cfg_.mixture.weights;
    mixture_.validate(cfg_.s_c);
    return;
  }

  // Auto anchoring: centers sit at the decoded representations of
  // well-separated terminal sets, and a shared sigma is solved so the
  // best/worst reward ratio over all terminal sets hits the target.
  if (cfg_.order_mode != OrderMode::kSet)
    throw ConfigError("auto mixture anchoring requires set order mode");
  const auto sets = enumerate_terminal_sets(cfg_.graph.total_edges(), cfg_.graph.steps(),
                                            cfg_.enumeration_cap);
  Tensor rows = decode_terminal_rows(sets, decoder_, cfg_.graph, condition_, cfg_.gamma);
  const std::size_t n = rows.rows();
  const int k = cfg_.mixture.auto_modes;
  if (static_cast<std::size_t>(k) > n)
    throw ConfigError("auto mixture modes exceed terminal set count");

  const auto dist2 = [&rows](std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t j = 0; j < rows.cols(); ++j) {
      const double d = rows.at(a, j) - rows.at(b, j);
      s += d * d;
    }
    return s;
  };

  // Farthest pair, then greedy farthest-point extension.
  std::vector<std::size_t> anchors;
  {
    std::size_t best_a = 0, best_b = 1;
    double best = -1.0;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b)
        if (dist2(a, b) > best) {
          best = dist2(a, b);
          best_a = a;
          best_b = b;
        }
    anchors = {best_a, best_b};
  }
  while (static_cast<int>(anchors.size()) < k) {
    std::size_t best_i = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::find(anchors.begin(), anchors.end(), i) != anchors.end()) continue;
      double nearest = std::numeric_limits<double>::infinity();
      for (std::size_t a : anchors) nearest = std::min(nearest, dist2(i, a));
      if (nearest > best) {
        best = nearest;
        best_i = i;
      }
    }
    anchors.push_back(best_i);
  }
  anchors.resize(static_cast<std::size_t>(k));

  // Ratio decreases as sigma grows; bisect on log-sigma.
  double lo = 1e-4, hi = 1e4;
  const double target = cfg_.mixture.auto_target_ratio;
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (reward_ratio_for_sigma(rows, anchors, mid) > target)
      lo = mid;
    else
      hi = mid;
  }
  const double sigma = std::sqrt(lo * hi);
  for (std::size_t a : anchors) {
    Tensor center({rows.cols()});
    for (std::size_t j = 0; j < rows.cols(); ++j) center[j] = rows.at(a, j);
    mixture_.centers.push_back(std::move(center));
    mixture_.sigmas.push_back(sigma);
    mixture_.weights.push_back(1.0);
  }
  mixture_.validate(cfg_.s_c);
}

std::string Session::instance_name() const {
  return "n" + std::to_string(cfg_.graph.num_nodes) + "_s" +
         std::to_string(cfg_.graph.steps()) + "_m" +
         std::to_string(cfg_.graph.num_trajectories);
}

double Session::current_explore() const {
  const double start = cfg_.eps_explore_start;
  const double end = cfg_.eps_explore_end;
  if (cfg_.max_steps == 0) return start;
  const double frac = std::min(
      1.0, static_cast<double>(step_) / static_cast<double>(cfg_.max_steps));
  return start + (end - start) * frac;
}

double Session::terminal_log_reward(const std::vector<int>& terminal_set) const {
  if (mixture_.centers.empty())
    throw ContractError("terminal_log_reward requires the analytic reward oracle");
  TrajectorySet set = init_trajectories(1, cfg_.graph.total_edges(),
                                        static_cast<int>(terminal_set.size()));
  for (int edge : terminal_set) append_edges(set, {edge});
  Tape tape;
  Var c_hat = blend(tape, decode_trajectories(tape, decoder_, set, cfg_.order_mode),
                    condition_, cfg_.gamma);
  return analytic_log_reward(tape.value(c_hat), mixture_)[0];
}

TerminalDistribution Session::target() const {
  if (mixture_.centers.empty())
    throw ContractError("target distribution requires the analytic reward oracle");
  if (cfg_.order_mode != OrderMode::kSet)
    throw EnumerationError("target distribution requires set order mode");
  return target_distribution(mixture_, cfg_.graph, decoder_, condition_, cfg_.gamma,
                             cfg_.enumeration_cap);
}

StepStats Session::train_step() {
  store_.zero_grads();
  Tape tape;
  const int m = cfg_.graph.num_trajectories;
  const int budget = cfg_.graph.steps();

  TrajectorySet set = init_trajectories(cfg_.graph);
  Var c_enc = encode_condition(tape, policy_, condition_);
  LLDiff acc = LLDiff::init(tape, budget, m);
  const double explore = current_explore();
  std::vector<int> previous;
  for (int i = 1; i <= budget; ++i) {
    PolicyOutputs outputs = policy_forward(tape, policy_, set, c_enc);
    std::vector<int> actions = sample_actions(tape.value(outputs.log_forward),
                                              set.forward_mask, explore, rng_);
    acc.accumulate(tape, i, outputs, actions, previous);
    append_edges(set, actions);
    previous = actions;
  }

  Var c_hat = blend(tape, decode_trajectories(tape, decoder_, set, cfg_.order_mode),
                    condition_, cfg_.gamma);

  const bool need_ldm =
      cfg_.reward_mode == RewardMode::kDenoiserMse || cfg_.beta > 0.0;
  std::optional<LdmLossTerms> ldm;
  if (need_ldm) {
    const Tensor z0 = dataset_.draw(rng_);
    const int t = 1 + static_cast<int>(rng_.below(static_cast<std::uint64_t>(cfg_.t_steps)));
    const NoisedSample noised = add_noise(z0, t, schedule_, rng_);
    Var eps_hat = predict_noise(tape, denoiser_, noised.z_t, t, schedule_, c_hat);
    ldm = ldm_loss(tape, eps_hat, noised.eps);
  }

  StepStats stats;
  if (cfg_.reward_mode == RewardMode::kDenoiserMse) {
    stats.log_rewards = log_reward(tape.value(ldm->per_trajectory).data());
  } else {
    stats.log_rewards = analytic_log_reward(tape.value(c_hat), mixture_);
  }
  acc.subtract_terminal_log_reward(tape, stats.log_rewards);

  Var l_gfn = acc.squared_mean(tape);
  Var l_ldm = ldm ? ldm->mean : tape.input(Tensor::scalar(0.0), "l_ldm_zero");
  Var l_total =
      tape.add(tape.affine(l_gfn, cfg_.alpha, 0.0), tape.affine(l_ldm, cfg_.beta, 0.0));

  stats.loss_gfn = tape.value(l_gfn).item();
  stats.loss_ldm = tape.value(l_ldm).item();
  stats.loss_total = tape.value(l_total).item();
  if (!std::isfinite(stats.loss_total)) {
    const std::string label = tape.first_non_finite_label();
    throw NumericError("non-finite loss at step " + std::to_string(step_ + 1) +
                       "; first non-finite tensor: " +
                       (label.empty() ? "<loss accumulation>" : label));
  }

  tape.backward(l_total);
  optimizer_.step(store_);
  ++step_;
  return stats;
}

void Session::train(const std::string& out_dir, std::uint64_t steps_override) {
  const std::uint64_t target = steps_override ? steps_override : cfg_.max_steps;
  if (target < step_)
    throw ContractError("requested step target " + std::to_string(target) +
                        " is below the current step " + std::to_string(step_));
  const bool io = !out_dir.empty();
  if (io) std::filesystem::create_directories(out_dir);

  std::string log = "step,loss_gfn,loss_ldm,loss_total,mean_log_reward\n";
  while (step_ < target) {
    const StepStats s = train_step();
    const bool log_now =
        (cfg_.log_every != 0 && step_ % cfg_.log_every == 0) || step_ == target;
    if (log_now) {
      double mean_lr = 0.0;
      for (double r : s.log_rewards) mean_lr += r;
      mean_lr /= static_cast<double>(s.log_rewards.size());
      log += std::to_string(step_) + "," + format_double(s.loss_gfn) + "," +
             format_double(s.loss_ldm) + "," + format_double(s.loss_total) + "," +
             format_double(mean_lr) + "\n";
    }
    if (io && cfg_.checkpoint_every != 0 && step_ % cfg_.checkpoint_every == 0 &&
        step_ != target)
      save(out_dir + "/checkpoint_" + std::to_string(step_) + ".efc");
  }
  if (io) {
    write_file(out_dir + "/train_log.csv", log);
    save(out_dir + "/checkpoint.efc");
  }
}

Checkpoint Session::to_checkpoint() const {
  Checkpoint ck;
  ck.config_text = cfg_.serialize();
  ck.step = step_;
  ck.optimizer_step = static_cast<std::uint64_t>(optimizer_.step_count());
  ck.rng_state = rng_.serialize();
  for (std::size_t i = 0; i < store_.count(); ++i)
    ck.tensors.emplace_back(store_.at(i).name, store_.at(i).value);
  for (std::size_t i = 0; i < store_.count(); ++i)
    ck.tensors.emplace_back("opt/m/" + store_.at(i).name, optimizer_.first_moments()[i]);
  for (std::size_t i = 0; i < store_.count(); ++i)
    ck.tensors.emplace_back("opt/v/" + store_.at(i).name, optimizer_.second_moments()[i]);
  ck.tensors.emplace_back("data/condition", condition_);
  if (!mixture_.centers.empty()) {
    for (std::size_t k = 0; k < mixture_.centers.size(); ++k)
      ck.tensors.emplace_back("reward/center_" + std::to_string(k), mixture_.centers[k]);
    Tensor sig({mixture_.sigmas.size()});
    Tensor wgt({mixture_.weights.size()});
    for (std::size_t k = 0; k < mixture_.sigmas.size(); ++k) {
      sig[k] = mixture_.sigmas[k];
      wgt[k] = mixture_.weights[k];
    }
    ck.tensors.emplace_back("reward/sigmas", std::move(sig));
    ck.tensors.emplace_back("reward/weights", std::move(wgt));
  }
  return ck;
}

void Session::save(const std::string& path) const { to_checkpoint().save(path); }

std::unique_ptr<Session> Session::from_checkpoint(const Checkpoint& ck) {
  TrainConfig cfg = TrainConfig::parse(ck.config_text);
  std::unique_ptr<Session> s(new Session(cfg));
  s->build();

  std::size_t expected = s->store_.count() * 3 + 1;
  for (std::size_t i = 0; i < s->store_.count(); ++i) {
    Parameter& p = s->store_.at(i);
    const Tensor* t = ck.find(p.name);
    if (!t) throw FormatError("checkpoint missing parameter " + p.name);
    if (!t->same_shape(p.value))
      throw FormatError("checkpoint shape mismatch for " + p.name);
    p.value = *t;
    const Tensor* m = ck.find("opt/m/" + p.name);
    const Tensor* v = ck.find("opt/v/" + p.name);
    if (!m || !v) throw FormatError("checkpoint missing optimizer moments for " + p.name);
    if (!m->same_shape(p.value) || !v->same_shape(p.value))
      throw FormatError("checkpoint moment shape mismatch for " + p.name);
    s->optimizer_.first_moments()[i] = *m;
    s->optimizer_.second_moments()[i] = *v;
  }
  s->optimizer_.set_step_count(static_cast<long long>(ck.optimizer_step));

  const Tensor* cond = ck.find("data/condition");
  if (!cond) throw FormatError("checkpoint missing data/condition");
  if (cond->size() != cfg.s_c) throw FormatError("checkpoint condition width mismatch");
  s->condition_ = *cond;

  if (cfg.reward_mode == RewardMode::kAnalyticMixture) {
    MixtureReward mix;
    for (std::size_t k = 0;; ++k) {
      const Tensor* c = ck.find("reward/center_" + std::to_string(k));
      if (!c) break;
      mix.centers.push_back(*c);
    }
    const Tensor* sig = ck.find("reward/sigmas");
    const Tensor* wgt = ck.find("reward/weights");
    if (mix.centers.empty() || !sig || !wgt)
      throw FormatError("checkpoint missing analytic reward oracle tensors");
    mix.sigmas.assign(sig->data().begin(), sig->data().end());
    mix.weights.assign(wgt->data().begin(), wgt->data().end());
    mix.validate(cfg.s_c);
    s->mixture_ = std::move(mix);
    expected += s->mixture_.centers.size() + 2;
  }
  if (ck.tensors.size() != expected)
    throw FormatError("checkpoint holds " + std::to_string(ck.tensors.size()) +
                      " tensors, expected " + std::to_string(expected));

  s->rng_.deserialize(ck.rng_state);
  s->step_ = ck.step;
  return s;
}

std::unique_ptr<Session> Session::open(const std::string& checkpoint_path) {
  return from_checkpoint(Checkpoint::load(checkpoint_path));
}

std::vector<SampleRow> Session::sample(int m_override, const std::vector<int>& extra_edges,
                                       std::uint64_t seed) {
  Rng rng(seed);
  GraphConfig graph = cfg_.graph;
  if (m_override > 0) graph.num_trajectories = m_override;
  TrajectorySet set = rollout_trajectories(policy_, graph, condition_, 0.0, rng);

  Tape tape;
  Var c_hat = extra_edges.empty()
                  ? blend(tape, decode_trajectories(tape, decoder_, set, cfg_.order_mode),
                          condition_, cfg_.gamma)
                  : append_and_decode(tape, decoder_, set, extra_edges, condition_,
                                      cfg_.gamma, cfg_.order_mode);
  const Tensor& rows = tape.value(c_hat);

  std::vector<SampleRow> out;
  out.reserve(static_cast<std::size_t>(set.size()));
  for (int i = 0; i < set.size(); ++i) {
    SampleRow row;
    row.trajectory = set.edges[static_cast<std::size_t>(i)];
    row.c_hat.resize(rows.cols());
    Tensor c_row({rows.cols()});
    for (std::size_t j = 0; j < rows.cols(); ++j) {
      row.c_hat[j] = rows.at(static_cast<std::size_t>(i), j);
      c_row[j] = row.c_hat[j];
    }
    Tensor z_terminal({cfg_.data_dim});
    for (std::size_t j = 0; j < cfg_.data_dim; ++j) z_terminal[j] = rng.normal();
    const Tensor generated = sample_reverse(z_terminal, c_row, denoiser_, schedule_, rng);
    row.generated.assign(generated.data().begin(), generated.data().end());
    out.push_back(std::move(row));
  }
  return out;
}

std::string Session::sample_rows_to_csv(const std::vector<SampleRow>& rows) {
  std::string out = "trajectory,c_hat,sample\n";
  for (const auto& r : rows) {
    out += join_ints(r.trajectory);
    out += ',';
    out += join_doubles(r.c_hat);
    out += ',';
    out += join_doubles(r.generated);
    out += '\n';
  }
  return out;
}

EvalReport Session::eval(const std::string& suite, std::uint64_t seed, int num_samples) {
  EvalReport report;
  const std::string inst = instance_name();

  if (suite == "proportionality") {
    if (cfg_.reward_mode != RewardMode::kAnalyticMixture || cfg_.order_mode != OrderMode::kSet)
      throw ConfigError("proportionality suite requires analytic-mixture reward in set mode");
    const int sets = num_samples > 0 ? num_samples : 20000;
    const TerminalDistribution p = target();
    Rng rng(seed);
    const TerminalDistribution q =
        empirical_terminal_distribution(policy_, cfg_.graph, condition_, sets, rng);
    const double tv = tv_distance(p, q);
    report.rows.push_back({"tv_distance", inst, seed, tv});
    report.rows.push_back({"tv_threshold", inst, seed, cfg_.tv_threshold});
    report.rows.push_back({"terminal_sets", inst, seed, static_cast<double>(p.support.size())});
    report.rows.push_back({"empirical_sets", inst, seed, static_cast<double>(sets)});
    report.failed = !(tv < cfg_.tv_threshold);
  } else if (suite == "residuals") {
    if (cfg_.reward_mode != RewardMode::kAnalyticMixture || cfg_.order_mode != OrderMode::kSet)
      throw ConfigError("residuals suite requires analytic-mixture reward in set mode");
    const ResidualStats stats = db_residuals(
        make_policy_evaluator(policy_, cfg_.graph, condition_), cfg_.graph.total_edges(),
        cfg_.graph.steps(), [this](const std::vector<int>& x) { return terminal_log_reward(x); },
        cfg_.enumeration_cap);
    report.rows.push_back({"residual_max_abs", inst, seed, stats.max_abs});
    report.rows.push_back({"residual_mean_square", inst, seed, stats.mean_square});
    report.rows.push_back({"residual_threshold", inst, seed, cfg_.residual_threshold});
    report.rows.push_back({"transitions", inst, seed, static_cast<double>(stats.transitions)});
    report.failed = !(stats.mean_square < cfg_.residual_threshold);
  } else if (suite == "diversity") {
    const int n = num_samples > 0 ? num_samples : 512;
    Rng rng(seed);
    TrajectorySet set = rollout_trajectories(policy_, cfg_.graph, condition_, 0.0, rng);
    Tape tape;
    Var c_hat = blend(tape, decode_trajectories(tape, decoder_, set, cfg_.order_mode),
                      condition_, cfg_.gamma);
    const Tensor samples = generate_batch(n, tape.value(c_hat), rng);
    const double vendi_linear = vendi_score(samples, VendiKernel::kNormalizedLinear);
    const double vendi_rbf = vendi_score(samples, VendiKernel::kRbf);
    const double coverage = mode_coverage(samples, dataset_.centers, cfg_.coverage_radius);
    report.rows.push_back({"vendi_linear", inst, seed, vendi_linear});
    report.rows.push_back({"vendi_rbf", inst, seed, vendi_rbf});
    report.rows.push_back({"mode_coverage", inst, seed, coverage});
    report.rows.push_back({"generated_samples", inst, seed, static_cast<double>(n)});
    // Export: condition fields then data coords, one generated sample per row.
    std::string csv;
    for (std::size_t i = 0; i < samples.rows(); ++i) {
      for (std::size_t j = 0; j < condition_.size(); ++j)
        csv += format_double(condition_[j]) + ",";
      for (std::size_t j = 0; j < samples.cols(); ++j) {
        csv += format_double(samples.at(i, j));
        csv += j + 1 < samples.cols() ? ',' : '\n';
      }
    }
    report.samples_csv = std::move(csv);
  } else {
    throw ConfigError("unknown eval suite: " + suite +
                      " (expected proportionality|residuals|diversity)");
  }

  report.csv = metrics_to_csv(report.rows);
  report.json = metrics_to_json(report.rows);
  return report;
}

Tensor Session::generate_batch(int count, const Tensor& c_hat_rows, Rng& rng) const {
  if (count < 1) throw ContractError("generate_batch: need at least one sample");
  Tensor samples({static_cast<std::size_t>(count), cfg_.data_dim});
  const std::size_t m = c_hat_rows.rows();
  Tensor c_row({c_hat_rows.cols()});
  for (int i = 0; i < count; ++i) {
    const std::size_t which = static_cast<std::size_t>(i) % m;
    for (std::size_t j = 0; j < c_hat_rows.cols(); ++j)
      c_row[j] = c_hat_rows.at(which, j);
    Tensor z({cfg_.data_dim});
    for (std::size_t j = 0; j < cfg_.data_dim; ++j) z[j] = rng.normal();
    const Tensor x = sample_reverse(z, c_row, denoiser_, schedule_, rng);
    for (std::size_t j = 0; j < cfg_.data_dim; ++j)
      samples.at(static_cast<std::size_t>(i), j) = x[j];
  }
  return samples;
}

double Session::grad_check_composite(double eps) {
  // Freeze one batch: actions, the data/noise draw and the terminal rewards
  // are recorded once and held constant across all finite-difference
  // evaluations, matching the training semantics where the reward is a
  // constant with respect to the parameters.
  Rng rng(cfg_.seed ^ kGradCheckSalt);
  const int budget = cfg_.graph.steps();

  std::vector<std::vector<int>> actions_per_step;
  {
    Tape tape;
    TrajectorySet set = init_trajectories(cfg_.graph);
    Var c_enc = encode_condition(tape, policy_, condition_);
    for (int i = 1; i <= budget; ++i) {
      PolicyOutputs outputs = policy_forward(tape, policy_, set, c_enc);
      std::vector<int> actions = sample_actions(tape.value(outputs.log_forward),
                                                set.forward_mask, 0.0, rng);
      append_edges(set, actions);
      actions_per_step.push_back(std::move(actions));
    }
  }

  const bool need_ldm =
      cfg_.reward_mode == RewardMode::kDenoiserMse || cfg_.beta > 0.0;
  Tensor z0, z_t, noise;
  int t = 1;
  if (need_ldm) {
    z0 = dataset_.draw(rng);
    t = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg_.t_steps)));
    NoisedSample noised = add_noise(z0, t, schedule_, rng);
    z_t = std::move(noised.z_t);
    noise = std::move(noised.eps);
  }

  const auto replay = [&](Tape& tape, std::vector<double>* log_rewards_out,
                          const std::vector<double>* frozen_log_rewards) -> Var {
    TrajectorySet set = init_trajectories(cfg_.graph);
    Var c_enc = encode_condition(tape, policy_, condition_);
    LLDiff acc = LLDiff::init(tape, budget, cfg_.graph.num_trajectories);
    std::vector<int> previous;
    for (int i = 1; i <= budget; ++i) {
      PolicyOutputs outputs = policy_forward(tape, policy_, set, c_enc);
      const auto& actions = actions_per_step[static_cast<std::size_t>(i - 1)];
      acc.accumulate(tape, i, outputs, actions, previous);
      append_edges(set, actions);
      previous = actions;
    }
    Var c_hat = blend(tape, decode_trajectories(tape, decoder_, set, cfg_.order_mode),
                      condition_, cfg_.gamma);
    std::optional<LdmLossTerms> ldm;
    if (need_ldm) {
      Var eps_hat = predict_noise(tape, denoiser_, z_t, t, schedule_, c_hat);
      ldm = ldm_loss(tape, eps_hat, noise);
    }
    std::vector<double> log_rewards;
    if (frozen_log_rewards) {
      log_rewards = *frozen_log_rewards;
    } else if (cfg_.reward_mode == RewardMode::kDenoiserMse) {
      log_rewards = log_reward(tape.value(ldm->per_trajectory).data());
    } else {
      log_rewards = analytic_log_reward(tape.value(c_hat), mixture_);
    }
    if (log_rewards_out) *log_rewards_out = log_rewards;
    acc.subtract_terminal_log_reward(tape, log_rewards);
    Var l_gfn = acc.squared_mean(tape);
    Var l_ldm = ldm ? ldm->mean : tape.input(Tensor::scalar(0.0), "l_ldm_zero");
    return tape.add(tape.affine(l_gfn, cfg_.alpha, 0.0),
                    tape.affine(l_ldm, cfg_.beta, 0.0));
  };

  std::vector<double> frozen;
  {
    Tape tape;
    replay(tape, &frozen, nullptr);
  }

  std::vector<Parameter*> trainable;
  for (std::size_t i = 0; i < store_.count(); ++i)
    if (store_.at(i).trainable) trainable.push_back(&store_.at(i));

  return grad_check(
      [&](Tape& tape) { return replay(tape, nullptr, &frozen); }, trainable, eps);
}

EnumerateReport Session::enumerate_check() {
  if (cfg_.order_mode != OrderMode::kSet)
    throw ConfigError("enumerate-check requires set order mode");
  EnumerateReport report;
  report.terminal_sets = binomial(cfg_.graph.total_edges(), cfg_.graph.steps());
  if (report.terminal_sets > cfg_.enumeration_cap)
    throw EnumerationError("terminal set count exceeds the enumeration cap");

  report.bijection_ok = true;
  const int n = cfg_.graph.num_nodes;
  for (int e = 1; e <= cfg_.graph.total_edges(); ++e) {
    const auto [i, j] = edge_to_pair(e, n);
    if (pair_to_edge(i, j, n) != e) report.bijection_ok = false;
  }

  if (cfg_.reward_mode == RewardMode::kAnalyticMixture) {
    const TerminalDistribution p = target();
    report.probability_sum = 0.0;
    report.min_probability = std::numeric_limits<double>::infinity();
    report.max_probability = 0.0;
    for (double v : p.probability) {
      report.probability_sum += v;
      report.min_probability = std::min(report.min_probability, v);
      report.max_probability = std::max(report.max_probability, v);
    }
    report.reward_ratio =
        report.min_probability > 0.0 ? report.max_probability / report.min_probability
                                     : std::numeric_limits<double>::infinity();
  }
  return report;
}

}  // namespace edgeflow
