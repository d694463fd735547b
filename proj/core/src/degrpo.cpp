#include "pqrl/degrpo.hpp"

#include <algorithm>
#include <cmath>

#include "pqrl/errors.hpp"

namespace pqrl {

namespace {

double log_sigmoid(double z) {
  return z > 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}
double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::vector<double> gather(const std::vector<double>& full,
                           const std::vector<std::size_t>& tracked) {
  if (tracked.empty()) return full;
  std::vector<double> out(tracked.size());
  for (std::size_t i = 0; i < tracked.size(); ++i) out[i] = full[tracked[i]];
  return out;
}

}  // namespace

void DEGRPOConfig::validate() const {
  if (lambda < 0.0 || lambda >= 1.0) throw ConfigError("degrpo.lambda: must be in [0,1)");
  if (tau_remove < 0.0 || tau_remove > 1.0)
    throw ConfigError("degrpo.tau_remove: must be in [0,1]");
  if (tau_keep < 0.0 || tau_keep > 1.0) throw ConfigError("degrpo.tau_keep: must be in [0,1]");
  if (!(tau_remove < tau_keep)) throw ConfigError("degrpo.tau_remove: must be < degrpo.tau_keep");
  if (delta <= 0.0 || delta >= 1.0) throw ConfigError("degrpo.delta: must be in (0,1)");
  if (epsilon <= 0.0) throw ConfigError("degrpo.epsilon: must be > 0");
  if (beta < 0.0) throw ConfigError("degrpo.beta: must be >= 0");
  if (k < 4) throw ConfigError("degrpo.k: candidates per sample must be >= 4");
  if (gm_floor <= 0.0) throw ConfigError("degrpo.gm_floor: must be > 0");
  if (initial_state < 0.0 || initial_state > 1.0)
    throw ConfigError("degrpo.initial_state: must be in [0,1]");
}

const char* delta_mode_name(DeltaMode m) {
  switch (m) {
    case DeltaMode::kRemoved: return "removed";
    case DeltaMode::kDecay: return "decay";
    case DeltaMode::kKeep: return "keep";
  }
  return "?";
}

const char* run_mode_name(RunMode m) {
  return m == RunMode::kDeGrpo ? "de-grpo" : "vanilla";
}

std::vector<PreferencePair> build_pairs(const std::vector<StructuredResponse>& candidates,
                                        const StructuredResponse& truth,
                                        const ChannelWeights& weights) {
  std::vector<double> rewards(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i)
    rewards[i] = fine_grained_reward(candidates[i], truth, weights);
  std::vector<PreferencePair> pairs;
  for (std::size_t a = 0; a < candidates.size(); ++a)
    for (std::size_t b = a + 1; b < candidates.size(); ++b) {
      if (rewards[a] == rewards[b]) continue;  // ties carry no preference information
      PreferencePair p;
      if (rewards[a] > rewards[b]) {
        p.winner = a;
        p.loser = b;
      } else {
        p.winner = b;
        p.loser = a;
      }
      p.reward_winner = rewards[p.winner];
      p.reward_loser = rewards[p.loser];
      pairs.push_back(std::move(p));
    }
  return pairs;
}

void attach_gradients(std::vector<PreferencePair>& pairs,
                      const std::vector<StructuredResponse>& candidates, const ToyPolicy& policy,
                      const Mat& x, const std::vector<std::size_t>& tracked) {
  std::vector<std::vector<double>> grads(candidates.size());
  auto grad_of = [&](std::size_t i) -> const std::vector<double>& {
    if (grads[i].empty()) grads[i] = gather(policy.log_prob_grad(x, candidates[i]), tracked);
    return grads[i];
  };
  for (auto& p : pairs) {
    p.grad_winner = grad_of(p.winner);
    p.grad_loser = grad_of(p.loser);
  }
}

namespace {
double log_geo_mean(const std::vector<double>& factors, double gm_floor) {
  double acc = 0.0;
  for (double f : factors) acc += std::log(std::max(f, gm_floor));
  return std::exp(acc / static_cast<double>(factors.size()));
}
}  // namespace

double reward_separability(const std::vector<PreferencePair>& pairs, double gm_floor) {
  if (pairs.empty()) throw ContractError("reward_separability: empty pair set");
  std::vector<double> gaps;
  gaps.reserve(pairs.size());
  for (const auto& p : pairs) gaps.push_back(std::fabs(p.reward_winner - p.reward_loser));
  return log_geo_mean(gaps, gm_floor);
}

double gradient_sensitivity(const std::vector<PreferencePair>& pairs, double gm_floor) {
  if (pairs.empty()) throw ContractError("gradient_sensitivity: empty pair set");
  std::vector<double> norms;
  norms.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (p.grad_winner.empty() || p.grad_loser.empty())
      throw ContractError("gradient_sensitivity: pair is missing cached gradients");
    double s = 0.0;
    for (std::size_t i = 0; i < p.grad_winner.size(); ++i) {
      double d = p.grad_winner[i] - p.grad_loser[i];
      s += d * d;
    }
    norms.push_back(std::sqrt(s));
  }
  return log_geo_mean(norms, gm_floor);
}

double utility(double reward_sep, double grad_sens) { return reward_sep * grad_sens; }

double batch_threshold(const std::vector<double>& utilities) {
  if (utilities.empty()) throw ContractError("batch_threshold: empty batch");
  std::vector<double> sorted = utilities;
  std::sort(sorted.begin(), sorted.end());
  return sorted[(sorted.size() - 1) / 2];  // lower median for even counts
}

double recurrent_update(double s, double u, double tau, double lambda) {
  return lambda * s + (1.0 - lambda) * (u > tau ? 1.0 : 0.0);
}

DeltaMode lifecycle_factor(double s, const DEGRPOConfig& cfg) {
  if (s <= cfg.tau_remove) return DeltaMode::kRemoved;
  if (s >= cfg.tau_keep) return DeltaMode::kDecay;
  return DeltaMode::kKeep;
}

double mean_reward_gap(const std::vector<PreferencePair>& pairs) {
  if (pairs.empty()) throw ContractError("mean_reward_gap: empty pair set");
  double acc = 0.0;
  for (const auto& p : pairs) acc += p.reward_winner - p.reward_loser;
  return acc / static_cast<double>(pairs.size());
}

double advantage(const std::vector<PreferencePair>& pairs, double baseline_value,
                 double delta_factor) {
  return delta_factor * (mean_reward_gap(pairs) - baseline_value);
}

double pair_surrogate(double rho_w, double rho_l, double advantage_value, double epsilon) {
  double d = rho_w - rho_l;
  double clipped = std::clamp(d, 1.0 - epsilon, 1.0 + epsilon);
  return std::min(log_sigmoid(d) * advantage_value, log_sigmoid(clipped) * advantage_value);
}

ObjectiveResult objective(const std::vector<PreferencePair>& pairs,
                          const std::vector<StructuredResponse>& candidates, double advantage_value,
                          const ToyPolicy& current, const ToyPolicy& old_policy,
                          const ToyPolicy& ref_policy, const Mat& x, const DEGRPOConfig& cfg) {
  if (pairs.empty()) throw ContractError("objective: empty pair set");
  std::size_t np = current.param_count();
  ObjectiveResult res;
  res.policy_grad.assign(np, 0.0);

  // Per-candidate log-probs and gradients at the current parameters.
  std::vector<double> lp_cur(candidates.size()), lp_old(candidates.size());
  std::vector<std::vector<double>> grad_cur(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    lp_cur[i] = current.log_prob(x, candidates[i]);
    lp_old[i] = old_policy.log_prob(x, candidates[i]);
  }
  auto grad_of = [&](std::size_t i) -> const std::vector<double>& {
    if (grad_cur[i].empty()) grad_cur[i] = current.log_prob_grad(x, candidates[i]);
    return grad_cur[i];
  };

  double surrogate = 0.0;
  std::vector<double> dj_dtheta(np, 0.0);
  std::size_t pair_index = 0;
  for (const auto& p : pairs) {
    double rho_w = std::exp(lp_cur[p.winner] - lp_old[p.winner]);
    double rho_l = std::exp(lp_cur[p.loser] - lp_old[p.loser]);
    if (!std::isfinite(rho_w) || !std::isfinite(rho_l))
      throw NumericRangeError("objective: non-finite ratio for pair " +
                              std::to_string(pair_index) + " (winner " +
                              std::to_string(p.winner) + ", loser " + std::to_string(p.loser) +
                              ")");
    double d = rho_w - rho_l;
    double clipped = std::clamp(d, 1.0 - cfg.epsilon, 1.0 + cfg.epsilon);
    double unclipped_term = log_sigmoid(d) * advantage_value;
    double clipped_term = log_sigmoid(clipped) * advantage_value;
    bool take_unclipped = unclipped_term <= clipped_term;  // min; tie -> unclipped
    double term = take_unclipped ? unclipped_term : clipped_term;
    surrogate += term;
    res.mean_selected_logsig += take_unclipped ? log_sigmoid(d) : log_sigmoid(clipped);

    // d term / d D, accounting for the clip's dead zone.
    double dterm_dd;
    if (take_unclipped) {
      dterm_dd = advantage_value * sigmoid(-d);
    } else {
      bool inside = d > 1.0 - cfg.epsilon && d < 1.0 + cfg.epsilon;
      dterm_dd = inside ? advantage_value * sigmoid(-clipped) : 0.0;
    }
    if (dterm_dd != 0.0) {
      const auto& gw = grad_of(p.winner);
      const auto& gl = grad_of(p.loser);
      // dD/dtheta = rho_w * dlogpi(y_w) - rho_l * dlogpi(y_l)
      for (std::size_t i = 0; i < np; ++i)
        dj_dtheta[i] += dterm_dd * (rho_w * gw[i] - rho_l * gl[i]);
    }
    ++pair_index;
  }
  double inv_np = 1.0 / static_cast<double>(pairs.size());
  surrogate *= inv_np;
  res.mean_selected_logsig *= inv_np;
  for (auto& g : dj_dtheta) g *= inv_np;

  res.kl = current.kl_divergence(ref_policy, x);
  double kl_sign = cfg.kl_sign == KlSign::kPenalize ? -1.0 : 1.0;
  res.objective = surrogate + kl_sign * cfg.beta * res.kl;
  if (cfg.beta != 0.0) {
    auto klg = current.kl_grad(ref_policy, x);
    for (std::size_t i = 0; i < np; ++i) dj_dtheta[i] += kl_sign * cfg.beta * klg[i];
  }
  res.loss = -res.objective;
  for (std::size_t i = 0; i < np; ++i) res.policy_grad[i] = -dj_dtheta[i];
  return res;
}

void baseline_update(ValueBaseline& baseline, const Mat& x, double target, double lr) {
  baseline.update(x, target, lr);
}

StepReport degrpo_step(std::vector<SampleRecord*>& batch, TrainingState& state,
                       const DEGRPOConfig& cfg, RunMode mode, int iteration,
                       std::uint64_t run_seed, OpTrace* trace) {
  if (batch.empty())
    throw DataExhaustedError("degrpo_step: empty batch (active sample set exhausted)");
  auto note = [&](const char* op) {
    if (trace != nullptr) trace->insert(op);
  };

  ToyPolicy old_policy = state.policy;  // pi_old refreshed at batch start

  struct PerSample {
    SampleRecord* record;
    std::vector<StructuredResponse> candidates;
    std::vector<PreferencePair> pairs;
    double mean_reward = 0.0;
    double util = 0.0;
    double delta_factor = 1.0;
    DeltaMode mode = DeltaMode::kKeep;
    bool participates = true;
  };

  StepReport report;
  std::vector<PerSample> work;
  work.reserve(batch.size());

  for (SampleRecord* rec : batch) {
    PerSample ps;
    ps.record = rec;
    Rng rng(mix(run_seed, static_cast<std::uint64_t>(rec->id),
                static_cast<std::uint64_t>(iteration)));
    ps.candidates = state.policy.sample_candidates(rec->features, static_cast<std::size_t>(cfg.k), rng);
    double acc = 0.0;
    for (const auto& c : ps.candidates)
      acc += fine_grained_reward(c, rec->truth, state.weights);
    ps.mean_reward = acc / static_cast<double>(ps.candidates.size());
    ps.pairs = build_pairs(ps.candidates, rec->truth, state.weights);
    if (mode == RunMode::kDeGrpo) {
      if (ps.pairs.empty()) {
        ps.util = 0.0;  // degenerate sample
      } else {
        attach_gradients(ps.pairs, ps.candidates, state.policy, rec->features,
                         cfg.tracked_params);
        note("utility");
        ps.util = utility(reward_separability(ps.pairs, cfg.gm_floor),
                          gradient_sensitivity(ps.pairs, cfg.gm_floor));
      }
    }
    work.push_back(std::move(ps));
    ++report.visited;
  }

  double tau = 0.0;
  if (mode == RunMode::kDeGrpo) {
    std::vector<double> utils;
    utils.reserve(work.size());
    for (const auto& ps : work) utils.push_back(ps.util);
    tau = batch_threshold(utils);
  }

  std::vector<double> grad_acc(state.policy.param_count(), 0.0);
  std::array<double, 3> alpha_grad_acc = {0.0, 0.0, 0.0};
  int contributing = 0;
  double loss_acc = 0.0;
  double reward_acc = 0.0;

  for (auto& ps : work) {
    SampleRecord* rec = ps.record;
    reward_acc += ps.mean_reward;

    if (mode == RunMode::kDeGrpo) {
      note("recurrent_update");
      rec->state = recurrent_update(rec->state, ps.util, tau, cfg.lambda);
      bool remove = cfg.removal == RemovalBoundary::kStrict ? rec->state < cfg.tau_remove
                                                            : rec->state <= cfg.tau_remove;
      if (remove) {
        rec->status = LifecycleStatus::kRemoved;
        ps.mode = DeltaMode::kRemoved;
        ps.participates = false;
      } else {
        note("lifecycle_factor");
        ps.mode = rec->state >= cfg.tau_keep ? DeltaMode::kDecay : DeltaMode::kKeep;
        ps.delta_factor = ps.mode == DeltaMode::kDecay ? cfg.delta : 1.0;
      }
      rec->history.push_back({iteration, ps.util, rec->state, ps.mode});
    } else {
      ps.mode = DeltaMode::kKeep;
      ps.delta_factor = 1.0;
    }

    report.samples.push_back({rec->id, ps.util, rec->state, ps.mode, ps.mean_reward,
                              ps.pairs.empty()});
    if (!ps.participates || ps.pairs.empty()) continue;

    double baseline_value = state.baseline.predict(rec->features);
    double adv = advantage(ps.pairs, baseline_value, ps.delta_factor);
    ObjectiveResult obj = objective(ps.pairs, ps.candidates, adv, state.policy, old_policy,
                                    state.reference, rec->features, cfg);
    loss_acc += obj.loss;
    for (std::size_t i = 0; i < grad_acc.size(); ++i) grad_acc[i] += obj.policy_grad[i];
    ++contributing;

    double gap = mean_reward_gap(ps.pairs);
    baseline_update(state.baseline, rec->features, gap, state.lr_baseline);

    if (state.lr_alpha > 0.0) {
      // dJ/dalpha_j through the advantage: the reward is linear in the channel
      // weights; min-branch selection and the delta factor are held fixed.
      auto w = state.weights.weights();
      std::array<double, 3> mean_sim_gap = {0.0, 0.0, 0.0};
      for (const auto& p : ps.pairs)
        for (Channel c : kChannels) {
          std::size_t j = static_cast<std::size_t>(c);
          mean_sim_gap[j] += channel_sim(ps.candidates[p.winner].mask(c), rec->truth.mask(c)) -
                             channel_sim(ps.candidates[p.loser].mask(c), rec->truth.mask(c));
        }
      for (auto& v : mean_sim_gap) v /= static_cast<double>(ps.pairs.size());
      std::array<double, 3> dj_dalpha;
      for (std::size_t j = 0; j < 3; ++j)
        dj_dalpha[j] = obj.mean_selected_logsig * ps.delta_factor * mean_sim_gap[j];
      // Chain through the softmax onto the logits; accumulate the loss gradient.
      for (std::size_t k2 = 0; k2 < 3; ++k2) {
        double acc2 = 0.0;
        for (std::size_t j = 0; j < 3; ++j)
          acc2 += dj_dalpha[j] * w[j] * ((j == k2 ? 1.0 : 0.0) - w[k2]);
        alpha_grad_acc[k2] += -acc2;
      }
    }
  }

  report.mean_reward = reward_acc / static_cast<double>(work.size());
  if (contributing > 0) {
    double inv = 1.0 / static_cast<double>(contributing);
    for (auto& g : grad_acc) g *= inv;
    state.policy.add_scaled(grad_acc, -state.lr_policy);
    report.batch_loss = loss_acc * inv;
    if (state.lr_alpha > 0.0) {
      std::array<double, 3> g;
      for (std::size_t j = 0; j < 3; ++j) g[j] = alpha_grad_acc[j] * inv;
      state.weights = update_channel_weights(state.weights, g, state.lr_alpha);
    }
  }
  return report;
}

}  // namespace pqrl
