#include "prefopt/policy_opt.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include "prefopt/errors.hpp"
#include "prefopt/numeric.hpp"

namespace prefopt {

std::string to_string(StatePool p) {
  return p == StatePool::prompts_only ? "prompts_only" : "union_with_pref";
}

StatePool state_pool_from_string(const std::string& s) {
  if (s == "prompts_only") return StatePool::prompts_only;
  if (s == "union_with_pref" || s == "union") return StatePool::union_with_pref;
  throw std::invalid_argument("unknown state pool: " + s);
}

PolicyOptConfig PolicyOptConfig::linear_default() { return PolicyOptConfig{}; }

PolicyOptConfig PolicyOptConfig::neural_default() {
  PolicyOptConfig c;
  c.optimizer = OptimizerSettings::adam(1e-3);
  c.max_steps = 10000;
  return c;
}

void PolicyOptConfig::validate() const {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("beta", 0, "beta must be a finite value >= 0");
  if (max_steps < 1) throw ConfigError("max_steps", 0, "max_steps must be >= 1");
  if (patience < 1) throw ConfigError("patience", 0, "patience must be >= 1");
  if (!(optimizer.step_size > 0.0)) throw ConfigError("step_size", 0, "step_size must be > 0");
  if (!(convergence_tol >= 0.0)) throw ConfigError("tol", 0, "tol must be >= 0");
}

namespace {

// Value and logit gradient of the reward-plus-KL objective for each column.
double reward_kl_columns(const ActionTable& logits, const ActionTable& rewards, double beta, ActionTable* dlogits) {
  const long k = logits.rows();
  const double log_k = std::log(static_cast<double>(k));
  std::vector<double> logp(static_cast<std::size_t>(k));
  std::vector<double> h(static_cast<std::size_t>(k));
  if (dlogits) dlogits->resize(k, logits.cols());
  double total = 0.0;
  for (long j = 0; j < logits.cols(); ++j) {
    log_softmax(std::span<const double>(logits.col(j).data(), static_cast<std::size_t>(k)), logp);
    double mean_h = 0.0;
    for (long a = 0; a < k; ++a) {
      const auto i = static_cast<std::size_t>(a);
      const double p = std::exp(logp[i]);
      h[i] = rewards(a, j) - beta * (logp[i] + log_k);
      mean_h += p * h[i];
      total += p * rewards(a, j);
      if (p > 0.0) total -= beta * p * (logp[i] + log_k);
    }
    if (dlogits) {
      for (long a = 0; a < k; ++a) {
        const auto i = static_cast<std::size_t>(a);
        (*dlogits)(a, j) = std::exp(logp[i]) * (h[i] - mean_h);
      }
    }
  }
  return total;
}

ActionTable masked_rewards(const RewardModel& reward, const PreferenceDataset& d) {
  const auto states = d.states();
  const ActionTable full = reward.table(states);
  ActionTable masked = ActionTable::Zero(full.rows(), full.cols());
  for (std::size_t i = 0; i < d.n(); ++i) {
    const long j = static_cast<long>(i);
    masked(d[i].winner.index, j) = full(d[i].winner.index, j);
    masked(d[i].loser.index, j) = full(d[i].loser.index, j);
  }
  return masked;
}

double dpo_columns(const ActionTable& logits, const PreferenceDataset& d, double beta, ActionTable* dlogits) {
  if (dlogits) *dlogits = ActionTable::Zero(logits.rows(), logits.cols());
  double total = 0.0;
  for (std::size_t i = 0; i < d.n(); ++i) {
    const long j = static_cast<long>(i);
    const int w = d[i].winner.index;
    const int l = d[i].loser.index;
    const double u = beta * (logits(w, j) - logits(l, j));
    total -= log_sigmoid(u);
    if (dlogits) {
      const double g = -sigmoid(-u) * beta;
      (*dlogits)(w, j) += g;
      (*dlogits)(l, j) -= g;
    }
  }
  return total;
}

using Objective = std::function<double(std::span<const double>, std::span<double>)>;

double l2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

PolicyTrainResult optimize(const Policy& init, const Objective& f, Direction direction, const PolicyOptConfig& cfg) {
  cfg.validate();
  PolicyTrainResult result{init, {}, 0, false, 0.0, 0.0};
  auto params = result.policy.params().data();
  std::vector<double> grad(params.size());
  auto state = OptimizerState::create(cfg.optimizer, params.size());

  double value = f(params, grad);
  if (!std::isfinite(value)) throw NumericError("divergence: non-finite objective at step 0");
  result.initial_value = value;
  if (cfg.record_trace) result.trace.push_back({0, value, l2(grad)});

  int stable = 0;
  for (int step = 1; step <= cfg.max_steps; ++step) {
    opt_step(state, params, grad, direction);
    const double next = f(params, grad);
    if (!std::isfinite(next)) {
      throw NumericError("divergence: non-finite objective at step " + std::to_string(step));
    }
    if (cfg.record_trace) result.trace.push_back({step, next, l2(grad)});
    stable = std::abs(next - value) < cfg.convergence_tol ? stable + 1 : 0;
    value = next;
    result.steps = step;
    if (stable >= cfg.patience) {
      result.converged = true;
      break;
    }
  }
  result.final_value = value;
  return result;
}

PolicyTrainResult train_on_table(const Policy& init, std::span<const State> states, const ActionTable& rewards,
                                 const PolicyOptConfig& cfg) {
  PolicyBatch batch(init, states);
  ActionTable dlogits;
  const Objective f = [&](std::span<const double> params, std::span<double> grad) {
    const double v = reward_kl_columns(batch.logits(params), rewards, cfg.beta, &dlogits);
    batch.backward(params, dlogits, grad);
    return v;
  };
  return optimize(init, f, Direction::ascent, cfg);
}

void require_nonempty(const PreferenceDataset& d, const char* who) {
  if (d.empty()) throw std::invalid_argument(std::string(who) + ": preference dataset is empty");
}

}  // namespace

LossWithGradient reward_kl_objective_with_gradient(const Policy& policy, std::span<const State> states,
                                                    const ActionTable& rewards, double beta) {
  PolicyBatch batch(policy, states);
  ActionTable dlogits;
  LossWithGradient out;
  out.value = reward_kl_columns(batch.logits(policy.params().data()), rewards, beta, &dlogits);
  out.grad.resize(policy.params().size());
  batch.backward(policy.params().data(), dlogits, out.grad);
  return out;
}

double rmb_objective(const Policy& policy, const RewardModel& reward, std::span<const State> states, double beta) {
  if (states.empty()) throw std::invalid_argument("rmb_objective: no states");
  return reward_kl_columns(policy.logit_table(states), reward.table(states), beta, nullptr);
}

LossWithGradient rmb_objective_with_gradient(const Policy& policy, const RewardModel& reward,
                                             std::span<const State> states, double beta) {
  if (states.empty()) throw std::invalid_argument("rmb_objective: no states");
  return reward_kl_objective_with_gradient(policy, states, reward.table(states), beta);
}

double rmf_objective(const Policy& policy, const RewardModel& reward, const PreferenceDataset& d, double beta) {
  require_nonempty(d, "rmf_objective");
  const auto states = d.states();
  return reward_kl_columns(policy.logit_table(states), masked_rewards(reward, d), beta, nullptr);
}

LossWithGradient rmf_objective_with_gradient(const Policy& policy, const RewardModel& reward,
                                             const PreferenceDataset& d, double beta) {
  require_nonempty(d, "rmf_objective");
  const auto states = d.states();
  return reward_kl_objective_with_gradient(policy, states, masked_rewards(reward, d), beta);
}

double dpo_loss(const Policy& policy, const PreferenceDataset& d, double beta, bool explicit_reference) {
  require_nonempty(d, "dpo_loss");
  const auto states = d.states();
  const ActionTable logits = policy.logit_table(states);
  if (!explicit_reference) return dpo_columns(logits, d, beta, nullptr);

  const long k = logits.rows();
  const double log_ref = -std::log(static_cast<double>(k));
  std::vector<double> logp(static_cast<std::size_t>(k));
  double total = 0.0;
  for (std::size_t i = 0; i < d.n(); ++i) {
    log_softmax(std::span<const double>(logits.col(static_cast<long>(i)).data(), static_cast<std::size_t>(k)), logp);
    const double w = logp[static_cast<std::size_t>(d[i].winner.index)];
    const double l = logp[static_cast<std::size_t>(d[i].loser.index)];
    total -= log_sigmoid(beta * (w - log_ref) - beta * (l - log_ref));
  }
  return total;
}

LossWithGradient dpo_loss_with_gradient(const Policy& policy, const PreferenceDataset& d, double beta) {
  require_nonempty(d, "dpo_loss");
  const auto states = d.states();
  PolicyBatch batch(policy, states);
  ActionTable dlogits;
  LossWithGradient out;
  out.value = dpo_columns(batch.logits(policy.params().data()), d, beta, &dlogits);
  out.grad.resize(policy.params().size());
  batch.backward(policy.params().data(), dlogits, out.grad);
  return out;
}

PolicyTrainResult train_rmb_po(const Policy& init, const RewardModel& reward, const PreferenceDataset& d,
                               const PolicyOptConfig& cfg) {
  require_nonempty(d, "train_rmb_po");
  const auto states = d.states();
  return train_on_table(init, states, reward.table(states), cfg);
}

PolicyTrainResult train_rmb_po_plus(const Policy& init, const RewardModel& reward, const PreferenceDataset& d,
                                    const PromptDataset& p, const PolicyOptConfig& cfg) {
  std::vector<State> pool;
  if (cfg.rmbpo_plus_state_pool == StatePool::union_with_pref) {
    require_nonempty(d, "train_rmb_po_plus");
    pool = d.states();
  } else if (p.m() == 0) {
    throw std::invalid_argument("train_rmb_po_plus: prompts_only mode needs at least one prompt");
  }
  pool.insert(pool.end(), p.states().begin(), p.states().end());
  return train_on_table(init, pool, reward.table(pool), cfg);
}

PolicyTrainResult train_rmf_po(const Policy& init, const RewardModel& reward, const PreferenceDataset& d,
                               const PolicyOptConfig& cfg) {
  require_nonempty(d, "train_rmf_po");
  const auto states = d.states();
  return train_on_table(init, states, masked_rewards(reward, d), cfg);
}

PolicyTrainResult train_dpo(const Policy& init, const PreferenceDataset& d, const PolicyOptConfig& cfg) {
  require_nonempty(d, "train_dpo");
  const auto states = d.states();
  PolicyBatch batch(init, states);
  ActionTable dlogits;
  const Objective f = [&](std::span<const double> params, std::span<double> grad) {
    const double v = dpo_columns(batch.logits(params), d, cfg.beta, &dlogits);
    batch.backward(params, dlogits, grad);
    return v;
  };
  return optimize(init, f, Direction::descent, cfg);
}

}  // namespace prefopt
