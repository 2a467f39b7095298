#include "prefopt/eval.hpp"

#include <cmath>
#include <stdexcept>

namespace prefopt {

std::vector<State> sample_eval_states(const Environment& env, int n, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("evaluation needs at least one state");
  std::vector<State> states;
  states.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) states.push_back(env.sample_state(rng));
  return states;
}

namespace {

double mean_value(const ActionTable& probs, const ActionTable& rewards) {
  return (probs.array() * rewards.array()).colwise().sum().mean();
}

}  // namespace

double policy_value(const Policy& policy, const Environment& env, std::span<const State> states) {
  if (states.empty()) throw std::invalid_argument("evaluation needs at least one state");
  return mean_value(policy.prob_table(states), env.true_reward_table(states));
}

double policy_value(const Policy& policy, const Environment& env, int n, RngStream& rng) {
  const auto states = sample_eval_states(env, n, rng);
  return policy_value(policy, env, states);
}

double optimal_value(const Environment& env, std::span<const State> states) {
  if (states.empty()) throw std::invalid_argument("evaluation needs at least one state");
  return env.true_reward_table(states).colwise().maxCoeff().mean();
}

double optimal_value(const Environment& env, int n, RngStream& rng) {
  const auto states = sample_eval_states(env, n, rng);
  return optimal_value(env, states);
}

EvalReport optimality_gap(const Policy& policy, const Environment& env, std::span<const State> states) {
  if (states.empty()) throw std::invalid_argument("evaluation needs at least one state");
  const ActionTable rewards = env.true_reward_table(states);
  EvalReport r;
  r.r_pi = mean_value(policy.prob_table(states), rewards);
  r.r_star = rewards.colwise().maxCoeff().mean();
  r.gap = std::abs(r.r_star - r.r_pi);
  r.eval_states = static_cast<int>(states.size());
  return r;
}

EvalReport optimality_gap(const Policy& policy, const Environment& env, int n, RngStream& rng) {
  const auto states = sample_eval_states(env, n, rng);
  return optimality_gap(policy, env, states);
}

std::vector<double> profile_grid(const Environment& env, int grid) {
  if (grid < 2) throw std::invalid_argument("action profile grid needs at least 2 points");
  std::vector<double> xs(static_cast<std::size_t>(grid));
  const double lo = env.state_low();
  const double hi = env.state_high();
  for (int i = 0; i < grid; ++i) xs[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (grid - 1);
  return xs;
}

Eigen::MatrixXd action_profile(const Policy& policy, const Environment& env, int grid) {
  if (env.state_dim() != 1) throw std::invalid_argument("action profile needs a one-dimensional state");
  std::vector<State> states;
  for (double x : profile_grid(env, grid)) states.push_back(State{x});
  return policy.prob_table(states).transpose();
}

}  // namespace prefopt
