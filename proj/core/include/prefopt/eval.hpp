#pragma once

#include <span>
#include <string>
#include <vector>

#include "prefopt/envs.hpp"
#include "prefopt/policy.hpp"

namespace prefopt {

struct EvalReport {
  std::string method;
  long seed = 0;
  double r_pi = 0.0;
  double r_star = 0.0;
  double gap = 0.0;
  int eval_states = 0;
};

// N states drawn from the evaluation stream.
std::vector<State> sample_eval_states(const Environment& env, int n, RngStream& rng);

// Mean over states of sum_a pi(a|s) r(s, a) under the true reward.
double policy_value(const Policy& policy, const Environment& env, std::span<const State> states);
double policy_value(const Policy& policy, const Environment& env, int n, RngStream& rng);

// Mean over states of max_a r(s, a).
double optimal_value(const Environment& env, std::span<const State> states);
double optimal_value(const Environment& env, int n, RngStream& rng);

// Both values on the same states.
EvalReport optimality_gap(const Policy& policy, const Environment& env, std::span<const State> states);
EvalReport optimality_gap(const Policy& policy, const Environment& env, int n, RngStream& rng);

// grid x K matrix of pi(a|s) on an even grid over the state interval.
// Rejects environments with more than one state dimension.
Eigen::MatrixXd action_profile(const Policy& policy, const Environment& env, int grid);
std::vector<double> profile_grid(const Environment& env, int grid);

}  // namespace prefopt
