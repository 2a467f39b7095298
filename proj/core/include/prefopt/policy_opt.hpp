#pragma once

#include <span>
#include <string>
#include <vector>

#include "prefopt/optimizer.hpp"
#include "prefopt/policy.hpp"
#include "prefopt/reward_model.hpp"
#include "prefopt/types.hpp"

namespace prefopt {

enum class StatePool { prompts_only, union_with_pref };

std::string to_string(StatePool p);
StatePool state_pool_from_string(const std::string& s);

struct PolicyOptConfig {
  double beta = 0.01;
  OptimizerSettings optimizer = OptimizerSettings::adagrad(0.1);
  int max_steps = 50000;
  double convergence_tol = 1e-10;
  int patience = 50;
  StatePool rmbpo_plus_state_pool = StatePool::union_with_pref;
  bool record_trace = true;

  // AdaGrad 0.1, 5e4 steps.
  static PolicyOptConfig linear_default();
  // Adam 1e-3, 1e4 steps.
  static PolicyOptConfig neural_default();

  // Throws ConfigError unless beta >= 0, max_steps >= 1, patience >= 1.
  void validate() const;
};

struct TracePoint {
  int step = 0;
  double value = 0.0;
  double grad_norm = 0.0;
};

struct PolicyTrainResult {
  Policy policy;
  std::vector<TracePoint> trace;
  int steps = 0;
  bool converged = false;
  double initial_value = 0.0;
  double final_value = 0.0;
};

// sum_j [ sum_a pi(a|s_j) r(a, j) - beta KL(pi(.|s_j) || uniform) ] for a
// K x N reward table; gradient with respect to the policy parameters.
LossWithGradient reward_kl_objective_with_gradient(const Policy& policy, std::span<const State> states,
                                                    const ActionTable& rewards, double beta);

double rmb_objective(const Policy& policy, const RewardModel& reward, std::span<const State> states, double beta);
LossWithGradient rmb_objective_with_gradient(const Policy& policy, const RewardModel& reward,
                                             std::span<const State> states, double beta);

// Reward term restricted to each triple's winner and loser; full KL.
double rmf_objective(const Policy& policy, const RewardModel& reward, const PreferenceDataset& d, double beta);
LossWithGradient rmf_objective_with_gradient(const Policy& policy, const RewardModel& reward,
                                             const PreferenceDataset& d, double beta);

// With explicit_reference the uniform log-probabilities are subtracted and
// the policy log-probabilities come from log-softmax; otherwise the logit
// difference is used directly.
double dpo_loss(const Policy& policy, const PreferenceDataset& d, double beta, bool explicit_reference = false);
LossWithGradient dpo_loss_with_gradient(const Policy& policy, const PreferenceDataset& d, double beta);

// Each trainer stops once |delta objective| < convergence_tol for `patience`
// consecutive steps, or at max_steps. Throws NumericError on divergence.
PolicyTrainResult train_rmb_po(const Policy& init, const RewardModel& reward, const PreferenceDataset& d,
                               const PolicyOptConfig& cfg);
// In union mode an empty prompt set reproduces train_rmb_po; prompts_only
// requires at least one prompt.
PolicyTrainResult train_rmb_po_plus(const Policy& init, const RewardModel& reward, const PreferenceDataset& d,
                                    const PromptDataset& p, const PolicyOptConfig& cfg);
PolicyTrainResult train_rmf_po(const Policy& init, const RewardModel& reward, const PreferenceDataset& d,
                               const PolicyOptConfig& cfg);
PolicyTrainResult train_dpo(const Policy& init, const PreferenceDataset& d, const PolicyOptConfig& cfg);

}  // namespace prefopt
