#pragma once

#include <span>
#include <vector>

#include "prefopt/envs.hpp"
#include "prefopt/nn.hpp"
#include "prefopt/rng.hpp"
#include "prefopt/types.hpp"

namespace prefopt {

enum class RewardKind { linear, mlp };

struct FitDiagnostics {
  int iterations = 0;
  double final_grad_norm = 0.0;
  bool converged = true;
  // Set when the linear solver exits at its iteration cap with gradient
  // norm above 1e-6.
  bool warning = false;
  std::vector<double> loss_trace;
};

// Learned scorer r_hat(s, a): linear in a feature map, or an MLP over
// state ⊕ one-hot action.
class RewardModel {
 public:
  static RewardModel linear(FeatureMap features, std::vector<double> weights, int num_actions);
  static RewardModel mlp(MlpSpec spec, ParamVector params, int num_actions);

  RewardKind kind() const noexcept { return kind_; }
  int num_actions() const noexcept { return num_actions_; }

  double score(const State& s, ActionId a) const;
  std::vector<double> scores(const State& s) const;
  ActionTable table(std::span<const State> states) const;

  const ParamVector& params() const noexcept { return params_; }
  ParamVector& params() noexcept { return params_; }
  const FeatureMap& features() const { return features_; }
  const MlpSpec& spec() const { return spec_; }

  FitDiagnostics diagnostics;

  nlohmann::ordered_json describe() const;

 private:
  RewardModel() = default;

  RewardKind kind_ = RewardKind::linear;
  int num_actions_ = 0;
  FeatureMap features_;
  MlpSpec spec_;
  ParamVector params_;
};

// -sum_i log sigma(r_hat(s_i, w_i) - r_hat(s_i, l_i)).
double bt_loss(const RewardModel& model, const PreferenceDataset& d);

struct LossWithGradient {
  double value = 0.0;
  std::vector<double> grad;
};

// Gradient with respect to the model parameters.
LossWithGradient bt_loss_with_gradient(const RewardModel& model, const PreferenceDataset& d);

struct LinearRewardOptions {
  double ridge = 1e-6;
  int max_iters = 100000;
  double grad_tol = 1e-8;
  // Starting weights; zeros when empty.
  std::vector<double> init;
};

// Minimizes bt_loss + ridge ||w||^2 by damped Newton steps with Armijo
// backtracking.
RewardModel train_reward_linear(const FeatureMap& features, int num_actions, const PreferenceDataset& d,
                                const LinearRewardOptions& options = {});

struct NeuralRewardOptions {
  int steps = 2000;
  double step_size = 1e-3;
  // Zeroing the output layer gives every triple margin 0 at the start.
  bool zero_output_layer = false;
};

MlpSpec default_reward_spec(int state_dim, int num_actions);

// Full-batch Adam descent on bt_loss from a fan-in uniform initialization
// drawn from `init_rng`. The loss trajectory (one entry per step plus the
// final loss) is stored in diagnostics.loss_trace. Throws NumericError on a
// non-finite loss.
RewardModel train_reward_neural(const MlpSpec& spec, int num_actions, const PreferenceDataset& d, RngStream& init_rng,
                                const NeuralRewardOptions& options = {});

// Fraction of triples with r_hat(winner) > r_hat(loser); ties count 1/2.
double pairwise_accuracy(const RewardModel& model, const PreferenceDataset& d);

}  // namespace prefopt
