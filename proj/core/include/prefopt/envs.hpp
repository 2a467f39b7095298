#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "prefopt/nn.hpp"
#include "prefopt/rng.hpp"
#include "prefopt/types.hpp"

namespace prefopt {

// Reward/logit tables are K x N: one column per state, one row per action.
using ActionTable = Eigen::MatrixXd;

// phi(s, a) -> R^out_dim.
class FeatureMap {
 public:
  using Fn = std::function<void(const State&, ActionId, std::span<double>)>;

  FeatureMap() = default;
  FeatureMap(std::string name, int out_dim, Fn fn);

  const std::string& name() const noexcept { return name_; }
  int out_dim() const noexcept { return out_dim_; }

  void eval(const State& s, ActionId a, std::span<double> out) const { fn_(s, a, out); }
  std::vector<double> operator()(const State& s, ActionId a) const;

 private:
  std::string name_;
  int out_dim_ = 0;
  Fn fn_;
};

enum class PolicyFeatureMode { matched, flipped };

std::string to_string(PolicyFeatureMode m);

// ((a+1) cos(pi s), sin(pi s) / (a+1))
std::array<double, 2> reward_features_linear(const State& s, ActionId a);
// matched: same as reward_features_linear; flipped: ((a+1) sin(pi s), cos(pi s) / (a+1))
std::array<double, 2> policy_features_linear(const State& s, ActionId a, PolicyFeatureMode mode);

FeatureMap reward_feature_map_linear();
FeatureMap policy_feature_map_linear(PolicyFeatureMode mode);

class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual int num_actions() const = 0;
  virtual int state_dim() const = 0;
  virtual double state_low() const = 0;
  virtual double state_high() const = 0;

  // Uniform over the state box.
  virtual State sample_state(RngStream& rng) const = 0;
  virtual double true_reward(const State& s, ActionId a) const = 0;
  virtual ActionTable true_reward_table(std::span<const State> states) const;

  // Construction parameters, recorded into result files.
  virtual nlohmann::ordered_json describe() const = 0;

  bool contains(const State& s) const;
};

class LinearBanditEnv final : public Environment {
 public:
  explicit LinearBanditEnv(PolicyFeatureMode mode = PolicyFeatureMode::matched,
                           std::array<double, 2> theta_star = {1.0, 2.0});

  std::string name() const override;
  int num_actions() const override { return 4; }
  int state_dim() const override { return 1; }
  double state_low() const override { return 0.0; }
  double state_high() const override { return 1.0; }

  State sample_state(RngStream& rng) const override;
  double true_reward(const State& s, ActionId a) const override;
  nlohmann::ordered_json describe() const override;

  const std::array<double, 2>& theta_star() const noexcept { return theta_star_; }
  PolicyFeatureMode policy_feature_mode() const noexcept { return mode_; }
  FeatureMap reward_features() const { return reward_feature_map_linear(); }
  FeatureMap policy_features() const { return policy_feature_map_linear(mode_); }

 private:
  PolicyFeatureMode mode_;
  std::array<double, 2> theta_star_;
};

// Ground truth is a frozen 60 -> 64 -> 1 tanh network over state ⊕ one-hot
// action; states are uniform on [-1, 1]^50, ten actions.
class NeuralBanditEnv final : public Environment {
 public:
  static constexpr int kStateDim = 50;
  static constexpr int kNumActions = 10;
  static constexpr int kHidden = 64;

  // Draws the frozen network from the env-init stream.
  explicit NeuralBanditEnv(RngStream& env_init);
  NeuralBanditEnv(ParamVector true_params, std::uint64_t init_seed);

  static MlpSpec true_net_spec();

  std::string name() const override { return "neural"; }
  int num_actions() const override { return kNumActions; }
  int state_dim() const override { return kStateDim; }
  double state_low() const override { return -1.0; }
  double state_high() const override { return 1.0; }

  State sample_state(RngStream& rng) const override;
  double true_reward(const State& s, ActionId a) const override;
  ActionTable true_reward_table(std::span<const State> states) const override;
  nlohmann::ordered_json describe() const override;

  const ParamVector& true_params() const noexcept { return params_; }

 private:
  MlpSpec spec_;
  ParamVector params_;
  std::uint64_t init_seed_ = 0;
};

// state ⊕ one-hot(a), length dim + K.
std::vector<double> state_action_input(const State& s, ActionId a, int num_actions);
// Column j*K + a holds state_action_input(states[j], a).
Eigen::MatrixXd state_action_inputs(std::span<const State> states, int num_actions);

// Labels one comparison with the Bradley-Terry probability
// sigma(r(s,a) - r(s,a')); the winner is stored first.
PreferenceTriple label_pair(const Environment& env, const State& s, ActionId a, ActionId a_prime, RngStream& rng);

// n i.i.d. triples: s ~ uniform, (a, a') uniform without replacement,
// Bradley-Terry sampled label.
PreferenceDataset collect_preferences(const Environment& env, int n, RngStream& rng);

PromptDataset collect_prompts(const Environment& env, int m, RngStream& rng);

}  // namespace prefopt
