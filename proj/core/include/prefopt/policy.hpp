#pragma once

#include <span>
#include <vector>

#include "prefopt/envs.hpp"
#include "prefopt/nn.hpp"
#include "prefopt/rng.hpp"

namespace prefopt {

enum class PolicyKind { linear_softmax, mlp_softmax };

// Softmax policy over K actions. Linear: logit(s, a) = phi(s, a) . theta.
// MLP: the network maps the state to K logits.
class Policy {
 public:
  static Policy linear_softmax(FeatureMap features, std::vector<double> theta, int num_actions);
  static Policy mlp_softmax(MlpSpec spec, ParamVector params);

  PolicyKind kind() const noexcept { return kind_; }
  int num_actions() const noexcept { return num_actions_; }

  std::vector<double> logits(const State& s) const;
  // Throws NumericError on non-finite logits.
  std::vector<double> action_probs(const State& s) const;
  ActionTable logit_table(std::span<const State> states) const;
  ActionTable prob_table(std::span<const State> states) const;

  const ParamVector& params() const noexcept { return params_; }
  ParamVector& params() noexcept { return params_; }
  const FeatureMap& features() const { return features_; }
  const MlpSpec& spec() const { return spec_; }

  nlohmann::ordered_json describe() const;

 private:
  Policy() = default;

  PolicyKind kind_ = PolicyKind::linear_softmax;
  int num_actions_ = 0;
  FeatureMap features_;
  MlpSpec spec_;
  ParamVector params_;
};

// theta uniform on [-1/sqrt(dim), 1/sqrt(dim)].
Policy init_linear_policy(const FeatureMap& features, int num_actions, RngStream& rng);
Policy init_mlp_policy(const MlpSpec& spec, RngStream& rng);
MlpSpec default_policy_spec(int state_dim, int num_actions);

// Indicator features e_{index(s) * K + a} over a fixed list of states, so a
// linear softmax policy on them has one free logit per (state, action).
// States not in the list map to the zero vector.
FeatureMap tabular_feature_map(std::span<const State> states, int num_actions);

// sum_a p_a log(K p_a), with 0 log 0 = 0.
double kl_to_uniform(std::span<const double> p);

// Evaluates a policy on a fixed list of states many times over. Linear
// features or MLP inputs are built once.
class PolicyBatch {
 public:
  PolicyBatch(const Policy& policy, std::span<const State> states);

  std::size_t size() const noexcept { return num_states_; }
  int num_actions() const noexcept { return num_actions_; }

  // K x N logits at `params`. Throws NumericError on non-finite values.
  const ActionTable& logits(std::span<const double> params);

  // grad = d/dparams sum_{a,j} dlogits(a, j) * logits(a, j), at the params
  // of the most recent logits() call.
  void backward(std::span<const double> params, const ActionTable& dlogits, std::span<double> grad);

 private:
  PolicyKind kind_;
  int num_actions_;
  std::size_t num_states_;
  Eigen::MatrixXd features_;  // linear: row j*K + a
  MlpSpec spec_;
  Eigen::MatrixXd inputs_;    // mlp: state per column
  MlpTape tape_;
  ActionTable logits_;
};

}  // namespace prefopt
