#include <gtest/gtest.h>

#include <cmath>

#include "prefopt/errors.hpp"
#include "prefopt/policy.hpp"
#include "prefopt/policy_opt.hpp"

namespace prefopt {
namespace {

// logit(s, a) = theta[a], the same at every state.
FeatureMap per_action(int k) {
  return FeatureMap("per_action", k, [k](const State&, ActionId a, std::span<double> out) {
    for (int i = 0; i < k; ++i) out[static_cast<std::size_t>(i)] = i == a.index ? 1.0 : 0.0;
  });
}

Policy tabular(const std::vector<State>& states, int k, std::vector<double> theta = {}) {
  auto fm = tabular_feature_map(states, k);
  if (theta.empty()) theta.assign(static_cast<std::size_t>(fm.out_dim()), 0.0);
  return Policy::linear_softmax(std::move(fm), std::move(theta), k);
}

RewardModel true_linear_reward() { return RewardModel::linear(reward_feature_map_linear(), {1.0, 2.0}, 4); }

std::vector<double> softmax_oracle(const std::vector<double>& z, double scale = 1.0) {
  double mx = -INFINITY;
  for (double v : z) mx = std::max(mx, v * scale);
  std::vector<double> p(z.size());
  double s = 0;
  for (std::size_t i = 0; i < z.size(); ++i) s += p[i] = std::exp(z[i] * scale - mx);
  for (auto& v : p) v /= s;
  return p;
}

double tv(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / 2;
}

PolicyOptConfig adam_config(double beta, int steps, double lr = 0.05) {
  PolicyOptConfig cfg;
  cfg.beta = beta;
  cfg.optimizer = OptimizerSettings::adam(lr);
  cfg.max_steps = steps;
  return cfg;
}

PreferenceDataset triples(std::initializer_list<std::tuple<double, int, int>> t) {
  std::vector<PreferenceTriple> v;
  for (const auto& [s, w, l] : t) v.push_back({State{s}, ActionId(w), ActionId(l)});
  return PreferenceDataset(std::move(v));
}

TEST(Softmax, ZeroParametersGiveUniform) {
  const auto p = Policy::linear_softmax(per_action(5), std::vector<double>(5, 0.0), 5);
  for (double v : p.action_probs(State{0.3})) EXPECT_DOUBLE_EQ(v, 0.2);
}

TEST(Softmax, HandComputedIdentity) {
  const auto p = Policy::linear_softmax(per_action(4), {1, 1, 1, 1 + std::log(3.0)}, 4);
  const auto probs = p.action_probs(State{0.0});
  for (int a = 0; a < 3; ++a) EXPECT_NEAR(probs[a], 1.0 / 6, 1e-15);
  EXPECT_NEAR(probs[3], 3.0 / 6, 1e-15);
}

TEST(Softmax, StableForLargeLogits) {
  const auto p = Policy::linear_softmax(per_action(3), {1000, 999, 0}, 3);
  const auto probs = p.action_probs(State{0.0});
  EXPECT_NEAR(probs[0], 1 / (1 + std::exp(-1.0)), 1e-12);
  EXPECT_NEAR(probs[2], 0.0, 1e-300);
}

TEST(Softmax, ScaledTrueRewardConcentratesOnArgmax) {
  const auto p = Policy::linear_softmax(reward_feature_map_linear(), {1000.0, 2000.0}, 4);
  LinearBanditEnv env;
  for (double s : {0.05, 0.3, 0.9}) {
    const auto probs = p.action_probs(State{s});
    int best = 0;
    for (int a = 1; a < 4; ++a)
      if (env.true_reward(State{s}, ActionId(a)) > env.true_reward(State{s}, ActionId(best))) best = a;
    EXPECT_GT(probs[best], 0.999) << "s = " << s;
  }
}

TEST(Softmax, NonFiniteLogitsThrow) {
  const auto p = Policy::linear_softmax(per_action(2), {INFINITY, 0}, 2);
  EXPECT_THROW(p.action_probs(State{0.0}), NumericError);
  const auto q = Policy::linear_softmax(per_action(2), {NAN, 0}, 2);
  EXPECT_THROW(q.action_probs(State{0.0}), NumericError);
}

TEST(Softmax, MlpPolicyMatchesNetworkOutput) {
  RngStream rng(3, StreamPurpose::model_init);
  const auto pol = init_mlp_policy(MlpSpec{{3, 8, 4}, Activation::relu}, rng);
  const State s{0.1, -0.5, 0.9};
  EXPECT_EQ(pol.logits(s), forward(pol.spec(), pol.params(), s.coords));
  const auto tab = pol.prob_table(std::vector<State>{s});
  const auto probs = pol.action_probs(s);
  for (int a = 0; a < 4; ++a) EXPECT_NEAR(tab(a, 0), probs[a], 1e-15);
}

TEST(KlToUniform, Examples) {
  EXPECT_DOUBLE_EQ(kl_to_uniform(std::vector<double>{0.25, 0.25, 0.25, 0.25}), 0.0);
  EXPECT_NEAR(kl_to_uniform(std::vector<double>{1, 0, 0, 0}), std::log(4.0), 1e-15);
  EXPECT_NEAR(kl_to_uniform(std::vector<double>{0.5, 0.5, 0, 0}), std::log(2.0), 1e-15);
}

TEST(KlToUniform, EqualsLogKMinusEntropy) {
  const std::vector<double> p{0.1, 0.2, 0.3, 0.4};
  double h = 0;
  for (double v : p) h -= v * std::log(v);
  EXPECT_NEAR(kl_to_uniform(p), std::log(4.0) - h, 1e-15);
}

TEST(RmbObjective, UniformPolicyGivesMeanReward) {
  const std::vector<State> states{State{0.1}, State{0.4}, State{0.8}};
  const auto pol = Policy::linear_softmax(per_action(4), std::vector<double>(4, 0.0), 4);
  const auto r = true_linear_reward();
  double expect = 0;
  for (const auto& s : states)
    for (int a = 0; a < 4; ++a) expect += r.score(s, ActionId(a)) / 4;
  for (double beta : {0.0, 0.01, 3.0}) EXPECT_NEAR(rmb_objective(pol, r, states, beta), expect, 1e-12);
}

TEST(RmbObjective, GreedyOneHotAtBetaZeroGivesMax) {
  const std::vector<State> states{State{0.0}};
  const auto pol = Policy::linear_softmax(per_action(4), {0, 0, 0, 800}, 4);
  EXPECT_DOUBLE_EQ(rmb_objective(pol, true_linear_reward(), states, 0.0), 4.0);
}

TEST(RmbObjective, MatchesEnumeration) {
  RngStream rng(17, StreamPurpose::model_init);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<State> states;
    for (int j = 0; j < 7; ++j) states.push_back(State{rng.uniform01()});
    const auto pol = Policy::linear_softmax(policy_feature_map_linear(PolicyFeatureMode::flipped),
                                            {rng.uniform(-3, 3), rng.uniform(-3, 3)}, 4);
    const auto r = RewardModel::linear(reward_feature_map_linear(), {rng.uniform(-2, 2), rng.uniform(-2, 2)}, 4);
    const double beta = rng.uniform(0, 1);
    double expect = 0;
    for (const auto& s : states) {
      std::vector<double> z(4);
      for (int a = 0; a < 4; ++a) {
        const auto f = policy_features_linear(s, ActionId(a), PolicyFeatureMode::flipped);
        z[a] = f[0] * pol.params()[0] + f[1] * pol.params()[1];
      }
      const auto p = softmax_oracle(z);
      for (int a = 0; a < 4; ++a) expect += p[a] * r.score(s, ActionId(a)) - beta * p[a] * std::log(4 * p[a]);
    }
    EXPECT_NEAR(rmb_objective(pol, r, states, beta), expect, 1e-12);
    EXPECT_NEAR(rmb_objective_with_gradient(pol, r, states, beta).value, expect, 1e-12);
  }
}

TEST(RmbObjective, GradientMatchesFiniteDifference) {
  const std::vector<State> states{State{0.15}, State{0.55}, State{0.95}};
  const std::vector<double> theta{0.3, -0.8};
  const auto fm = policy_feature_map_linear(PolicyFeatureMode::matched);
  const auto r = RewardModel::linear(reward_feature_map_linear(), {0.4, 1.7}, 4);
  const auto g = rmb_objective_with_gradient(Policy::linear_softmax(fm, theta, 4), r, states, 0.2);
  for (std::size_t i = 0; i < 2; ++i) {
    auto up = theta, dn = theta;
    up[i] += 1e-6;
    dn[i] -= 1e-6;
    const double fd = (rmb_objective(Policy::linear_softmax(fm, up, 4), r, states, 0.2) -
                       rmb_objective(Policy::linear_softmax(fm, dn, 4), r, states, 0.2)) / 2e-6;
    EXPECT_NEAR(g.grad[i], fd, 1e-6);
  }
}

TEST(TrainRmbPo, TabularReachesClosedFormOptimum) {
  const auto d = triples({{0.05, 0, 1}, {0.35, 2, 3}, {0.6, 1, 3}, {0.9, 0, 2}});
  const auto states = d.states();
  const auto r = true_linear_reward();
  for (double beta : {1.0, 0.5}) {
    const auto res = train_rmb_po(tabular(states, 4), r, d, adam_config(beta, 20000));
    for (const auto& s : states) {
      const auto target = softmax_oracle(r.scores(s), 1.0 / beta);
      EXPECT_LT(tv(res.policy.action_probs(s), target), 1e-3) << "beta " << beta << " s " << s[0];
    }
    EXPECT_GE(res.final_value, res.initial_value);
  }
}

TEST(TrainRmbPo, BetaZeroGoesGreedy) {
  const auto d = triples({{0.05, 0, 1}, {0.35, 2, 3}, {0.9, 0, 2}});
  const auto r = true_linear_reward();
  const auto res = train_rmb_po(tabular(d.states(), 4), r, d, adam_config(0.0, 5000));
  for (const auto& s : d.states()) {
    const auto sc = r.scores(s);
    const auto best = std::max_element(sc.begin(), sc.end()) - sc.begin();
    EXPECT_GT(res.policy.action_probs(s)[static_cast<std::size_t>(best)], 0.99);
  }
}

TEST(TrainRmbPo, AscentOnLinearPolicy) {
  const auto d = triples({{0.1, 0, 1}, {0.4, 2, 3}, {0.7, 1, 3}});
  PolicyOptConfig cfg = PolicyOptConfig::linear_default();
  cfg.max_steps = 500;
  const auto init = Policy::linear_softmax(policy_feature_map_linear(PolicyFeatureMode::flipped), {0.2, -0.1}, 4);
  const auto res = train_rmb_po(init, true_linear_reward(), d, cfg);
  EXPECT_GT(res.final_value, res.initial_value);
  EXPECT_LE(res.steps, 500);
  ASSERT_FALSE(res.trace.empty());
  EXPECT_DOUBLE_EQ(res.trace.back().value, res.final_value);
}

TEST(TrainRmbPoPlus, EmptyPromptsInUnionModeMatchRmbPo) {
  const auto d = triples({{0.1, 0, 1}, {0.4, 2, 3}, {0.7, 1, 3}});
  PolicyOptConfig cfg = PolicyOptConfig::linear_default();
  cfg.max_steps = 300;
  const auto init = Policy::linear_softmax(policy_feature_map_linear(PolicyFeatureMode::matched), {0.2, -0.1}, 4);
  const auto a = train_rmb_po(init, true_linear_reward(), d, cfg);
  const auto b = train_rmb_po_plus(init, true_linear_reward(), d, PromptDataset{}, cfg);
  EXPECT_EQ(a.policy.params(), b.policy.params());
  EXPECT_EQ(a.final_value, b.final_value);
  EXPECT_EQ(a.steps, b.steps);
}

TEST(TrainRmbPoPlus, PromptsOnlyWithDatasetStatesMatchesRmbPo) {
  const auto d = triples({{0.1, 0, 1}, {0.4, 2, 3}, {0.7, 1, 3}});
  PolicyOptConfig cfg = PolicyOptConfig::linear_default();
  cfg.max_steps = 300;
  cfg.rmbpo_plus_state_pool = StatePool::prompts_only;
  const auto init = Policy::linear_softmax(policy_feature_map_linear(PolicyFeatureMode::matched), {0.2, -0.1}, 4);
  const auto a = train_rmb_po(init, true_linear_reward(), d, cfg);
  const auto b = train_rmb_po_plus(init, true_linear_reward(), d, PromptDataset(d.states()), cfg);
  EXPECT_EQ(a.final_value, b.final_value);
  EXPECT_EQ(a.policy.params(), b.policy.params());
  EXPECT_THROW(train_rmb_po_plus(init, true_linear_reward(), d, PromptDataset{}, cfg), std::invalid_argument);
}

TEST(TrainRmbPoPlus, UnionObjectiveIsSumOverBothSets) {
  const auto d = triples({{0.1, 0, 1}});
  const PromptDataset p({State{0.5}, State{0.8}});
  const auto pol = Policy::linear_softmax(policy_feature_map_linear(PolicyFeatureMode::matched), {0.3, 0.2}, 4);
  const auto r = true_linear_reward();
  PolicyOptConfig cfg = PolicyOptConfig::linear_default();
  cfg.max_steps = 1;
  const auto res = train_rmb_po_plus(pol, r, d, p, cfg);
  const std::vector<State> all{State{0.1}, State{0.5}, State{0.8}};
  EXPECT_NEAR(res.initial_value, rmb_objective(pol, r, all, cfg.beta), 1e-12);
}

TEST(StatePoolNames, RoundTrip) {
  for (auto p : {StatePool::prompts_only, StatePool::union_with_pref})
    EXPECT_EQ(state_pool_from_string(to_string(p)), p);
  EXPECT_THROW(state_pool_from_string("both"), std::invalid_argument);
}

TEST(RmfObjective, UniformPolicyCoveringAllActionsEqualsFullSum) {
  const auto d = triples({{0.3, 0, 1}, {0.3, 2, 3}});
  const auto pol = tabular(d.states(), 4);
  const auto r = true_linear_reward();
  const std::vector<State> one{State{0.3}};
  EXPECT_NEAR(rmf_objective(pol, r, d, 0.7), rmb_objective(pol, r, one, 0.7), 1e-12);
}

TEST(RmfObjective, TruncatedToObservedPair) {
  const auto d = triples({{0.0, 2, 0}});
  const auto pol = Policy::linear_softmax(per_action(4), {0.5, -0.5, 1.0, 0.0}, 4);
  const auto p = pol.action_probs(State{0.0});
  const double beta = 0.3;
  const double expect = p[0] * 1.0 + p[2] * 3.0 - beta * kl_to_uniform(p);
  EXPECT_NEAR(rmf_objective(pol, true_linear_reward(), d, beta), expect, 1e-12);
}

TEST(TrainRmfPo, BetaZeroMassGoesToBetterObservedAction) {
  const auto d = triples({{0.0, 0, 1}});
  const auto res = train_rmf_po(tabular(d.states(), 4), true_linear_reward(), d, adam_config(0.0, 5000));
  const auto p = res.policy.action_probs(State{0.0});
  EXPECT_GT(p[1], 0.99);
  EXPECT_GE(res.final_value, res.initial_value);
}

TEST(DpoLoss, ReferencePolicyGivesNLog2) {
  const auto d = triples({{0.1, 0, 1}, {0.4, 2, 3}, {0.7, 1, 3}});
  const auto pol = Policy::linear_softmax(per_action(4), std::vector<double>(4, 0.0), 4);
  EXPECT_NEAR(dpo_loss(pol, d, 0.01), 3 * std::log(2.0), 1e-12);
}

TEST(DpoLoss, SingleTripleExample) {
  const auto d = triples({{0.0, 1, 0}});
  const auto pol = Policy::linear_softmax(per_action(4), {0, 10, 0, 0}, 4);
  EXPECT_NEAR(dpo_loss(pol, d, 0.01), std::log1p(std::exp(-0.1)), 1e-12);
  EXPECT_NEAR(dpo_loss(pol, d, 0.01), 0.6444, 5e-5);
}

TEST(DpoLoss, ShiftInvariantAndMatchesExplicitReference) {
  const auto d = triples({{0.1, 0, 1}, {0.4, 2, 3}, {0.7, 1, 3}, {0.9, 3, 0}});
  const auto states = d.states();
  RngStream rng(23, StreamPurpose::model_init);
  std::vector<double> theta(16);
  for (auto& v : theta) v = rng.uniform(-5, 5);
  auto shifted = theta;
  for (int j = 0; j < 4; ++j)
    for (int a = 0; a < 4; ++a) shifted[static_cast<std::size_t>(j * 4 + a)] += 3.0 * (j + 1);
  const auto pol = tabular(states, 4, theta);
  for (double beta : {0.01, 0.5, 2.0}) {
    const double base = dpo_loss(pol, d, beta);
    EXPECT_NEAR(dpo_loss(tabular(states, 4, shifted), d, beta), base, 1e-12);
    EXPECT_NEAR(dpo_loss(pol, d, beta, true), base, 1e-12);
  }
}

TEST(DpoLoss, GradientMatchesFiniteDifference) {
  const auto d = triples({{0.1, 0, 1}, {0.4, 2, 3}, {0.7, 1, 3}});
  const auto fm = policy_feature_map_linear(PolicyFeatureMode::flipped);
  const std::vector<double> theta{0.7, -0.4};
  const auto g = dpo_loss_with_gradient(Policy::linear_softmax(fm, theta, 4), d, 0.5);
  for (std::size_t i = 0; i < 2; ++i) {
    auto up = theta, dn = theta;
    up[i] += 1e-6;
    dn[i] -= 1e-6;
    const double fd = (dpo_loss(Policy::linear_softmax(fm, up, 4), d, 0.5) -
                       dpo_loss(Policy::linear_softmax(fm, dn, 4), d, 0.5)) / 2e-6;
    EXPECT_NEAR(g.grad[i], fd, 1e-6);
  }
}

TEST(TrainDpo, WinnersGainProbability) {
  const auto d = triples({{0.1, 0, 1}, {0.4, 2, 3}, {0.7, 3, 1}, {0.9, 1, 2}});
  const auto res = train_dpo(tabular(d.states(), 4), d, adam_config(0.01, 2000));
  for (const auto& t : d.triples()) {
    const auto p = res.policy.action_probs(t.state);
    EXPECT_GT(p[static_cast<std::size_t>(t.winner.index)], p[static_cast<std::size_t>(t.loser.index)]);
  }
  EXPECT_LE(res.final_value, res.initial_value);
}

TEST(Trainers, ZeroGradientAtInitLeavesPolicyUnchanged) {
  const auto d = triples({{0.2, 0, 1}, {0.2, 1, 0}, {0.6, 2, 3}, {0.6, 3, 2}});
  const auto init = tabular(d.states(), 4);
  const auto flat = RewardModel::linear(reward_feature_map_linear(), {0.0, 0.0}, 4);
  for (auto opt : {OptimizerSettings::adagrad(0.1), OptimizerSettings::adam(1e-3)}) {
    PolicyOptConfig cfg;
    cfg.optimizer = opt;
    cfg.max_steps = 200;
    EXPECT_EQ(train_rmb_po(init, flat, d, cfg).policy.params(), init.params());
    EXPECT_EQ(train_rmb_po_plus(init, flat, d, PromptDataset({State{0.2}}), cfg).policy.params(), init.params());
    EXPECT_EQ(train_rmf_po(init, flat, d, cfg).policy.params(), init.params());
    EXPECT_EQ(train_dpo(init, d, cfg).policy.params(), init.params());
  }
}

TEST(Trainers, ConvergedRunStopsBeforeCap) {
  const auto d = triples({{0.2, 0, 1}, {0.2, 1, 0}});
  const auto flat = RewardModel::linear(reward_feature_map_linear(), {0.0, 0.0}, 4);
  PolicyOptConfig cfg;
  cfg.max_steps = 1000;
  const auto res = train_rmb_po(tabular(d.states(), 4), flat, d, cfg);
  EXPECT_TRUE(res.converged);
  EXPECT_EQ(res.steps, cfg.patience);
}

TEST(Trainers, DivergenceThrows) {
  const auto d = triples({{0.2, 0, 1}});
  const auto init = Policy::linear_softmax(per_action(4), {INFINITY, 0, 0, 0}, 4);
  PolicyOptConfig cfg;
  cfg.max_steps = 10;
  EXPECT_THROW(train_dpo(init, d, cfg), NumericError);
  EXPECT_THROW(train_rmb_po(init, true_linear_reward(), d, cfg), NumericError);
}

TEST(Trainers, EmptyDatasetRejected) {
  const auto init = Policy::linear_softmax(per_action(4), std::vector<double>(4, 0.0), 4);
  PolicyOptConfig cfg;
  EXPECT_THROW(train_dpo(init, PreferenceDataset{}, cfg), std::invalid_argument);
  EXPECT_THROW(train_rmb_po(init, true_linear_reward(), PreferenceDataset{}, cfg), std::invalid_argument);
}

TEST(PolicyOptConfig, Validation) {
  PolicyOptConfig cfg;
  cfg.beta = -1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = PolicyOptConfig{};
  cfg.max_steps = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_NO_THROW(PolicyOptConfig::neural_default().validate());
  EXPECT_EQ(PolicyOptConfig::neural_default().max_steps, 10000);
  EXPECT_EQ(PolicyOptConfig::linear_default().max_steps, 50000);
}

}  // namespace
}  // namespace prefopt
