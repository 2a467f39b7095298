#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "prefopt/envs.hpp"

namespace prefopt {
namespace {

constexpr double kPi = std::numbers::pi;

double sigma(double x) { return 1.0 / (1.0 + std::exp(-x)); }

TEST(LinearFeatures, RewardClosedForm) {
  auto f = reward_features_linear(State{0.0}, ActionId(0));
  EXPECT_DOUBLE_EQ(f[0], 1.0);
  EXPECT_DOUBLE_EQ(f[1], 0.0);
  f = reward_features_linear(State{0.5}, ActionId(1));
  EXPECT_NEAR(f[0], 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(f[1], 0.5);
  f = reward_features_linear(State{1.0}, ActionId(3));
  EXPECT_DOUBLE_EQ(f[0], -4.0);
  EXPECT_NEAR(f[1], 0.0, 1e-15);
}

TEST(LinearFeatures, PolicyMatchedAndFlipped) {
  auto m = policy_features_linear(State{0.0}, ActionId(0), PolicyFeatureMode::matched);
  EXPECT_DOUBLE_EQ(m[0], 1.0);
  EXPECT_DOUBLE_EQ(m[1], 0.0);
  auto f = policy_features_linear(State{0.0}, ActionId(0), PolicyFeatureMode::flipped);
  EXPECT_DOUBLE_EQ(f[0], 0.0);
  EXPECT_DOUBLE_EQ(f[1], 1.0);
  f = policy_features_linear(State{0.5}, ActionId(3), PolicyFeatureMode::flipped);
  EXPECT_DOUBLE_EQ(f[0], 4.0);
  EXPECT_NEAR(f[1], 0.0, 1e-15);
}

TEST(LinearFeatures, MapsAgreeUpToPermutationAtQuarter) {
  for (int a = 0; a < 4; ++a) {
    const auto r = policy_features_linear(State{0.25}, ActionId(a), PolicyFeatureMode::matched);
    const auto f = policy_features_linear(State{0.25}, ActionId(a), PolicyFeatureMode::flipped);
    EXPECT_NEAR(r[0], f[0], 1e-15);
    EXPECT_NEAR(r[1], f[1], 1e-15);
    EXPECT_NEAR(r[0], (a + 1) * std::sqrt(2.0) / 2, 1e-15);
    EXPECT_NEAR(r[1], std::sqrt(2.0) / 2 / (a + 1), 1e-15);
  }
}

TEST(LinearFeatures, FeatureMapObjectsMatchFreeFunctions) {
  const auto fm = policy_feature_map_linear(PolicyFeatureMode::flipped);
  EXPECT_EQ(fm.out_dim(), 2);
  const auto v = fm(State{0.3}, ActionId(2));
  const auto w = policy_features_linear(State{0.3}, ActionId(2), PolicyFeatureMode::flipped);
  EXPECT_EQ(v[0], w[0]);
  EXPECT_EQ(v[1], w[1]);
}

TEST(LinearEnv, TrueRewardExamples) {
  LinearBanditEnv env;
  EXPECT_EQ(env.num_actions(), 4);
  for (int a = 0; a < 4; ++a) EXPECT_DOUBLE_EQ(env.true_reward(State{0.0}, ActionId(a)), a + 1.0);
  EXPECT_NEAR(env.true_reward(State{0.5}, ActionId(0)), 2.0, 1e-15);
}

TEST(LinearEnv, TrueRewardMatchesClosedFormEverywhere) {
  LinearBanditEnv env;
  RngStream rng(11, StreamPurpose::evaluation);
  for (int i = 0; i < 10000; ++i) {
    const double s = rng.uniform01();
    const int a = static_cast<int>(rng.uniform_index(4));
    const double expect = (a + 1) * std::cos(kPi * s) + 2.0 * std::sin(kPi * s) / (a + 1);
    ASSERT_NEAR(env.true_reward(State{s}, ActionId(a)), expect, 1e-12);
  }
}

TEST(LinearEnv, TableMatchesPointwise) {
  LinearBanditEnv env;
  std::vector<State> states{State{0.1}, State{0.7}};
  const auto t = env.true_reward_table(states);
  ASSERT_EQ(t.rows(), 4);
  ASSERT_EQ(t.cols(), 2);
  for (int j = 0; j < 2; ++j) {
    for (int a = 0; a < 4; ++a) EXPECT_EQ(t(a, j), env.true_reward(states[j], ActionId(a)));
  }
}

TEST(LinearEnv, SampleStateMean) {
  LinearBanditEnv env;
  RngStream rng(1, StreamPurpose::data_collection);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const auto s = env.sample_state(rng);
    ASSERT_TRUE(env.contains(s));
    sum += s[0];
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.01);
}

// Forward pass of the ground-truth network written directly from the
// layout: W0 (64 x 60, column-major), b0, W1 (1 x 64), b1.
double oracle_true_reward(const ParamVector& p, const State& s, int a) {
  std::vector<double> x(s.coords);
  for (int k = 0; k < 10; ++k) x.push_back(k == a ? 1.0 : 0.0);
  const double* w0 = p.data().data();
  const double* b0 = w0 + 64 * 60;
  const double* w1 = b0 + 64;
  const double b1 = w1[64];
  double out = b1;
  for (int h = 0; h < 64; ++h) {
    double z = b0[h];
    for (int i = 0; i < 60; ++i) z += w0[i * 64 + h] * x[static_cast<std::size_t>(i)];
    out += w1[h] * std::tanh(z);
  }
  return out;
}

TEST(NeuralEnv, MatchesIndependentForwardPass) {
  RngStream init(2021, StreamPurpose::env_init);
  NeuralBanditEnv env(init);
  EXPECT_EQ(env.true_params().size(), 64u * 60 + 64 + 64 + 1);
  RngStream rng(2021, StreamPurpose::evaluation);
  std::vector<State> states;
  for (int i = 0; i < 20; ++i) states.push_back(env.sample_state(rng));
  const auto table = env.true_reward_table(states);
  for (int i = 0; i < 20; ++i) {
    for (int a = 0; a < 10; ++a) {
      const double oracle = oracle_true_reward(env.true_params(), states[i], a);
      EXPECT_NEAR(env.true_reward(states[i], ActionId(a)), oracle, 1e-12);
      EXPECT_NEAR(table(a, i), oracle, 1e-12);
    }
  }
}

TEST(NeuralEnv, SameInitStreamSameNetwork) {
  RngStream a(5, StreamPurpose::env_init);
  RngStream b(5, StreamPurpose::env_init);
  EXPECT_EQ(NeuralBanditEnv(a).true_params(), NeuralBanditEnv(b).true_params());
}

TEST(NeuralEnv, SampleStateSupportAndVariance) {
  RngStream init(1, StreamPurpose::env_init);
  NeuralBanditEnv env(init);
  RngStream rng(1, StreamPurpose::data_collection);
  std::vector<double> sum(50, 0.0), sq(50, 0.0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto s = env.sample_state(rng);
    ASSERT_EQ(s.dim(), 50u);
    for (int k = 0; k < 50; ++k) {
      ASSERT_GE(s[k], -1.0);
      ASSERT_LE(s[k], 1.0);
      sum[k] += s[k];
      sq[k] += s[k] * s[k];
    }
  }
  for (int k = 0; k < 50; ++k) {
    const double mean = sum[k] / n;
    EXPECT_NEAR(sq[k] / n - mean * mean, 1.0 / 3.0, 0.02);
  }
}

TEST(Labels, EqualRewardsGiveFairCoin) {
  LinearBanditEnv env;
  RngStream rng(3, StreamPurpose::data_collection);
  // At s = 1/4 actions 0 and 1 both score 3 sqrt(2) / 2.
  const State s{0.25};
  ASSERT_NEAR(env.true_reward(s, ActionId(0)), env.true_reward(s, ActionId(1)), 1e-12);
  int wins = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) wins += label_pair(env, s, ActionId(0), ActionId(1), rng).winner == ActionId(0);
  EXPECT_NEAR(static_cast<double>(wins) / n, 0.5, 0.005);
}

TEST(Labels, BradleyTerryRateAtStateZero) {
  LinearBanditEnv env;
  EXPECT_NEAR(sigma(4.0 - 1.0), 0.9526, 1e-4);
  RngStream rng(4, StreamPurpose::data_collection);
  int wins = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto t = label_pair(env, State{0.0}, ActionId(3), ActionId(0), rng);
    ASSERT_NE(t.winner, t.loser);
    wins += t.winner == ActionId(3);
  }
  EXPECT_NEAR(static_cast<double>(wins) / n, sigma(3.0), 0.005);
}

TEST(Labels, BradleyTerryRateWithinBinomialInterval) {
  RngStream init(9, StreamPurpose::env_init);
  NeuralBanditEnv env(init);
  RngStream srng(9, StreamPurpose::evaluation);
  const State s = env.sample_state(srng);
  const double p = sigma(env.true_reward(s, ActionId(2)) - env.true_reward(s, ActionId(7)));
  RngStream rng(9, StreamPurpose::data_collection);
  int wins = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) wins += label_pair(env, s, ActionId(2), ActionId(7), rng).winner == ActionId(2);
  const double half_width = 2.576 * std::sqrt(p * (1 - p) / n);
  EXPECT_NEAR(static_cast<double>(wins) / n, p, half_width);
}

TEST(Collect, PreferencesAreValidAndDeterministic) {
  LinearBanditEnv env;
  RngStream a(2021, StreamPurpose::data_collection);
  RngStream b(2021, StreamPurpose::data_collection);
  const auto d1 = collect_preferences(env, 500, a);
  const auto d2 = collect_preferences(env, 500, b);
  ASSERT_EQ(d1.n(), 500u);
  EXPECT_TRUE(validate_dataset(d1, 4).ok());
  std::vector<int> seen(4, 0);
  for (std::size_t i = 0; i < d1.n(); ++i) {
    EXPECT_EQ(d1[i].state, d2[i].state);
    EXPECT_EQ(d1[i].winner, d2[i].winner);
    EXPECT_TRUE(env.contains(d1[i].state));
    ++seen[d1[i].winner.index];
    ++seen[d1[i].loser.index];
  }
  for (int c : seen) EXPECT_GT(c, 150);
}

TEST(Collect, Prompts) {
  LinearBanditEnv env;
  RngStream rng(2021, StreamPurpose::data_collection);
  EXPECT_EQ(collect_prompts(env, 0, rng).m(), 0u);
  const auto p = collect_prompts(env, 200, rng);
  ASSERT_EQ(p.m(), 200u);
  for (const auto& s : p.states()) {
    EXPECT_GE(s[0], 0.0);
    EXPECT_LE(s[0], 1.0);
  }
  RngStream r1(8, StreamPurpose::data_collection);
  RngStream r2(8, StreamPurpose::data_collection);
  EXPECT_EQ(collect_prompts(env, 50, r1).states(), collect_prompts(env, 50, r2).states());
}

TEST(Inputs, StateActionInputsLayout) {
  std::vector<State> states{State{0.5, -0.5}, State{0.1, 0.2}};
  const auto m = state_action_inputs(states, 3);
  ASSERT_EQ(m.rows(), 5);
  ASSERT_EQ(m.cols(), 6);
  const auto v = state_action_input(states[1], ActionId(2), 3);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(m(i, 1 * 3 + 2), v[static_cast<std::size_t>(i)]);
  EXPECT_EQ(v[4], 1.0);
  EXPECT_EQ(v[2], 0.0);
}

}  // namespace
}  // namespace prefopt
