#include <gtest/gtest.h>

#include <algorithm>

#include "prefopt/errors.hpp"
#include "prefopt/harness.hpp"
#include "prefopt/report.hpp"

namespace prefopt {
namespace {

ExperimentConfig small_linear(EnvKind env = EnvKind::linear_matched) {
  auto cfg = ExperimentConfig::defaults(env);
  cfg.seeds = {2021, 2022, 2023};
  cfg.eval_states = 200;
  cfg.policy.max_steps = 40;
  cfg.m_values = {30};
  cfg.profile_grid = 20;
  return cfg;
}

TEST(TrimmedMean, Examples) {
  EXPECT_DOUBLE_EQ(trimmed_mean({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}), 5.5);
  EXPECT_DOUBLE_EQ(trimmed_mean({5, 5, 5}), 5.0);
  EXPECT_DOUBLE_EQ(trimmed_mean({0, 0, 100}), 0.0);
  EXPECT_DOUBLE_EQ(trimmed_mean({10, 1, 4, 7}), 5.5);
  EXPECT_THROW(trimmed_mean({1, 2}), std::invalid_argument);
}

TEST(MethodCells, SweepTrainsOnlyRmbPoPlusPerM) {
  auto cfg = small_linear();
  cfg.m_values = {10, 20, 40};
  const auto cells = method_cells(cfg);
  EXPECT_EQ(cells.size(), 3u + 3u);
  EXPECT_EQ(std::count_if(cells.begin(), cells.end(), [](const auto& c) { return c.first == Method::rmb_po_plus; }),
            3);
  cfg.methods = {Method::rmb_po_plus};
  EXPECT_EQ(method_cells(cfg).size(), 3u);
}

TEST(RunSeed, StageOrderAndOutputs) {
  const auto cfg = small_linear();
  const auto s = run_seed(cfg, 2021);
  ASSERT_TRUE(s.ok());
  const std::vector<std::string> expect{"env",           "data",         "policy_init",           "reward",
                                        "train:dpo",     "train:rmf_po", "train:rmb_po",          "train:rmb_po_plus@30",
                                        "eval"};
  EXPECT_EQ(s.stage_log, expect);
  EXPECT_TRUE(s.reward_trained);
  EXPECT_EQ(s.pref_states.size(), 20u);
  EXPECT_EQ(s.methods.size(), 4u);
  for (const auto& r : s.methods) {
    EXPECT_GE(r.report.gap, 0.0);
    EXPECT_EQ(r.report.eval_states, 200);
    EXPECT_EQ(r.profile.rows(), 20);
  }
  ASSERT_NE(s.find(Method::rmb_po_plus, 30), nullptr);
  EXPECT_EQ(s.find(Method::rmb_po_plus, 31), nullptr);
}

TEST(RunSeed, DpoOnlyRunTrainsNoReward) {
  auto cfg = small_linear();
  cfg.methods = {Method::dpo};
  const auto s = run_seed(cfg, 2021);
  EXPECT_FALSE(s.reward_trained);
  EXPECT_EQ(std::find(s.stage_log.begin(), s.stage_log.end(), "reward"), s.stage_log.end());
  EXPECT_EQ(s.methods.size(), 1u);
}

TEST(RunSeed, PairedEvaluationSharesOptimalValue) {
  const auto s = run_seed(small_linear(), 2022);
  for (const auto& r : s.methods) EXPECT_EQ(r.report.r_star, s.methods.front().report.r_star);
}

TEST(RunExperiment, SameConfigReproducesResultsExactly) {
  const auto cfg = small_linear(EnvKind::linear_flipped);
  const auto a = run_experiment(cfg);
  const auto b = run_experiment(cfg);
  EXPECT_EQ(results_csv(a), results_csv(b));
  EXPECT_EQ(summary_csv(a), summary_csv(b));
}

TEST(RunExperiment, ResultsDoNotDependOnJobs) {
  const auto cfg = small_linear();
  EXPECT_EQ(results_csv(run_experiment(cfg, 1)), results_csv(run_experiment(cfg, 3)));
}

TEST(RunExperiment, VaryingMKeepsRewardAndInit) {
  auto cfg = small_linear();
  cfg.methods = {Method::rmb_po_plus};
  const auto a = run_experiment(cfg);
  cfg.m_values = {5, 80};
  const auto b = run_experiment(cfg);
  for (std::size_t i = 0; i < a.seeds.size(); ++i) {
    EXPECT_EQ(a.seeds[i].reward_params, b.seeds[i].reward_params);
    EXPECT_EQ(a.seeds[i].policy_init_params, b.seeds[i].policy_init_params);
    EXPECT_EQ(a.seeds[i].pref_states, b.seeds[i].pref_states);
  }
}

TEST(RunExperiment, SweepGivesOneSummaryPerM) {
  auto cfg = small_linear();
  cfg.methods = {Method::rmb_po_plus};
  cfg.m_values = {0, 10, 20};
  const auto r = run_experiment(cfg);
  EXPECT_EQ(r.summary.size(), 3u);
  for (int m : cfg.m_values) {
    const auto* s = r.find(Method::rmb_po_plus, m);
    ASSERT_NE(s, nullptr);
    EXPECT_EQ(s->count, 3);
    EXPECT_TRUE(s->has_trimmed);
  }
}

TEST(RunExperiment, SummaryMatchesPerSeedGaps) {
  const auto r = run_experiment(small_linear());
  for (const auto& s : r.summary) {
    std::vector<double> gaps;
    for (const auto& seed : r.seeds) gaps.push_back(seed.find(s.method, s.m)->report.gap);
    EXPECT_DOUBLE_EQ(s.trimmed_mean, trimmed_mean(gaps));
    EXPECT_DOUBLE_EQ(r.headline_gap(s.method, s.m), s.trimmed_mean);
    EXPECT_DOUBLE_EQ(s.min, *std::min_element(gaps.begin(), gaps.end()));
  }
}

TEST(RunExperiment, ZeroMInUnionModeEqualsRmbPo) {
  auto cfg = small_linear();
  cfg.methods = {Method::rmb_po, Method::rmb_po_plus};
  cfg.m_values = {0};
  const auto r = run_experiment(cfg);
  for (const auto& s : r.seeds) {
    EXPECT_EQ(s.find(Method::rmb_po, 0)->policy_params, s.find(Method::rmb_po_plus, 0)->policy_params);
  }
}

TEST(RunExperiment, NeuralSeedRunsEndToEnd) {
  auto cfg = ExperimentConfig::defaults(EnvKind::neural);
  cfg.seeds = {2021};
  cfg.m_values = {10};
  cfg.eval_states = 100;
  cfg.policy.max_steps = 3;
  cfg.reward.steps = 5;
  const auto s = run_seed(cfg, 2021);
  ASSERT_TRUE(s.ok());
  EXPECT_EQ(s.methods.size(), 4u);
  EXPECT_EQ(s.methods.front().profile.size(), 0);
  EXPECT_EQ(s.reward_diagnostics.loss_trace.size(), 6u);
}

TEST(RunExperiment, InvalidConfigRejected) {
  auto cfg = small_linear();
  cfg.seeds.clear();
  EXPECT_THROW(run_experiment(cfg), ConfigError);
}

TEST(MakeEnvironment, Kinds) {
  StreamSet streams(1);
  EXPECT_EQ(make_environment(EnvKind::linear_matched, streams)->num_actions(), 4);
  EXPECT_EQ(make_environment(EnvKind::neural, streams)->num_actions(), 10);
}

}  // namespace
}  // namespace prefopt
