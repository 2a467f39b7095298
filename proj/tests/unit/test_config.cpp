#include <gtest/gtest.h>

#include "prefopt/config.hpp"
#include "prefopt/errors.hpp"
#include "test_util.hpp"

namespace prefopt {
namespace {

const char* kBase =
    "# comment\n"
    "[experiment]\n"
    "env = linear_matched\n"
    "n = 20\n"
    "m = 200\n"
    "beta = 0.01\n"
    "seeds = 2021-2030\n"
    "\n"
    "[policy]\n"
    "optimizer = adagrad\n"
    "step_size = 0.1\n";

ConfigError expect_config_error(const std::string& text, const std::vector<ConfigOverride>& ov = {}) {
  try {
    parse_config(text, ov);
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "expected ConfigError";
  return ConfigError("", 0, "");
}

TEST(ParseConfig, BaseFile) {
  const auto cfg = parse_config(kBase);
  EXPECT_EQ(cfg.env, EnvKind::linear_matched);
  EXPECT_EQ(cfg.n, 20);
  EXPECT_EQ(cfg.m_values, std::vector<int>{200});
  EXPECT_DOUBLE_EQ(cfg.policy.beta, 0.01);
  ASSERT_EQ(cfg.seeds.size(), 10u);
  EXPECT_EQ(cfg.seeds.front(), 2021);
  EXPECT_EQ(cfg.seeds.back(), 2030);
  EXPECT_EQ(cfg.policy.optimizer.kind, OptimizerKind::adagrad);
  EXPECT_EQ(cfg.methods.size(), 4u);
}

TEST(ParseConfig, UnknownKeyNamesKeyAndLine) {
  const auto e = expect_config_error(std::string(kBase) + "betta = 0.1\n");
  EXPECT_EQ(e.key(), "betta");
  EXPECT_EQ(e.line(), 12);
}

TEST(ParseConfig, DuplicateKeyRejected) {
  const auto e = expect_config_error(std::string(kBase) + "step_size = 0.2\n");
  EXPECT_EQ(e.key(), "step_size");
  EXPECT_EQ(e.line(), 12);
}

TEST(ParseConfig, MisplacedKeyRejected) {
  const auto e = expect_config_error("[policy]\nn = 20\n");
  EXPECT_EQ(e.key(), "n");
  EXPECT_EQ(e.line(), 2);
}

TEST(ParseConfig, MalformedValueRejected) {
  const auto e = expect_config_error("[experiment]\nn = twenty\n");
  EXPECT_EQ(e.key(), "n");
  const auto bad_env = expect_config_error("[experiment]\nenv = cubic\n");
  EXPECT_EQ(bad_env.key(), "env");
  const auto bad_beta = expect_config_error("[experiment]\nbeta = -1\n");
  EXPECT_EQ(bad_beta.key(), "beta");
}

TEST(ParseConfig, LineWithoutEqualsRejected) {
  const auto e = expect_config_error("[experiment]\nn 20\n");
  EXPECT_EQ(e.line(), 2);
}

TEST(ParseConfig, OverridesApplyAfterFile) {
  const auto cfg = parse_config(kBase, {parse_override("m=400"), parse_override("policy.max_steps=7")});
  EXPECT_EQ(cfg.m_values, std::vector<int>{400});
  EXPECT_EQ(cfg.policy.max_steps, 7);
  const auto e = expect_config_error(kBase, {parse_override("betta=1")});
  EXPECT_EQ(e.key(), "betta");
  EXPECT_EQ(e.line(), 0);
}

TEST(ParseConfig, NeuralDefaults) {
  const auto cfg = parse_config("[experiment]\nenv = neural\n");
  EXPECT_EQ(cfg.n, 50);
  EXPECT_EQ(cfg.policy.optimizer.kind, OptimizerKind::adam);
  EXPECT_EQ(cfg.policy.max_steps, 10000);
}

TEST(ParseConfig, TextRoundTrip) {
  auto cfg = parse_config(kBase, {parse_override("m=50,100"), parse_override("state_pool=prompts_only"),
                                  parse_override("methods=dpo,rmb_po_plus")});
  const auto again = parse_config(to_config_text(cfg));
  EXPECT_EQ(to_config_text(again), to_config_text(cfg));
  EXPECT_EQ(to_json(again).dump(), to_json(cfg).dump());
  EXPECT_EQ(again.m_values, (std::vector<int>{50, 100}));
  EXPECT_EQ(again.policy.rmbpo_plus_state_pool, StatePool::prompts_only);
}

TEST(ParseConfig, LoadFromFile) {
  const auto dir = testing::fresh_dir("config_load");
  {
    std::ofstream out(dir / "a.cfg");
    out << kBase;
  }
  EXPECT_EQ(load_config((dir / "a.cfg").string()).n, 20);
  EXPECT_THROW(load_config((dir / "missing.cfg").string()), Error);
}

TEST(Overrides, Parsing) {
  const auto o = parse_override("reward.ridge = 1e-3");
  EXPECT_EQ(o.key, "reward.ridge");
  EXPECT_EQ(o.value, "1e-3");
  EXPECT_THROW(parse_override("novalue"), ConfigError);
}

TEST(Seeds, ListsAndRanges) {
  EXPECT_EQ(parse_seed_list("2021-2023"), (std::vector<std::int64_t>{2021, 2022, 2023}));
  EXPECT_EQ(parse_seed_list("5, 9,1"), (std::vector<std::int64_t>{5, 9, 1}));
  EXPECT_EQ(format_seed_list({2021, 2022, 2023}), "2021-2023");
  EXPECT_EQ(parse_seed_list(format_seed_list({5, 9, 1})), (std::vector<std::int64_t>{5, 9, 1}));
  EXPECT_THROW(parse_seed_list("9-3"), std::exception);
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1e-10), "1e-10");
  for (double v : {1.0 / 3, 2.0 / 7, 123456.789, -0.0625}) EXPECT_EQ(std::stod(format_double(v)), v);
}

TEST(ExperimentConfig, Validation) {
  auto cfg = ExperimentConfig::defaults(EnvKind::linear_matched);
  cfg.seeds = {1, 2, 3};
  EXPECT_NO_THROW(cfg.validate());
  cfg.n = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = ExperimentConfig::defaults(EnvKind::linear_flipped);
  cfg.seeds = {};
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Names, RoundTrip) {
  for (auto m : all_methods()) EXPECT_EQ(method_from_string(to_string(m)), m);
  for (auto e : {EnvKind::linear_matched, EnvKind::linear_flipped, EnvKind::neural})
    EXPECT_EQ(env_kind_from_string(to_string(e)), e);
  EXPECT_TRUE(is_linear(EnvKind::linear_flipped));
  EXPECT_FALSE(is_linear(EnvKind::neural));
}

}  // namespace
}  // namespace prefopt
