#include <benchmark/benchmark.h>

#include "prefopt/envs.hpp"
#include "prefopt/nn.hpp"
#include "prefopt/policy.hpp"
#include "prefopt/policy_opt.hpp"

namespace {

using namespace prefopt;

std::vector<State> random_states(RngStream& rng, int n, int dim) {
  std::vector<State> out;
  for (int i = 0; i < n; ++i) {
    std::vector<double> c(static_cast<std::size_t>(dim));
    for (auto& v : c) v = rng.uniform(-1.0, 1.0);
    out.emplace_back(std::move(c));
  }
  return out;
}

void BM_MlpForwardBackward(benchmark::State& state) {
  RngStream rng(1, StreamPurpose::model_init);
  const MlpSpec spec = default_policy_spec(50, 10);
  const ParamVector params = init_fan_in_uniform(spec, rng);
  const auto n = static_cast<int>(state.range(0));
  Eigen::MatrixXd inputs = Eigen::MatrixXd::Random(50, n);
  Eigen::MatrixXd upstream = Eigen::MatrixXd::Random(10, n);
  std::vector<double> grad(params.size());
  MlpTape tape;
  for (auto _ : state) {
    forward_batch(spec, params.data(), inputs, tape);
    backward_batch(spec, params.data(), tape, upstream, grad);
    benchmark::DoNotOptimize(grad.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_MlpForwardBackward)->Arg(50)->Arg(250)->Arg(1050);

void BM_RmbObjectiveNeural(benchmark::State& state) {
  RngStream rng(2, StreamPurpose::model_init);
  const Policy policy = init_mlp_policy(default_policy_spec(50, 10), rng);
  const auto states = random_states(rng, static_cast<int>(state.range(0)), 50);
  const ActionTable rewards = ActionTable::Random(10, static_cast<long>(states.size()));
  for (auto _ : state) {
    auto r = reward_kl_objective_with_gradient(policy, states, rewards, 0.01);
    benchmark::DoNotOptimize(r.value);
  }
}
BENCHMARK(BM_RmbObjectiveNeural)->Arg(50)->Arg(550);

void BM_RmbObjectiveLinear(benchmark::State& state) {
  RngStream rng(3, StreamPurpose::model_init);
  LinearBanditEnv env;
  const Policy policy = init_linear_policy(env.policy_features(), 4, rng);
  std::vector<State> states;
  for (int i = 0; i < state.range(0); ++i) states.push_back(env.sample_state(rng));
  const ActionTable rewards = env.true_reward_table(states);
  for (auto _ : state) {
    auto r = reward_kl_objective_with_gradient(policy, states, rewards, 0.01);
    benchmark::DoNotOptimize(r.value);
  }
}
BENCHMARK(BM_RmbObjectiveLinear)->Arg(20)->Arg(220);

}  // namespace

BENCHMARK_MAIN();
