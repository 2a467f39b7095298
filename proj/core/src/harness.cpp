#include "prefopt/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <thread>

#include "prefopt/errors.hpp"
#include "prefopt/reward_model.hpp"

namespace prefopt {

double trimmed_mean(std::vector<double> values) {
  if (values.size() < 3) throw std::invalid_argument("trimmed_mean needs at least 3 values");
  std::sort(values.begin(), values.end());
  const double sum = std::accumulate(values.begin() + 1, values.end() - 1, 0.0);
  return sum / static_cast<double>(values.size() - 2);
}

std::unique_ptr<Environment> make_environment(EnvKind kind, StreamSet& streams) {
  switch (kind) {
    case EnvKind::linear_matched: return std::make_unique<LinearBanditEnv>(PolicyFeatureMode::matched);
    case EnvKind::linear_flipped: return std::make_unique<LinearBanditEnv>(PolicyFeatureMode::flipped);
    case EnvKind::neural: return std::make_unique<NeuralBanditEnv>(streams[StreamPurpose::env_init]);
  }
  throw std::invalid_argument("unknown environment kind");
}

const MethodResult* SeedResult::find(Method method, int m) const {
  for (const auto& r : methods) {
    if (r.method == method && r.m == m) return &r;
  }
  return nullptr;
}

const MethodSummary* RunRecord::find(Method method, int m) const {
  for (const auto& s : summary) {
    if (s.method == method && s.m == m) return &s;
  }
  return nullptr;
}

double RunRecord::headline_gap(Method method, int m) const {
  const auto* s = find(method, m);
  if (!s) throw std::invalid_argument("no results for method " + to_string(method) + " m=" + std::to_string(m));
  return s->has_trimmed ? s->trimmed_mean : s->mean;
}

std::vector<std::pair<Method, int>> method_cells(const ExperimentConfig& cfg) {
  std::vector<std::pair<Method, int>> cells;
  for (Method m : all_methods()) {
    if (!cfg.has_method(m)) continue;
    if (m == Method::rmb_po_plus) {
      for (int v : cfg.m_values) cells.emplace_back(m, v);
    } else {
      cells.emplace_back(m, 0);
    }
  }
  return cells;
}

namespace {

class StageClock {
 public:
  StageClock(SeedResult& out, std::string stage) : out_(out), stage_(std::move(stage)), start_(Clock::now()) {
    out_.stage_log.push_back(stage_);
  }
  ~StageClock() {
    const std::chrono::duration<double> d = Clock::now() - start_;
    out_.timings.push_back({stage_, d.count()});
  }
  const std::string& stage() const { return stage_; }

 private:
  using Clock = std::chrono::steady_clock;
  SeedResult& out_;
  std::string stage_;
  Clock::time_point start_;
};

bool needs_reward(const ExperimentConfig& cfg) {
  return cfg.has_method(Method::rmf_po) || cfg.has_method(Method::rmb_po) || cfg.has_method(Method::rmb_po_plus);
}

}  // namespace

SeedResult run_seed(const ExperimentConfig& cfg, std::int64_t seed) {
  cfg.validate();
  SeedResult out;
  out.seed = seed;
  std::string stage = "streams";
  try {
    StreamSet streams = make_streams(seed);
    std::unique_ptr<Environment> env;
    {
      StageClock c(out, stage = "env");
      env = make_environment(cfg.env, streams);
    }
    const int K = env->num_actions();

    PreferenceDataset pref;
    PromptDataset prompts;
    {
      StageClock c(out, stage = "data");
      pref = collect_preferences(*env, cfg.n, streams[StreamPurpose::data_collection]);
      if (cfg.has_method(Method::rmb_po_plus)) {
        prompts = collect_prompts(*env, cfg.max_m(), streams[StreamPurpose::data_collection]);
      }
    }
    out.pref_states = pref.states();

    RngStream& model_init = streams[StreamPurpose::model_init];
    std::optional<Policy> init;
    {
      StageClock c(out, stage = "policy_init");
      if (is_linear(cfg.env)) {
        const auto& lin = static_cast<const LinearBanditEnv&>(*env);
        init = init_linear_policy(lin.policy_features(), K, model_init);
      } else {
        init = init_mlp_policy(default_policy_spec(env->state_dim(), K), model_init);
      }
    }
    out.policy_init_params = init->params();

    std::optional<RewardModel> reward;
    if (needs_reward(cfg)) {
      StageClock c(out, stage = "reward");
      if (is_linear(cfg.env)) {
        const auto& lin = static_cast<const LinearBanditEnv&>(*env);
        LinearRewardOptions opts;
        opts.ridge = cfg.reward.ridge;
        opts.max_iters = cfg.reward.max_iters;
        reward = train_reward_linear(lin.reward_features(), K, pref, opts);
      } else {
        NeuralRewardOptions opts;
        opts.steps = cfg.reward.steps;
        opts.step_size = cfg.reward.step_size;
        reward = train_reward_neural(default_reward_spec(env->state_dim(), K), K, pref, model_init, opts);
      }
      out.reward_trained = true;
      out.reward_accuracy = pairwise_accuracy(*reward, pref);
      out.reward_diagnostics = reward->diagnostics;
      out.reward_params = reward->params();
    }

    for (const auto& [method, m] : method_cells(cfg)) {
      std::string name = "train:" + to_string(method);
      if (method == Method::rmb_po_plus) name += "@" + std::to_string(m);
      StageClock c(out, stage = name);
      std::optional<PolicyTrainResult> res;
      switch (method) {
        case Method::dpo: res = train_dpo(*init, pref, cfg.policy); break;
        case Method::rmf_po: res = train_rmf_po(*init, *reward, pref, cfg.policy); break;
        case Method::rmb_po: res = train_rmb_po(*init, *reward, pref, cfg.policy); break;
        case Method::rmb_po_plus:
          res = train_rmb_po_plus(*init, *reward, pref, prompts.prefix(static_cast<std::size_t>(m)), cfg.policy);
          break;
      }
      MethodResult mr;
      mr.method = method;
      mr.m = m;
      mr.steps = res->steps;
      mr.converged = res->converged;
      mr.initial_value = res->initial_value;
      mr.final_value = res->final_value;
      mr.trace = std::move(res->trace);
      mr.policy_params = res->policy.params();
      out.methods.push_back(std::move(mr));
    }

    {
      StageClock c(out, stage = "eval");
      const auto states = sample_eval_states(*env, cfg.eval_states, streams[StreamPurpose::evaluation]);
      for (auto& mr : out.methods) {
        Policy p = *init;
        p.params() = mr.policy_params;
        mr.report = optimality_gap(p, *env, states);
        mr.report.method = to_string(mr.method);
        mr.report.seed = seed;
        if (is_linear(cfg.env)) mr.profile = action_profile(p, *env, cfg.profile_grid);
      }
    }
  } catch (const std::exception& ex) {
    throw Error("seed " + std::to_string(seed) + ", stage " + stage + ": " + ex.what());
  }
  return out;
}

RunRecord run_experiment(const ExperimentConfig& cfg, int jobs) {
  cfg.validate();
  RunRecord rec;
  rec.config = cfg;
  const std::size_t n_seeds = cfg.seeds.size();
  rec.seeds.resize(n_seeds);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n_seeds; i = next++) {
      try {
        rec.seeds[i] = run_seed(cfg, cfg.seeds[i]);
      } catch (const std::exception& ex) {
        rec.seeds[i] = SeedResult{};
        rec.seeds[i].seed = cfg.seeds[i];
        rec.seeds[i].error = ex.what();
      }
    }
  };
  const auto workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(1, jobs)), 1, n_seeds);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::size_t completed = 0;
  for (const auto& s : rec.seeds) {
    if (s.ok()) {
      ++completed;
    } else {
      rec.warnings.push_back(s.error);
    }
  }
  if (completed < n_seeds) {
    if (completed < 3) {
      throw Error("only " + std::to_string(completed) + " of " + std::to_string(n_seeds) +
                  " seeds completed; first failure: " + rec.warnings.front());
    }
    rec.warnings.push_back("aggregating over " + std::to_string(completed) + " of " + std::to_string(n_seeds) +
                           " seeds");
  }

  for (const auto& [method, m] : method_cells(cfg)) {
    MethodSummary s;
    s.method = method;
    s.m = m;
    std::vector<double> gaps;
    double acc = 0.0;
    for (const auto& seed : rec.seeds) {
      if (!seed.ok()) continue;
      if (const auto* r = seed.find(method, m)) {
        gaps.push_back(r->report.gap);
        acc += seed.reward_accuracy;
      }
    }
    s.count = static_cast<int>(gaps.size());
    if (!gaps.empty()) {
      s.mean = std::accumulate(gaps.begin(), gaps.end(), 0.0) / static_cast<double>(gaps.size());
      s.min = *std::min_element(gaps.begin(), gaps.end());
      s.max = *std::max_element(gaps.begin(), gaps.end());
      s.mean_reward_accuracy = acc / static_cast<double>(gaps.size());
    }
    if (gaps.size() >= 3) {
      s.has_trimmed = true;
      s.trimmed_mean = trimmed_mean(gaps);
    }
    rec.summary.push_back(s);
  }
  return rec;
}

}  // namespace prefopt
