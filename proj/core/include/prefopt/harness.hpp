#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "prefopt/config.hpp"
#include "prefopt/envs.hpp"
#include "prefopt/eval.hpp"
#include "prefopt/policy_opt.hpp"

namespace prefopt {

// Mean after dropping one minimum and one maximum. Needs >= 3 values.
double trimmed_mean(std::vector<double> values);

std::unique_ptr<Environment> make_environment(EnvKind kind, StreamSet& streams);

// One trained (method, m) cell within a seed. m is the number of prompt
// states the method consumed: 0 for everything but rmb_po_plus.
struct MethodResult {
  Method method = Method::dpo;
  int m = 0;
  EvalReport report;
  int steps = 0;
  bool converged = false;
  double initial_value = 0.0;
  double final_value = 0.0;
  std::vector<TracePoint> trace;
  ParamVector policy_params;
  // grid x K action probabilities; linear environments only.
  Eigen::MatrixXd profile;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct SeedResult {
  std::int64_t seed = 0;
  bool reward_trained = false;
  double reward_accuracy = 0.0;
  FitDiagnostics reward_diagnostics;
  ParamVector reward_params;
  ParamVector policy_init_params;
  std::vector<State> pref_states;
  // Stage names in execution order ("env", "data", "policy_init", "reward",
  // "train:<method>", "eval").
  std::vector<std::string> stage_log;
  std::vector<StageTiming> timings;
  std::vector<MethodResult> methods;
  // Non-empty when the seed aborted; names the stage.
  std::string error;

  bool ok() const noexcept { return error.empty(); }
  const MethodResult* find(Method method, int m) const;
};

// Seed-level statistics of the gap for one (method, m) cell.
struct MethodSummary {
  Method method = Method::dpo;
  int m = 0;
  int count = 0;
  bool has_trimmed = false;
  double trimmed_mean = 0.0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double mean_reward_accuracy = 0.0;
};

struct RunRecord {
  ExperimentConfig config;
  std::vector<SeedResult> seeds;
  std::vector<MethodSummary> summary;
  std::vector<std::string> warnings;

  const MethodSummary* find(Method method, int m) const;
  // trimmed_mean when available, otherwise the raw mean.
  double headline_gap(Method method, int m = 0) const;
};

// The (method, m) cells a config trains, in output order.
std::vector<std::pair<Method, int>> method_cells(const ExperimentConfig& cfg);

// Throws prefopt::Error tagged with the seed and stage on failure.
SeedResult run_seed(const ExperimentConfig& cfg, std::int64_t seed);

// Seeds run on up to `jobs` threads; the record does not depend on `jobs`.
// Failed seeds are kept with their error; aggregation needs 3 completed
// seeds when any seed failed.
RunRecord run_experiment(const ExperimentConfig& cfg, int jobs = 1);

}  // namespace prefopt
