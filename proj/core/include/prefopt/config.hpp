#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "prefopt/policy_opt.hpp"

namespace prefopt {

enum class EnvKind { linear_matched, linear_flipped, neural };
enum class Method { dpo, rmf_po, rmb_po, rmb_po_plus };

std::string to_string(EnvKind e);
EnvKind env_kind_from_string(const std::string& s);
std::string to_string(Method m);
Method method_from_string(const std::string& s);
const std::vector<Method>& all_methods();
bool is_linear(EnvKind e);

struct RewardSettings {
  double ridge = 1e-6;
  int max_iters = 100000;
  int steps = 2000;
  double step_size = 1e-3;
};

struct ExperimentConfig {
  EnvKind env = EnvKind::linear_matched;
  int n = 20;
  // Prompt counts for rmb_po_plus; a sweep when more than one.
  std::vector<int> m_values{200};
  std::vector<std::int64_t> seeds;
  int eval_states = 5000;
  std::vector<Method> methods;
  int profile_grid = 200;
  PolicyOptConfig policy;
  RewardSettings reward;

  // Protocol defaults for the environment: linear n = 20, m = 200, AdaGrad
  // 0.1; neural n = 50, m in {50, 100, 250, 500, 1000}, Adam 1e-3.
  static ExperimentConfig defaults(EnvKind env);

  bool has_method(Method m) const;
  int max_m() const;

  // Throws ConfigError naming the offending key.
  void validate() const;
};

// One `key = value` override, as given to --set. Keys may be qualified with
// their section ("policy.step_size") or bare ("step_size").
struct ConfigOverride {
  std::string key;
  std::string value;
};

ConfigOverride parse_override(const std::string& text);

// Sectioned key=value text:
//   [experiment] env n m beta seeds eval_states methods state_pool profile_grid
//   [policy]     optimizer step_size max_steps tol patience
//   [reward]     ridge max_iters reward_steps reward_step_size
// Lines starting with '#' and blank lines are ignored. Defaults come from
// the env key. Throws ConfigError naming the key and line for unknown,
// misplaced, duplicate or malformed entries.
ExperimentConfig parse_config(const std::string& text, const std::vector<ConfigOverride>& overrides = {});
ExperimentConfig load_config(const std::string& path, const std::vector<ConfigOverride>& overrides = {});

// Canonical text that parse_config maps back to the same config.
std::string to_config_text(const ExperimentConfig& cfg);
nlohmann::ordered_json to_json(const ExperimentConfig& cfg);

// "2021-2030" or "2021, 2025, 2030".
std::vector<std::int64_t> parse_seed_list(const std::string& text);
std::string format_seed_list(const std::vector<std::int64_t>& seeds);

// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

}  // namespace prefopt
