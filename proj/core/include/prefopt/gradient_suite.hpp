#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace prefopt {

enum class FaultInjection { none, dpo_sign };

struct OperationCheck {
  std::string operation;
  int instances = 0;
  double max_rel_error = 0.0;
  int worst_instance = -1;
  std::size_t worst_coordinate = 0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  bool passed = true;
};

struct GradientSuiteReport {
  std::uint64_t seed = 0;
  double tolerance = 0.0;
  std::vector<OperationCheck> operations;

  bool passed() const;
};

// Finite-difference checks of mlp_backward, bt_loss, dpo_loss and
// rmb_objective on random instances (small networks check every coordinate,
// full-size ones a random subset). `fault` corrupts one analytic gradient
// so the failure path can be exercised.
GradientSuiteReport run_gradient_suite(std::uint64_t seed, int instances = 20, double tolerance = 1e-4,
                                       FaultInjection fault = FaultInjection::none);

// One line per operation: "<op> instances=20 max_rel_error=... PASS".
std::vector<std::string> format_report(const GradientSuiteReport& report);
nlohmann::ordered_json to_json(const GradientSuiteReport& report);

}  // namespace prefopt
