#pragma once

#include <span>
#include <string>
#include <vector>

namespace prefopt {

enum class OptimizerKind { adagrad, adam };
enum class Direction { ascent, descent };

std::string to_string(OptimizerKind k);
OptimizerKind optimizer_kind_from_string(const std::string& s);

struct OptimizerSettings {
  OptimizerKind kind = OptimizerKind::adagrad;
  double step_size = 0.1;
  double epsilon = 1e-8;
  double beta1 = 0.9;    // adam only
  double beta2 = 0.999;  // adam only

  static OptimizerSettings adagrad(double step_size) { return {OptimizerKind::adagrad, step_size}; }
  static OptimizerSettings adam(double step_size) { return {OptimizerKind::adam, step_size}; }
};

// AdaGrad keeps the running sum of squared gradients in `second`; Adam keeps
// first and second moments plus the step count.
struct OptimizerState {
  OptimizerSettings settings;
  std::vector<double> first;
  std::vector<double> second;
  long step_count = 0;

  static OptimizerState create(const OptimizerSettings& settings, std::size_t num_params);
};

// AdaGrad: G += g^2, p <- p -/+ lr g / sqrt(G + eps).
// Adam: bias-corrected moments, p <- p -/+ lr m_hat / (sqrt(v_hat) + eps).
// The update is a pure function of (state, params, grad).
void opt_step(OptimizerState& state, std::span<double> params, std::span<const double> grad, Direction direction);

}  // namespace prefopt
