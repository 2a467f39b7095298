#include "prefopt/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace prefopt {

std::string to_string(OptimizerKind k) { return k == OptimizerKind::adagrad ? "adagrad" : "adam"; }

OptimizerKind optimizer_kind_from_string(const std::string& s) {
  if (s == "adagrad") return OptimizerKind::adagrad;
  if (s == "adam") return OptimizerKind::adam;
  throw std::invalid_argument("unknown optimizer '" + s + "'");
}

OptimizerState OptimizerState::create(const OptimizerSettings& settings, std::size_t num_params) {
  if (!(settings.step_size > 0.0)) throw std::invalid_argument("optimizer step size must be positive");
  OptimizerState s;
  s.settings = settings;
  s.second.assign(num_params, 0.0);
  if (settings.kind == OptimizerKind::adam) s.first.assign(num_params, 0.0);
  return s;
}

void opt_step(OptimizerState& state, std::span<double> params, std::span<const double> grad, Direction direction) {
  if (params.size() != grad.size() || params.size() != state.second.size()) {
    throw std::invalid_argument("opt_step: parameter, gradient and accumulator lengths differ");
  }
  const auto& cfg = state.settings;
  const double sign = direction == Direction::ascent ? 1.0 : -1.0;
  ++state.step_count;

  if (cfg.kind == OptimizerKind::adagrad) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.second[i] += grad[i] * grad[i];
      params[i] += sign * cfg.step_size * grad[i] / std::sqrt(state.second[i] + cfg.epsilon);
    }
    return;
  }

  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.first[i] = cfg.beta1 * state.first[i] + (1.0 - cfg.beta1) * grad[i];
    state.second[i] = cfg.beta2 * state.second[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
    const double m_hat = state.first[i] / c1;
    const double v_hat = state.second[i] / c2;
    params[i] += sign * cfg.step_size * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

}  // namespace prefopt
