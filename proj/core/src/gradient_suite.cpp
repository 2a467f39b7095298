#include "prefopt/gradient_suite.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "prefopt/gradcheck.hpp"
#include "prefopt/policy_opt.hpp"
#include "prefopt/reward_model.hpp"

namespace prefopt {

bool GradientSuiteReport::passed() const {
  return std::all_of(operations.begin(), operations.end(), [](const OperationCheck& o) { return o.passed; });
}

namespace {

constexpr std::size_t kSubsetSize = 300;

void absorb(OperationCheck& op, const GradCheckResult& r, int instance) {
  op.checked += r.checked;
  op.skipped += r.skipped;
  if (op.worst_instance < 0 || r.max_rel_error > op.max_rel_error) {
    op.max_rel_error = r.max_rel_error;
    op.worst_instance = instance;
    op.worst_coordinate = r.worst_index;
  }
}

std::vector<double> uniform_vector(RngStream& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

// Every coordinate for small vectors; otherwise a sample stratified over
// equal-width blocks so each tensor region is probed.
std::vector<std::size_t> probe_coords(std::size_t n, RngStream& rng) {
  std::vector<std::size_t> c;
  if (n <= kSubsetSize) return c;
  for (std::size_t k = 0; k < kSubsetSize; ++k) {
    const std::size_t lo = k * n / kSubsetSize;
    const std::size_t hi = (k + 1) * n / kSubsetSize;
    c.push_back(lo + rng.uniform_index(hi - lo));
  }
  return c;
}

MlpSpec random_spec(RngStream& rng, int instance) {
  if (instance % 4 == 3) return MlpSpec{{60, 64, 64, 1}, Activation::relu};
  MlpSpec s;
  s.activation = rng.uniform_index(2) ? Activation::tanh : Activation::relu;
  const int depth = 1 + static_cast<int>(rng.uniform_index(3));
  s.layer_sizes.push_back(2 + static_cast<int>(rng.uniform_index(5)));
  for (int i = 0; i < depth; ++i) s.layer_sizes.push_back(2 + static_cast<int>(rng.uniform_index(6)));
  s.layer_sizes.push_back(1 + static_cast<int>(rng.uniform_index(3)));
  return s;
}

KinkSignatureFn pattern_of(const MlpSpec& spec, const Eigen::MatrixXd& inputs) {
  if (spec.activation != Activation::relu) return {};
  return [spec, inputs](std::span<const double> p) {
    MlpTape tape;
    forward_batch(spec, p, inputs, tape);
    return activation_pattern(spec, tape);
  };
}

Eigen::MatrixXd random_inputs(RngStream& rng, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (long j = 0; j < m.cols(); ++j) {
    for (long i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform(-1.0, 1.0);
  }
  return m;
}

OperationCheck check_mlp(RngStream& rng, int instances) {
  OperationCheck op{"mlp_backward"};
  for (int k = 0; k < instances; ++k) {
    const MlpSpec spec = random_spec(rng, k);
    const ParamVector params = init_fan_in_uniform(spec, rng);
    const Eigen::MatrixXd inputs = random_inputs(rng, spec.input_size(), 3);
    const Eigen::MatrixXd upstream = random_inputs(rng, spec.output_size(), 3);
    MlpTape tape;
    forward_batch(spec, params.data(), inputs, tape);
    std::vector<double> analytic(params.size());
    backward_batch(spec, params.data(), tape, upstream, analytic);
    const ScalarFn f = [&](std::span<const double> p) {
      MlpTape t;
      forward_batch(spec, p, inputs, t);
      return (t.output().array() * upstream.array()).sum();
    };
    const auto coords = probe_coords(params.size(), rng);
    absorb(op, check_gradient(f, params.data(), analytic, coords, 1e-5, pattern_of(spec, inputs)), k);
    ++op.instances;
  }
  return op;
}

PreferenceDataset random_dataset(RngStream& rng, int dim, int K, int n) {
  std::vector<PreferenceTriple> triples;
  for (int i = 0; i < n; ++i) {
    State s(uniform_vector(rng, static_cast<std::size_t>(dim), -1.0, 1.0));
    const int a = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(K)));
    int b = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(K - 1)));
    if (b >= a) ++b;
    triples.push_back({std::move(s), ActionId(a), ActionId(b)});
  }
  return PreferenceDataset(std::move(triples));
}

PreferenceDataset random_linear_dataset(RngStream& rng, int n) {
  std::vector<PreferenceTriple> triples;
  for (int i = 0; i < n; ++i) {
    const int a = static_cast<int>(rng.uniform_index(4));
    int b = static_cast<int>(rng.uniform_index(3));
    if (b >= a) ++b;
    triples.push_back({State{rng.uniform01()}, ActionId(a), ActionId(b)});
  }
  return PreferenceDataset(std::move(triples));
}

OperationCheck check_bt(RngStream& rng, int instances) {
  OperationCheck op{"bt_loss"};
  for (int k = 0; k < instances; ++k) {
    const int n = 1 + static_cast<int>(rng.uniform_index(20));
    std::optional<RewardModel> model;
    std::optional<PreferenceDataset> d;
    KinkSignatureFn sig;
    if (k % 2 == 0) {
      d = random_linear_dataset(rng, n);
      model = RewardModel::linear(reward_feature_map_linear(), uniform_vector(rng, 2, -3.0, 3.0), 4);
    } else {
      const int K = 2 + static_cast<int>(rng.uniform_index(4));
      const int dim = k % 4 == 3 ? 50 : 1 + static_cast<int>(rng.uniform_index(4));
      const int actions = k % 4 == 3 ? 10 : K;
      d = random_dataset(rng, dim, actions, n);
      const MlpSpec spec = k % 4 == 3 ? default_reward_spec(dim, actions)
                                      : MlpSpec{{dim + actions, 5, 4, 1}, Activation::relu};
      model = RewardModel::mlp(spec, init_fan_in_uniform(spec, rng), actions);
      Eigen::MatrixXd inputs(spec.input_size(), 2 * n);
      for (int i = 0; i < n; ++i) {
        const auto& t = (*d)[static_cast<std::size_t>(i)];
        const auto w = state_action_input(t.state, t.winner, actions);
        const auto l = state_action_input(t.state, t.loser, actions);
        inputs.col(i) = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<long>(w.size()));
        inputs.col(n + i) = Eigen::Map<const Eigen::VectorXd>(l.data(), static_cast<long>(l.size()));
      }
      sig = pattern_of(spec, inputs);
    }
    const auto analytic = bt_loss_with_gradient(*model, *d).grad;
    RewardModel probe = *model;
    const ScalarFn f = [&](std::span<const double> p) {
      std::copy(p.begin(), p.end(), probe.params().data().begin());
      return bt_loss(probe, *d);
    };
    const std::vector<double> x = model->params().values();
    absorb(op, check_gradient(f, x, analytic, probe_coords(x.size(), rng), 1e-5, sig), k);
    ++op.instances;
  }
  return op;
}

struct PolicyCase {
  std::optional<Policy> policy;
  std::optional<PreferenceDataset> d;
  KinkSignatureFn sig;
};

PolicyCase random_policy_case(RngStream& rng, int k) {
  PolicyCase c;
  const int n = 1 + static_cast<int>(rng.uniform_index(20));
  if (k % 2 == 0) {
    c.d = random_linear_dataset(rng, n);
    const auto mode = rng.uniform_index(2) ? PolicyFeatureMode::flipped : PolicyFeatureMode::matched;
    c.policy = Policy::linear_softmax(policy_feature_map_linear(mode), uniform_vector(rng, 2, -3.0, 3.0), 4);
    return c;
  }
  const bool full_size = k % 4 == 3;
  const int dim = full_size ? 50 : 1 + static_cast<int>(rng.uniform_index(4));
  const int K = full_size ? 10 : 2 + static_cast<int>(rng.uniform_index(4));
  c.d = random_dataset(rng, dim, K, n);
  const MlpSpec spec = full_size ? default_policy_spec(dim, K) : MlpSpec{{dim, 6, 5, K}, Activation::relu};
  c.policy = Policy::mlp_softmax(spec, init_fan_in_uniform(spec, rng));
  Eigen::MatrixXd inputs(dim, n);
  for (int i = 0; i < n; ++i) {
    const auto& s = (*c.d)[static_cast<std::size_t>(i)].state.coords;
    inputs.col(i) = Eigen::Map<const Eigen::VectorXd>(s.data(), dim);
  }
  c.sig = pattern_of(spec, inputs);
  return c;
}

OperationCheck check_dpo(RngStream& rng, int instances, bool flip_sign) {
  OperationCheck op{"dpo_loss"};
  const double betas[] = {0.01, 0.1, 1.0};
  for (int k = 0; k < instances; ++k) {
    auto c = random_policy_case(rng, k);
    const double beta = betas[rng.uniform_index(3)];
    auto analytic = dpo_loss_with_gradient(*c.policy, *c.d, beta).grad;
    if (flip_sign) {
      for (auto& g : analytic) g = -g;
    }
    Policy probe = *c.policy;
    const ScalarFn f = [&](std::span<const double> p) {
      std::copy(p.begin(), p.end(), probe.params().data().begin());
      return dpo_loss(probe, *c.d, beta);
    };
    const std::vector<double> x = c.policy->params().values();
    absorb(op, check_gradient(f, x, analytic, probe_coords(x.size(), rng), 1e-5, c.sig), k);
    ++op.instances;
  }
  return op;
}

OperationCheck check_rmb(RngStream& rng, int instances) {
  OperationCheck op{"rmb_objective"};
  const double betas[] = {0.0, 0.01, 0.1, 1.0};
  for (int k = 0; k < instances; ++k) {
    auto c = random_policy_case(rng, k);
    const double beta = betas[rng.uniform_index(4)];
    const auto states = c.d->states();
    ActionTable rewards(c.policy->num_actions(), static_cast<long>(states.size()));
    for (long j = 0; j < rewards.cols(); ++j) {
      for (long a = 0; a < rewards.rows(); ++a) rewards(a, j) = rng.uniform(-2.0, 2.0);
    }
    const auto analytic = reward_kl_objective_with_gradient(*c.policy, states, rewards, beta).grad;
    Policy probe = *c.policy;
    const ScalarFn f = [&](std::span<const double> p) {
      std::copy(p.begin(), p.end(), probe.params().data().begin());
      return reward_kl_objective_with_gradient(probe, states, rewards, beta).value;
    };
    const std::vector<double> x = c.policy->params().values();
    absorb(op, check_gradient(f, x, analytic, probe_coords(x.size(), rng), 1e-5, c.sig), k);
    ++op.instances;
  }
  return op;
}

}  // namespace

GradientSuiteReport run_gradient_suite(std::uint64_t seed, int instances, double tolerance, FaultInjection fault) {
  GradientSuiteReport rep;
  rep.seed = seed;
  rep.tolerance = tolerance;
  RngStream rng(seed, StreamPurpose::training);
  rep.operations.push_back(check_mlp(rng, instances));
  rep.operations.push_back(check_bt(rng, instances));
  rep.operations.push_back(check_dpo(rng, instances, fault == FaultInjection::dpo_sign));
  rep.operations.push_back(check_rmb(rng, instances));
  for (auto& op : rep.operations) op.passed = op.max_rel_error < tolerance;
  return rep;
}

std::vector<std::string> format_report(const GradientSuiteReport& report) {
  std::vector<std::string> lines;
  for (const auto& op : report.operations) {
    std::ostringstream s;
    s.precision(3);
    s << op.operation << " instances=" << op.instances << " checked=" << op.checked << " skipped=" << op.skipped
      << " max_rel_error=" << std::scientific << op.max_rel_error;
    if (!op.passed) s << " worst_instance=" << op.worst_instance << " coordinate=" << op.worst_coordinate;
    s << (op.passed ? " PASS" : " FAIL");
    lines.push_back(s.str());
  }
  return lines;
}

nlohmann::ordered_json to_json(const GradientSuiteReport& report) {
  nlohmann::ordered_json j;
  j["seed"] = report.seed;
  j["tolerance"] = report.tolerance;
  auto ops = nlohmann::ordered_json::array();
  for (const auto& op : report.operations) {
    ops.push_back({{"operation", op.operation},
                   {"instances", op.instances},
                   {"checked", op.checked},
                   {"skipped", op.skipped},
                   {"max_rel_error", op.max_rel_error},
                   {"worst_instance", op.worst_instance},
                   {"worst_coordinate", op.worst_coordinate},
                   {"passed", op.passed}});
  }
  j["operations"] = ops;
  j["passed"] = report.passed();
  return j;
}

}  // namespace prefopt
