#include "prefopt/policy.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>

#include "prefopt/errors.hpp"
#include "prefopt/numeric.hpp"

namespace prefopt {

Policy Policy::linear_softmax(FeatureMap features, std::vector<double> theta, int num_actions) {
  if (static_cast<int>(theta.size()) != features.out_dim()) {
    throw std::invalid_argument("linear policy: theta length must equal feature dimension");
  }
  if (num_actions < 1) throw std::invalid_argument("linear policy: need at least one action");
  Policy p;
  p.kind_ = PolicyKind::linear_softmax;
  p.num_actions_ = num_actions;
  p.features_ = std::move(features);
  p.params_ = ParamVector::flat(std::move(theta));
  return p;
}

Policy Policy::mlp_softmax(MlpSpec spec, ParamVector params) {
  spec.validate();
  if (params.size() != spec.param_count()) throw std::invalid_argument("mlp policy: wrong parameter count");
  Policy p;
  p.kind_ = PolicyKind::mlp_softmax;
  p.num_actions_ = spec.output_size();
  p.spec_ = std::move(spec);
  p.params_ = std::move(params);
  return p;
}

std::vector<double> Policy::logits(const State& s) const {
  const auto t = logit_table(std::span<const State>(&s, 1));
  return std::vector<double>(t.data(), t.data() + t.size());
}

std::vector<double> Policy::action_probs(const State& s) const {
  auto z = logits(s);
  softmax(z, z);
  return z;
}

ActionTable Policy::logit_table(std::span<const State> states) const {
  PolicyBatch batch(*this, states);
  return batch.logits(params_.data());
}

ActionTable Policy::prob_table(std::span<const State> states) const {
  ActionTable t = logit_table(states);
  for (long j = 0; j < t.cols(); ++j) {
    std::span<double> col(t.col(j).data(), static_cast<std::size_t>(t.rows()));
    softmax(col, col);
  }
  return t;
}

nlohmann::ordered_json Policy::describe() const {
  nlohmann::ordered_json j;
  if (kind_ == PolicyKind::linear_softmax) {
    j["kind"] = "linear_softmax";
    j["features"] = features_.name();
    j["theta"] = params_.values();
  } else {
    j["kind"] = "mlp_softmax";
    j["layer_sizes"] = spec_.layer_sizes;
    j["activation"] = to_string(spec_.activation);
  }
  j["num_actions"] = num_actions_;
  return j;
}

Policy init_linear_policy(const FeatureMap& features, int num_actions, RngStream& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(features.out_dim()));
  std::vector<double> theta(static_cast<std::size_t>(features.out_dim()));
  for (auto& v : theta) v = rng.uniform(-bound, bound);
  return Policy::linear_softmax(features, std::move(theta), num_actions);
}

Policy init_mlp_policy(const MlpSpec& spec, RngStream& rng) {
  return Policy::mlp_softmax(spec, init_fan_in_uniform(spec, rng));
}

MlpSpec default_policy_spec(int state_dim, int num_actions) {
  return MlpSpec{{state_dim, 64, 64, num_actions}, Activation::relu};
}

FeatureMap tabular_feature_map(std::span<const State> states, int num_actions) {
  auto index = std::make_shared<std::map<std::vector<double>, int>>();
  for (const auto& s : states) index->emplace(s.coords, static_cast<int>(index->size()));
  const int dim = static_cast<int>(index->size()) * num_actions;
  return FeatureMap("tabular", dim, [index, num_actions](const State& s, ActionId a, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    const auto it = index->find(s.coords);
    if (it != index->end()) out[static_cast<std::size_t>(it->second * num_actions + a.index)] = 1.0;
  });
}

double kl_to_uniform(std::span<const double> p) {
  const double k = static_cast<double>(p.size());
  double kl = 0.0;
  for (double v : p) {
    if (v > 0.0) kl += v * std::log(k * v);
  }
  return kl;
}

PolicyBatch::PolicyBatch(const Policy& policy, std::span<const State> states)
    : kind_(policy.kind()), num_actions_(policy.num_actions()), num_states_(states.size()) {
  const long n = static_cast<long>(states.size());
  if (kind_ == PolicyKind::linear_softmax) {
    const auto& fm = policy.features();
    features_.resize(n * num_actions_, fm.out_dim());
    std::vector<double> row(static_cast<std::size_t>(fm.out_dim()));
    for (long j = 0; j < n; ++j) {
      for (int a = 0; a < num_actions_; ++a) {
        fm.eval(states[static_cast<std::size_t>(j)], ActionId(a), row);
        for (int k = 0; k < fm.out_dim(); ++k) features_(j * num_actions_ + a, k) = row[static_cast<std::size_t>(k)];
      }
    }
  } else {
    spec_ = policy.spec();
    inputs_.resize(spec_.input_size(), n);
    for (long j = 0; j < n; ++j) {
      const auto& c = states[static_cast<std::size_t>(j)].coords;
      if (static_cast<int>(c.size()) != spec_.input_size()) {
        throw std::invalid_argument("policy: state dimension does not match network input");
      }
      for (int i = 0; i < spec_.input_size(); ++i) inputs_(i, j) = c[static_cast<std::size_t>(i)];
    }
  }
}

const ActionTable& PolicyBatch::logits(std::span<const double> params) {
  const long n = static_cast<long>(num_states_);
  if (kind_ == PolicyKind::linear_softmax) {
    const Eigen::VectorXd theta = Eigen::Map<const Eigen::VectorXd>(params.data(), static_cast<long>(params.size()));
    const Eigen::VectorXd flat = features_ * theta;
    logits_ = Eigen::Map<const Eigen::MatrixXd>(flat.data(), num_actions_, n);
    if (!logits_.allFinite()) throw NumericError("policy logits are non-finite");
  } else {
    forward_batch(spec_, params, inputs_, tape_);
    logits_ = tape_.output();
  }
  return logits_;
}

void PolicyBatch::backward(std::span<const double> params, const ActionTable& dlogits, std::span<double> grad) {
  if (kind_ == PolicyKind::linear_softmax) {
    const Eigen::Map<const Eigen::VectorXd> flat(dlogits.data(), dlogits.size());
    const Eigen::VectorXd g = features_.transpose() * flat;
    Eigen::Map<Eigen::VectorXd>(grad.data(), static_cast<long>(grad.size())) = g;
    return;
  }
  backward_batch(spec_, params, tape_, dlogits, grad);
}

}  // namespace prefopt
