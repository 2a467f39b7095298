#include "prefopt/reward_model.hpp"

#include <cmath>
#include <stdexcept>

#include "prefopt/errors.hpp"
#include "prefopt/numeric.hpp"
#include "prefopt/optimizer.hpp"

namespace prefopt {

RewardModel RewardModel::linear(FeatureMap features, std::vector<double> weights, int num_actions) {
  if (static_cast<int>(weights.size()) != features.out_dim()) {
    throw std::invalid_argument("linear reward: weight length must equal feature dimension");
  }
  RewardModel m;
  m.kind_ = RewardKind::linear;
  m.num_actions_ = num_actions;
  m.features_ = std::move(features);
  m.params_ = ParamVector::flat(std::move(weights));
  return m;
}

RewardModel RewardModel::mlp(MlpSpec spec, ParamVector params, int num_actions) {
  spec.validate();
  if (params.size() != spec.param_count()) throw std::invalid_argument("mlp reward: wrong parameter count");
  if (spec.output_size() != 1) throw std::invalid_argument("mlp reward: output layer must have size 1");
  if (spec.input_size() <= num_actions) throw std::invalid_argument("mlp reward: input must be state ⊕ one-hot action");
  RewardModel m;
  m.kind_ = RewardKind::mlp;
  m.num_actions_ = num_actions;
  m.spec_ = std::move(spec);
  m.params_ = std::move(params);
  return m;
}

double RewardModel::score(const State& s, ActionId a) const {
  if (kind_ == RewardKind::linear) {
    const auto f = features_(s, a);
    double v = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) v += f[i] * params_[i];
    return v;
  }
  return forward(spec_, params_, state_action_input(s, a, num_actions_))[0];
}

std::vector<double> RewardModel::scores(const State& s) const {
  const auto t = table(std::span<const State>(&s, 1));
  return std::vector<double>(t.data(), t.data() + t.size());
}

ActionTable RewardModel::table(std::span<const State> states) const {
  ActionTable t(num_actions_, static_cast<long>(states.size()));
  if (states.empty()) return t;
  if (kind_ == RewardKind::linear) {
    for (std::size_t j = 0; j < states.size(); ++j) {
      for (int a = 0; a < num_actions_; ++a) t(a, static_cast<long>(j)) = score(states[j], ActionId(a));
    }
    return t;
  }
  MlpTape tape;
  forward_batch(spec_, params_.data(), state_action_inputs(states, num_actions_), tape);
  t = Eigen::Map<const Eigen::MatrixXd>(tape.output().data(), num_actions_, static_cast<long>(states.size()));
  return t;
}

nlohmann::ordered_json RewardModel::describe() const {
  nlohmann::ordered_json j;
  if (kind_ == RewardKind::linear) {
    j["kind"] = "linear";
    j["features"] = features_.name();
    j["weights"] = params_.values();
  } else {
    j["kind"] = "mlp";
    j["layer_sizes"] = spec_.layer_sizes;
    j["activation"] = to_string(spec_.activation);
  }
  j["num_actions"] = num_actions_;
  return j;
}

namespace {

void require_nonempty(const PreferenceDataset& d, const char* what) {
  if (d.empty()) throw std::invalid_argument(std::string(what) + ": preference dataset is empty");
}

// Rows: winner-minus-loser feature differences.
Eigen::MatrixXd feature_differences(const FeatureMap& features, const PreferenceDataset& d) {
  const int dim = features.out_dim();
  Eigen::MatrixXd diff(static_cast<long>(d.n()), dim);
  std::vector<double> fw(static_cast<std::size_t>(dim)), fl(static_cast<std::size_t>(dim));
  for (std::size_t i = 0; i < d.n(); ++i) {
    features.eval(d[i].state, d[i].winner, fw);
    features.eval(d[i].state, d[i].loser, fl);
    for (int k = 0; k < dim; ++k) diff(static_cast<long>(i), k) = fw[static_cast<std::size_t>(k)] - fl[static_cast<std::size_t>(k)];
  }
  return diff;
}

// Columns 0..n-1: (s_i, winner_i); columns n..2n-1: (s_i, loser_i).
Eigen::MatrixXd pair_inputs(const PreferenceDataset& d, int num_actions) {
  const long n = static_cast<long>(d.n());
  const long dim = static_cast<long>(d[0].state.dim());
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(dim + num_actions, 2 * n);
  for (long i = 0; i < n; ++i) {
    const auto& t = d[static_cast<std::size_t>(i)];
    for (long k = 0; k < dim; ++k) {
      x(k, i) = t.state.coords[static_cast<std::size_t>(k)];
      x(k, n + i) = t.state.coords[static_cast<std::size_t>(k)];
    }
    x(dim + t.winner.index, i) = 1.0;
    x(dim + t.loser.index, n + i) = 1.0;
  }
  return x;
}

double linear_objective(const Eigen::MatrixXd& diff, const Eigen::VectorXd& w, double ridge) {
  const Eigen::VectorXd m = diff * w;
  double loss = 0.0;
  for (long i = 0; i < m.size(); ++i) loss -= log_sigmoid(m(i));
  return loss + ridge * w.squaredNorm();
}

// Loss and gradient of the MLP Bradley-Terry loss over prebuilt pair inputs.
double mlp_bt_loss(const MlpSpec& spec, std::span<const double> params, const Eigen::MatrixXd& inputs, long n,
                   MlpTape& tape, std::span<double> grad) {
  forward_batch(spec, params, inputs, tape);
  const auto& y = tape.output();
  double loss = 0.0;
  Eigen::MatrixXd up(1, 2 * n);
  for (long i = 0; i < n; ++i) {
    const double margin = y(0, i) - y(0, n + i);
    loss -= log_sigmoid(margin);
    const double g = -sigmoid(-margin);
    up(0, i) = g;
    up(0, n + i) = -g;
  }
  if (!grad.empty()) backward_batch(spec, params, tape, up, grad);
  return loss;
}

}  // namespace

double bt_loss(const RewardModel& model, const PreferenceDataset& d) {
  require_nonempty(d, "bt_loss");
  double loss = 0.0;
  if (model.kind() == RewardKind::linear) {
    for (const auto& t : d.triples()) loss -= log_sigmoid(model.score(t.state, t.winner) - model.score(t.state, t.loser));
    return loss;
  }
  MlpTape tape;
  return mlp_bt_loss(model.spec(), model.params().data(), pair_inputs(d, model.num_actions()),
                     static_cast<long>(d.n()), tape, {});
}

LossWithGradient bt_loss_with_gradient(const RewardModel& model, const PreferenceDataset& d) {
  require_nonempty(d, "bt_loss");
  LossWithGradient out;
  out.grad.assign(model.params().size(), 0.0);
  if (model.kind() == RewardKind::linear) {
    const auto diff = feature_differences(model.features(), d);
    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(model.params().data().data(), diff.cols());
    const Eigen::VectorXd m = diff * w;
    Eigen::VectorXd coef(m.size());
    for (long i = 0; i < m.size(); ++i) {
      out.value -= log_sigmoid(m(i));
      coef(i) = -sigmoid(-m(i));
    }
    const Eigen::VectorXd g = diff.transpose() * coef;
    Eigen::Map<Eigen::VectorXd>(out.grad.data(), diff.cols()) = g;
    return out;
  }
  MlpTape tape;
  out.value = mlp_bt_loss(model.spec(), model.params().data(), pair_inputs(d, model.num_actions()),
                          static_cast<long>(d.n()), tape, out.grad);
  return out;
}

RewardModel train_reward_linear(const FeatureMap& features, int num_actions, const PreferenceDataset& d,
                                const LinearRewardOptions& options) {
  require_nonempty(d, "train_reward_linear");
  if (options.ridge < 0) throw std::invalid_argument("train_reward_linear: ridge must be >= 0");
  const int dim = features.out_dim();
  const auto diff = feature_differences(features, d);

  Eigen::VectorXd w = Eigen::VectorXd::Zero(dim);
  if (!options.init.empty()) {
    if (static_cast<int>(options.init.size()) != dim) throw std::invalid_argument("train_reward_linear: bad init length");
    w = Eigen::Map<const Eigen::VectorXd>(options.init.data(), dim);
  }

  FitDiagnostics diag;
  double loss = linear_objective(diff, w, options.ridge);
  double gnorm = 0.0;
  int it = 0;
  for (; it < options.max_iters; ++it) {
    const Eigen::VectorXd m = diff * w;
    Eigen::VectorXd coef(m.size()), curv(m.size());
    for (long i = 0; i < m.size(); ++i) {
      coef(i) = -sigmoid(-m(i));
      curv(i) = sigmoid(m(i)) * sigmoid(-m(i));
    }
    const Eigen::VectorXd g = diff.transpose() * coef + 2.0 * options.ridge * w;
    gnorm = g.norm();
    if (gnorm < options.grad_tol) break;

    Eigen::MatrixXd h = diff.transpose() * curv.asDiagonal() * diff;
    h.diagonal().array() += 2.0 * options.ridge;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    Eigen::VectorXd p;
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) p = -ldlt.solve(g);
    if (p.size() != dim || !p.allFinite() || g.dot(p) >= 0.0) p = -g;

    // Armijo backtracking.
    double t = 1.0;
    const double slope = g.dot(p);
    double next = linear_objective(diff, w + t * p, options.ridge);
    int halvings = 0;
    while (next > loss + 1e-4 * t * slope && halvings < 60) {
      t *= 0.5;
      next = linear_objective(diff, w + t * p, options.ridge);
      ++halvings;
    }
    if (halvings == 60) break;  // no further decrease representable
    w += t * p;
    loss = next;
    diag.loss_trace.push_back(loss);
  }
  diag.iterations = it;
  diag.final_grad_norm = gnorm;
  diag.converged = gnorm < options.grad_tol;
  diag.warning = gnorm > 1e-6;

  RewardModel model = RewardModel::linear(features, std::vector<double>(w.data(), w.data() + dim), num_actions);
  model.diagnostics = std::move(diag);
  return model;
}

MlpSpec default_reward_spec(int state_dim, int num_actions) {
  return MlpSpec{{state_dim + num_actions, 64, 64, 1}, Activation::relu};
}

RewardModel train_reward_neural(const MlpSpec& spec, int num_actions, const PreferenceDataset& d, RngStream& init_rng,
                                const NeuralRewardOptions& options) {
  require_nonempty(d, "train_reward_neural");
  if (options.steps < 1) throw std::invalid_argument("train_reward_neural: steps must be >= 1");
  spec.validate();
  if (spec.input_size() != static_cast<int>(d[0].state.dim()) + num_actions) {
    throw std::invalid_argument("train_reward_neural: spec input must be state_dim + num_actions");
  }

  ParamVector params = init_fan_in_uniform(spec, init_rng);
  if (options.zero_output_layer) {
    const std::size_t last = static_cast<std::size_t>(spec.layer_sizes[spec.layer_sizes.size() - 2]) + 1;
    for (std::size_t i = params.size() - last; i < params.size(); ++i) params[i] = 0.0;
  }

  const auto inputs = pair_inputs(d, num_actions);
  const long n = static_cast<long>(d.n());
  auto opt = OptimizerState::create(OptimizerSettings::adam(options.step_size), params.size());
  std::vector<double> grad(params.size());
  MlpTape tape;
  FitDiagnostics diag;
  diag.loss_trace.reserve(static_cast<std::size_t>(options.steps) + 1);

  for (int step = 0; step < options.steps; ++step) {
    const double loss = mlp_bt_loss(spec, params.data(), inputs, n, tape, grad);
    if (!std::isfinite(loss)) {
      throw NumericError("reward training diverged: non-finite loss at step " + std::to_string(step));
    }
    diag.loss_trace.push_back(loss);
    opt_step(opt, params.data(), grad, Direction::descent);
  }
  const double final_loss = mlp_bt_loss(spec, params.data(), inputs, n, tape, grad);
  if (!std::isfinite(final_loss)) throw NumericError("reward training diverged: non-finite final loss");
  diag.loss_trace.push_back(final_loss);
  diag.iterations = options.steps;
  double g2 = 0.0;
  for (double g : grad) g2 += g * g;
  diag.final_grad_norm = std::sqrt(g2);

  RewardModel model = RewardModel::mlp(spec, std::move(params), num_actions);
  model.diagnostics = std::move(diag);
  return model;
}

double pairwise_accuracy(const RewardModel& model, const PreferenceDataset& d) {
  require_nonempty(d, "pairwise_accuracy");
  double correct = 0.0;
  for (const auto& t : d.triples()) {
    const double w = model.score(t.state, t.winner);
    const double l = model.score(t.state, t.loser);
    if (w > l) {
      correct += 1.0;
    } else if (w == l) {
      correct += 0.5;
    }
  }
  return correct / static_cast<double>(d.n());
}

}  // namespace prefopt
