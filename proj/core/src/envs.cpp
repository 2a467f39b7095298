#include "prefopt/envs.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "prefopt/numeric.hpp"

namespace prefopt {

FeatureMap::FeatureMap(std::string name, int out_dim, Fn fn)
    : name_(std::move(name)), out_dim_(out_dim), fn_(std::move(fn)) {}

std::vector<double> FeatureMap::operator()(const State& s, ActionId a) const {
  std::vector<double> out(static_cast<std::size_t>(out_dim_), 0.0);
  fn_(s, a, out);
  return out;
}

std::string to_string(PolicyFeatureMode m) { return m == PolicyFeatureMode::matched ? "matched" : "flipped"; }

std::array<double, 2> reward_features_linear(const State& s, ActionId a) {
  const double x = s.coords.at(0) * std::numbers::pi;
  const double k = static_cast<double>(a.index + 1);
  return {k * std::cos(x), std::sin(x) / k};
}

std::array<double, 2> policy_features_linear(const State& s, ActionId a, PolicyFeatureMode mode) {
  if (mode == PolicyFeatureMode::matched) return reward_features_linear(s, a);
  const double x = s.coords.at(0) * std::numbers::pi;
  const double k = static_cast<double>(a.index + 1);
  return {k * std::sin(x), std::cos(x) / k};
}

FeatureMap reward_feature_map_linear() {
  return FeatureMap("phi_r", 2, [](const State& s, ActionId a, std::span<double> out) {
    const auto f = reward_features_linear(s, a);
    out[0] = f[0];
    out[1] = f[1];
  });
}

FeatureMap policy_feature_map_linear(PolicyFeatureMode mode) {
  return FeatureMap(mode == PolicyFeatureMode::matched ? "phi_r" : "phi_pi_flipped", 2,
                    [mode](const State& s, ActionId a, std::span<double> out) {
                      const auto f = policy_features_linear(s, a, mode);
                      out[0] = f[0];
                      out[1] = f[1];
                    });
}

ActionTable Environment::true_reward_table(std::span<const State> states) const {
  const int k = num_actions();
  ActionTable t(k, static_cast<long>(states.size()));
  for (std::size_t j = 0; j < states.size(); ++j) {
    for (int a = 0; a < k; ++a) t(a, static_cast<long>(j)) = true_reward(states[j], ActionId(a));
  }
  return t;
}

bool Environment::contains(const State& s) const {
  if (static_cast<int>(s.dim()) != state_dim()) return false;
  for (double c : s.coords) {
    if (!std::isfinite(c) || c < state_low() || c > state_high()) return false;
  }
  return true;
}

LinearBanditEnv::LinearBanditEnv(PolicyFeatureMode mode, std::array<double, 2> theta_star)
    : mode_(mode), theta_star_(theta_star) {}

std::string LinearBanditEnv::name() const { return "linear_" + to_string(mode_); }

State LinearBanditEnv::sample_state(RngStream& rng) const { return State{rng.uniform01()}; }

double LinearBanditEnv::true_reward(const State& s, ActionId a) const {
  const auto f = reward_features_linear(s, a);
  return f[0] * theta_star_[0] + f[1] * theta_star_[1];
}

nlohmann::ordered_json LinearBanditEnv::describe() const {
  nlohmann::ordered_json j;
  j["kind"] = "linear";
  j["policy_features"] = to_string(mode_);
  j["theta_star"] = theta_star_;
  j["num_actions"] = num_actions();
  j["state_box"] = {state_low(), state_high()};
  return j;
}

MlpSpec NeuralBanditEnv::true_net_spec() {
  return MlpSpec{{kStateDim + kNumActions, kHidden, 1}, Activation::tanh};
}

NeuralBanditEnv::NeuralBanditEnv(RngStream& env_init)
    : spec_(true_net_spec()), params_(init_fan_in_uniform(spec_, env_init)), init_seed_(env_init.seed()) {}

NeuralBanditEnv::NeuralBanditEnv(ParamVector true_params, std::uint64_t init_seed)
    : spec_(true_net_spec()), params_(std::move(true_params)), init_seed_(init_seed) {
  if (params_.size() != spec_.param_count()) throw std::invalid_argument("NeuralBanditEnv: wrong parameter count");
}

State NeuralBanditEnv::sample_state(RngStream& rng) const {
  std::vector<double> c(kStateDim);
  for (auto& v : c) v = rng.uniform(-1.0, 1.0);
  return State(std::move(c));
}

double NeuralBanditEnv::true_reward(const State& s, ActionId a) const {
  const auto x = state_action_input(s, a, kNumActions);
  return forward(spec_, params_, x)[0];
}

ActionTable NeuralBanditEnv::true_reward_table(std::span<const State> states) const {
  MlpTape tape;
  forward_batch(spec_, params_.data(), state_action_inputs(states, kNumActions), tape);
  const auto& y = tape.output();  // 1 x (N*K)
  return Eigen::Map<const Eigen::MatrixXd>(y.data(), kNumActions, static_cast<long>(states.size()));
}

nlohmann::ordered_json NeuralBanditEnv::describe() const {
  nlohmann::ordered_json j;
  j["kind"] = "neural";
  j["state_dim"] = kStateDim;
  j["num_actions"] = kNumActions;
  j["state_box"] = {state_low(), state_high()};
  j["true_net"] = {{"layer_sizes", spec_.layer_sizes}, {"activation", to_string(spec_.activation)},
                   {"init", "uniform_fan_in"}, {"env_init_seed", init_seed_}};
  return j;
}

std::vector<double> state_action_input(const State& s, ActionId a, int num_actions) {
  std::vector<double> x(s.coords);
  x.resize(s.coords.size() + static_cast<std::size_t>(num_actions), 0.0);
  x[s.coords.size() + static_cast<std::size_t>(a.index)] = 1.0;
  return x;
}

Eigen::MatrixXd state_action_inputs(std::span<const State> states, int num_actions) {
  if (states.empty()) return Eigen::MatrixXd();
  const long d = static_cast<long>(states.front().dim());
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(d + num_actions, static_cast<long>(states.size()) * num_actions);
  for (std::size_t j = 0; j < states.size(); ++j) {
    for (int a = 0; a < num_actions; ++a) {
      const long col = static_cast<long>(j) * num_actions + a;
      for (long i = 0; i < d; ++i) x(i, col) = states[j].coords[static_cast<std::size_t>(i)];
      x(d + a, col) = 1.0;
    }
  }
  return x;
}

PreferenceTriple label_pair(const Environment& env, const State& s, ActionId a, ActionId a_prime, RngStream& rng) {
  const double p = sigmoid(env.true_reward(s, a) - env.true_reward(s, a_prime));
  const bool a_wins = rng.uniform01() < p;
  return a_wins ? PreferenceTriple{s, a, a_prime} : PreferenceTriple{s, a_prime, a};
}

PreferenceDataset collect_preferences(const Environment& env, int n, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("collect_preferences: n must be >= 1");
  const auto k = static_cast<std::uint64_t>(env.num_actions());
  std::vector<PreferenceTriple> triples;
  triples.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    State s = env.sample_state(rng);
    const auto a = static_cast<int>(rng.uniform_index(k));
    auto b = static_cast<int>(rng.uniform_index(k - 1));
    if (b >= a) ++b;
    triples.push_back(label_pair(env, s, ActionId(a), ActionId(b), rng));
  }
  return PreferenceDataset(std::move(triples));
}

PromptDataset collect_prompts(const Environment& env, int m, RngStream& rng) {
  if (m < 0) throw std::invalid_argument("collect_prompts: m must be >= 0");
  std::vector<State> states;
  states.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) states.push_back(env.sample_state(rng));
  return PromptDataset(std::move(states));
}

}  // namespace prefopt
