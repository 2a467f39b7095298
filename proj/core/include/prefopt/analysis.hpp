#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "prefopt/rng.hpp"

namespace prefopt {

// Policies, rewards and state distributions over a finite S x A problem.
// Matrices are S x A; a policy row is the action distribution at a state.
struct TabularInstance {
  int S = 0;
  int A = 0;
  std::vector<double> rho;
  std::vector<double> rho_hat;
  Eigen::MatrixXd r;
  Eigen::MatrixXd r_hat;

  // Throws std::invalid_argument on inconsistent shapes, off-simplex
  // distributions, or true rewards outside [0, 1].
  void validate() const;
};

struct ObservedPair {
  int state = 0;
  int a = 0;
  int b = 0;

  bool operator==(const ObservedPair&) const = default;
};

enum class OffSupportRule { adversarial_on_r, uniform };

std::string to_string(OffSupportRule r);

// States with rho_hat > 0.
std::vector<int> support_of(const std::vector<double>& rho_hat);

// Greedy on r_hat at supported states (ties to the lowest index). Off
// support: argmin of the true reward `r`, or uniform.
Eigen::MatrixXd solve_tabular_greedy(const Eigen::MatrixXd& r_hat, const std::vector<int>& support,
                                     OffSupportRule rule, const Eigen::MatrixXd& r);

// At observed states, greedy on count(a) * r_hat(s, a) over actions appearing
// in that state's pairs (for one pair: the member with larger r_hat).
// Other states follow the off-support rule.
Eigen::MatrixXd solve_tabular_rmf(const Eigen::MatrixXd& r_hat, const std::vector<ObservedPair>& pairs,
                                  OffSupportRule rule, const Eigen::MatrixXd& r);

// sum_s w(s) sum_a pi(a|s) f(s, a).
double tabular_value(const std::vector<double>& w, const Eigen::MatrixXd& pi, const Eigen::MatrixXd& f);

// Mean over pairs of sum_{a in pair} pi(a|s) r_hat(s, a).
double pair_estimate(const std::vector<ObservedPair>& pairs, const Eigen::MatrixXd& pi, const Eigen::MatrixXd& r_hat);

double total_variation(const std::vector<double>& p, const std::vector<double>& q);

struct ErrorTerms {
  double eps_r = 0.0;
  double eps_s = 0.0;
  double eps_a_star = 0.0;
  double eps_a_hat = 0.0;
};

// eps_a_pi: max over observed states of |E_pi[r_hat] - mean over that
// state's pairs of sum_{a in pair} pi(a|s) r_hat(s, a)|.
ErrorTerms compute_error_terms(const TabularInstance& inst, const std::vector<ObservedPair>& pairs,
                               const Eigen::MatrixXd& pi_star, const Eigen::MatrixXd& pi_rmf);

struct ChainStep {
  std::string label;
  double lhs = 0.0;
  double rhs = 0.0;
  bool asserted = true;

  bool holds() const noexcept { return lhs <= rhs + 1e-12; }
};

struct Prop1Report {
  double regret_rmb = 0.0;
  double regret_rmf = 0.0;
  double bound_rmb = 0.0;
  double bound_rmf = 0.0;
  ErrorTerms errors;
  std::vector<ChainStep> chain;
  bool bound_holds = true;
  bool holds = true;  // bound and every asserted chain step
};

Prop1Report check_prop1(const TabularInstance& inst, const std::vector<ObservedPair>& pairs,
                        OffSupportRule rule = OffSupportRule::adversarial_on_r);

struct InstanceLimits {
  int max_S = 6;
  int max_A = 5;
  int max_pairs = 4;
  double max_noise = 0.3;
};

struct GeneratedInstance {
  TabularInstance instance;
  std::vector<ObservedPair> pairs;
};

// rho random on the simplex; pair states drawn from rho and rho_hat their
// empirical distribution; pair actions uniform without replacement;
// r uniform on [0, 1]; r_hat = clip(r + U(-eps, eps), 0, 1).
GeneratedInstance random_instance(RngStream& rng, const InstanceLimits& limits = {});

struct Counterexample {
  std::uint64_t index = 0;
  GeneratedInstance instance;
  Prop1Report report;
};

struct CampaignResult {
  std::uint64_t seed = 0;
  std::uint64_t size = 0;
  std::uint64_t bound_violations = 0;
  std::uint64_t chain_violations = 0;
  double max_regret_rmb = 0.0;
  double min_slack_rmb = 0.0;  // min of bound - regret
  std::vector<Counterexample> counterexamples;

  bool ok() const noexcept { return bound_violations == 0 && chain_violations == 0; }
};

// Instances are drawn in sequence from the (seed, data-collection) stream.
CampaignResult run_prop1_campaign(std::uint64_t size, std::uint64_t seed, const InstanceLimits& limits = {},
                                  int jobs = 1);

nlohmann::ordered_json to_json(const TabularInstance& inst, const std::vector<ObservedPair>& pairs);
GeneratedInstance instance_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const Prop1Report& report);
nlohmann::ordered_json to_json(const CampaignResult& result);

}  // namespace prefopt
