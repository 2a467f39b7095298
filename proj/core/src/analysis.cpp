#include "prefopt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <thread>

namespace prefopt {

std::string to_string(OffSupportRule r) {
  return r == OffSupportRule::adversarial_on_r ? "adversarial_on_r" : "uniform";
}

void TabularInstance::validate() const {
  if (S < 1 || A < 1) throw std::invalid_argument("tabular instance: S and A must be >= 1");
  if (rho.size() != static_cast<std::size_t>(S) || rho_hat.size() != static_cast<std::size_t>(S)) {
    throw std::invalid_argument("tabular instance: distribution length must equal S");
  }
  if (r.rows() != S || r.cols() != A || r_hat.rows() != S || r_hat.cols() != A) {
    throw std::invalid_argument("tabular instance: reward matrices must be S x A");
  }
  for (const auto* p : {&rho, &rho_hat}) {
    double sum = 0.0;
    for (double v : *p) {
      if (!(v >= 0.0)) throw std::invalid_argument("tabular instance: negative probability");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("tabular instance: distribution does not sum to 1");
  }
  if ((r.array() < 0.0).any() || (r.array() > 1.0).any()) {
    throw std::invalid_argument("tabular instance: true reward outside [0, 1]");
  }
}

std::vector<int> support_of(const std::vector<double>& rho_hat) {
  std::vector<int> s;
  for (std::size_t i = 0; i < rho_hat.size(); ++i) {
    if (rho_hat[i] > 0.0) s.push_back(static_cast<int>(i));
  }
  return s;
}

namespace {

// First index of the maximum (or minimum) over the allowed entries.
int arg_best(const Eigen::MatrixXd& m, int row, const std::vector<bool>& allowed, bool maximize) {
  int best = -1;
  for (int a = 0; a < m.cols(); ++a) {
    if (!allowed[static_cast<std::size_t>(a)]) continue;
    if (best < 0 || (maximize ? m(row, a) > m(row, best) : m(row, a) < m(row, best))) best = a;
  }
  return best;
}

void fill_off_support(Eigen::MatrixXd& pi, int s, OffSupportRule rule, const Eigen::MatrixXd& r) {
  if (rule == OffSupportRule::uniform) {
    pi.row(s).setConstant(1.0 / static_cast<double>(pi.cols()));
    return;
  }
  const std::vector<bool> all(static_cast<std::size_t>(pi.cols()), true);
  pi(s, arg_best(r, s, all, false)) = 1.0;
}

}  // namespace

Eigen::MatrixXd solve_tabular_greedy(const Eigen::MatrixXd& r_hat, const std::vector<int>& support,
                                     OffSupportRule rule, const Eigen::MatrixXd& r) {
  if (support.empty()) throw std::invalid_argument("solve_tabular_greedy: empty support");
  const int S = static_cast<int>(r_hat.rows());
  Eigen::MatrixXd pi = Eigen::MatrixXd::Zero(S, r_hat.cols());
  std::vector<bool> on(static_cast<std::size_t>(S), false);
  for (int s : support) on[static_cast<std::size_t>(s)] = true;
  const std::vector<bool> all(static_cast<std::size_t>(r_hat.cols()), true);
  for (int s = 0; s < S; ++s) {
    if (on[static_cast<std::size_t>(s)]) {
      pi(s, arg_best(r_hat, s, all, true)) = 1.0;
    } else {
      fill_off_support(pi, s, rule, r);
    }
  }
  return pi;
}

Eigen::MatrixXd solve_tabular_rmf(const Eigen::MatrixXd& r_hat, const std::vector<ObservedPair>& pairs,
                                  OffSupportRule rule, const Eigen::MatrixXd& r) {
  const int S = static_cast<int>(r_hat.rows());
  const int A = static_cast<int>(r_hat.cols());
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(S, A);
  for (const auto& p : pairs) {
    counts(p.state, p.a) += 1.0;
    counts(p.state, p.b) += 1.0;
  }
  const Eigen::MatrixXd weighted = counts.cwiseProduct(r_hat);
  Eigen::MatrixXd pi = Eigen::MatrixXd::Zero(S, A);
  for (int s = 0; s < S; ++s) {
    std::vector<bool> allowed(static_cast<std::size_t>(A));
    bool observed = false;
    for (int a = 0; a < A; ++a) {
      allowed[static_cast<std::size_t>(a)] = counts(s, a) > 0.0;
      observed = observed || counts(s, a) > 0.0;
    }
    if (observed) {
      pi(s, arg_best(weighted, s, allowed, true)) = 1.0;
    } else {
      fill_off_support(pi, s, rule, r);
    }
  }
  return pi;
}

double tabular_value(const std::vector<double>& w, const Eigen::MatrixXd& pi, const Eigen::MatrixXd& f) {
  double v = 0.0;
  for (long s = 0; s < pi.rows(); ++s) v += w[static_cast<std::size_t>(s)] * pi.row(s).dot(f.row(s));
  return v;
}

double pair_estimate(const std::vector<ObservedPair>& pairs, const Eigen::MatrixXd& pi, const Eigen::MatrixXd& r_hat) {
  if (pairs.empty()) return 0.0;
  double v = 0.0;
  for (const auto& p : pairs) {
    v += pi(p.state, p.a) * r_hat(p.state, p.a) + pi(p.state, p.b) * r_hat(p.state, p.b);
  }
  return v / static_cast<double>(pairs.size());
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw std::invalid_argument("total_variation: length mismatch");
  double t = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) t += std::abs(p[i] - q[i]);
  return 0.5 * t;
}

namespace {

double action_error(const std::vector<ObservedPair>& pairs, const Eigen::MatrixXd& pi, const Eigen::MatrixXd& r_hat) {
  std::map<int, std::vector<ObservedPair>> by_state;
  for (const auto& p : pairs) by_state[p.state].push_back(p);
  double worst = 0.0;
  for (const auto& [s, ps] : by_state) {
    const double exact = pi.row(s).dot(r_hat.row(s));
    worst = std::max(worst, std::abs(exact - pair_estimate(ps, pi, r_hat)));
  }
  return worst;
}

}  // namespace

ErrorTerms compute_error_terms(const TabularInstance& inst, const std::vector<ObservedPair>& pairs,
                               const Eigen::MatrixXd& pi_star, const Eigen::MatrixXd& pi_rmf) {
  ErrorTerms e;
  e.eps_r = (inst.r_hat - inst.r).cwiseAbs().maxCoeff();
  e.eps_s = total_variation(inst.rho, inst.rho_hat);
  e.eps_a_star = action_error(pairs, pi_star, inst.r_hat);
  e.eps_a_hat = action_error(pairs, pi_rmf, inst.r_hat);
  return e;
}

Prop1Report check_prop1(const TabularInstance& inst, const std::vector<ObservedPair>& pairs, OffSupportRule rule) {
  inst.validate();
  const std::vector<int> all_states = [&] {
    std::vector<int> v(static_cast<std::size_t>(inst.S));
    for (int s = 0; s < inst.S; ++s) v[static_cast<std::size_t>(s)] = s;
    return v;
  }();
  const Eigen::MatrixXd pi_star = solve_tabular_greedy(inst.r, all_states, rule, inst.r);
  const Eigen::MatrixXd pi_rmb = solve_tabular_greedy(inst.r_hat, support_of(inst.rho_hat), rule, inst.r);
  const Eigen::MatrixXd pi_rmf = solve_tabular_rmf(inst.r_hat, pairs, rule, inst.r);

  Prop1Report rep;
  rep.errors = compute_error_terms(inst, pairs, pi_star, pi_rmf);
  const auto& e = rep.errors;
  const auto& rho = inst.rho;
  const auto& rho_hat = inst.rho_hat;
  const double v_star = tabular_value(rho, pi_star, inst.r);
  rep.regret_rmb = v_star - tabular_value(rho, pi_rmb, inst.r);
  rep.regret_rmf = v_star - tabular_value(rho, pi_rmf, inst.r);
  rep.bound_rmb = 2.0 * e.eps_r + 2.0 * e.eps_s;
  rep.bound_rmf = rep.bound_rmb + e.eps_a_star + e.eps_a_hat;

  auto add = [&](std::string label, double lhs, double rhs, bool asserted) {
    rep.chain.push_back({std::move(label), lhs, rhs, asserted});
  };
  auto chain_for = [&](const Eigen::MatrixXd& pi_hat, const std::string& tag, bool asserted) {
    add(tag + ".reward_star", tabular_value(rho, pi_star, inst.r) - tabular_value(rho, pi_star, inst.r_hat), e.eps_r,
        asserted);
    add(tag + ".reward_hat", tabular_value(rho, pi_hat, inst.r_hat) - tabular_value(rho, pi_hat, inst.r), e.eps_r,
        asserted);
    add(tag + ".state_star", tabular_value(rho, pi_star, inst.r_hat) - tabular_value(rho_hat, pi_star, inst.r_hat),
        e.eps_s, asserted);
    add(tag + ".state_hat", tabular_value(rho_hat, pi_hat, inst.r_hat) - tabular_value(rho, pi_hat, inst.r_hat),
        e.eps_s, asserted);
  };

  chain_for(pi_rmb, "rmb", true);
  add("rmb.empirical_optimality",
      tabular_value(rho_hat, pi_star, inst.r_hat) - tabular_value(rho_hat, pi_rmb, inst.r_hat), 0.0, true);

  chain_for(pi_rmf, "rmf", false);
  const double emp_gap_rmf = tabular_value(rho_hat, pi_star, inst.r_hat) - tabular_value(rho_hat, pi_rmf, inst.r_hat);
  add("rmf.proof_3", rep.regret_rmf, rep.bound_rmb + emp_gap_rmf, false);
  add("rmf.action_star", tabular_value(rho_hat, pi_star, inst.r_hat) - pair_estimate(pairs, pi_star, inst.r_hat),
      e.eps_a_star, false);
  add("rmf.empirical_optimality", pair_estimate(pairs, pi_star, inst.r_hat) - pair_estimate(pairs, pi_rmf, inst.r_hat),
      0.0, false);
  add("rmf.action_hat", pair_estimate(pairs, pi_rmf, inst.r_hat) - tabular_value(rho_hat, pi_rmf, inst.r_hat),
      e.eps_a_hat, false);

  rep.bound_holds = rep.regret_rmb <= rep.bound_rmb + 1e-12;
  rep.holds = rep.bound_holds;
  for (const auto& c : rep.chain) {
    if (c.asserted && !c.holds()) rep.holds = false;
  }
  return rep;
}

GeneratedInstance random_instance(RngStream& rng, const InstanceLimits& limits) {
  if (limits.max_S < 1 || limits.max_A < 2 || limits.max_pairs < 1) {
    throw std::invalid_argument("random_instance: need max_S >= 1, max_A >= 2, max_pairs >= 1");
  }
  GeneratedInstance g;
  auto& inst = g.instance;
  inst.S = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(limits.max_S)));
  inst.A = 2 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(limits.max_A - 1)));
  const int n_pairs = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(limits.max_pairs)));

  inst.rho.resize(static_cast<std::size_t>(inst.S));
  double total = 0.0;
  for (auto& v : inst.rho) {
    v = -std::log(1.0 - rng.uniform01());
    total += v;
  }
  for (auto& v : inst.rho) v /= total;

  inst.rho_hat.assign(static_cast<std::size_t>(inst.S), 0.0);
  for (int i = 0; i < n_pairs; ++i) {
    const double u = rng.uniform01();
    int s = 0;
    double c = inst.rho[0];
    while (u >= c && s + 1 < inst.S) c += inst.rho[static_cast<std::size_t>(++s)];
    const int a = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(inst.A)));
    int b = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(inst.A - 1)));
    if (b >= a) ++b;
    g.pairs.push_back({s, a, b});
    inst.rho_hat[static_cast<std::size_t>(s)] += 1.0 / n_pairs;
  }

  const double eps = rng.uniform(0.0, limits.max_noise);
  inst.r.resize(inst.S, inst.A);
  inst.r_hat.resize(inst.S, inst.A);
  for (int s = 0; s < inst.S; ++s) {
    for (int a = 0; a < inst.A; ++a) {
      inst.r(s, a) = rng.uniform01();
      inst.r_hat(s, a) = std::clamp(inst.r(s, a) + rng.uniform(-eps, eps), 0.0, 1.0);
    }
  }
  return g;
}

CampaignResult run_prop1_campaign(std::uint64_t size, std::uint64_t seed, const InstanceLimits& limits, int jobs) {
  if (size < 1) throw std::invalid_argument("campaign size must be >= 1");
  RngStream rng(seed, StreamPurpose::data_collection);
  std::vector<GeneratedInstance> instances;
  instances.reserve(size);
  for (std::uint64_t i = 0; i < size; ++i) instances.push_back(random_instance(rng, limits));

  std::vector<Prop1Report> reports(size);
  const auto workers = static_cast<std::uint64_t>(std::max(1, jobs));
  auto work = [&](std::uint64_t w) {
    for (std::uint64_t i = w; i < size; i += workers) {
      reports[i] = check_prop1(instances[i].instance, instances[i].pairs);
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::uint64_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }

  CampaignResult res;
  res.seed = seed;
  res.size = size;
  res.min_slack_rmb = std::numeric_limits<double>::infinity();
  for (std::uint64_t i = 0; i < size; ++i) {
    const auto& rep = reports[i];
    res.max_regret_rmb = std::max(res.max_regret_rmb, rep.regret_rmb);
    res.min_slack_rmb = std::min(res.min_slack_rmb, rep.bound_rmb - rep.regret_rmb);
    if (!rep.bound_holds) ++res.bound_violations;
    if (rep.bound_holds && !rep.holds) ++res.chain_violations;
    if (!rep.holds) res.counterexamples.push_back({i, instances[i], rep});
  }
  return res;
}

namespace {

nlohmann::ordered_json matrix_json(const Eigen::MatrixXd& m) {
  auto rows = nlohmann::ordered_json::array();
  for (long i = 0; i < m.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (long j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, int rows, int cols) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows) throw std::invalid_argument("matrix: wrong row count");
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<int>(row.size()) != cols) throw std::invalid_argument("matrix: wrong column count");
    for (int k = 0; k < cols; ++k) m(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
  }
  return m;
}

}  // namespace

nlohmann::ordered_json to_json(const TabularInstance& inst, const std::vector<ObservedPair>& pairs) {
  nlohmann::ordered_json j;
  j["S"] = inst.S;
  j["A"] = inst.A;
  j["rho"] = inst.rho;
  j["rho_hat"] = inst.rho_hat;
  j["r"] = matrix_json(inst.r);
  j["r_hat"] = matrix_json(inst.r_hat);
  auto ps = nlohmann::ordered_json::array();
  for (const auto& p : pairs) ps.push_back({p.state, p.a, p.b});
  j["pairs"] = ps;
  return j;
}

GeneratedInstance instance_from_json(const nlohmann::json& j) {
  const auto& src = j.contains("instance") ? j.at("instance") : j;
  GeneratedInstance g;
  auto& inst = g.instance;
  inst.S = src.at("S").get<int>();
  inst.A = src.at("A").get<int>();
  inst.rho = src.at("rho").get<std::vector<double>>();
  inst.rho_hat = src.at("rho_hat").get<std::vector<double>>();
  inst.r = matrix_from_json(src.at("r"), inst.S, inst.A);
  inst.r_hat = matrix_from_json(src.at("r_hat"), inst.S, inst.A);
  for (const auto& p : src.at("pairs")) {
    const ObservedPair op{p.at(0).get<int>(), p.at(1).get<int>(), p.at(2).get<int>()};
    if (op.state < 0 || op.state >= inst.S || op.a < 0 || op.a >= inst.A || op.b < 0 || op.b >= inst.A) {
      throw std::invalid_argument("pair index out of range");
    }
    g.pairs.push_back(op);
  }
  inst.validate();
  return g;
}

nlohmann::ordered_json to_json(const Prop1Report& report) {
  nlohmann::ordered_json j;
  j["regret_rmb"] = report.regret_rmb;
  j["bound_rmb"] = report.bound_rmb;
  j["regret_rmf"] = report.regret_rmf;
  j["bound_rmf"] = report.bound_rmf;
  j["eps_r"] = report.errors.eps_r;
  j["eps_s"] = report.errors.eps_s;
  j["eps_a_star"] = report.errors.eps_a_star;
  j["eps_a_hat"] = report.errors.eps_a_hat;
  j["bound_holds"] = report.bound_holds;
  j["holds"] = report.holds;
  auto chain = nlohmann::ordered_json::array();
  for (const auto& c : report.chain) {
    chain.push_back({{"label", c.label}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"asserted", c.asserted}, {"holds", c.holds()}});
  }
  j["chain"] = chain;
  return j;
}

nlohmann::ordered_json to_json(const CampaignResult& result) {
  nlohmann::ordered_json j;
  j["seed"] = result.seed;
  j["size"] = result.size;
  j["bound_violations"] = result.bound_violations;
  j["chain_violations"] = result.chain_violations;
  j["max_regret_rmb"] = result.max_regret_rmb;
  j["min_slack_rmb"] = result.min_slack_rmb;
  auto cex = nlohmann::ordered_json::array();
  for (const auto& c : result.counterexamples) {
    cex.push_back({{"index", c.index}, {"instance", to_json(c.instance.instance, c.instance.pairs)},
                   {"report", to_json(c.report)}});
  }
  j["counterexamples"] = cex;
  return j;
}

}  // namespace prefopt
