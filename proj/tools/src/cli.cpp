#include "prefopt_cli/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "prefopt/analysis.hpp"
#include "prefopt/config.hpp"
#include "prefopt/dataset_io.hpp"
#include "prefopt/errors.hpp"
#include "prefopt/gradient_suite.hpp"
#include "prefopt/harness.hpp"
#include "prefopt/report.hpp"
#include "prefopt/svg.hpp"

namespace prefopt::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::vector<std::string> sets;
  std::string out = "prefopt_out";
  int jobs = 1;
  std::string m_list;

  std::uint64_t size = 10000;
  int max_S = 6;
  int max_A = 5;
  int max_pairs = 4;
  std::uint64_t seed = 2021;

  int instances = 20;
  std::string fault = "none";

  int grid = 200;
  std::string replay_path;
};

fs::path out_dir(const Options& o) {
  if (const char* env = std::getenv("PREFOPT_OUT"); env && *env) return fs::path(env);
  return fs::path(o.out);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
}

ExperimentConfig load(const Options& o, const std::vector<ConfigOverride>& extra = {}) {
  std::vector<ConfigOverride> overrides;
  for (const auto& s : o.sets) overrides.push_back(parse_override(s));
  overrides.insert(overrides.end(), extra.begin(), extra.end());
  if (o.config.empty()) return parse_config("", overrides);
  return load_config(o.config, overrides);
}

void print_summary(const RunRecord& rec, std::ostream& out) {
  for (const auto& s : rec.summary) {
    out << "method=" << to_string(s.method) << " m=" << s.m << " seeds=" << s.count
        << " trimmed_gap=" << (s.has_trimmed ? format_double(s.trimmed_mean) : "na")
        << " mean_gap=" << format_double(s.mean) << " min_gap=" << format_double(s.min)
        << " max_gap=" << format_double(s.max) << '\n';
  }
  for (const auto& seed : rec.seeds) {
    if (seed.ok() && seed.reward_trained) {
      out << "seed=" << seed.seed << " reward_acc=" << format_double(seed.reward_accuracy) << '\n';
    }
  }
}

int do_run(const Options& o, std::ostream& out, std::ostream& err, const std::vector<ConfigOverride>& extra = {}) {
  const ExperimentConfig cfg = load(o, extra);
  const RunRecord rec = run_experiment(cfg, o.jobs);
  for (const auto& w : rec.warnings) err << "warning: " << w << '\n';
  const fs::path dir = out_dir(o);
  write_run_artifacts(rec, dir);
  print_summary(rec, out);
  out << "artifacts=" << dir.string() << '\n';
  return kExitOk;
}

int do_sweep(const Options& o, std::ostream& out, std::ostream& err) {
  std::vector<ConfigOverride> extra;
  if (!o.m_list.empty()) extra.push_back({"m", o.m_list});
  return do_run(o, out, err, extra);
}

int do_prop1(const Options& o, std::ostream& out) {
  if (o.size < 1) throw ConfigError("size", 0, "campaign size must be >= 1");
  InstanceLimits limits;
  limits.max_S = o.max_S;
  limits.max_A = o.max_A;
  limits.max_pairs = o.max_pairs;
  const CampaignResult res = run_prop1_campaign(o.size, o.seed, limits, o.jobs);
  const fs::path dir = out_dir(o);
  fs::create_directories(dir);
  save_json(dir / "prop1_campaign.json", to_json(res));
  for (const auto& c : res.counterexamples) {
    nlohmann::ordered_json j;
    j["index"] = c.index;
    j["instance"] = to_json(c.instance.instance, c.instance.pairs);
    j["report"] = to_json(c.report);
    save_json(dir / ("counterexample_" + std::to_string(c.index) + ".json"), j);
  }
  out << "instances=" << res.size << " seed=" << res.seed << " bound_violations=" << res.bound_violations
      << " chain_violations=" << res.chain_violations << " max_regret_rmb=" << format_double(res.max_regret_rmb)
      << " min_slack_rmb=" << format_double(res.min_slack_rmb) << '\n';
  out << (res.ok() ? "PASS" : "FAIL") << '\n';
  return res.ok() ? kExitOk : kExitFailure;
}

int do_gradcheck(const Options& o, std::ostream& out) {
  FaultInjection fault = FaultInjection::none;
  if (o.fault == "dpo_sign") {
    fault = FaultInjection::dpo_sign;
  } else if (o.fault != "none") {
    throw ConfigError("inject-fault", 0, "unknown fault '" + o.fault + "'");
  }
  const auto rep = run_gradient_suite(o.seed, o.instances, 1e-4, fault);
  for (const auto& line : format_report(rep)) out << line << '\n';
  out << (rep.passed() ? "PASS" : "FAIL") << '\n';
  return rep.passed() ? kExitOk : kExitFailure;
}

int do_profile(const Options& o, std::ostream& out) {
  ExperimentConfig cfg = load(o);
  if (!is_linear(cfg.env)) throw ConfigError("env", 0, "profile needs a linear environment");
  cfg.seeds = {static_cast<std::int64_t>(o.seed)};
  cfg.profile_grid = o.grid;
  cfg.validate();
  RunRecord rec;
  rec.config = cfg;
  rec.seeds.push_back(run_seed(cfg, cfg.seeds.front()));
  const fs::path dir = out_dir(o);
  fs::create_directories(dir);
  LinearBanditEnv env;
  const auto xs = profile_grid(env, cfg.profile_grid);
  std::ostringstream csv;
  csv << "method,m,state";
  for (int a = 0; a < env.num_actions(); ++a) csv << ",p" << a;
  csv << '\n';
  for (const auto& r : rec.seeds.front().methods) {
    for (long i = 0; i < r.profile.rows(); ++i) {
      csv << to_string(r.method) << ',' << r.m << ',' << format_double(xs[static_cast<std::size_t>(i)]);
      for (long a = 0; a < r.profile.cols(); ++a) csv << ',' << format_double(r.profile(i, a));
      csv << '\n';
    }
  }
  write_file(dir / "action_profile.csv", csv.str());
  std::ostringstream states;
  states << "state\n";
  for (const auto& s : rec.seeds.front().pref_states) states << format_double(s[0]) << '\n';
  write_file(dir / "pref_states.csv", states.str());
  emit_figures(rec, dir);
  out << "seed=" << o.seed << " grid=" << cfg.profile_grid << " profile=" << (dir / "action_profile.csv").string()
      << '\n';
  return kExitOk;
}

int do_replay(const Options& o, std::ostream& out, std::ostream& err) {
  const fs::path src(o.replay_path);
  if (fs::is_directory(src)) {
    Options again = o;
    again.config = (src / "config.cfg").string();
    again.sets.clear();
    const ExperimentConfig cfg = load(again);
    const RunRecord rec = run_experiment(cfg, o.jobs);
    const std::string fresh = results_csv(rec);
    const std::string stored = read_file(src / "results.csv");
    const fs::path dir = out_dir(o);
    write_run_artifacts(rec, dir);
    const bool same = fresh == stored;
    out << "replay=" << src.string() << " results_identical=" << (same ? "true" : "false") << '\n';
    if (!same) err << "replayed results.csv differs from " << (src / "results.csv").string() << '\n';
    return same ? kExitOk : kExitFailure;
  }
  const auto j = load_json(src);
  const auto g = instance_from_json(j);
  const auto rep = check_prop1(g.instance, g.pairs);
  out << to_json(rep).dump() << '\n';
  if (j.contains("report") && j.at("report") != nlohmann::json::parse(to_json(rep).dump())) {
    err << "replayed report differs from the stored report\n";
    return kExitFailure;
  }
  return rep.holds ? kExitOk : kExitFailure;
}

void add_run_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--config,-c", o.config, "Config file (sectioned key = value)");
  cmd->add_option("--set", o.sets, "Override a config key: key=value (repeatable)");
  cmd->add_option("--out,-o", o.out, "Output directory (PREFOPT_OUT takes precedence)");
  cmd->add_option("--jobs,-j", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Preference-based policy optimization experiments"};
  app.name("prefopt");
  app.require_subcommand(1);
  Options o;

  auto* run = app.add_subcommand("run", "Run an experiment and write results, summaries and figures");
  add_run_options(run, o);

  auto* sweep = app.add_subcommand("sweep", "Run an experiment over several prompt-set sizes");
  add_run_options(sweep, o);
  sweep->add_option("--m", o.m_list, "Comma-separated prompt-set sizes");

  auto* prop1 = app.add_subcommand("prop1", "Brute-force check of the regret bound on random tabular instances");
  prop1->add_option("--size", o.size, "Number of instances");
  prop1->add_option("--max-S", o.max_S, "Largest state count")->check(CLI::PositiveNumber);
  prop1->add_option("--max-A", o.max_A, "Largest action count")->check(CLI::Range(2, 1000));
  prop1->add_option("--max-pairs", o.max_pairs, "Largest number of observed pairs")->check(CLI::PositiveNumber);
  prop1->add_option("--seed", o.seed, "Campaign seed");
  prop1->add_option("--out,-o", o.out, "Output directory (PREFOPT_OUT takes precedence)");
  prop1->add_option("--jobs,-j", o.jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* grad = app.add_subcommand("gradcheck", "Finite-difference check of every analytic gradient");
  grad->add_option("--seed", o.seed, "Instance seed");
  grad->add_option("--instances", o.instances, "Instances per operation")->check(CLI::PositiveNumber);
  grad->add_option("--inject-fault", o.fault)->group("");

  auto* profile = app.add_subcommand("profile", "Action probabilities over the state interval for one seed");
  add_run_options(profile, o);
  profile->add_option("--seed", o.seed, "Seed");
  profile->add_option("--grid", o.grid, "Grid points")->check(CLI::Range(2, 1000000));

  auto* replay = app.add_subcommand("replay", "Re-run an artifact directory or a serialized tabular instance");
  replay->add_option("path", o.replay_path, "Artifact directory or instance JSON")->required();
  replay->add_option("--out,-o", o.out, "Output directory for a re-run (PREFOPT_OUT takes precedence)");
  replay->add_option("--jobs,-j", o.jobs, "Worker threads")->check(CLI::PositiveNumber);

  std::vector<const char*> argv{"prefopt"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*run) return do_run(o, out, err);
    if (*sweep) return do_sweep(o, out, err);
    if (*prop1) return do_prop1(o, out);
    if (*grad) return do_gradcheck(o, out);
    if (*profile) return do_profile(o, out);
    if (*replay) return do_replay(o, out, err);
  } catch (const ConfigError& e) {
    err << "config error";
    if (!e.key().empty()) err << " [key " << e.key() << "]";
    if (e.line() > 0) err << " [line " << e.line() << "]";
    err << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace prefopt::cli
