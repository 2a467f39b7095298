#include "prefopt/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "prefopt/dataset_io.hpp"
#include "prefopt/errors.hpp"
#include "prefopt/param_io.hpp"
#include "prefopt/svg.hpp"

namespace prefopt {

namespace fs = std::filesystem;

std::string cell_label(Method method, int m) {
  if (method == Method::rmb_po_plus) return to_string(method) + "@m=" + std::to_string(m);
  return to_string(method);
}

std::string results_csv(const RunRecord& record) {
  const auto& cfg = record.config;
  std::ostringstream out;
  out << "env,method,seed,n,m,beta,reward_acc,r_star,r_pi,gap\n";
  for (const auto& seed : record.seeds) {
    if (!seed.ok()) continue;
    for (const auto& r : seed.methods) {
      out << to_string(cfg.env) << ',' << to_string(r.method) << ',' << seed.seed << ',' << cfg.n << ',' << r.m << ','
          << format_double(cfg.policy.beta) << ',' << (seed.reward_trained ? format_double(seed.reward_accuracy) : "")
          << ',' << format_double(r.report.r_star) << ',' << format_double(r.report.r_pi) << ','
          << format_double(r.report.gap) << '\n';
    }
  }
  return out.str();
}

std::string summary_csv(const RunRecord& record) {
  std::ostringstream out;
  out << "env,method,m,count,trimmed_mean,mean,min,max\n";
  for (const auto& s : record.summary) {
    out << to_string(record.config.env) << ',' << to_string(s.method) << ',' << s.m << ',' << s.count << ','
        << (s.has_trimmed ? format_double(s.trimmed_mean) : "") << ',' << format_double(s.mean) << ','
        << format_double(s.min) << ',' << format_double(s.max) << '\n';
  }
  return out.str();
}

nlohmann::ordered_json summary_json(const RunRecord& record) {
  nlohmann::ordered_json j;
  j["config"] = to_json(record.config);
  auto methods = nlohmann::ordered_json::array();
  for (const auto& s : record.summary) {
    nlohmann::ordered_json e;
    e["method"] = to_string(s.method);
    e["m"] = s.m;
    e["count"] = s.count;
    e["trimmed_mean"] = s.has_trimmed ? nlohmann::ordered_json(s.trimmed_mean) : nlohmann::ordered_json(nullptr);
    e["mean"] = s.mean;
    e["min"] = s.min;
    e["max"] = s.max;
    methods.push_back(e);
  }
  j["methods"] = methods;
  auto seeds = nlohmann::ordered_json::array();
  for (const auto& s : record.seeds) {
    nlohmann::ordered_json e;
    e["seed"] = s.seed;
    e["ok"] = s.ok();
    if (!s.ok()) e["error"] = s.error;
    e["reward_trained"] = s.reward_trained;
    if (s.reward_trained) {
      e["reward_accuracy"] = s.reward_accuracy;
      e["reward_iterations"] = s.reward_diagnostics.iterations;
      e["reward_warning"] = s.reward_diagnostics.warning;
    }
    e["stages"] = s.stage_log;
    auto cells = nlohmann::ordered_json::array();
    for (const auto& r : s.methods) {
      cells.push_back({{"method", to_string(r.method)},
                       {"m", r.m},
                       {"gap", r.report.gap},
                       {"steps", r.steps},
                       {"converged", r.converged}});
    }
    e["cells"] = cells;
    seeds.push_back(e);
  }
  j["seeds"] = seeds;
  j["warnings"] = record.warnings;
  return j;
}

std::string timings_csv(const RunRecord& record) {
  std::ostringstream out;
  out << "seed,stage,seconds\n";
  for (const auto& s : record.seeds) {
    for (const auto& t : s.timings) out << s.seed << ',' << t.stage << ',' << t.seconds << '\n';
  }
  return out.str();
}

std::string trace_csv(const std::vector<TracePoint>& trace) {
  std::ostringstream out;
  out << "step,value,grad_norm\n";
  for (const auto& p : trace) out << p.step << ',' << format_double(p.value) << ',' << format_double(p.grad_norm) << '\n';
  return out.str();
}

namespace {

void write_text(const fs::path& path, const std::string& text, std::vector<fs::path>& written) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
  written.push_back(path);
}

std::string file_stem(Method method, int m) {
  return method == Method::rmb_po_plus ? to_string(method) + "_m" + std::to_string(m) : to_string(method);
}

}  // namespace

std::vector<fs::path> emit_figures(const RunRecord& record, const fs::path& dir) {
  std::vector<fs::path> written;
  fs::create_directories(dir);
  const auto& cfg = record.config;

  std::vector<std::string> labels;
  std::vector<double> values;
  for (const auto& s : record.summary) {
    if (s.count == 0) continue;
    labels.push_back(cell_label(s.method, s.m));
    values.push_back(s.has_trimmed ? s.trimmed_mean : s.mean);
  }
  write_text(dir / "gaps_bar.svg",
             svg::bar_chart("Optimality gap (" + to_string(cfg.env) + ")",
                            record.seeds.size() >= 3 ? "trimmed-mean gap" : "mean gap", labels, values),
             written);

  if (cfg.has_method(Method::rmb_po_plus)) {
    std::vector<svg::Series> series;
    std::vector<int> ms = cfg.m_values;
    std::sort(ms.begin(), ms.end());
    for (Method method : all_methods()) {
      if (!cfg.has_method(method)) continue;
      svg::Series s{to_string(method), {}, {}};
      for (int m : ms) {
        const auto* sum = record.find(method, method == Method::rmb_po_plus ? m : 0);
        if (!sum || sum->count == 0) continue;
        s.x.push_back(m);
        s.y.push_back(sum->has_trimmed ? sum->trimmed_mean : sum->mean);
      }
      series.push_back(std::move(s));
    }
    write_text(dir / "gap_vs_m.svg",
               svg::line_chart("Optimality gap vs. preference-free data size", "m", "gap", series), written);
  }

  if (is_linear(cfg.env)) {
    const SeedResult* seed = nullptr;
    for (const auto& s : record.seeds) {
      if (s.ok()) {
        seed = &s;
        break;
      }
    }
    if (seed && !seed->methods.empty()) {
      LinearBanditEnv env;
      const auto grid = profile_grid(env, cfg.profile_grid);
      const long K = seed->methods.front().profile.cols();
      std::vector<svg::Panel> panels(static_cast<std::size_t>(K));
      for (long a = 0; a < K; ++a) panels[static_cast<std::size_t>(a)].title = "a" + std::to_string(a);
      for (const auto& r : seed->methods) {
        for (long i = 0; i < r.profile.rows(); ++i) {
          if (std::abs(r.profile.row(i).sum() - 1.0) > 1e-9) {
            throw Error("action profile row " + std::to_string(i) + " does not sum to 1");
          }
        }
        for (long a = 0; a < K; ++a) {
          svg::Series s{cell_label(r.method, r.m), grid, {}};
          for (long i = 0; i < r.profile.rows(); ++i) s.y.push_back(r.profile(i, a));
          panels[static_cast<std::size_t>(a)].series.push_back(std::move(s));
        }
      }
      std::vector<double> markers;
      for (const auto& st : seed->pref_states) markers.push_back(st[0]);
      write_text(dir / "action_profile.svg",
                 svg::panel_chart("Action probabilities (seed " + std::to_string(seed->seed) + ")", "state", panels,
                                  env.state_low(), env.state_high(), markers),
                 written);
    }
  }
  return written;
}

std::vector<fs::path> write_run_artifacts(const RunRecord& record, const fs::path& dir) {
  std::vector<fs::path> written;
  fs::create_directories(dir / "traces");
  fs::create_directories(dir / "models");
  write_text(dir / "config.cfg", to_config_text(record.config), written);
  write_text(dir / "results.csv", results_csv(record), written);
  write_text(dir / "summary.csv", summary_csv(record), written);
  write_text(dir / "summary.json", summary_json(record).dump(2) + "\n", written);
  write_text(dir / "timings.csv", timings_csv(record), written);
  const std::string kind = is_linear(record.config.env) ? "linear_softmax" : "mlp_softmax";
  for (const auto& seed : record.seeds) {
    if (!seed.ok()) continue;
    const std::string suffix = "_seed" + std::to_string(seed.seed);
    if (seed.reward_trained) {
      const fs::path p = dir / "models" / ("reward" + suffix + ".params");
      save_params(p, seed.reward_params,
                  {{"kind", is_linear(record.config.env) ? "linear_reward" : "mlp_reward"}});
      written.push_back(p);
      if (!seed.reward_diagnostics.loss_trace.empty()) {
        std::ostringstream curve;
        curve << "step,loss\n";
        const auto& trace = seed.reward_diagnostics.loss_trace;
        for (std::size_t i = 0; i < trace.size(); ++i) curve << i << ',' << format_double(trace[i]) << '\n';
        write_text(dir / "traces" / ("reward" + suffix + ".csv"), curve.str(), written);
      }
    }
    for (const auto& r : seed.methods) {
      const std::string stem = file_stem(r.method, r.m) + suffix;
      if (!r.trace.empty()) write_text(dir / "traces" / (stem + ".csv"), trace_csv(r.trace), written);
      const fs::path p = dir / "models" / (stem + ".params");
      save_params(p, r.policy_params, {{"kind", kind}, {"method", to_string(r.method)}, {"m", r.m}});
      written.push_back(p);
    }
  }
  for (auto& p : emit_figures(record, dir / "figures")) written.push_back(std::move(p));
  return written;
}

}  // namespace prefopt
