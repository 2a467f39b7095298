#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "prefopt/harness.hpp"

namespace prefopt {

// Label of a (method, m) cell: "rmb_po_plus@m=200" for prompt-consuming
// cells, the method name otherwise.
std::string cell_label(Method method, int m);

// env, method, seed, n, m, beta, reward_acc, r_star, r_pi, gap
std::string results_csv(const RunRecord& record);
// env, method, m, count, trimmed_mean, mean, min, max
std::string summary_csv(const RunRecord& record);
nlohmann::ordered_json summary_json(const RunRecord& record);
std::string timings_csv(const RunRecord& record);
std::string trace_csv(const std::vector<TracePoint>& trace);

// gaps_bar.svg, gap_vs_m.svg (when rmb_po_plus ran) and, for linear
// environments, action_profile.svg from the first completed seed. Throws
// prefopt::Error if a profile row does not sum to 1.
std::vector<std::filesystem::path> emit_figures(const RunRecord& record, const std::filesystem::path& dir);

// results.csv, summary.csv, summary.json, timings.csv, config.cfg,
// traces/, models/, figures/. Returns the files written.
std::vector<std::filesystem::path> write_run_artifacts(const RunRecord& record, const std::filesystem::path& dir);

}  // namespace prefopt
