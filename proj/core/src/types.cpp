#include "prefopt/types.hpp"

#include <algorithm>
#include <stdexcept>

namespace prefopt {

std::vector<State> PreferenceDataset::states() const {
  std::vector<State> out;
  out.reserve(triples_.size());
  for (const auto& t : triples_) out.push_back(t.state);
  return out;
}

PromptDataset PromptDataset::prefix(std::size_t k) const {
  if (k > states_.size()) {
    throw std::out_of_range("prompt prefix larger than dataset");
  }
  return PromptDataset(std::vector<State>(states_.begin(), states_.begin() + static_cast<long>(k)));
}

DatasetReport validate_dataset(const PreferenceDataset& d, int num_actions) {
  DatasetReport report;
  if (d.empty()) {
    report.violations.push_back({-1, "dataset is empty (n >= 1 required)"});
    return report;
  }
  for (std::size_t i = 0; i < d.n(); ++i) {
    const auto& t = d[i];
    const long idx = static_cast<long>(i);
    auto in_range = [num_actions](ActionId a) { return a.index >= 0 && a.index < num_actions; };
    if (!in_range(t.winner)) {
      report.violations.push_back({idx, "winner index " + std::to_string(t.winner.index) + " out of range"});
    }
    if (!in_range(t.loser)) {
      report.violations.push_back({idx, "loser index " + std::to_string(t.loser.index) + " out of range"});
    }
    if (t.winner == t.loser) {
      report.violations.push_back({idx, "winner equals loser"});
    }
  }
  return report;
}

}  // namespace prefopt
