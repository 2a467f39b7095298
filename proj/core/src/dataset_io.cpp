#include "prefopt/dataset_io.hpp"

#include <fstream>

#include "prefopt/errors.hpp"

namespace prefopt {

nlohmann::ordered_json to_json(const PreferenceDataset& d) {
  nlohmann::ordered_json j;
  j["n"] = d.n();
  auto triples = nlohmann::ordered_json::array();
  for (const auto& t : d.triples()) {
    nlohmann::ordered_json row;
    row["s"] = t.state.coords;
    row["w"] = t.winner.index;
    row["l"] = t.loser.index;
    triples.push_back(std::move(row));
  }
  j["triples"] = std::move(triples);
  return j;
}

nlohmann::ordered_json to_json(const PromptDataset& p) {
  nlohmann::ordered_json j;
  j["m"] = p.m();
  auto states = nlohmann::ordered_json::array();
  for (const auto& s : p.states()) states.push_back(s.coords);
  j["states"] = std::move(states);
  return j;
}

PreferenceDataset preference_dataset_from_json(const nlohmann::json& j) {
  if (!j.contains("n") || !j.contains("triples")) {
    throw Error("preference dataset JSON needs \"n\" and \"triples\"");
  }
  std::vector<PreferenceTriple> triples;
  for (const auto& row : j.at("triples")) {
    PreferenceTriple t;
    t.state = State(row.at("s").get<std::vector<double>>());
    t.winner = ActionId(row.at("w").get<int>());
    t.loser = ActionId(row.at("l").get<int>());
    triples.push_back(std::move(t));
  }
  const auto n = j.at("n").get<long>();
  if (n < 0 || static_cast<std::size_t>(n) != triples.size()) {
    throw Error("preference dataset JSON: n = " + std::to_string(n) + " but " +
                std::to_string(triples.size()) + " triples");
  }
  return PreferenceDataset(std::move(triples));
}

PromptDataset prompt_dataset_from_json(const nlohmann::json& j) {
  if (!j.contains("m") || !j.contains("states")) {
    throw Error("prompt dataset JSON needs \"m\" and \"states\"");
  }
  std::vector<State> states;
  for (const auto& row : j.at("states")) states.emplace_back(row.get<std::vector<double>>());
  const auto m = j.at("m").get<long>();
  if (m < 0 || static_cast<std::size_t>(m) != states.size()) {
    throw Error("prompt dataset JSON: m = " + std::to_string(m) + " but " +
                std::to_string(states.size()) + " states");
  }
  return PromptDataset(std::move(states));
}

void save_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

nlohmann::json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  return nlohmann::json::parse(in);
}

}  // namespace prefopt
