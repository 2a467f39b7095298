#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <vector>

namespace prefopt {

// A prompt. One coordinate in [0,1] for the linear bandit, fifty in [-1,1]
// for the neural bandit.
struct State {
  std::vector<double> coords;

  State() = default;
  explicit State(std::vector<double> c) : coords(std::move(c)) {}
  State(std::initializer_list<double> c) : coords(c) {}

  std::size_t dim() const noexcept { return coords.size(); }
  double operator[](std::size_t i) const { return coords[i]; }

  bool operator==(const State&) const = default;
};

// A response index in [0, K).
struct ActionId {
  int index = 0;

  constexpr ActionId() = default;
  constexpr explicit ActionId(int i) : index(i) {}

  auto operator<=>(const ActionId&) const = default;
};

struct PreferenceTriple {
  State state;
  ActionId winner;
  ActionId loser;
};

// Preference data of size n. Construction never yields a count that
// disagrees with the stored triples; validity against an action count is
// checked separately by validate_dataset.
class PreferenceDataset {
 public:
  PreferenceDataset() = default;
  explicit PreferenceDataset(std::vector<PreferenceTriple> triples)
      : triples_(std::move(triples)) {}

  std::size_t n() const noexcept { return triples_.size(); }
  bool empty() const noexcept { return triples_.empty(); }
  const std::vector<PreferenceTriple>& triples() const noexcept { return triples_; }
  const PreferenceTriple& operator[](std::size_t i) const { return triples_[i]; }

  std::vector<State> states() const;

 private:
  std::vector<PreferenceTriple> triples_;
};

// States without actions or labels.
class PromptDataset {
 public:
  PromptDataset() = default;
  explicit PromptDataset(std::vector<State> states) : states_(std::move(states)) {}

  std::size_t m() const noexcept { return states_.size(); }
  const std::vector<State>& states() const noexcept { return states_; }

  // The first k prompts. Prompt sets of increasing size drawn from one
  // stream are nested, so a sweep over m takes prefixes.
  PromptDataset prefix(std::size_t k) const;

 private:
  std::vector<State> states_;
};

struct DatasetViolation {
  // Triple index, or -1 for dataset-level problems (empty dataset).
  long index = -1;
  std::string reason;
};

struct DatasetReport {
  std::vector<DatasetViolation> violations;

  bool ok() const noexcept { return violations.empty(); }
};

DatasetReport validate_dataset(const PreferenceDataset& d, int num_actions);

}  // namespace prefopt
