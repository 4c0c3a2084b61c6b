#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dqlap/dataset.hpp"

namespace dqlap {

struct StepResult {
  double reward = 0.0;  // +1 on a correct label, -1 otherwise
  std::optional<std::span<const double>> next_state;  // absent iff terminal
  bool terminal = false;
};

// One shuffled pass over a dataset, served sample by sample. States are the
// feature vectors; the binary action is scored against the sample's label and
// the transition advances deterministically to the next sample. The episode
// keeps a pointer into the dataset, which must outlive it.
class CmdpEpisode {
 public:
  // Seeded uniform shuffle of the data; the cursor starts on the first sample.
  CmdpEpisode(const Dataset& data, std::uint64_t seed);

  // Current sample's features.
  std::span<const double> state() const;

  // Scores the action, advances the cursor. The final sample is a terminal
  // transition with no next state. Stepping a finished episode throws.
  StepResult step(int action);

  bool done() const { return cursor_ >= order_.size(); }
  std::size_t length() const { return order_.size(); }

 private:
  const Dataset* data_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

}  // namespace dqlap
