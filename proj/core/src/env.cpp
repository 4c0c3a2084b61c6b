#include "dqlap/env.hpp"

#include <random>
#include <stdexcept>
#include <string>

#include "dqlap/errors.hpp"
#include "dqlap/rng.hpp"

namespace dqlap {

CmdpEpisode::CmdpEpisode(const Dataset& data, std::uint64_t seed) : data_(&data) {
  if (data.empty()) {
    throw DataError("CmdpEpisode: empty dataset");
  }
  order_.resize(data.size());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  std::mt19937_64 rng(seed);
  seeded_shuffle(order_, rng);
}

std::span<const double> CmdpEpisode::state() const {
  if (done()) {
    throw std::logic_error("CmdpEpisode: state() after terminal step");
  }
  return data_->samples[order_[cursor_]].features;
}

StepResult CmdpEpisode::step(int action) {
  if (done()) {
    throw std::logic_error("CmdpEpisode: step() after terminal step");
  }
  if (action != 0 && action != 1) {
    throw std::invalid_argument("CmdpEpisode: action must be 0 or 1, got " +
                                std::to_string(action));
  }
  const Sample& current = data_->samples[order_[cursor_]];
  StepResult result;
  result.reward = action == current.label ? 1.0 : -1.0;
  ++cursor_;
  result.terminal = cursor_ >= order_.size();
  if (!result.terminal) {
    result.next_state = std::span<const double>(data_->samples[order_[cursor_]].features);
  }
  return result;
}

}  // namespace dqlap
