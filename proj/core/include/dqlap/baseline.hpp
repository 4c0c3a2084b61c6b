#pragma once

#include <cstdint>
#include <vector>

#include "dqlap/agent.hpp"
#include "dqlap/dataset.hpp"
#include "dqlap/network.hpp"

namespace dqlap {

enum class BaselineLoss { mse_on_onehot, cross_entropy };

// Supervised comparison model: the same network, initialization and optimizer
// as the agent, trained by plain mini-batch backpropagation as a classifier.
struct BaselineConfig {
  std::vector<std::size_t> hidden = {32, 32, 24, 24, 16, 8, 4};
  std::size_t epochs = 1000;
  std::size_t minibatch_size = 128;
  AdamConfig adam;
  BaselineLoss loss = BaselineLoss::mse_on_onehot;
  std::uint64_t seed = 0;

  void validate() const;
};

// Per-epoch records reuse IterationRecord; the epsilon and mix_alpha fields
// stay 0 since the baseline has no schedules. Best weights are selected by
// test macro recall, the same rule the agent uses.
TrainResult train_baseline(const BaselineConfig& config, const Dataset& train,
                           const Dataset& test, const ProgressSink& progress = {});

std::vector<int> predict_baseline(const QNetwork& net, const Dataset& samples);

}  // namespace dqlap
