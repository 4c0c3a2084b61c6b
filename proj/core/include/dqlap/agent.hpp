#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dqlap/dataset.hpp"
#include "dqlap/metrics.hpp"
#include "dqlap/network.hpp"

namespace dqlap {

// One (state, action, reward, next-state) transition.
struct Experience {
  std::vector<double> state;
  int action = 0;
  double reward = 0.0;
  std::optional<std::vector<double>> next_state;  // absent iff terminal
  bool terminal = false;
};

// Bounded FIFO of experiences with uniform random sampling (with
// replacement). Once full, the oldest entry is evicted first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Experience e);
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }

  // i = 0 is the oldest entry currently stored.
  const Experience& at(std::size_t i) const;

  std::vector<const Experience*> sample(std::size_t count, std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::vector<Experience> entries_;  // ring once full
  std::size_t next_ = 0;             // write position when full
};

// Exploration and target-mixing schedules; both decay once per training
// iteration and never undershoot their floors.
struct Schedules {
  double epsilon = 0.9;
  double epsilon_decay = 0.99;
  double epsilon_min = 0.0001;
  double mix_alpha = 1.0;
  double mix_alpha_decay = 0.9999;
  double mix_alpha_min = 0.0001;
};

// epsilon <- max(epsilon * decay, floor), same for mix_alpha.
Schedules decay_schedules(const Schedules& s);

// How the bootstrap term picks and scores the next action. `target_only`
// selects and evaluates with the target network; `van_hasselt` selects with
// the current network and evaluates with the target network.
enum class DoubleQFlavor { target_only, van_hasselt };

struct AgentConfig {
  std::vector<std::size_t> hidden = {32, 32, 24, 24, 16, 8, 4};
  std::size_t minibatch_size = 128;
  double gamma = 0.001;
  std::size_t iterations = 1000;
  AdamConfig adam;
  std::size_t replay_capacity = 10000;
  std::size_t target_sync_interval = 0;  // 0 = once per episode
  Schedules schedules;
  DoubleQFlavor flavor = DoubleQFlavor::target_only;
  double early_stop_macro_recall = 0.0;  // 0 disables early stopping
  std::uint64_t seed = 0;

  void validate() const;  // throws ConfigError on out-of-range values
};

// Epsilon-greedy action over the two Q-outputs; argmax ties break toward the
// lower action index.
int select_action(const QNetwork& net, std::span<const double> state, double epsilon,
                  std::mt19937_64& rng);

// Blended bootstrap target:
//   non-terminal: (1 - a) * Qc(s, action) + a * (r + gamma * Qt(s', a*))
//   terminal:     (1 - a) * Qc(s, action) + a * r
// where a* is picked per the flavor. With mix_alpha = 1 this reduces to the
// plain r + gamma * max Qt(s', .) target.
double compute_target(const QNetwork& current, const QNetwork& target,
                      const Experience& exp, double gamma, double mix_alpha,
                      DoubleQFlavor flavor = DoubleQFlavor::target_only);

struct AgentState {
  QNetwork current;
  QNetwork target;
  Schedules schedules;
  ReplayBuffer buffer;
  std::uint64_t learn_steps = 0;
};

// One Adam step on the minibatch-mean squared error between the blended
// targets and the current network's Q-values of the taken actions (masked
// regression). Returns the pre-step mean squared error.
double learn_step(AgentState& state, const std::vector<const Experience*>& minibatch,
                  const AgentConfig& config);

// Copies current weights into target whenever step_counter is a positive
// multiple of interval.
void sync_target(const QNetwork& current, QNetwork& target,
                 std::uint64_t step_counter, std::size_t interval);

struct IterationRecord {
  std::size_t iteration = 0;  // 1-based
  double epsilon = 0.0;       // values in effect during the iteration
  double mix_alpha = 0.0;
  double mean_loss = 0.0;     // mean learn-step loss over the iteration
  MetricsReport test_metrics;

  std::string to_json_line() const;
};

using ProgressSink = std::function<void(const IterationRecord&)>;

struct TrainResult {
  QNetwork best;
  std::vector<IterationRecord> history;
  double best_macro_recall = 0.0;
  std::size_t best_iteration = 0;  // 0 when no iteration ran
  Schedules final_schedules;
};

// Algorithm: each iteration shuffles the training data into one episode,
// interacts epsilon-greedily, stores experiences, performs one learn step per
// environment step once the buffer holds a full minibatch, decays the
// schedules once, and syncs the target network on its interval. After each
// iteration the current network is scored on the test set by macro recall and
// the best weights seen so far are retained.
TrainResult train_agent(const AgentConfig& config, const Dataset& train,
                        const Dataset& test, const ProgressSink& progress = {},
                        const QNetwork* warm_start = nullptr);

// Greedy argmax labels, ties toward the lower index.
std::vector<int> predict(const QNetwork& net, const Dataset& samples);

}  // namespace dqlap
