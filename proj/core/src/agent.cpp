#include "dqlap/agent.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "dqlap/env.hpp"
#include "dqlap/errors.hpp"
#include "dqlap/rng.hpp"

namespace dqlap {

namespace {

std::size_t argmax2(const std::vector<double>& q) {
  // Ties break toward the lower action index.
  std::size_t best = 0;
  for (std::size_t i = 1; i < q.size(); ++i) {
    if (q[i] > q[best]) best = i;
  }
  return best;
}

double bootstrap_value(const QNetwork& current, const QNetwork& target,
                       std::span<const double> next_state, DoubleQFlavor flavor,
                       ForwardTrace& scratch) {
  if (flavor == DoubleQFlavor::van_hasselt) {
    const std::size_t pick = argmax2(forward(current, next_state, scratch));
    return forward(target, next_state, scratch)[pick];
  }
  const std::vector<double>& qt = forward(target, next_state, scratch);
  return qt[argmax2(qt)];
}

// q_current is Q(s, action) under the current network, precomputed so the
// training loop can reuse its forward pass for the gradient.
double blended_target(const QNetwork& current, const QNetwork& target,
                      const Experience& exp, double q_current, double gamma,
                      double mix_alpha, DoubleQFlavor flavor, ForwardTrace& scratch) {
  double boot = exp.reward;
  if (!exp.terminal) {
    boot += gamma * bootstrap_value(current, target, *exp.next_state, flavor, scratch);
  }
  return (1.0 - mix_alpha) * q_current + mix_alpha * boot;
}

}  // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) {
    throw ConfigError("ReplayBuffer: capacity must be positive");
  }
  entries_.reserve(std::min<std::size_t>(capacity, 4096));
}

void ReplayBuffer::push(Experience e) {
  if (entries_.size() < capacity_) {
    entries_.push_back(std::move(e));
  } else {
    entries_[next_] = std::move(e);
    next_ = (next_ + 1) % capacity_;
  }
}

const Experience& ReplayBuffer::at(std::size_t i) const {
  if (i >= entries_.size()) {
    throw std::out_of_range("ReplayBuffer::at");
  }
  if (entries_.size() < capacity_) {
    return entries_[i];
  }
  return entries_[(next_ + i) % capacity_];
}

std::vector<const Experience*> ReplayBuffer::sample(std::size_t count,
                                                    std::mt19937_64& rng) const {
  if (entries_.empty()) {
    throw std::logic_error("ReplayBuffer::sample: empty buffer");
  }
  std::vector<const Experience*> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    out.push_back(&entries_[uniform_index(rng, entries_.size())]);
  }
  return out;
}

Schedules decay_schedules(const Schedules& s) {
  Schedules next = s;
  next.epsilon = std::max(s.epsilon * s.epsilon_decay, s.epsilon_min);
  next.mix_alpha = std::max(s.mix_alpha * s.mix_alpha_decay, s.mix_alpha_min);
  return next;
}

void AgentConfig::validate() const {
  if (minibatch_size == 0) throw ConfigError("agent: minibatch_size must be >= 1");
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw ConfigError("agent: gamma must lie in [0, 1], got " + std::to_string(gamma));
  }
  if (!(adam.learning_rate > 0.0)) throw ConfigError("agent: learning_rate must be > 0");
  if (!(adam.beta1 > 0.0 && adam.beta1 < 1.0)) throw ConfigError("agent: beta1 must lie in (0, 1)");
  if (!(adam.beta2 > 0.0 && adam.beta2 < 1.0)) throw ConfigError("agent: beta2 must lie in (0, 1)");
  if (!(adam.epsilon > 0.0)) throw ConfigError("agent: adam epsilon must be > 0");
  if (replay_capacity < minibatch_size) {
    throw ConfigError("agent: replay_capacity must be >= minibatch_size");
  }
  for (const std::size_t h : hidden) {
    if (h == 0) throw ConfigError("agent: hidden layer sizes must be >= 1");
  }
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(schedules.epsilon) || !in_unit(schedules.epsilon_min) ||
      !in_unit(schedules.mix_alpha) || !in_unit(schedules.mix_alpha_min)) {
    throw ConfigError("agent: schedule values must lie in [0, 1]");
  }
  if (!(schedules.epsilon_decay > 0.0 && schedules.epsilon_decay <= 1.0) ||
      !(schedules.mix_alpha_decay > 0.0 && schedules.mix_alpha_decay <= 1.0)) {
    throw ConfigError("agent: schedule decay rates must lie in (0, 1]");
  }
  if (!in_unit(early_stop_macro_recall)) {
    throw ConfigError("agent: early_stop_macro_recall must lie in [0, 1]");
  }
}

int select_action(const QNetwork& net, std::span<const double> state, double epsilon,
                  std::mt19937_64& rng) {
  if (uniform_double(rng) < epsilon) {
    return static_cast<int>(uniform_index(rng, 2));
  }
  return static_cast<int>(argmax2(net.forward(state)));
}

double compute_target(const QNetwork& current, const QNetwork& target,
                      const Experience& exp, double gamma, double mix_alpha,
                      DoubleQFlavor flavor) {
  if (!same_architecture(current, target)) {
    throw std::invalid_argument("compute_target: architecture mismatch");
  }
  ForwardTrace scratch;
  const double q_current = current.forward(exp.state)[exp.action];
  return blended_target(current, target, exp, q_current, gamma, mix_alpha, flavor,
                        scratch);
}

double learn_step(AgentState& state, const std::vector<const Experience*>& minibatch,
                  const AgentConfig& config) {
  if (minibatch.empty()) {
    throw std::invalid_argument("learn_step: empty minibatch");
  }
  thread_local ForwardTrace trace;
  thread_local ForwardTrace scratch;
  thread_local Gradients grads;
  bool reusable = grads.weights.size() == state.current.weights.size();
  for (std::size_t l = 0; reusable && l < grads.weights.size(); ++l) {
    reusable = grads.weights[l].size() == state.current.weights[l].size() &&
               grads.biases[l].size() == state.current.biases[l].size();
  }
  if (!reusable) {
    grads = make_gradients(state.current);
  } else {
    grads.set_zero();
  }

  const double batch_scale = 1.0 / static_cast<double>(minibatch.size());
  std::vector<double> output_grad(state.current.output_dim(), 0.0);
  double loss_sum = 0.0;

  for (const Experience* exp : minibatch) {
    const std::vector<double>& q = forward(state.current, exp->state, trace);
    const double target_value =
        blended_target(state.current, state.target, *exp, q[exp->action],
                       config.gamma, state.schedules.mix_alpha, config.flavor,
                       scratch);
    const double diff = q[exp->action] - target_value;
    loss_sum += diff * diff;
    // Only the taken action's output carries loss.
    output_grad[exp->action] = 2.0 * diff;
    backward(state.current, trace, output_grad, batch_scale, grads);
    output_grad[exp->action] = 0.0;
  }

  adam_step(state.current, grads, config.adam);
  state.learn_steps += 1;
  return loss_sum * batch_scale;
}

void sync_target(const QNetwork& current, QNetwork& target,
                 std::uint64_t step_counter, std::size_t interval) {
  if (interval < 1) {
    throw ConfigError("sync_target: interval must be >= 1");
  }
  if (step_counter != 0 && step_counter % interval == 0) {
    copy_weights_into(current, target);
  }
}

std::string IterationRecord::to_json_line() const {
  nlohmann::json j;
  j["iteration"] = iteration;
  j["epsilon"] = epsilon;
  j["mix_alpha"] = mix_alpha;
  j["mean_loss"] = mean_loss;
  j["accuracy"] = test_metrics.accuracy;
  j["macro_precision"] = test_metrics.macro_precision;
  j["macro_recall"] = test_metrics.macro_recall;
  j["macro_f1"] = test_metrics.macro_f1;
  return j.dump();
}

TrainResult train_agent(const AgentConfig& config, const Dataset& train,
                        const Dataset& test, const ProgressSink& progress,
                        const QNetwork* warm_start) {
  config.validate();
  if (train.empty()) throw DataError("train_agent: empty training set");
  if (test.empty()) throw DataError("train_agent: empty test set");

  std::mt19937_64 rng(config.seed);

  QNetwork current =
      warm_start ? clone_weights(*warm_start)
                 : build_network(train.feature_count, config.hidden, 2, rng());
  if (current.input_dim() != train.feature_count) {
    throw std::invalid_argument("train_agent: warm-start network expects " +
                                std::to_string(current.input_dim()) +
                                " features, data has " +
                                std::to_string(train.feature_count));
  }
  QNetwork target = clone_weights(current);

  AgentState state{std::move(current), std::move(target), config.schedules,
                   ReplayBuffer(config.replay_capacity)};
  const std::size_t sync_interval =
      config.target_sync_interval > 0 ? config.target_sync_interval : train.size();

  TrainResult result;
  result.best = clone_weights(state.current);
  result.best_macro_recall = 0.0;
  result.history.reserve(config.iterations);
  const std::vector<int> test_labels = test.labels();

  for (std::size_t iteration = 1; iteration <= config.iterations; ++iteration) {
    CmdpEpisode episode(train, rng());
    double loss_sum = 0.0;
    std::size_t loss_count = 0;

    while (!episode.done()) {
      const std::span<const double> obs = episode.state();
      const int action =
          select_action(state.current, obs, state.schedules.epsilon, rng);
      Experience exp;
      exp.state.assign(obs.begin(), obs.end());
      exp.action = action;
      const StepResult step = episode.step(action);
      exp.reward = step.reward;
      exp.terminal = step.terminal;
      if (step.next_state) {
        exp.next_state.emplace(step.next_state->begin(), step.next_state->end());
      }
      state.buffer.push(std::move(exp));

      if (state.buffer.size() >= config.minibatch_size) {
        const auto batch = state.buffer.sample(config.minibatch_size, rng);
        loss_sum += learn_step(state, batch, config);
        ++loss_count;
        sync_target(state.current, state.target, state.learn_steps, sync_interval);
      }
    }

    IterationRecord record;
    record.iteration = iteration;
    record.epsilon = state.schedules.epsilon;
    record.mix_alpha = state.schedules.mix_alpha;
    record.mean_loss = loss_count > 0 ? loss_sum / static_cast<double>(loss_count) : 0.0;
    state.schedules = decay_schedules(state.schedules);

    record.test_metrics = compute_metrics(predict(state.current, test), test_labels);
    if (record.test_metrics.macro_recall > result.best_macro_recall ||
        result.best_iteration == 0) {
      result.best_macro_recall = record.test_metrics.macro_recall;
      result.best_iteration = iteration;
      copy_weights_into(state.current, result.best);
    }
    result.history.push_back(record);
    if (progress) progress(result.history.back());

    if (config.early_stop_macro_recall > 0.0 &&
        result.best_macro_recall >= config.early_stop_macro_recall) {
      break;
    }
  }

  result.final_schedules = state.schedules;
  return result;
}

std::vector<int> predict(const QNetwork& net, const Dataset& samples) {
  if (samples.feature_count != net.input_dim()) {
    throw std::invalid_argument("predict: network expects " +
                                std::to_string(net.input_dim()) +
                                " features, data has " +
                                std::to_string(samples.feature_count));
  }
  std::vector<int> labels;
  labels.reserve(samples.size());
  ForwardTrace trace;
  for (const auto& s : samples.samples) {
    labels.push_back(static_cast<int>(argmax2(forward(net, s.features, trace))));
  }
  return labels;
}

}  // namespace dqlap
