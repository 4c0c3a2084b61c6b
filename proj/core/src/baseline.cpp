#include "dqlap/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dqlap/errors.hpp"
#include "dqlap/rng.hpp"

namespace dqlap {

void BaselineConfig::validate() const {
  if (minibatch_size == 0) throw ConfigError("baseline: minibatch_size must be >= 1");
  if (!(adam.learning_rate > 0.0)) throw ConfigError("baseline: learning_rate must be > 0");
  for (const std::size_t h : hidden) {
    if (h == 0) throw ConfigError("baseline: hidden layer sizes must be >= 1");
  }
}

TrainResult train_baseline(const BaselineConfig& config, const Dataset& train,
                           const Dataset& test, const ProgressSink& progress) {
  config.validate();
  if (train.empty()) throw DataError("train_baseline: empty training set");
  if (test.empty()) throw DataError("train_baseline: empty test set");

  std::mt19937_64 rng(config.seed);
  QNetwork net = build_network(train.feature_count, config.hidden, 2, rng());

  TrainResult result;
  result.best = clone_weights(net);
  result.best_macro_recall = 0.0;
  result.history.reserve(config.epochs);
  const std::vector<int> test_labels = test.labels();

  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  ForwardTrace trace;
  Gradients grads = make_gradients(net);
  std::vector<double> output_grad(2, 0.0);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    seeded_shuffle(order, rng);
    double loss_sum = 0.0;
    std::size_t batch_count = 0;

    for (std::size_t begin = 0; begin < order.size(); begin += config.minibatch_size) {
      const std::size_t end = std::min(begin + config.minibatch_size, order.size());
      const double scale = 1.0 / static_cast<double>(end - begin);
      grads.set_zero();
      double batch_loss = 0.0;

      for (std::size_t k = begin; k < end; ++k) {
        const Sample& s = train.samples[order[k]];
        const std::vector<double>& q = forward(net, s.features, trace);
        if (config.loss == BaselineLoss::mse_on_onehot) {
          // Targets (1,0) / (0,1); per-sample loss is the mean over outputs.
          for (int j = 0; j < 2; ++j) {
            const double target = j == s.label ? 1.0 : 0.0;
            const double diff = q[j] - target;
            batch_loss += scale * diff * diff / 2.0;
            output_grad[j] = diff;  // d/dq of mean((q - y)^2) over 2 outputs
          }
        } else {
          // Softmax cross-entropy; gradient at the head is p - onehot.
          const double m = std::max(q[0], q[1]);
          const double e0 = std::exp(q[0] - m);
          const double e1 = std::exp(q[1] - m);
          const double z = e0 + e1;
          const double p[2] = {e0 / z, e1 / z};
          batch_loss -= scale * std::log(std::max(p[s.label], 1e-300));
          output_grad[0] = p[0] - (s.label == 0 ? 1.0 : 0.0);
          output_grad[1] = p[1] - (s.label == 1 ? 1.0 : 0.0);
        }
        backward(net, trace, output_grad, scale, grads);
      }

      adam_step(net, grads, config.adam);
      loss_sum += batch_loss;
      ++batch_count;
    }

    IterationRecord record;
    record.iteration = epoch;
    record.mean_loss = batch_count > 0 ? loss_sum / static_cast<double>(batch_count) : 0.0;
    record.test_metrics = compute_metrics(predict(net, test), test_labels);
    if (record.test_metrics.macro_recall > result.best_macro_recall ||
        result.best_iteration == 0) {
      result.best_macro_recall = record.test_metrics.macro_recall;
      result.best_iteration = epoch;
      copy_weights_into(net, result.best);
    }
    result.history.push_back(record);
    if (progress) progress(result.history.back());
  }
  return result;
}

std::vector<int> predict_baseline(const QNetwork& net, const Dataset& samples) {
  return predict(net, samples);
}

}  // namespace dqlap
