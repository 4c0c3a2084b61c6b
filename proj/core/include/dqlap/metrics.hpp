#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dqlap/dataset.hpp"
#include "dqlap/network.hpp"

namespace dqlap {

struct ClassCounts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

struct ConfusionCounts {
  std::array<ClassCounts, 2> per_class;
  std::size_t total = 0;
};

// Accuracy plus macro-averaged precision/recall/F1 over the two classes.
// Cells with a zero denominator (no predicted or no actual positives for a
// class) resolve to 0. mean_prediction_time stays 0 until measured.
struct MetricsReport {
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  std::array<double, 2> precision{};
  std::array<double, 2> recall{};
  std::array<double, 2> f1{};
  ConfusionCounts confusion;
  double mean_prediction_time = 0.0;  // seconds per sample

  std::string to_json() const;
};

ConfusionCounts count_confusion(const std::vector<int>& predictions,
                                const std::vector<int>& labels);

MetricsReport compute_metrics(const std::vector<int>& predictions,
                              const std::vector<int>& labels);

// Median over repetitions of wall-clock seconds per sample for greedy
// prediction. Requires at least 3 repetitions.
double measure_prediction_time(const QNetwork& net, const Dataset& samples,
                               std::size_t repetitions);

}  // namespace dqlap
