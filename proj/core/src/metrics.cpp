#include "dqlap/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

#include <json.hpp>

#include "dqlap/errors.hpp"

namespace dqlap {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ConfusionCounts count_confusion(const std::vector<int>& predictions,
                                const std::vector<int>& labels) {
  if (predictions.size() != labels.size()) {
    throw std::invalid_argument("count_confusion: length mismatch");
  }
  if (predictions.empty()) {
    throw std::invalid_argument("count_confusion: empty input");
  }
  ConfusionCounts counts;
  counts.total = predictions.size();
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const int p = predictions[i];
    const int l = labels[i];
    if ((p != 0 && p != 1) || (l != 0 && l != 1)) {
      throw std::invalid_argument("count_confusion: classes must be 0 or 1");
    }
    for (int c = 0; c < 2; ++c) {
      ClassCounts& cc = counts.per_class[c];
      if (l == c && p == c) ++cc.tp;
      else if (l != c && p == c) ++cc.fp;
      else if (l == c && p != c) ++cc.fn;
      else ++cc.tn;
    }
  }
  return counts;
}

MetricsReport compute_metrics(const std::vector<int>& predictions,
                              const std::vector<int>& labels) {
  MetricsReport report;
  report.confusion = count_confusion(predictions, labels);

  std::size_t correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] == labels[i]) ++correct;
  }
  report.accuracy = ratio(correct, report.confusion.total);

  for (int c = 0; c < 2; ++c) {
    const ClassCounts& cc = report.confusion.per_class[c];
    report.precision[c] = ratio(cc.tp, cc.tp + cc.fp);
    report.recall[c] = ratio(cc.tp, cc.tp + cc.fn);
    const double pr = report.precision[c] + report.recall[c];
    report.f1[c] = pr == 0.0 ? 0.0 : 2.0 * report.precision[c] * report.recall[c] / pr;
  }
  report.macro_precision = (report.precision[0] + report.precision[1]) / 2.0;
  report.macro_recall = (report.recall[0] + report.recall[1]) / 2.0;
  report.macro_f1 = (report.f1[0] + report.f1[1]) / 2.0;
  return report;
}

std::string MetricsReport::to_json() const {
  nlohmann::json j;
  j["accuracy"] = accuracy;
  j["macro_precision"] = macro_precision;
  j["macro_recall"] = macro_recall;
  j["macro_f1"] = macro_f1;
  for (int c = 0; c < 2; ++c) {
    nlohmann::json cls;
    cls["precision"] = precision[c];
    cls["recall"] = recall[c];
    cls["f1"] = f1[c];
    cls["tp"] = confusion.per_class[c].tp;
    cls["fp"] = confusion.per_class[c].fp;
    cls["fn"] = confusion.per_class[c].fn;
    cls["tn"] = confusion.per_class[c].tn;
    j["class_" + std::to_string(c)] = cls;
  }
  if (mean_prediction_time > 0.0) {
    j["mean_prediction_time_s"] = mean_prediction_time;
  }
  return j.dump();
}

double measure_prediction_time(const QNetwork& net, const Dataset& samples,
                               std::size_t repetitions) {
  if (repetitions < 3) {
    throw std::invalid_argument("measure_prediction_time: need >= 3 repetitions");
  }
  if (samples.empty()) {
    throw std::invalid_argument("measure_prediction_time: empty sample set");
  }
  using clock = std::chrono::steady_clock;
  std::vector<double> per_sample;
  per_sample.reserve(repetitions);
  ForwardTrace trace;
  volatile int guard = 0;  // keeps the prediction loop from being elided
  for (std::size_t rep = 0; rep < repetitions; ++rep) {
    const auto start = clock::now();
    int acc = 0;
    for (const auto& s : samples.samples) {
      const std::vector<double>& q = forward(net, s.features, trace);
      acc += q[1] > q[0] ? 1 : 0;
    }
    const auto stop = clock::now();
    guard = acc;
    per_sample.push_back(std::chrono::duration<double>(stop - start).count() /
                         static_cast<double>(samples.size()));
  }
  (void)guard;
  std::sort(per_sample.begin(), per_sample.end());
  return per_sample[per_sample.size() / 2];
}

}  // namespace dqlap
