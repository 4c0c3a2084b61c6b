#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dqlap {

// One labeled observation. Label 0 is the fault class, label 1 the normal
// class; day indices start at 1.
struct Sample {
  std::vector<double> features;
  int label = 0;
  int day = 1;
};

// Per-feature min-max bounds, fitted on training data only.
struct ScalerParams {
  std::vector<double> min;
  std::vector<double> max;

  std::size_t feature_count() const { return min.size(); }
};

struct Dataset {
  std::vector<Sample> samples;
  std::vector<std::string> feature_names;  // header order
  std::size_t feature_count = 0;
  int day_count = 0;
  std::optional<ScalerParams> scaler;  // set once apply_scaler has run

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  std::vector<int> labels() const;
};

struct SplitSpec {
  double train_fraction = 0.7;
  std::uint64_t seed = 0;
  bool stratified = true;
};

struct SyntheticSpec {
  std::size_t feature_count = 31;
  int days = 10;
  std::size_t samples_per_day = 300;
  double imbalance_ratio = 3.0;   // normal : fault, >= 1
  double class_separation = 3.3;  // distance between class means (unit variance)
  double drift_rate = 0.0;        // per-day shift of both class means
  std::uint64_t seed = 0;
};

// Column mapping for load_csv. Columns are matched by header name, not
// position. An empty feature_columns list means "every remaining column".
struct CsvSchema {
  std::string day_column = "day";
  std::string label_column = "label";
  std::string drop_column = "drop";  // rows whose cell is "drop-it" are removed
  std::vector<std::string> feature_columns;
};

// Reads a labeled day-indexed dataset. Rows flagged "drop-it" are removed;
// row order is preserved; no normalization is applied. Malformed input is
// reported as DataError with the offending line number.
Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema = {});

// Writes the documented CSV schema (day, label, then features in order).
// load_csv(write_csv(d)) reproduces d exactly; doubles are printed with
// shortest round-trip formatting.
void write_csv(const Dataset& data, const std::filesystem::path& path);

// Exact per-feature extrema of the training samples.
ScalerParams fit_scaler(const Dataset& train);

// Maps each feature x to (x - min) / (max - min). Constant features map to 0;
// values outside the fitted range clamp to [0, 1].
Dataset apply_scaler(const Dataset& data, const ScalerParams& scaler);

// Seeded split with |train| = round(train_fraction * |data|). The stratified
// variant keeps per-class proportions within one sample via largest-remainder
// allocation. Relative sample order is preserved inside each part.
std::pair<Dataset, Dataset> split(const Dataset& data, const SplitSpec& spec);

// All samples with day <= d, order preserved.
Dataset cumulative_through_day(const Dataset& data, int day);

// Samples with day == d exactly, order preserved.
Dataset samples_of_day(const Dataset& data, int day);

// Two Gaussian class-conditional clusters whose means sit class_separation
// apart along the unit diagonal and translate together by drift_rate per day.
// Per-day fault count is floor(samples_per_day / (1 + imbalance_ratio)); the
// remainder is normal. Deterministic given the seed.
Dataset generate_synthetic(const SyntheticSpec& spec);

}  // namespace dqlap
