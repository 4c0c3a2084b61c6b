#include "dqlap/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "dqlap/errors.hpp"
#include "dqlap/rng.hpp"

namespace dqlap {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    cells.push_back(trim(cell));
  }
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

double parse_double(const std::string& cell, std::size_t line_no,
                    const std::string& column) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || cell.empty()) {
    throw DataError("line " + std::to_string(line_no) + ": non-numeric value \"" +
                    cell + "\" in column \"" + column + "\"");
  }
  return value;
}

long parse_int(const std::string& cell, std::size_t line_no,
               const std::string& column) {
  long value = 0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || cell.empty()) {
    throw DataError("line " + std::to_string(line_no) + ": non-integer value \"" +
                    cell + "\" in column \"" + column + "\"");
  }
  return value;
}

void format_double(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

}  // namespace

std::vector<int> Dataset::labels() const {
  std::vector<int> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.label);
  return out;
}

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in.is_open()) {
    throw DataError("cannot open dataset file: " + path.string());
  }

  std::string line;
  if (!std::getline(in, line)) {
    throw DataError("empty dataset file: " + path.string());
  }
  const std::vector<std::string> header = split_line(line);

  auto column_of = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? std::string::npos
                              : static_cast<std::size_t>(it - header.begin());
  };

  const std::size_t day_col = column_of(schema.day_column);
  const std::size_t label_col = column_of(schema.label_column);
  const std::size_t drop_col = column_of(schema.drop_column);
  if (day_col == std::string::npos) {
    throw DataError("missing day column \"" + schema.day_column + "\" in " +
                    path.string());
  }
  if (label_col == std::string::npos) {
    throw DataError("missing label column \"" + schema.label_column + "\" in " +
                    path.string());
  }

  std::vector<std::size_t> feature_cols;
  std::vector<std::string> feature_names;
  if (schema.feature_columns.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i == day_col || i == label_col || i == drop_col) continue;
      feature_cols.push_back(i);
      feature_names.push_back(header[i]);
    }
  } else {
    for (const auto& name : schema.feature_columns) {
      const std::size_t col = column_of(name);
      if (col == std::string::npos) {
        throw DataError("missing feature column \"" + name + "\" in " +
                        path.string());
      }
      feature_cols.push_back(col);
      feature_names.push_back(name);
    }
  }
  if (feature_cols.empty()) {
    throw DataError("no feature columns in " + path.string());
  }

  Dataset data;
  data.feature_names = feature_names;
  data.feature_count = feature_cols.size();

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " columns, got " +
                      std::to_string(cells.size()));
    }
    if (drop_col != std::string::npos && cells[drop_col] == "drop-it") continue;

    Sample sample;
    const long label = parse_int(cells[label_col], line_no, schema.label_column);
    if (label != 0 && label != 1) {
      throw DataError("line " + std::to_string(line_no) + ": unknown label value \"" +
                      cells[label_col] + "\" (expected 0 or 1)");
    }
    sample.label = static_cast<int>(label);
    const long day = parse_int(cells[day_col], line_no, schema.day_column);
    if (day < 1) {
      throw DataError("line " + std::to_string(line_no) + ": day index " +
                      std::to_string(day) + " is not positive");
    }
    sample.day = static_cast<int>(day);
    sample.features.reserve(feature_cols.size());
    for (std::size_t k = 0; k < feature_cols.size(); ++k) {
      const double v = parse_double(cells[feature_cols[k]], line_no, feature_names[k]);
      if (!std::isfinite(v)) {
        throw DataError("line " + std::to_string(line_no) + ": non-finite value in column \"" +
                        feature_names[k] + "\"");
      }
      sample.features.push_back(v);
    }
    data.day_count = std::max(data.day_count, sample.day);
    data.samples.push_back(std::move(sample));
  }
  return data;
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out.is_open()) {
    throw DataError("cannot write dataset file: " + path.string());
  }
  std::string buf = "day,label";
  for (const auto& name : data.feature_names) {
    buf += ',';
    buf += name;
  }
  buf += '\n';
  out << buf;
  buf.clear();
  for (const auto& s : data.samples) {
    buf += std::to_string(s.day);
    buf += ',';
    buf += std::to_string(s.label);
    for (const double v : s.features) {
      buf += ',';
      format_double(buf, v);
    }
    buf += '\n';
    out << buf;
    buf.clear();
  }
  if (!out) {
    throw DataError("write failed: " + path.string());
  }
}

ScalerParams fit_scaler(const Dataset& train) {
  if (train.empty()) {
    throw DataError("fit_scaler: empty training set");
  }
  ScalerParams p;
  p.min = train.samples.front().features;
  p.max = train.samples.front().features;
  for (const auto& s : train.samples) {
    for (std::size_t i = 0; i < p.min.size(); ++i) {
      p.min[i] = std::min(p.min[i], s.features[i]);
      p.max[i] = std::max(p.max[i], s.features[i]);
    }
  }
  return p;
}

Dataset apply_scaler(const Dataset& data, const ScalerParams& scaler) {
  if (scaler.feature_count() != data.feature_count) {
    throw std::invalid_argument("apply_scaler: scaler fitted for " +
                                std::to_string(scaler.feature_count()) +
                                " features, dataset has " +
                                std::to_string(data.feature_count));
  }
  Dataset out = data;
  for (auto& s : out.samples) {
    for (std::size_t i = 0; i < s.features.size(); ++i) {
      const double range = scaler.max[i] - scaler.min[i];
      double v = range == 0.0 ? 0.0 : (s.features[i] - scaler.min[i]) / range;
      s.features[i] = std::clamp(v, 0.0, 1.0);
    }
  }
  out.scaler = scaler;
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& data, const SplitSpec& spec) {
  if (data.empty()) {
    throw DataError("split: empty dataset");
  }
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw ConfigError("split: train_fraction must lie in (0, 1), got " +
                      std::to_string(spec.train_fraction));
  }

  const std::size_t n = data.size();
  const std::size_t train_total = static_cast<std::size_t>(
      std::llround(spec.train_fraction * static_cast<double>(n)));
  std::mt19937_64 rng(spec.seed);

  std::vector<char> in_train(n, 0);
  if (!spec.stratified) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    seeded_shuffle(order, rng);
    for (std::size_t k = 0; k < train_total; ++k) in_train[order[k]] = 1;
  } else {
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < n; ++i) {
      by_class[data.samples[i].label].push_back(i);
    }
    // Largest-remainder allocation: per-class counts stay within one sample
    // of the exact proportion and sum to train_total.
    double exact[2];
    std::size_t take[2];
    for (int c = 0; c < 2; ++c) {
      exact[c] = spec.train_fraction * static_cast<double>(by_class[c].size());
      take[c] = static_cast<std::size_t>(std::floor(exact[c]));
    }
    std::size_t leftover = train_total - std::min(train_total, take[0] + take[1]);
    while (leftover > 0) {
      const int first = (exact[0] - std::floor(exact[0])) >=
                                (exact[1] - std::floor(exact[1]))
                            ? 0
                            : 1;
      for (const int c : {first, 1 - first}) {
        if (leftover > 0 && take[c] < by_class[c].size()) {
          ++take[c];
          --leftover;
        }
      }
    }
    for (int c = 0; c < 2; ++c) {
      seeded_shuffle(by_class[c], rng);
      for (std::size_t k = 0; k < take[c]; ++k) in_train[by_class[c][k]] = 1;
    }
  }

  Dataset train, test;
  train.feature_names = test.feature_names = data.feature_names;
  train.feature_count = test.feature_count = data.feature_count;
  for (std::size_t i = 0; i < n; ++i) {
    Dataset& side = in_train[i] ? train : test;
    side.samples.push_back(data.samples[i]);
    side.day_count = std::max(side.day_count, data.samples[i].day);
  }
  return {std::move(train), std::move(test)};
}

Dataset cumulative_through_day(const Dataset& data, int day) {
  if (day < 1 || day > data.day_count) {
    throw std::out_of_range("cumulative_through_day: day " + std::to_string(day) +
                            " outside [1, " + std::to_string(data.day_count) + "]");
  }
  Dataset out;
  out.feature_names = data.feature_names;
  out.feature_count = data.feature_count;
  for (const auto& s : data.samples) {
    if (s.day <= day) {
      out.samples.push_back(s);
      out.day_count = std::max(out.day_count, s.day);
    }
  }
  return out;
}

Dataset samples_of_day(const Dataset& data, int day) {
  if (day < 1 || day > data.day_count) {
    throw std::out_of_range("samples_of_day: day " + std::to_string(day) +
                            " outside [1, " + std::to_string(data.day_count) + "]");
  }
  Dataset out;
  out.feature_names = data.feature_names;
  out.feature_count = data.feature_count;
  for (const auto& s : data.samples) {
    if (s.day == day) {
      out.samples.push_back(s);
      out.day_count = std::max(out.day_count, s.day);
    }
  }
  return out;
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.feature_count == 0 || spec.days < 1 || spec.samples_per_day == 0) {
    throw ConfigError("generate_synthetic: counts must be positive");
  }
  if (!(spec.imbalance_ratio >= 1.0) || !std::isfinite(spec.imbalance_ratio)) {
    throw ConfigError("generate_synthetic: imbalance_ratio must be >= 1");
  }
  if (!(spec.class_separation >= 0.0) || !std::isfinite(spec.class_separation)) {
    throw ConfigError("generate_synthetic: class_separation must be >= 0");
  }
  if (!std::isfinite(spec.drift_rate)) {
    throw ConfigError("generate_synthetic: drift_rate must be finite");
  }

  const std::size_t fault_per_day = static_cast<std::size_t>(std::floor(
      static_cast<double>(spec.samples_per_day) / (1.0 + spec.imbalance_ratio)));
  const std::size_t normal_per_day = spec.samples_per_day - fault_per_day;

  // Class means sit +-separation/2 along the unit diagonal; drift translates
  // both means along the same axis so the decision boundary moves with the day.
  const double axis = 1.0 / std::sqrt(static_cast<double>(spec.feature_count));

  Dataset data;
  data.feature_count = spec.feature_count;
  data.day_count = spec.days;
  data.feature_names.reserve(spec.feature_count);
  for (std::size_t i = 0; i < spec.feature_count; ++i) {
    data.feature_names.push_back("f" + std::to_string(i));
  }
  data.samples.reserve(static_cast<std::size_t>(spec.days) * spec.samples_per_day);

  std::mt19937_64 rng(spec.seed);
  for (int day = 1; day <= spec.days; ++day) {
    std::vector<int> labels(fault_per_day, 0);
    labels.resize(spec.samples_per_day, 1);
    seeded_shuffle(labels, rng);

    const double drift = spec.drift_rate * static_cast<double>(day - 1);
    for (const int label : labels) {
      const double offset = (label == 1 ? 0.5 : -0.5) * spec.class_separation;
      Sample s;
      s.label = label;
      s.day = day;
      s.features.reserve(spec.feature_count);
      for (std::size_t i = 0; i < spec.feature_count; ++i) {
        s.features.push_back(gaussian(rng, (offset + drift) * axis, 1.0));
      }
      data.samples.push_back(std::move(s));
    }
  }
  return data;
}

}  // namespace dqlap
