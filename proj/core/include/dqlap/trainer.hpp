#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dqlap/agent.hpp"
#include "dqlap/baseline.hpp"
#include "dqlap/dataset.hpp"
#include "dqlap/metrics.hpp"

namespace dqlap {

struct TrainerOptions {
  SplitSpec split;                     // per-window seed is derived from the day
  std::size_t per_day_iterations = 0;  // 0 = agent iterations / day count
  double warm_start_epsilon = 0.3;     // epsilon restart on warm-started days
  bool reset_schedules = false;        // true = full schedule restart per day
  std::size_t time_repetitions = 0;    // 0 = skip latency measurement
};

struct DailyRunRecord {
  int day = 0;
  std::size_t cumulative_sample_count = 0;
  MetricsReport test_metrics;
  std::optional<MetricsReport> next_day_forecast;  // absent on the final day
  ScalerParams scaler;                       // fitted on this window's train split
  std::vector<std::uint8_t> checkpoint;      // serialized best network

  std::string to_json_line() const;
};

struct RegimeResult {
  MetricsReport final_metrics;
  std::vector<std::uint8_t> checkpoint;
  std::vector<DailyRunRecord> daily;
  std::vector<IterationRecord> progress;
};

// Trains one agent on the full training split of all days at once.
RegimeResult run_all_at_once(const AgentConfig& agent, const TrainerOptions& opts,
                             const Dataset& data, const ProgressSink& sink = {});

// Daily cumulative update: for each day d the window holds all samples with
// day <= d; the scaler is refitted on that window's training portion, the
// agent warm-starts from day d-1's best checkpoint (fresh optimizer state),
// and the frozen day-d model is additionally scored on day d+1's samples as
// the forecast for the upcoming day. With a single day this reduces exactly
// to run_all_at_once; the two share one code path.
RegimeResult run_daily_update(const AgentConfig& agent, const TrainerOptions& opts,
                              const Dataset& data, const ProgressSink& sink = {});

// The supervised regime on the same split/scaling pipeline as run_all_at_once.
RegimeResult run_baseline_regime(const BaselineConfig& baseline,
                                 const TrainerOptions& opts, const Dataset& data,
                                 const ProgressSink& sink = {});

struct ComparisonRow {
  std::string method;
  MetricsReport metrics;
};

struct ComparisonResult {
  std::array<ComparisonRow, 3> rows;  // MLP / DDQN without update / DDQN with update

  std::string table_text() const;        // four metric columns, deterministic
  std::string timed_table_text() const;  // adds the seconds-per-sample column
};

// Runs the three regimes with matched seeds and architecture. The regimes are
// independent and execute concurrently; results merge in fixed row order.
ComparisonResult run_comparison(const AgentConfig& agent, const BaselineConfig& baseline,
                                const TrainerOptions& opts, const Dataset& data);

}  // namespace dqlap
