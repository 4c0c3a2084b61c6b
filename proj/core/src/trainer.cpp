#include "dqlap/trainer.hpp"

#include <algorithm>
#include <future>
#include <sstream>

#include <json.hpp>

#include "dqlap/errors.hpp"
#include "dqlap/rng.hpp"

namespace dqlap {

namespace {

Dataset collapse_days(const Dataset& data) {
  Dataset out = data;
  for (auto& s : out.samples) s.day = 1;
  out.day_count = out.empty() ? 0 : 1;
  return out;
}

struct Window {
  Dataset train;  // normalized
  Dataset test;   // normalized
  ScalerParams scaler;
};

Window prepare_window(const Dataset& window, const TrainerOptions& opts, int day) {
  SplitSpec spec = opts.split;
  spec.seed = combine_seed(opts.split.seed, static_cast<std::uint64_t>(day));
  auto [train_raw, test_raw] = split(window, spec);
  Window out;
  out.scaler = fit_scaler(train_raw);
  out.train = apply_scaler(train_raw, out.scaler);
  out.test = apply_scaler(test_raw, out.scaler);
  return out;
}

MetricsReport score(const QNetwork& net, const Dataset& test,
                    std::size_t time_repetitions) {
  MetricsReport report = compute_metrics(predict(net, test), test.labels());
  if (time_repetitions >= 3) {
    report.mean_prediction_time = measure_prediction_time(net, test, time_repetitions);
  }
  return report;
}

RegimeResult run_daily_core(const AgentConfig& agent, const TrainerOptions& opts,
                            const Dataset& data, const ProgressSink& sink) {
  if (data.empty()) throw DataError("trainer: empty dataset");
  const int days = data.day_count;
  for (int d = 1; d <= days; ++d) {
    if (samples_of_day(data, d).empty()) {
      throw DataError("trainer: no samples for day " + std::to_string(d));
    }
  }

  // Default budget keeps total compute parity with the all-at-once regime;
  // integer division, so iterations < days trains zero iterations per day.
  const std::size_t per_day =
      opts.per_day_iterations > 0
          ? opts.per_day_iterations
          : agent.iterations / static_cast<std::size_t>(days);

  RegimeResult result;
  std::optional<QNetwork> previous_best;
  double carried_mix_alpha = agent.schedules.mix_alpha;

  for (int d = 1; d <= days; ++d) {
    const Dataset window = cumulative_through_day(data, d);
    Window w = prepare_window(window, opts, d);

    AgentConfig cfg = agent;
    cfg.iterations = per_day;
    cfg.seed = combine_seed(agent.seed, static_cast<std::uint64_t>(d));
    if (d > 1 && !opts.reset_schedules) {
      cfg.schedules.epsilon = opts.warm_start_epsilon;
      cfg.schedules.mix_alpha = carried_mix_alpha;
    }

    TrainResult trained =
        train_agent(cfg, w.train, w.test, sink,
                    previous_best ? &*previous_best : nullptr);
    carried_mix_alpha = trained.final_schedules.mix_alpha;

    DailyRunRecord record;
    record.day = d;
    record.cumulative_sample_count = window.size();
    record.test_metrics = score(trained.best, w.test, opts.time_repetitions);
    record.scaler = w.scaler;
    record.checkpoint = serialize_network(trained.best);
    if (d < days) {
      const Dataset upcoming =
          apply_scaler(samples_of_day(data, d + 1), w.scaler);
      record.next_day_forecast =
          compute_metrics(predict(trained.best, upcoming), upcoming.labels());
    }
    for (auto& it : trained.history) result.progress.push_back(it);
    result.daily.push_back(std::move(record));
    previous_best = std::move(trained.best);
  }

  result.final_metrics = result.daily.back().test_metrics;
  result.checkpoint = result.daily.back().checkpoint;
  return result;
}

void append_metric_cells(std::ostringstream& out, const MetricsReport& m) {
  out.setf(std::ios::fixed);
  out.precision(4);
  out << m.accuracy << "    " << m.macro_precision << "     " << m.macro_recall
      << "  " << m.macro_f1;
}

}  // namespace

std::string DailyRunRecord::to_json_line() const {
  nlohmann::json j;
  j["day"] = day;
  j["cumulative_samples"] = cumulative_sample_count;
  j["test"] = nlohmann::json::parse(test_metrics.to_json());
  if (next_day_forecast) {
    j["next_day_forecast"] = nlohmann::json::parse(next_day_forecast->to_json());
  }
  return j.dump();
}

RegimeResult run_all_at_once(const AgentConfig& agent, const TrainerOptions& opts,
                             const Dataset& data, const ProgressSink& sink) {
  return run_daily_core(agent, opts, collapse_days(data), sink);
}

RegimeResult run_daily_update(const AgentConfig& agent, const TrainerOptions& opts,
                              const Dataset& data, const ProgressSink& sink) {
  return run_daily_core(agent, opts, data, sink);
}

RegimeResult run_baseline_regime(const BaselineConfig& baseline,
                                 const TrainerOptions& opts, const Dataset& data,
                                 const ProgressSink& sink) {
  if (data.empty()) throw DataError("trainer: empty dataset");
  const Dataset whole = collapse_days(data);
  Window w = prepare_window(whole, opts, 1);

  TrainResult trained = train_baseline(baseline, w.train, w.test, sink);

  RegimeResult result;
  result.final_metrics = score(trained.best, w.test, opts.time_repetitions);
  result.checkpoint = serialize_network(trained.best);
  result.progress = std::move(trained.history);

  DailyRunRecord record;
  record.day = 1;
  record.cumulative_sample_count = whole.size();
  record.test_metrics = result.final_metrics;
  record.scaler = w.scaler;
  record.checkpoint = result.checkpoint;
  result.daily.push_back(std::move(record));
  return result;
}

std::string ComparisonResult::table_text() const {
  std::ostringstream out;
  out << "method                         accuracy  precision  recall  f1_score\n";
  for (const auto& row : rows) {
    out << row.method;
    for (std::size_t pad = row.method.size(); pad < 31; ++pad) out << ' ';
    append_metric_cells(out, row.metrics);
    out << '\n';
  }
  return out.str();
}

std::string ComparisonResult::timed_table_text() const {
  std::ostringstream out;
  out << "method                         accuracy  precision  recall  f1_score"
         "  seconds_per_sample\n";
  for (const auto& row : rows) {
    out << row.method;
    for (std::size_t pad = row.method.size(); pad < 31; ++pad) out << ' ';
    append_metric_cells(out, row.metrics);
    out << "  ";
    out.setf(std::ios::scientific, std::ios::floatfield);
    out.precision(3);
    out << row.metrics.mean_prediction_time << '\n';
    out.unsetf(std::ios::floatfield);
  }
  return out.str();
}

ComparisonResult run_comparison(const AgentConfig& agent, const BaselineConfig& baseline,
                                const TrainerOptions& opts, const Dataset& data) {
  auto mlp = std::async(std::launch::async, [&] {
    return run_baseline_regime(baseline, opts, data);
  });
  auto without_update = std::async(std::launch::async, [&] {
    return run_all_at_once(agent, opts, data);
  });
  auto with_update = std::async(std::launch::async, [&] {
    return run_daily_update(agent, opts, data);
  });

  ComparisonResult result;
  result.rows[0] = {"MLP Network", mlp.get().final_metrics};
  result.rows[1] = {"DDQN without Update Policy", without_update.get().final_metrics};
  result.rows[2] = {"DDQN with Update Policy", with_update.get().final_metrics};
  return result;
}

}  // namespace dqlap
