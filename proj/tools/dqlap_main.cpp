// Command-line driver: dataset generation, the three training regimes, the
// comparison table and the 2D projection export. Every run writes into a
// directory stamped by a hash of the resolved configuration, so identical
// config + seed reproduces identical files.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dqlap/agent.hpp"
#include "dqlap/baseline.hpp"
#include "dqlap/dataset.hpp"
#include "dqlap/errors.hpp"
#include "dqlap/network.hpp"
#include "dqlap/pca.hpp"
#include "dqlap/run_config.hpp"
#include "dqlap/trainer.hpp"

namespace fs = std::filesystem;
using namespace dqlap;

namespace {

enum ExitCode { kOk = 0, kConfigError = 2, kDataError = 3, kRuntimeError = 4 };

int log_level() {
  const char* env = std::getenv("DQLAP_LOG");
  if (env == nullptr) return 1;  // info
  const std::string v(env);
  if (v == "quiet") return 0;
  if (v == "debug") return 2;
  return 1;
}

void info(const std::string& msg) {
  if (log_level() >= 1) std::cout << msg << "\n";
}

void debug_line(const std::string& msg) {
  if (log_level() >= 2) std::cout << msg << "\n";
}

struct CommonFlags {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value pairs
  std::string seed;
  std::string out;
  std::string data;
};

RunConfig resolve_config(const CommonFlags& flags) {
  RunConfig cfg;
  if (!flags.config_path.empty()) {
    cfg = load_run_config(flags.config_path);
  }
  for (const std::string& pair : flags.overrides) {
    const auto eq = pair.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--set expects key=value, got \"" + pair + "\"");
    }
    apply_override(cfg, pair.substr(0, eq), pair.substr(eq + 1));
  }
  // Dedicated flags take the highest precedence.
  if (!flags.seed.empty()) apply_override(cfg, "seed", flags.seed);
  if (!flags.out.empty()) apply_override(cfg, "out", flags.out);
  if (!flags.data.empty()) {
    apply_override(cfg, "data.source", "csv");
    apply_override(cfg, "data.csv", flags.data);
  }
  validate(cfg);
  return cfg;
}

// Deterministic run directory: <out>/<command>-<config hash prefix>.
fs::path make_run_dir(const RunConfig& cfg, const std::string& command) {
  const std::string resolved = cfg.resolved_text();
  const std::string stamp = config_hash(command + "\n" + resolved).substr(0, 8);
  const fs::path dir = fs::path(cfg.out_dir) / (command + "-" + stamp);
  fs::create_directories(dir);
  std::ofstream echo(dir / "config.resolved", std::ios::trunc);
  echo << resolved;
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out.is_open()) {
    throw DataError("cannot write output file: " + path.string());
  }
  out << text;
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out.is_open()) {
    throw DataError("cannot write output file: " + path.string());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

ProgressSink file_sink(std::ofstream& stream) {
  return [&stream](const IterationRecord& rec) {
    stream << rec.to_json_line() << "\n";
    debug_line("iteration " + std::to_string(rec.iteration) + " macro_recall=" +
               std::to_string(rec.test_metrics.macro_recall));
  };
}

int cmd_generate(const CommonFlags& flags) {
  const RunConfig cfg = resolve_config(flags);
  const fs::path dir = make_run_dir(cfg, "generate");

  SyntheticSpec spec = cfg.synthetic;
  spec.seed = cfg.seed;
  const Dataset data = generate_synthetic(spec);
  write_csv(data, dir / "dataset.csv");

  for (int day = 1; day <= data.day_count; ++day) {
    std::size_t fault = 0, normal = 0;
    for (const auto& s : data.samples) {
      if (s.day == day) (s.label == 0 ? fault : normal) += 1;
    }
    std::cout << "day " << day << ": " << normal << " normal, " << fault
              << " fault\n";
  }
  info("wrote " + (dir / "dataset.csv").string());
  return kOk;
}

void write_daily_records(const fs::path& dir, const std::string& regime,
                         const std::vector<DailyRunRecord>& records) {
  std::ofstream out(dir / "records.jsonl", std::ios::trunc);
  for (const auto& rec : records) {
    out << rec.to_json_line() << "\n";
    write_bytes(dir / (regime + "-day" + std::to_string(rec.day) + ".qnet"),
                rec.checkpoint);
  }
}

int cmd_train(const CommonFlags& flags, const std::string& regime) {
  const RunConfig cfg = resolve_config(flags);
  const fs::path dir = make_run_dir(cfg, "train-" + regime);
  const Dataset data = cfg.load_dataset();

  std::ofstream progress(dir / "progress.jsonl", std::ios::trunc);
  const ProgressSink sink = file_sink(progress);

  RegimeResult result;
  if (regime == "baseline") {
    result = run_baseline_regime(cfg.resolved_baseline(), cfg.resolved_trainer(),
                                 data, sink);
  } else if (regime == "ddqn") {
    result = run_all_at_once(cfg.resolved_agent(), cfg.resolved_trainer(), data, sink);
  } else if (regime == "ddqn-daily") {
    result = run_daily_update(cfg.resolved_agent(), cfg.resolved_trainer(), data, sink);
  } else {
    throw ConfigError("unknown regime \"" + regime +
                      "\" (expected baseline, ddqn or ddqn-daily)");
  }

  write_text(dir / "metrics.json", result.final_metrics.to_json() + "\n");
  write_daily_records(dir, regime, result.daily);
  write_bytes(dir / (regime + ".qnet"), result.checkpoint);

  info("final macro_f1 " + std::to_string(result.final_metrics.macro_f1) +
       ", outputs in " + dir.string());
  return kOk;
}

int cmd_compare(const CommonFlags& flags) {
  const RunConfig cfg = resolve_config(flags);
  const fs::path dir = make_run_dir(cfg, "compare");
  const Dataset data = cfg.load_dataset();

  TrainerOptions opts = cfg.resolved_trainer();
  if (opts.time_repetitions == 0) opts.time_repetitions = 5;
  const ComparisonResult result =
      run_comparison(cfg.resolved_agent(), cfg.resolved_baseline(), opts, data);

  // The metric table is deterministic; the wall-clock latency column goes to
  // its own file, which reruns are allowed to change.
  write_text(dir / "comparison_table.txt", result.table_text());
  write_text(dir / "prediction_time.txt", result.timed_table_text());
  std::cout << result.table_text();
  info("outputs in " + dir.string());
  return kOk;
}

int cmd_project(const CommonFlags& flags, const std::string& checkpoint,
                bool truth_only) {
  const RunConfig cfg = resolve_config(flags);
  const fs::path dir = make_run_dir(cfg, "project");
  Dataset data = cfg.load_dataset();

  if (cfg.project_normalize) {
    data = apply_scaler(data, fit_scaler(data));
  }
  const Projection2D projection = pca_project(data);
  write_projection_csv(projection, projection.labels, dir / "projection_truth.csv");

  if (!truth_only) {
    if (checkpoint.empty()) {
      throw DataError(
          "project: --checkpoint required for prediction labels "
          "(or pass --truth-only)");
    }
    const QNetwork net = load_network(checkpoint);
    const std::vector<int> predicted = predict(net, data);
    write_projection_csv(projection, predicted, dir / "projection_predicted.csv");
  }
  info("outputs in " + dir.string());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Fault-detection workbench: a double deep Q-network over the "
      "classification MDP, a supervised MLP baseline, daily cumulative "
      "updates and evaluation tooling"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string regime;
  std::string checkpoint;
  bool truth_only = false;

  auto add_common = [&flags](CLI::App* cmd) {
    cmd->add_option("--config", flags.config_path, "Config file (key = value lines)");
    cmd->add_option("--set", flags.overrides,
                    "Override one key, e.g. --set agent.gamma=0.9");
    cmd->add_option("--seed", flags.seed, "Seed override");
    cmd->add_option("--out", flags.out, "Output root directory");
    cmd->add_option("--data", flags.data, "Dataset CSV (implies data.source=csv)");
  };

  CLI::App* generate = app.add_subcommand("generate", "Write a synthetic dataset CSV");
  add_common(generate);

  CLI::App* train = app.add_subcommand("train", "Train one regime");
  add_common(train);
  train->add_option("--regime", regime, "baseline | ddqn | ddqn-daily")->required();

  CLI::App* compare = app.add_subcommand("compare", "Run the three-regime comparison");
  add_common(compare);

  CLI::App* project = app.add_subcommand("project", "Export the 2D PCA projection");
  add_common(project);
  project->add_option("--checkpoint", checkpoint,
                      "Network checkpoint for predicted labels");
  project->add_flag("--truth-only", truth_only, "Skip the prediction-labeled file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return cmd_generate(flags);
    if (train->parsed()) return cmd_train(flags, regime);
    if (compare->parsed()) return cmd_compare(flags);
    if (project->parsed()) return cmd_project(flags, checkpoint, truth_only);
  } catch (const ConfigError& e) {
    std::cerr << "error code=2 kind=config msg=\"" << e.what() << "\"\n";
    return kConfigError;
  } catch (const DataError& e) {
    std::cerr << "error code=3 kind=data msg=\"" << e.what() << "\"\n";
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error code=4 kind=runtime msg=\"" << e.what() << "\"\n";
    return kRuntimeError;
  }
  return kOk;
}
