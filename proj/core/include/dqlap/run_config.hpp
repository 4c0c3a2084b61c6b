#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dqlap/agent.hpp"
#include "dqlap/baseline.hpp"
#include "dqlap/dataset.hpp"
#include "dqlap/trainer.hpp"

namespace dqlap {

enum class DataSource { synthetic, csv };

// Every tunable of the pipeline in one validated record. Values are resolved
// in precedence order: built-in default < config file < explicit override.
struct RunConfig {
  std::uint64_t seed = 42;
  std::string out_dir = "runs";

  DataSource source = DataSource::synthetic;
  std::string csv_path;
  SyntheticSpec synthetic;

  SplitSpec split;
  std::vector<std::size_t> hidden = {32, 32, 24, 24, 16, 8, 4};
  AgentConfig agent;
  BaselineConfig baseline;  // epochs 0 = match agent iterations
  TrainerOptions trainer;
  bool project_normalize = true;

  // Builds the configs with shared fields (seed, architecture) propagated.
  AgentConfig resolved_agent() const;
  BaselineConfig resolved_baseline() const;
  TrainerOptions resolved_trainer() const;

  // Loads the dataset named by the config (CSV file or synthetic spec).
  Dataset load_dataset() const;

  // Canonical "key = value" text of every setting, sorted by key. This is
  // what gets echoed into the run directory and hashed into its name.
  std::string resolved_text() const;
};

// Parses a "key = value" file ('#' starts a comment). Unknown keys and
// out-of-range values are rejected with ConfigError.
RunConfig load_run_config(const std::filesystem::path& path);

// Applies one "key=value" override onto an existing config.
void apply_override(RunConfig& config, const std::string& key, const std::string& value);

// Range-checks every field; throws ConfigError naming the offending key.
void validate(const RunConfig& config);

// FNV-1a hash of the resolved text, as 16 hex digits. Stable across runs, so
// the run directory name is a pure function of the configuration.
std::string config_hash(const std::string& resolved_text);

}  // namespace dqlap
