#include "dqlap/run_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "dqlap/errors.hpp"

namespace dqlap {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double to_double(const std::string& key, const std::string& value) {
  double v = 0.0;
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), last, v);
  if (ec != std::errc{} || ptr != last || value.empty()) {
    throw ConfigError(key + ": expected a number, got \"" + value + "\"");
  }
  return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), last, v);
  if (ec != std::errc{} || ptr != last || value.empty()) {
    throw ConfigError(key + ": expected a non-negative integer, got \"" + value + "\"");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError(key + ": expected true/false, got \"" + value + "\"");
}

std::vector<std::size_t> to_size_list(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  if (trim(value).empty()) return out;  // empty list = linear model
  std::stringstream ss(value);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    out.push_back(static_cast<std::size_t>(to_u64(key, trim(cell))));
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string format_size_list(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

// One entry per config key: how to set it from text and how to echo it back.
struct KeyHandler {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::map<std::string, KeyHandler>& key_table() {
  static const std::map<std::string, KeyHandler> table = [] {
    std::map<std::string, KeyHandler> t;
    auto add = [&t](const std::string& key,
                    std::function<void(RunConfig&, const std::string&)> set,
                    std::function<std::string(const RunConfig&)> get) {
      t.emplace(key, KeyHandler{std::move(set), std::move(get)});
    };

    add("seed",
        [](RunConfig& c, const std::string& v) { c.seed = to_u64("seed", v); },
        [](const RunConfig& c) { return std::to_string(c.seed); });
    add("out",
        [](RunConfig& c, const std::string& v) { c.out_dir = v; },
        [](const RunConfig& c) { return c.out_dir; });
    add("data.source",
        [](RunConfig& c, const std::string& v) {
          if (v == "synthetic") c.source = DataSource::synthetic;
          else if (v == "csv") c.source = DataSource::csv;
          else throw ConfigError("data.source: expected synthetic or csv, got \"" + v + "\"");
        },
        [](const RunConfig& c) {
          return c.source == DataSource::synthetic ? "synthetic" : "csv";
        });
    add("data.csv",
        [](RunConfig& c, const std::string& v) { c.csv_path = v; },
        [](const RunConfig& c) { return c.csv_path; });

    add("synthetic.feature_count",
        [](RunConfig& c, const std::string& v) {
          c.synthetic.feature_count = static_cast<std::size_t>(to_u64("synthetic.feature_count", v));
        },
        [](const RunConfig& c) { return std::to_string(c.synthetic.feature_count); });
    add("synthetic.days",
        [](RunConfig& c, const std::string& v) {
          c.synthetic.days = static_cast<int>(to_u64("synthetic.days", v));
        },
        [](const RunConfig& c) { return std::to_string(c.synthetic.days); });
    add("synthetic.samples_per_day",
        [](RunConfig& c, const std::string& v) {
          c.synthetic.samples_per_day = static_cast<std::size_t>(to_u64("synthetic.samples_per_day", v));
        },
        [](const RunConfig& c) { return std::to_string(c.synthetic.samples_per_day); });
    add("synthetic.imbalance_ratio",
        [](RunConfig& c, const std::string& v) {
          c.synthetic.imbalance_ratio = to_double("synthetic.imbalance_ratio", v);
        },
        [](const RunConfig& c) { return format_double(c.synthetic.imbalance_ratio); });
    add("synthetic.class_separation",
        [](RunConfig& c, const std::string& v) {
          c.synthetic.class_separation = to_double("synthetic.class_separation", v);
        },
        [](const RunConfig& c) { return format_double(c.synthetic.class_separation); });
    add("synthetic.drift_rate",
        [](RunConfig& c, const std::string& v) {
          c.synthetic.drift_rate = to_double("synthetic.drift_rate", v);
        },
        [](const RunConfig& c) { return format_double(c.synthetic.drift_rate); });

    add("split.train_fraction",
        [](RunConfig& c, const std::string& v) {
          c.split.train_fraction = to_double("split.train_fraction", v);
        },
        [](const RunConfig& c) { return format_double(c.split.train_fraction); });
    add("split.stratified",
        [](RunConfig& c, const std::string& v) {
          c.split.stratified = to_bool("split.stratified", v);
        },
        [](const RunConfig& c) { return c.split.stratified ? "true" : "false"; });

    add("network.hidden",
        [](RunConfig& c, const std::string& v) { c.hidden = to_size_list("network.hidden", v); },
        [](const RunConfig& c) { return format_size_list(c.hidden); });

    add("agent.minibatch_size",
        [](RunConfig& c, const std::string& v) {
          c.agent.minibatch_size = static_cast<std::size_t>(to_u64("agent.minibatch_size", v));
        },
        [](const RunConfig& c) { return std::to_string(c.agent.minibatch_size); });
    add("agent.gamma",
        [](RunConfig& c, const std::string& v) { c.agent.gamma = to_double("agent.gamma", v); },
        [](const RunConfig& c) { return format_double(c.agent.gamma); });
    add("agent.iterations",
        [](RunConfig& c, const std::string& v) {
          c.agent.iterations = static_cast<std::size_t>(to_u64("agent.iterations", v));
        },
        [](const RunConfig& c) { return std::to_string(c.agent.iterations); });
    add("agent.learning_rate",
        [](RunConfig& c, const std::string& v) {
          c.agent.adam.learning_rate = to_double("agent.learning_rate", v);
        },
        [](const RunConfig& c) { return format_double(c.agent.adam.learning_rate); });
    add("agent.adam_beta1",
        [](RunConfig& c, const std::string& v) {
          c.agent.adam.beta1 = to_double("agent.adam_beta1", v);
        },
        [](const RunConfig& c) { return format_double(c.agent.adam.beta1); });
    add("agent.adam_beta2",
        [](RunConfig& c, const std::string& v) {
          c.agent.adam.beta2 = to_double("agent.adam_beta2", v);
        },
        [](const RunConfig& c) { return format_double(c.agent.adam.beta2); });
    add("agent.adam_epsilon",
        [](RunConfig& c, const std::string& v) {
          c.agent.adam.epsilon = to_double("agent.adam_epsilon", v);
        },
        [](const RunConfig& c) { return format_double(c.agent.adam.epsilon); });
    add("agent.replay_capacity",
        [](RunConfig& c, const std::string& v) {
          c.agent.replay_capacity = static_cast<std::size_t>(to_u64("agent.replay_capacity", v));
        },
        [](const RunConfig& c) { return std::to_string(c.agent.replay_capacity); });
    add("agent.target_sync_interval",
        [](RunConfig& c, const std::string& v) {
          c.agent.target_sync_interval =
              static_cast<std::size_t>(to_u64("agent.target_sync_interval", v));
        },
        [](const RunConfig& c) { return std::to_string(c.agent.target_sync_interval); });
    add("agent.epsilon_initial",
        [](RunConfig& c, const std::string& v) {
          c.agent.schedules.epsilon = to_double("agent.epsilon_initial", v);
        },
        [](const RunConfig& c) { return format_double(c.agent.schedules.epsilon); });
    add("agent.epsilon_decay",
        [](RunConfig& c, const std::string& v) {
          c.agent.schedules.epsilon_decay = to_double("agent.epsilon_decay", v);
        },
        [](const RunConfig& c) { return format_double(c.agent.schedules.epsilon_decay); });
    add("agent.epsilon_min",
        [](RunConfig& c, const std::string& v) {
          c.agent.schedules.epsilon_min = to_double("agent.epsilon_min", v);
        },
        [](const RunConfig& c) { return format_double(c.agent.schedules.epsilon_min); });
    add("agent.mix_alpha_initial",
        [](RunConfig& c, const std::string& v) {
          c.agent.schedules.mix_alpha = to_double("agent.mix_alpha_initial", v);
        },
        [](const RunConfig& c) { return format_double(c.agent.schedules.mix_alpha); });
    add("agent.mix_alpha_decay",
        [](RunConfig& c, const std::string& v) {
          c.agent.schedules.mix_alpha_decay = to_double("agent.mix_alpha_decay", v);
        },
        [](const RunConfig& c) { return format_double(c.agent.schedules.mix_alpha_decay); });
    add("agent.mix_alpha_min",
        [](RunConfig& c, const std::string& v) {
          c.agent.schedules.mix_alpha_min = to_double("agent.mix_alpha_min", v);
        },
        [](const RunConfig& c) { return format_double(c.agent.schedules.mix_alpha_min); });
    add("agent.double_q",
        [](RunConfig& c, const std::string& v) {
          if (v == "target_only") c.agent.flavor = DoubleQFlavor::target_only;
          else if (v == "van_hasselt") c.agent.flavor = DoubleQFlavor::van_hasselt;
          else throw ConfigError("agent.double_q: expected target_only or van_hasselt, got \"" + v + "\"");
        },
        [](const RunConfig& c) {
          return c.agent.flavor == DoubleQFlavor::target_only ? "target_only" : "van_hasselt";
        });
    add("agent.early_stop_macro_recall",
        [](RunConfig& c, const std::string& v) {
          c.agent.early_stop_macro_recall = to_double("agent.early_stop_macro_recall", v);
        },
        [](const RunConfig& c) { return format_double(c.agent.early_stop_macro_recall); });

    add("baseline.epochs",
        [](RunConfig& c, const std::string& v) {
          c.baseline.epochs = static_cast<std::size_t>(to_u64("baseline.epochs", v));
        },
        [](const RunConfig& c) { return std::to_string(c.baseline.epochs); });
    add("baseline.loss",
        [](RunConfig& c, const std::string& v) {
          if (v == "mse_on_onehot") c.baseline.loss = BaselineLoss::mse_on_onehot;
          else if (v == "cross_entropy") c.baseline.loss = BaselineLoss::cross_entropy;
          else throw ConfigError("baseline.loss: expected mse_on_onehot or cross_entropy, got \"" + v + "\"");
        },
        [](const RunConfig& c) {
          return c.baseline.loss == BaselineLoss::mse_on_onehot ? "mse_on_onehot"
                                                                : "cross_entropy";
        });

    add("trainer.per_day_iterations",
        [](RunConfig& c, const std::string& v) {
          c.trainer.per_day_iterations =
              static_cast<std::size_t>(to_u64("trainer.per_day_iterations", v));
        },
        [](const RunConfig& c) { return std::to_string(c.trainer.per_day_iterations); });
    add("trainer.warm_start_epsilon",
        [](RunConfig& c, const std::string& v) {
          c.trainer.warm_start_epsilon = to_double("trainer.warm_start_epsilon", v);
        },
        [](const RunConfig& c) { return format_double(c.trainer.warm_start_epsilon); });
    add("trainer.reset_schedules",
        [](RunConfig& c, const std::string& v) {
          c.trainer.reset_schedules = to_bool("trainer.reset_schedules", v);
        },
        [](const RunConfig& c) { return c.trainer.reset_schedules ? "true" : "false"; });
    add("trainer.time_repetitions",
        [](RunConfig& c, const std::string& v) {
          c.trainer.time_repetitions =
              static_cast<std::size_t>(to_u64("trainer.time_repetitions", v));
        },
        [](const RunConfig& c) { return std::to_string(c.trainer.time_repetitions); });

    add("project.normalize",
        [](RunConfig& c, const std::string& v) {
          c.project_normalize = to_bool("project.normalize", v);
        },
        [](const RunConfig& c) { return c.project_normalize ? "true" : "false"; });

    return t;
  }();
  return table;
}

}  // namespace

AgentConfig RunConfig::resolved_agent() const {
  AgentConfig cfg = agent;
  cfg.hidden = hidden;
  cfg.seed = seed;
  return cfg;
}

BaselineConfig RunConfig::resolved_baseline() const {
  BaselineConfig cfg = baseline;
  cfg.hidden = hidden;
  cfg.minibatch_size = agent.minibatch_size;
  cfg.adam = agent.adam;
  cfg.seed = seed;
  if (cfg.epochs == 0) cfg.epochs = agent.iterations;  // wall-clock parity
  return cfg;
}

TrainerOptions RunConfig::resolved_trainer() const {
  TrainerOptions opts = trainer;
  opts.split = split;
  opts.split.seed = seed;
  return opts;
}

Dataset RunConfig::load_dataset() const {
  if (source == DataSource::csv) {
    if (csv_path.empty()) {
      throw ConfigError("data.csv: path required when data.source = csv");
    }
    return load_csv(csv_path);
  }
  SyntheticSpec spec = synthetic;
  spec.seed = seed;
  return generate_synthetic(spec);
}

std::string RunConfig::resolved_text() const {
  std::string out;
  for (const auto& [key, handler] : key_table()) {
    out += key;
    out += " = ";
    out += handler.get(*this);
    out += '\n';
  }
  return out;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in.is_open()) {
    throw ConfigError("cannot open config file: " + path.string());
  }
  RunConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line.erase(comment);
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": expected key = value");
    }
    apply_override(config, trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
  }
  return config;
}

void apply_override(RunConfig& config, const std::string& key, const std::string& value) {
  const auto& table = key_table();
  const auto it = table.find(key);
  if (it == table.end()) {
    throw ConfigError("unknown config key \"" + key + "\"");
  }
  it->second.set(config, value);
}

void validate(const RunConfig& config) {
  if (!(config.split.train_fraction > 0.0 && config.split.train_fraction < 1.0)) {
    throw ConfigError("split.train_fraction must lie in (0, 1)");
  }
  config.resolved_agent().validate();
  config.resolved_baseline().validate();
  if (!(config.trainer.warm_start_epsilon >= 0.0 && config.trainer.warm_start_epsilon <= 1.0)) {
    throw ConfigError("trainer.warm_start_epsilon must lie in [0, 1]");
  }
  if (config.source == DataSource::synthetic) {
    const auto& s = config.synthetic;
    if (s.feature_count == 0 || s.days < 1 || s.samples_per_day == 0) {
      throw ConfigError("synthetic counts must be positive");
    }
    if (!(s.imbalance_ratio >= 1.0)) {
      throw ConfigError("synthetic.imbalance_ratio must be >= 1");
    }
    if (!(s.class_separation >= 0.0)) {
      throw ConfigError("synthetic.class_separation must be >= 0");
    }
    if (!std::isfinite(s.drift_rate)) {
      throw ConfigError("synthetic.drift_rate must be finite");
    }
  } else if (config.csv_path.empty()) {
    throw ConfigError("data.csv: path required when data.source = csv");
  }
}

std::string config_hash(const std::string& resolved_text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : resolved_text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  static const char* hex = "0123456789abcdef";
  for (int i = 0; i < 16; ++i) {
    buf[i] = hex[(h >> (60 - 4 * i)) & 0xF];
  }
  buf[16] = '\0';
  return std::string(buf);
}

}  // namespace dqlap
