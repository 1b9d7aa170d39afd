#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pm {

// File-backed defaults for the CLI; flags override env, env overrides file.
// Unknown keys are rejected with the list of valid ones.
struct CliConfig {
  std::optional<uint64_t> seed;
  std::optional<int64_t> budget;
  std::optional<int> rounds;
  std::optional<std::string> strategy;
  std::optional<double> planning_accuracy;
  std::optional<int> exact_cap;
  std::optional<int> mc_samples;
  std::optional<double> stop_entropy;
  std::optional<bool> allow_requery;
  std::optional<std::string> on_oracle_error;
  std::optional<int64_t> chars_per_token;
  std::optional<std::string> log_level;

  std::optional<std::string> oracle_kind;
  std::optional<double> oracle_accuracy;
  std::optional<uint64_t> oracle_seed;
  std::optional<std::string> ground_truth;
  std::optional<std::string> transcript;
  std::optional<std::string> endpoint_url;
  std::optional<std::string> model;
  std::optional<std::string> prompt_template;
  std::optional<std::string> schema_name;
  std::optional<double> temperature;
  std::optional<int> max_retries;
  std::optional<int> backoff_ms;
  std::optional<std::string> cache_dir;
  std::optional<double> fixed_confidence;
  std::optional<int> max_parallel;
  std::optional<std::string> record_transcript;
};

CliConfig parse_cli_config(const std::string& json_text);
CliConfig load_cli_config(const std::string& path);

// PM_SEED and PM_LOG_LEVEL; ORACLE_API_KEY is read by the oracle itself and
// its value is never logged.
void apply_env(CliConfig& cfg);

const std::vector<std::string>& valid_config_keys();

enum class LogLevel { Debug = 0, Info = 1, Warn = 2, Error = 3 };

LogLevel log_level_from_name(const std::string& name);  // throws BadConfig
void set_log_level(LogLevel level);
LogLevel log_level();
void log_line(LogLevel level, const std::string& msg);  // stderr

}  // namespace pm
