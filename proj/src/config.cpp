#include "promptmatcher/config.hpp"

#include <json.hpp>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "promptmatcher/errors.hpp"

namespace pm {

using nlohmann::json;

namespace {

std::atomic<LogLevel> g_level{LogLevel::Warn};

template <typename T>
void read_int(const json& j, const char* key, std::optional<T>& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    throw domain_error("BadConfig", std::string("config key \"") + key + "\" must be an integer");
  }
  out = v.get<T>();
}

void read_double(const json& j, const char* key, std::optional<double>& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_number()) {
    throw domain_error("BadConfig", std::string("config key \"") + key + "\" must be a number");
  }
  out = v.get<double>();
}

void read_string(const json& j, const char* key, std::optional<std::string>& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_string()) {
    throw domain_error("BadConfig", std::string("config key \"") + key + "\" must be a string");
  }
  out = v.get<std::string>();
}

void read_bool(const json& j, const char* key, std::optional<bool>& out) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_boolean()) {
    throw domain_error("BadConfig", std::string("config key \"") + key + "\" must be a boolean");
  }
  out = v.get<bool>();
}

}  // namespace

const std::vector<std::string>& valid_config_keys() {
  static const std::vector<std::string> keys = {
      "allow_requery",  "backoff_ms",     "budget",          "cache_dir",
      "chars_per_token", "endpoint_url",  "exact_cap",       "fixed_confidence",
      "ground_truth",   "log_level",      "max_parallel",    "max_retries",
      "mc_samples",     "model",          "on_oracle_error", "oracle_accuracy",
      "oracle_kind",    "oracle_seed",    "planning_accuracy", "prompt_template",
      "record_transcript", "rounds",      "schema_name",     "seed",
      "stop_entropy",   "strategy",       "temperature",     "transcript"};
  return keys;
}

CliConfig parse_cli_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw io_error("BadConfig", std::string("config file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) {
    throw domain_error("BadConfig", "config file must hold a JSON object");
  }
  const auto& keys = valid_config_keys();
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const std::string& k : keys) {
      if (k == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      std::string valid;
      for (size_t i = 0; i < keys.size(); ++i) {
        if (i) valid += ", ";
        valid += keys[i];
      }
      throw domain_error("BadConfig",
                         "unknown config key \"" + key + "\" (valid keys: " + valid + ")");
    }
  }

  CliConfig cfg;
  read_int(j, "seed", cfg.seed);
  read_int(j, "budget", cfg.budget);
  read_int(j, "rounds", cfg.rounds);
  read_string(j, "strategy", cfg.strategy);
  read_double(j, "planning_accuracy", cfg.planning_accuracy);
  read_int(j, "exact_cap", cfg.exact_cap);
  read_int(j, "mc_samples", cfg.mc_samples);
  read_double(j, "stop_entropy", cfg.stop_entropy);
  read_bool(j, "allow_requery", cfg.allow_requery);
  read_string(j, "on_oracle_error", cfg.on_oracle_error);
  read_int(j, "chars_per_token", cfg.chars_per_token);
  read_string(j, "log_level", cfg.log_level);
  read_string(j, "oracle_kind", cfg.oracle_kind);
  read_double(j, "oracle_accuracy", cfg.oracle_accuracy);
  read_int(j, "oracle_seed", cfg.oracle_seed);
  read_string(j, "ground_truth", cfg.ground_truth);
  read_string(j, "transcript", cfg.transcript);
  read_string(j, "endpoint_url", cfg.endpoint_url);
  read_string(j, "model", cfg.model);
  read_string(j, "prompt_template", cfg.prompt_template);
  read_string(j, "schema_name", cfg.schema_name);
  read_double(j, "temperature", cfg.temperature);
  read_int(j, "max_retries", cfg.max_retries);
  read_int(j, "backoff_ms", cfg.backoff_ms);
  read_string(j, "cache_dir", cfg.cache_dir);
  read_double(j, "fixed_confidence", cfg.fixed_confidence);
  read_int(j, "max_parallel", cfg.max_parallel);
  read_string(j, "record_transcript", cfg.record_transcript);
  return cfg;
}

CliConfig load_cli_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw io_error("FileUnreadable", "cannot open config file \"" + path + "\"");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_cli_config(buf.str());
}

void apply_env(CliConfig& cfg) {
  if (const char* v = std::getenv("PM_SEED")) {
    try {
      size_t pos = 0;
      uint64_t s = std::stoull(v, &pos);
      if (pos != std::string(v).size()) throw std::invalid_argument("trailing characters");
      cfg.seed = s;
    } catch (const std::exception&) {
      throw domain_error("BadConfig", std::string("PM_SEED must be an unsigned integer, got \"") + v + "\"");
    }
  }
  if (const char* v = std::getenv("PM_LOG_LEVEL")) {
    log_level_from_name(v);  // validates
    cfg.log_level = std::string(v);
  }
}

LogLevel log_level_from_name(const std::string& name) {
  if (name == "debug") return LogLevel::Debug;
  if (name == "info") return LogLevel::Info;
  if (name == "warn") return LogLevel::Warn;
  if (name == "error") return LogLevel::Error;
  throw domain_error("BadConfig",
                     "unknown log level \"" + name + "\" (valid: debug, info, warn, error)");
}

void set_log_level(LogLevel level) { g_level.store(level); }

LogLevel log_level() { return g_level.load(); }

void log_line(LogLevel level, const std::string& msg) {
  if (level < g_level.load()) return;
  const char* tag = "info";
  switch (level) {
    case LogLevel::Debug:
      tag = "debug";
      break;
    case LogLevel::Info:
      tag = "info";
      break;
    case LogLevel::Warn:
      tag = "warn";
      break;
    case LogLevel::Error:
      tag = "error";
      break;
  }
  std::fprintf(stderr, "[%s] %s\n", tag, msg.c_str());
}

}  // namespace pm
