#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "model.hpp"

namespace pm {

enum class OracleKind { Simulated, Replay, Llm };
enum class PromptKind { Semantic, Abbreviation };

struct Answer {
  std::string corr_id;
  bool verdict = false;
  double confidence = 0.9;  // in [0.5, 1]
  std::string provenance;   // simulated | replay | llm | cache
  std::string raw_response;
};

// Attribute-level truth: which (source set, target set) pairs actually match.
// Keys are canonical: names sorted within each side, case-sensitive.
struct GroundTruth {
  std::map<std::string, bool> entries;

  static std::string key(std::vector<std::string> source_names,
                         std::vector<std::string> target_names);
  static std::string key_for(const Correspondence& c);

  // throws GroundTruthMissing
  bool lookup(const Correspondence& c) const;
};

GroundTruth parse_ground_truth(const std::string& json_text);
GroundTruth load_ground_truth(const std::string& path);
std::string dump_ground_truth(const GroundTruth& gt);

struct OracleConfig {
  OracleKind kind = OracleKind::Simulated;

  // simulated
  double accuracy = 0.9;  // in (0.5, 1]
  uint64_t seed = 0;
  std::string ground_truth_path;
  std::optional<GroundTruth> ground_truth;  // wins over the path

  // replay
  std::string transcript_path;

  // llm
  std::string endpoint_url;
  std::string model_name;
  PromptKind prompt = PromptKind::Semantic;
  std::string schema_name;  // domain context for the abbreviation prompt
  double temperature = 0.0;
  int max_retries = 3;
  int backoff_ms = 500;
  int max_parallel = 4;
  std::string cache_dir;
  double fixed_confidence = 0.9;  // when the reply has no usable confidence

  // optional JSONL record of every answer
  std::string record_transcript_path;
};

// Deterministic prompt text. The abbreviation variant needs a schema name
// for its domain line (MissingSchemaName otherwise) and quotes at most the
// first three sample values per attribute.
std::string render_prompt(const Correspondence& c, PromptKind kind,
                          const std::string& schema_name);

// Extracts (verdict, confidence) from a chat-completion reply: first a JSON
// object carrying "answer", then a true/false token plus a percentage or
// decimal. Confidence below 0.5 flips the verdict; the result is clamped to
// [0.5, 1]. Throws ParseFailure when no verdict is found.
std::pair<bool, double> parse_llm_response(const std::string& text,
                                           double fixed_confidence = 0.9);

class Oracle {
 public:
  explicit Oracle(OracleConfig cfg);
  ~Oracle();

  Answer verify(const Correspondence& c);
  // Answers in input order; the llm kind may run bounded parallel requests.
  std::vector<Answer> verify_batch(const std::vector<Correspondence>& cs);

  const OracleConfig& config() const { return cfg_; }

 private:
  struct Impl;
  OracleConfig cfg_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pm
