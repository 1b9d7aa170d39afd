#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "model.hpp"
#include "objective.hpp"
#include "oracle.hpp"
#include "selection.hpp"

namespace pm {

enum class Strategy { Greedy, Brute, Random };

const char* strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);  // throws BadConfig

enum class OracleErrorPolicy { Abort, Skip };

struct RunConfig {
  int64_t total_budget = 0;
  int rounds_k = 1;  // >= 1
  Strategy strategy = Strategy::Greedy;
  PlanningAccuracy planning_accuracy;
  uint64_t seed = 0;
  int exact_cap = 16;
  int mc_samples = 20000;
  std::optional<double> stop_entropy;
  bool allow_requery = false;
  OracleErrorPolicy on_oracle_error = OracleErrorPolicy::Abort;
  int64_t chars_per_token = 4;
};

struct RoundRecord {
  int round = 0;             // 1-based
  int64_t budget_share = 0;  // per-round slice of the total
  int64_t carry_in = 0;      // unspent budget rolled over
  std::vector<std::string> selected;
  int64_t round_cost = 0;
  double planned_reduction = 0.0;
  uint64_t evaluations = 0;
  std::vector<Answer> answers;
  std::vector<std::string> skipped;  // oracle failures under the skip policy
  double entropy_before = 0.0;
  double entropy_after = 0.0;
  int64_t spent_total = 0;
  int64_t remaining_total = 0;
};

struct RunReport {
  RunConfig config;
  std::string oracle_kind;
  double initial_entropy = 0.0;
  std::vector<double> initial_distribution;
  std::vector<RoundRecord> rounds;
  std::vector<double> final_distribution;
  double final_entropy = 0.0;
  std::vector<std::string> candidate_ranking;  // best first
  std::vector<double> candidate_posteriors;    // parallel to candidate_ranking
  std::vector<size_t> view_ranking;            // view indices, best first
  std::string stop_reason;
};

// The full verify-update loop: per-round budget total/k plus carry-over,
// selection among not-yet-asked correspondences, answers applied in
// selection order, early stop on exhaustion or the entropy target.
RunReport run(const CandidateResultSet& crs, const RunConfig& cfg, Oracle& oracle);

// Deterministic serialization: sorted keys, no wall-clock content.
std::string report_to_json(const RunReport& report);

}  // namespace pm
