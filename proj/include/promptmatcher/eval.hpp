#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "engine.hpp"
#include "model.hpp"
#include "oracle.hpp"

namespace pm {

struct F1Score {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Correspondence-level precision/recall/F1 of one candidate against the
// set of true pairs in gt. Empty intersections yield zeros.
F1Score candidate_f1(const CandidateResultSet& crs, const CandidateResult& cand,
                     const GroundTruth& gt);

// View indices by descending probability; ties keep original order.
std::vector<size_t> rank_candidates(const ViewSet& vs);

struct MrrResult {
  double mrr = 0.0;
  size_t rank = 0;  // 1-based position of the best-F1 candidate's view
  std::vector<std::string> optimal_candidates;
  double best_f1 = 0.0;
};

// Reciprocal rank of the best-F1 candidate; with several optima the best
// (smallest) position counts.
MrrResult mrr_of(const CandidateResultSet& crs, const ViewSet& vs, const GroundTruth& gt);

struct ExperimentDataset {
  std::string name;
  std::string crs_path;
  std::string gt_path;
};

struct ExperimentSpec {
  std::vector<ExperimentDataset> datasets;
  std::vector<Strategy> strategies;
  std::vector<double> budget_fractions;  // of the dataset's total cost
  std::vector<int64_t> budgets;          // absolute; used when fractions empty
  std::vector<uint64_t> seeds;
  int rounds_k = 4;
  double planning_accuracy = 0.9;
  double oracle_accuracy = 0.9;
  int exact_cap = 16;
  int mc_samples = 20000;
  int64_t chars_per_token = 4;
};

struct ExperimentCell {
  std::string dataset;
  std::string strategy;
  int64_t budget = 0;
  uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double mrr = 0.0;
  size_t rank_of_best = 0;
  double final_entropy = 0.0;
  double initial_entropy = 0.0;
  int64_t wall_ms = 0;
};

struct ExperimentReport {
  std::vector<ExperimentCell> cells;
};

// Full grid with a simulated oracle per cell; failures are recorded and the
// grid continues.
ExperimentReport run_experiment(const ExperimentSpec& spec);

std::string experiment_to_json(const ExperimentReport& report);
// Columns: dataset,strategy,budget,seed,mrr,final_entropy_nats,rank_of_best,wall_ms
std::string experiment_to_csv(const ExperimentReport& report);

struct SchemaDef {
  std::string name;
  std::vector<std::pair<std::string, std::vector<std::string>>> attributes;
};

SchemaDef parse_schema(const std::string& json_text);
SchemaDef load_schema(const std::string& path);

// Built-in matcher ensemble (exact name, case-folded name, prefix, trigram
// jaccard at two thresholds, edit distance at two thresholds); each distinct
// matching becomes a candidate with equal probability. Throws
// DegenerateSchemas when nothing matches at all.
CandidateResultSet gen_demo_crs(const SchemaDef& source, const SchemaDef& target,
                                uint64_t seed);

// Toy pair used by the demo command when no schemas are given.
SchemaDef demo_source_schema();
SchemaDef demo_target_schema();

struct SyntheticSpec {
  uint64_t seed = 0;
  int source_attrs = 12;
  int target_attrs = 12;
  int candidates = 8;
  int min_edits = 2;  // candidate distance from the true matching
  int max_edits = 4;
};

struct SyntheticFixture {
  CandidateResultSet crs;
  GroundTruth gt;
};

// Seeded generator for end-to-end fixtures: a true matching shipped as both
// a candidate and the ground truth, plus perturbed rivals.
SyntheticFixture gen_synthetic_crs(const SyntheticSpec& spec);

struct BenchRow {
  std::string strategy;
  int64_t budget = 0;
  double wall_ms = 0.0;
  double objective = 0.0;
  uint64_t evaluations = 0;
  int64_t cost = 0;
  size_t chosen = 0;
};

// Times each strategy at each budget on one instance.
std::vector<BenchRow> run_bench(const CandidateResultSet& crs,
                                const std::vector<int64_t>& budgets,
                                const std::vector<Strategy>& strategies,
                                double planning_accuracy, uint64_t seed,
                                int exact_cap = 16);

// Columns: budget,strategy,wall_ms,objective_nats,evaluations,cost,chosen
std::string bench_to_csv(const std::vector<BenchRow>& rows);

}  // namespace pm
