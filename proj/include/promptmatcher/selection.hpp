#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "model.hpp"
#include "objective.hpp"

namespace pm {

// Verification cost of one correspondence in tokens: the explicit cost when
// present, otherwise characters of all attribute names plus up to the first
// three sample values per attribute, divided by chars_per_token, rounded up,
// floor 1.
int64_t token_cost(const Correspondence& c, int64_t chars_per_token = 4);

struct CostModel {
  int64_t chars_per_token = 4;

  int64_t cost(const Correspondence& c) const { return token_cost(c, chars_per_token); }
};

struct SelectionOptions {
  PlanningAccuracy accuracy;
  EvalOptions eval;
  bool auto_monte_carlo = false;  // sample instead of CapExceeded past exact_cap
  uint64_t seed = 0;              // random_select order; monte-carlo derivation base
};

struct SelectionResult {
  std::vector<std::string> chosen;
  int64_t total_cost = 0;
  double objective_value = 0.0;  // expected_reduction, nats
  uint64_t evaluations = 0;
};

// Exhaustive optimum over all subsets within budget. Ties resolved by
// smaller cost, then lexicographic id tuple. Throws InstanceTooLarge
// beyond 24 candidates.
SelectionResult brute_select(const ViewSet& vs, const std::vector<Correspondence>& pool,
                             const CostModel& w, int64_t budget, const SelectionOptions& opt);

// Partial enumeration: best subset of size <= 2, and every feasible size-3
// seed grown by marginal gain per cost; the better of the two by objective.
SelectionResult greedy_select(const ViewSet& vs, const std::vector<Correspondence>& pool,
                              const CostModel& w, int64_t budget, const SelectionOptions& opt);

// Seeded shuffle; adds items in order, skipping any that no longer fit.
SelectionResult random_select(const ViewSet& vs, const std::vector<Correspondence>& pool,
                              const CostModel& w, int64_t budget, const SelectionOptions& opt);

}  // namespace pm
