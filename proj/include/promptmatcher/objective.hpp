#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "model.hpp"

namespace pm {

// Joint verdict assignment over a set of correspondences together with the
// per-correspondence confidence entering the likelihood model.
struct AnswerFamily {
  std::vector<std::string> corr_ids;
  std::vector<uint8_t> verdicts;     // parallel to corr_ids
  std::vector<double> confidences;   // each in [0.5, 1]
};

// Assumed oracle accuracy used while planning. 0.5 carries no information
// and is rejected; values below 0.5 would invert the channel.
struct PlanningAccuracy {
  double global = 0.9;
  std::vector<std::pair<std::string, double>> overrides;

  double for_id(const std::string& corr_id) const;
  bool uniform() const { return overrides.empty(); }
  void validate() const;  // throws MalformedInput unless all in (0.5, 1]
};

enum class EvalMode { Exact, MonteCarlo };

struct EvalOptions {
  EvalMode mode = EvalMode::Exact;
  int exact_cap = 16;      // exact enumeration guard on |targets|
  int mc_samples = 100000;
  uint64_t mc_seed = 0;
};

// Shannon entropy in nats; 0*ln 0 := 0. Throws MalformedDistribution.
double entropy(std::span<const double> probs);

// Product over the family of (confidence if verdict agrees with the view's
// truth value, else 1 - confidence).
double answer_likelihood(const ViewSet& vs, size_t view, const AnswerFamily& fam);

// Mixture over views of the likelihood above.
double family_probability(const ViewSet& vs, const AnswerFamily& fam);

// -H(V | answers on targets); always <= 0. Exact mode enumerates all joint
// verdict outcomes (CapExceeded beyond exact_cap), monte_carlo estimates by
// seeded sampling from the answer mixture.
double neg_conditional_entropy(const ViewSet& vs, const std::vector<std::string>& targets,
                               const PlanningAccuracy& acc, const EvalOptions& opt = {});

// entropy(vs) + neg_conditional_entropy(...); >= 0 in exact mode.
double expected_reduction(const ViewSet& vs, const std::vector<std::string>& targets,
                          const PlanningAccuracy& acc, const EvalOptions& opt = {});

// Incremental subset evaluator over one ViewSet; the selection hot path.
// push/pop maintain the current target set by correspondence index.
class ReductionEvaluator {
 public:
  ReductionEvaluator(const ViewSet& vs, const PlanningAccuracy& acc, const EvalOptions& opt);

  void clear();
  void push(size_t corr_index);
  void pop(size_t corr_index);
  size_t size() const { return selected_.size(); }

  // expected_reduction of the current subset; counts one evaluation.
  // auto_monte_carlo falls back to sampling above exact_cap instead of
  // throwing CapExceeded; the sampling seed is derived from the subset.
  double value(bool auto_monte_carlo = false);

  double prior_entropy() const { return h_prior_; }
  uint64_t evaluations() const { return evals_; }

 private:
  bool enumeration_blowup() const;
  double exact_value();
  double mc_value();

  const ViewSet& vs_;
  EvalOptions opt_;
  double h_prior_ = 0.0;
  bool uniform_ = false;                // one accuracy for every correspondence
  std::vector<double> acc_by_item_;     // per correspondence index
  std::vector<double> hconf_by_item_;   // binary entropy of each accuracy
  std::vector<uint32_t> class_of_item_; // identical-column class (uniform path)
  std::vector<size_t> class_repr_;      // representative item per class
  std::vector<uint32_t> class_count_;   // selected count per class
  std::vector<size_t> selected_;
  std::vector<double> pow_p_, pow_q_;   // uniform accuracy powers
  std::vector<std::vector<double>> binom_;
  std::vector<double> cum_;             // cumulative view probabilities
  uint64_t evals_ = 0;

  // per-evaluation scratch, reused to keep the hot path allocation-free
  std::vector<uint32_t> lv_m_;
  std::vector<size_t> lv_item_;
  std::vector<uint64_t> pat_key_;
  std::vector<double> pat_prob_;
  std::vector<double> fac_;
  std::vector<size_t> fac_off_;
  std::vector<double> lrows_;
  std::vector<uint8_t> mc_verdict_;
};

}  // namespace pm
