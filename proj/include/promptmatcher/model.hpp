#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pm {

enum class SchemaSide { Source, Target };

struct AttributeRef {
  SchemaSide side = SchemaSide::Source;
  std::string name;                 // trimmed, non-empty
  std::vector<std::string> values;  // sample values, may be empty
};

struct Correspondence {
  std::string id;
  std::vector<AttributeRef> source_attrs;  // non-empty
  std::vector<AttributeRef> target_attrs;  // non-empty
  std::optional<int64_t> cost;             // explicit verification cost
};

struct CandidateResult {
  std::string id;
  std::vector<std::string> correspondence_ids;
  double probability = 0.0;
};

// Alternative matchings plus a probability distribution over them.
struct CandidateResultSet {
  std::string source_schema;
  std::string target_schema;
  std::vector<Correspondence> correspondences;
  std::vector<CandidateResult> candidates;

  const Correspondence* find(const std::string& corr_id) const;
};

// Truth-valued matrix over views x correspondences. Built from a candidate
// set; duplicate truth rows are merged, zero-probability rows dropped.
// Updates may later drive probabilities to zero; rows are kept then.
struct ViewSet {
  std::vector<std::string> correspondence_ids;
  std::vector<std::vector<uint8_t>> rows;  // rows[view][corr] in {0,1}
  std::vector<double> probabilities;
  std::vector<std::vector<std::string>> view_candidates;  // merged candidate ids per view

  size_t view_count() const { return rows.size(); }
  size_t corr_count() const { return correspondence_ids.size(); }
  // throws UnknownCorrespondence
  size_t index_of(const std::string& corr_id) const;
};

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  bool renormalized = false;

  bool ok() const { return errors.empty(); }
};

// Checks structural integrity: unique ids, known references, non-empty
// attribute lists, probability bounds, no attribute reused by two
// correspondences inside one candidate. A probability-sum drift of at most
// 1e-6 is renormalized in place and reported as a warning; larger drift is
// an error.
ValidationReport validate_crs(CandidateResultSet& crs);

// Requires a crs that validates without errors; throws MalformedInput otherwise.
ViewSet build_view_set(const CandidateResultSet& crs);

// Probability that corr_id holds, summed over views where it is true.
double marginal_probability(const ViewSet& vs, const std::string& corr_id);

CandidateResultSet parse_crs(const std::string& json_text);
CandidateResultSet load_crs(const std::string& path);
// Canonical form: UTF-8, object keys sorted, two-space indent.
std::string dump_crs(const CandidateResultSet& crs);
void save_crs(const CandidateResultSet& crs, const std::string& path);

}  // namespace pm
