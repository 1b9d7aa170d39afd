#pragma once

// Shared helpers for the test binaries: the worked-example instance, a
// brute-force reference for the objective, seeded random instances, and a
// subprocess runner for CLI checks.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <promptmatcher/model.hpp>
#include <promptmatcher/objective.hpp>
#include <promptmatcher/oracle.hpp>
#include <promptmatcher/rng.hpp>

namespace ts {

inline std::string source_dir() { return PM_SOURCE_DIR; }
inline std::string cli_bin() { return PM_CLI_BIN; }
inline std::string fixture(const std::string& rel) {
  return std::string(PM_SOURCE_DIR) + "/data/" + rel;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string temp_path(const std::string& tag) {
  static int counter = 0;
  return "/tmp/pm_test_" + std::to_string(::getpid()) + "_" + tag + "_" +
         std::to_string(counter++);
}

struct CmdResult {
  int status = -1;
  std::string out;
  std::string err;
};

// Runs through the shell with stdout/stderr captured to temp files.
inline CmdResult run_cmd(const std::string& cmd) {
  std::string so = temp_path("out"), se = temp_path("err");
  std::string full = cmd + " >" + so + " 2>" + se;
  int rc = std::system(full.c_str());
  CmdResult r;
  if (rc != -1 && WIFEXITED(rc)) r.status = WEXITSTATUS(rc);
  r.out = read_file(so);
  r.err = read_file(se);
  std::remove(so.c_str());
  std::remove(se.c_str());
  return r;
}

inline pm::Correspondence simple_corr(const std::string& id, const std::string& src,
                                      const std::string& tgt, int64_t cost = 1) {
  pm::Correspondence c;
  c.id = id;
  c.source_attrs.push_back({pm::SchemaSide::Source, src, {}});
  c.target_attrs.push_back({pm::SchemaSide::Target, tgt, {}});
  c.cost = cost;
  return c;
}

// The worked-example instance: three alternative matchings over six
// correspondences with probabilities 0.55 / 0.25 / 0.20. c2 and c6 are in
// every candidate, c5 only in the second.
inline pm::CandidateResultSet worked_crs() {
  pm::CandidateResultSet crs;
  crs.source_schema = "Employee";
  crs.target_schema = "EmployeeInfo";
  pm::Correspondence c2 = simple_corr("c2", "Name", "First Name");
  c2.target_attrs.push_back({pm::SchemaSide::Target, "Last Name", {}});
  crs.correspondences = {
      simple_corr("c1", "ID", "EmployeeID"),
      c2,
      simple_corr("c3", "Email", "Email Address"),
      simple_corr("c4", "Address", "Home Address"),
      simple_corr("c5", "Age", "Years of Experience"),
      simple_corr("c6", "Gender", "Sex"),
  };
  crs.candidates = {
      {"s1", {"c1", "c2", "c3", "c4", "c6"}, 0.55},
      {"s2", {"c1", "c2", "c4", "c5", "c6"}, 0.25},
      {"s3", {"c2", "c3", "c6"}, 0.20},
  };
  return crs;
}

// Expected reduction computed straight from the definition: enumerate all
// 2^|T| verdict vectors, mix the likelihoods over views, accumulate the
// posterior entropies. Reference for the optimized evaluator.
inline double naive_reduction(const pm::ViewSet& vs, const std::vector<std::string>& targets,
                              const pm::PlanningAccuracy& acc) {
  const size_t m = targets.size();
  std::vector<size_t> idx;
  std::vector<double> conf;
  for (const auto& id : targets) {
    idx.push_back(vs.index_of(id));
    conf.push_back(acc.for_id(id));
  }
  double h_prior = pm::entropy(vs.probabilities);
  double h_cond = 0.0;
  for (uint64_t mask = 0; mask < (uint64_t{1} << m); ++mask) {
    std::vector<double> joint(vs.view_count());
    double pa = 0.0;
    for (size_t v = 0; v < vs.view_count(); ++v) {
      double like = 1.0;
      for (size_t i = 0; i < m; ++i) {
        bool verdict = (mask >> i) & 1;
        bool truth = vs.rows[v][idx[i]] != 0;
        like *= verdict == truth ? conf[i] : 1.0 - conf[i];
      }
      joint[v] = vs.probabilities[v] * like;
      pa += joint[v];
    }
    if (pa <= 0.0) continue;
    double h = 0.0;
    for (double j : joint) {
      double p = j / pa;
      if (p > 0.0) h -= p * std::log(p);
    }
    h_cond += pa * h;
  }
  return h_prior - h_cond;
}

// Seeded random instance. Every correspondence gets its own attribute pair,
// so any candidate subset is structurally valid; probabilities sum to one
// exactly (the last one absorbs the rounding).
inline pm::CandidateResultSet random_crs(pm::Rng& rng, int n_corrs, int n_cands) {
  pm::CandidateResultSet crs;
  crs.source_schema = "S";
  crs.target_schema = "T";
  for (int i = 0; i < n_corrs; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "c%02d", i + 1);
    crs.correspondences.push_back(simple_corr(id, "a" + std::to_string(i + 1),
                                              "b" + std::to_string(i + 1),
                                              1 + static_cast<int64_t>(rng.below(5))));
  }
  std::vector<double> w(static_cast<size_t>(n_cands));
  for (int k = 0; k < n_cands; ++k) {
    pm::CandidateResult cand;
    cand.id = "s" + std::to_string(k + 1);
    for (int i = 0; i < n_corrs; ++i)
      if (rng.u01() < 0.5) cand.correspondence_ids.push_back(crs.correspondences[i].id);
    if (cand.correspondence_ids.empty())
      cand.correspondence_ids.push_back(crs.correspondences[rng.below(n_corrs)].id);
    w[k] = 0.05 + rng.u01();
    crs.candidates.push_back(std::move(cand));
  }
  double sum = 0.0;
  for (double x : w) sum += x;
  double head = 0.0;
  for (int k = 0; k < n_cands; ++k) {
    double p = k + 1 < n_cands ? w[k] / sum : 1.0 - head;
    crs.candidates[k].probability = p;
    head += p;
  }
  return crs;
}

// Ground truth matching one view row of the instance.
inline pm::GroundTruth truth_from_row(const pm::CandidateResultSet& crs, const pm::ViewSet& vs,
                                      size_t view) {
  pm::GroundTruth gt;
  for (size_t j = 0; j < vs.corr_count(); ++j) {
    const pm::Correspondence* c = crs.find(vs.correspondence_ids[j]);
    gt.entries[pm::GroundTruth::key_for(*c)] = vs.rows[view][j] != 0;
  }
  return gt;
}

inline std::vector<double> ranks_with_ties(const std::vector<double>& x) {
  const size_t n = x.size();
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return x[a] < x[b]; });
  std::vector<double> r(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> ra = ranks_with_ties(a), rb = ranks_with_ties(b);
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (size_t i = 0; i < ra.size(); ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double num = 0.0, da = 0.0, db = 0.0;
  for (size_t i = 0; i < ra.size(); ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    da += (ra[i] - ma) * (ra[i] - ma);
    db += (rb[i] - mb) * (rb[i] - mb);
  }
  if (da == 0.0 || db == 0.0) return 0.0;
  return num / std::sqrt(da * db);
}

}  // namespace ts
