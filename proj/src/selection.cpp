#include "promptmatcher/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "promptmatcher/errors.hpp"
#include "promptmatcher/rng.hpp"

namespace pm {

namespace {

constexpr double kObjEps = 1e-12;

struct ResolvedPool {
  std::vector<size_t> vs_idx;
  std::vector<int64_t> cost;
  std::vector<std::string> ids;
};

ResolvedPool resolve_pool(const ViewSet& vs, const std::vector<Correspondence>& pool,
                          const CostModel& w, int64_t budget) {
  if (budget < 0) {
    throw domain_error("MalformedInput", "budget must be non-negative, got " + std::to_string(budget));
  }
  ResolvedPool r;
  std::set<std::string> seen;
  for (const Correspondence& c : pool) {
    if (!seen.insert(c.id).second) {
      throw domain_error("MalformedInput", "selection pool lists correspondence \"" + c.id + "\" twice");
    }
    r.vs_idx.push_back(vs.index_of(c.id));
    r.cost.push_back(w.cost(c));
    r.ids.push_back(c.id);
  }
  return r;
}

// Best-so-far subset with the shared tie rules: larger objective wins within
// an epsilon band, then smaller cost, then the lexicographically smaller
// sorted id tuple.
struct Best {
  bool set = false;
  double obj = 0.0;
  int64_t cost = 0;
  std::vector<std::string> ids;  // sorted

  void consider(double val, int64_t c, std::vector<std::string> sorted_ids) {
    if (set) {
      if (val < obj - kObjEps) return;
      if (val <= obj + kObjEps) {
        if (c > cost) return;
        if (c == cost && !(sorted_ids < ids)) return;
        obj = std::max(obj, val);
        cost = c;
        ids = std::move(sorted_ids);
        return;
      }
    }
    set = true;
    obj = val;
    cost = c;
    ids = std::move(sorted_ids);
  }
};

std::vector<std::string> ids_of(const ResolvedPool& p, const std::vector<size_t>& picks) {
  std::vector<std::string> out;
  out.reserve(picks.size());
  for (size_t j : picks) out.push_back(p.ids[j]);
  std::sort(out.begin(), out.end());
  return out;
}

EvalOptions folded_eval(const SelectionOptions& opt) {
  EvalOptions e = opt.eval;
  e.mc_seed = mix_seed(opt.eval.mc_seed, opt.seed);
  return e;
}

}  // namespace

int64_t token_cost(const Correspondence& c, int64_t chars_per_token) {
  if (c.cost) {
    if (*c.cost < 0) {
      throw domain_error("MalformedInput", "correspondence \"" + c.id + "\" has a negative cost");
    }
    return *c.cost;
  }
  if (chars_per_token <= 0) {
    throw domain_error("BadConfig", "chars_per_token must be positive");
  }
  int64_t chars = 0;
  for (const auto* attrs : {&c.source_attrs, &c.target_attrs}) {
    for (const AttributeRef& a : *attrs) {
      chars += static_cast<int64_t>(a.name.size());
      size_t n = std::min<size_t>(3, a.values.size());
      for (size_t i = 0; i < n; ++i) chars += static_cast<int64_t>(a.values[i].size());
    }
  }
  int64_t tokens = (chars + chars_per_token - 1) / chars_per_token;
  return std::max<int64_t>(1, tokens);
}

SelectionResult brute_select(const ViewSet& vs, const std::vector<Correspondence>& pool,
                             const CostModel& w, int64_t budget, const SelectionOptions& opt) {
  ResolvedPool p = resolve_pool(vs, pool, w, budget);
  const size_t n = p.ids.size();
  if (n > 24) {
    std::ostringstream os;
    os << "exhaustive selection over " << n << " correspondences exceeds the limit of 24";
    throw domain_error("InstanceTooLarge", os.str());
  }
  ReductionEvaluator ev(vs, opt.accuracy, folded_eval(opt));

  Best best;
  std::vector<size_t> cur;
  best.consider(ev.value(opt.auto_monte_carlo), 0, {});

  auto rec = [&](auto&& self, size_t start, int64_t rem, int64_t spent) -> void {
    for (size_t j = start; j < n; ++j) {
      if (p.cost[j] > rem) continue;
      cur.push_back(j);
      ev.push(p.vs_idx[j]);
      double val = ev.value(opt.auto_monte_carlo);
      best.consider(val, spent + p.cost[j], ids_of(p, cur));
      self(self, j + 1, rem - p.cost[j], spent + p.cost[j]);
      ev.pop(p.vs_idx[j]);
      cur.pop_back();
    }
  };
  rec(rec, 0, budget, 0);

  SelectionResult res;
  res.chosen = best.ids;
  res.total_cost = best.cost;
  res.objective_value = best.obj;
  res.evaluations = ev.evaluations();
  return res;
}

SelectionResult greedy_select(const ViewSet& vs, const std::vector<Correspondence>& pool,
                              const CostModel& w, int64_t budget, const SelectionOptions& opt) {
  ResolvedPool p = resolve_pool(vs, pool, w, budget);
  const size_t n = p.ids.size();
  ReductionEvaluator ev(vs, opt.accuracy, folded_eval(opt));
  const bool amc = opt.auto_monte_carlo;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  Best small;  // exhaustive over subsets of size <= 2
  small.consider(ev.value(amc), 0, {});
  for (size_t i = 0; i < n; ++i) {
    if (p.cost[i] > budget) continue;
    ev.push(p.vs_idx[i]);
    small.consider(ev.value(amc), p.cost[i], ids_of(p, {i}));
    for (size_t j = i + 1; j < n; ++j) {
      if (p.cost[i] + p.cost[j] > budget) continue;
      ev.push(p.vs_idx[j]);
      small.consider(ev.value(amc), p.cost[i] + p.cost[j], ids_of(p, {i, j}));
      ev.pop(p.vs_idx[j]);
    }
    ev.pop(p.vs_idx[i]);
  }

  Best grown;  // every feasible size-3 seed, completed by gain per cost
  std::vector<double> val_after(n, nan);
  for (size_t a = 0; a < n; ++a) {
    for (size_t b = a + 1; b < n; ++b) {
      for (size_t c = b + 1; c < n; ++c) {
        int64_t w0 = p.cost[a] + p.cost[b] + p.cost[c];
        if (w0 > budget) continue;
        std::vector<size_t> chosen = {a, b, c};
        for (size_t j : chosen) ev.push(p.vs_idx[j]);
        double obj = ev.value(amc);
        int64_t spent = w0;

        std::vector<size_t> rest;
        for (size_t j = 0; j < n; ++j) {
          if (j != a && j != b && j != c) rest.push_back(j);
        }
        std::fill(val_after.begin(), val_after.end(), nan);
        while (!rest.empty()) {
          size_t pick = rest.size();
          double pick_ratio = 0.0;
          bool pick_inf = false;
          for (size_t k = 0; k < rest.size(); ++k) {
            size_t j = rest[k];
            if (std::isnan(val_after[j])) {
              ev.push(p.vs_idx[j]);
              val_after[j] = ev.value(amc);
              ev.pop(p.vs_idx[j]);
            }
            double gain = val_after[j] - obj;
            bool inf = p.cost[j] == 0;
            double ratio = inf ? 0.0 : gain / static_cast<double>(p.cost[j]);
            bool take;
            if (pick == rest.size()) {
              take = true;
            } else if (inf != pick_inf) {
              take = inf;
            } else if (inf) {
              take = p.ids[j] < p.ids[rest[pick]];
            } else if (ratio > pick_ratio + kObjEps) {
              take = true;
            } else if (ratio < pick_ratio - kObjEps) {
              take = false;
            } else {
              take = p.ids[j] < p.ids[rest[pick]];
            }
            if (take) {
              pick = k;
              pick_ratio = ratio;
              pick_inf = inf;
            }
          }
          size_t j = rest[pick];
          if (spent + p.cost[j] <= budget) {
            ev.push(p.vs_idx[j]);
            chosen.push_back(j);
            obj = val_after[j];
            spent += p.cost[j];
            std::fill(val_after.begin(), val_after.end(), nan);
          }
          rest.erase(rest.begin() + pick);
        }

        grown.consider(obj, spent, ids_of(p, chosen));
        for (size_t j : chosen) ev.pop(p.vs_idx[j]);
      }
    }
  }

  Best overall = small;
  if (grown.set) overall.consider(grown.obj, grown.cost, grown.ids);

  SelectionResult res;
  res.chosen = overall.ids;
  res.total_cost = overall.cost;
  res.objective_value = overall.obj;
  res.evaluations = ev.evaluations();
  return res;
}

SelectionResult random_select(const ViewSet& vs, const std::vector<Correspondence>& pool,
                              const CostModel& w, int64_t budget, const SelectionOptions& opt) {
  ResolvedPool p = resolve_pool(vs, pool, w, budget);
  const size_t n = p.ids.size();
  std::vector<size_t> perm(n);
  for (size_t i = 0; i < n; ++i) perm[i] = i;
  Rng rng(opt.seed);
  rng.shuffle(perm);

  SelectionResult res;
  ReductionEvaluator ev(vs, opt.accuracy, folded_eval(opt));
  int64_t rem = budget;
  for (size_t j : perm) {
    if (p.cost[j] > rem) continue;
    res.chosen.push_back(p.ids[j]);
    res.total_cost += p.cost[j];
    rem -= p.cost[j];
    ev.push(p.vs_idx[j]);
  }
  res.objective_value = ev.value(true);
  res.evaluations = ev.evaluations();
  return res;
}

}  // namespace pm
