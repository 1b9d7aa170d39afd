#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <promptmatcher/errors.hpp>
#include <promptmatcher/model.hpp>
#include <promptmatcher/rng.hpp>
#include <promptmatcher/selection.hpp>

#include "support.hpp"

using namespace pm;

namespace {

// Reference optimum over all subsets, mirroring the selection tie rules:
// objective within 1e-12 counts as a tie, then smaller cost, then the
// lexicographically smaller sorted id tuple.
struct RefBest {
  bool set = false;
  double obj = 0.0;
  int64_t cost = 0;
  std::vector<std::string> ids;

  void consider(double val, int64_t c, std::vector<std::string> sorted_ids) {
    if (set) {
      if (val < obj - 1e-12) return;
      if (val <= obj + 1e-12) {
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

RefBest ref_brute(const ViewSet& vs, const std::vector<Correspondence>& pool,
                  const CostModel& w, int64_t budget, const PlanningAccuracy& acc) {
  RefBest best;
  const size_t n = pool.size();
  for (uint64_t mask = 0; mask < (uint64_t{1} << n); ++mask) {
    int64_t cost = 0;
    std::vector<std::string> ids;
    for (size_t i = 0; i < n; ++i)
      if ((mask >> i) & 1) {
        cost += w.cost(pool[i]);
        ids.push_back(pool[i].id);
      }
    if (cost > budget) continue;
    double val = ts::naive_reduction(vs, ids, acc);
    std::sort(ids.begin(), ids.end());
    best.consider(val, cost, std::move(ids));
  }
  return best;
}

}  // namespace

TEST_CASE("token cost counts names and up to three values") {
  Correspondence c = ts::simple_corr("c1", "ID", "EmployeeID");
  c.cost.reset();
  CHECK(token_cost(c) == 3);  // 12 chars / 4

  c.source_attrs[0].values = {"1001", "1002", "1003", "1004", "1005"};
  c.target_attrs[0].values = {"E-1001", "E-1002", "E-1003"};
  CHECK(token_cost(c) == 11);  // 12 + 12 + 18 = 42 chars, ceil(42/4)

  CHECK(token_cost(c, 42) == 1);
  CHECK(token_cost(c, 43) == 1);  // floor of one token

  Correspondence tiny = ts::simple_corr("c2", "a", "b");
  tiny.cost.reset();
  CHECK(token_cost(tiny) == 1);

  c.cost = 99;
  CHECK(token_cost(c) == 99);  // explicit cost wins
  c.cost = -1;
  CHECK_THROWS_AS(token_cost(c), Error);
  c.cost.reset();
  CHECK_THROWS_AS(token_cost(c, 0), Error);
}

TEST_CASE("brute singleton on the worked instance") {
  CandidateResultSet crs = ts::worked_crs();
  ViewSet vs = build_view_set(crs);
  SelectionOptions opt;
  opt.accuracy.global = 0.8;
  CostModel w;

  SelectionResult res = brute_select(vs, crs.correspondences, w, 1, opt);
  CHECK(res.chosen == std::vector<std::string>{"c3"});
  CHECK(res.total_cost == 1);
  CHECK(res.objective_value == doctest::Approx(0.1470442155).epsilon(1e-8));
  CHECK(res.evaluations > 0);
}

TEST_CASE("brute at full budget with a certain oracle finds a cheapest resolving set") {
  CandidateResultSet crs = ts::worked_crs();
  ViewSet vs = build_view_set(crs);
  SelectionOptions opt;
  opt.accuracy.global = 1.0;
  CostModel w;

  SelectionResult res = brute_select(vs, crs.correspondences, w, 100, opt);
  // c1 splits {v1,v2} from v3 and c3 splits v1 from v2; together they pin the
  // view exactly, so the objective is the whole prior entropy. Larger sets
  // tie on the objective and lose on cost.
  CHECK(res.chosen == std::vector<std::string>{"c1", "c3"});
  CHECK(res.total_cost == 2);
  CHECK(res.objective_value == doctest::Approx(0.9972715232).epsilon(1e-8));
}

TEST_CASE("ties break by cost, then lexicographically") {
  CandidateResultSet crs;
  crs.source_schema = "S";
  crs.target_schema = "T";
  crs.correspondences = {
      ts::simple_corr("c1", "a1", "b1", 2),
      ts::simple_corr("c2", "a2", "b2", 1),
      ts::simple_corr("c3", "a3", "b3", 1),
  };
  // c1 and c2 carry the same truth column; c3 anchors the second candidate.
  crs.candidates = {
      {"s1", {"c1", "c2"}, 0.6},
      {"s2", {"c3"}, 0.4},
  };
  ViewSet vs = build_view_set(crs);
  SelectionOptions opt;
  opt.accuracy.global = 0.9;
  CostModel w;

  // equal objective, costs 2 vs 1: the cheaper c2 wins
  std::vector<Correspondence> pair{crs.correspondences[0], crs.correspondences[1]};
  SelectionResult cheap = brute_select(vs, pair, w, 2, opt);
  CHECK(cheap.chosen == std::vector<std::string>{"c2"});

  // equal objective and cost: lexicographically smaller id tuple wins
  CandidateResultSet eq = crs;
  eq.correspondences[0].cost = 1;
  ViewSet vse = build_view_set(eq);
  std::vector<Correspondence> both{eq.correspondences[0], eq.correspondences[1]};
  SelectionResult lex = brute_select(vse, both, w, 1, opt);
  CHECK(lex.chosen == std::vector<std::string>{"c1"});
}

TEST_CASE("brute matches an exhaustive reference on random instances") {
  Rng rng(424242);
  for (int trial = 0; trial < 25; ++trial) {
    CandidateResultSet crs = ts::random_crs(rng, 2 + static_cast<int>(rng.below(6)),
                                            2 + static_cast<int>(rng.below(5)));
    ViewSet vs = build_view_set(crs);
    SelectionOptions opt;
    opt.accuracy.global = 0.6 + 0.35 * rng.u01();
    CostModel w;
    int64_t budget = 1 + static_cast<int64_t>(rng.below(12));

    SelectionResult got = brute_select(vs, crs.correspondences, w, budget, opt);
    RefBest want = ref_brute(vs, crs.correspondences, w, budget, opt.accuracy);
    CHECK(got.objective_value == doctest::Approx(want.obj).epsilon(1e-9));
    CHECK(got.total_cost == want.cost);
    CHECK(got.chosen == want.ids);
  }
}

TEST_CASE("greedy equals brute when the pool is tiny") {
  Rng rng(5150);
  for (int trial = 0; trial < 25; ++trial) {
    CandidateResultSet crs = ts::random_crs(rng, 2 + static_cast<int>(rng.below(2)),
                                            2 + static_cast<int>(rng.below(4)));
    ViewSet vs = build_view_set(crs);
    SelectionOptions opt;
    opt.accuracy.global = 0.6 + 0.35 * rng.u01();
    CostModel w;
    int64_t budget = 1 + static_cast<int64_t>(rng.below(10));

    SelectionResult g = greedy_select(vs, crs.correspondences, w, budget, opt);
    SelectionResult b = brute_select(vs, crs.correspondences, w, budget, opt);
    CHECK(g.objective_value == doctest::Approx(b.objective_value).epsilon(1e-12));
  }
}

TEST_CASE("greedy keeps the approximation guarantee on random instances") {
  Rng rng(860226);
  const double bound = 1.0 - 1.0 / std::exp(1.0);
  for (int trial = 0; trial < 30; ++trial) {
    CandidateResultSet crs = ts::random_crs(rng, 4 + static_cast<int>(rng.below(5)),
                                            2 + static_cast<int>(rng.below(5)));
    ViewSet vs = build_view_set(crs);
    SelectionOptions opt;
    opt.accuracy.global = 0.6 + 0.35 * rng.u01();
    CostModel w;
    int64_t budget = 2 + static_cast<int64_t>(rng.below(14));

    SelectionResult g = greedy_select(vs, crs.correspondences, w, budget, opt);
    SelectionResult b = brute_select(vs, crs.correspondences, w, budget, opt);
    CHECK(g.objective_value >= bound * b.objective_value - 1e-12);
    CHECK(g.total_cost <= budget);
  }
}

TEST_CASE("greedy reaches the optimum on the worked instance") {
  CandidateResultSet crs = ts::worked_crs();
  ViewSet vs = build_view_set(crs);
  SelectionOptions opt;
  opt.accuracy.global = 0.9;
  CostModel w;
  SelectionResult g = greedy_select(vs, crs.correspondences, w, 6, opt);
  SelectionResult b = brute_select(vs, crs.correspondences, w, 6, opt);
  CHECK(g.objective_value == doctest::Approx(b.objective_value).epsilon(1e-9));
  CHECK(g.total_cost <= 6);
}

TEST_CASE("random selection is seeded and budget-faithful") {
  CandidateResultSet crs = ts::worked_crs();
  ViewSet vs = build_view_set(crs);
  SelectionOptions opt;
  opt.seed = 11;
  CostModel w;

  SelectionResult a = random_select(vs, crs.correspondences, w, 3, opt);
  SelectionResult b = random_select(vs, crs.correspondences, w, 3, opt);
  CHECK(a.chosen == b.chosen);
  CHECK(a.total_cost == b.total_cost);
  CHECK(a.total_cost <= 3);
  CHECK(a.chosen.size() == 3);  // unit costs: exactly the budget fits

  SelectionResult one = random_select(vs, crs.correspondences, w, 1, opt);
  CHECK(one.chosen.size() == 1);

  bool differs = false;
  for (uint64_t s = 1; s <= 6 && !differs; ++s) {
    SelectionOptions o2 = opt;
    o2.seed = s;
    differs = random_select(vs, crs.correspondences, w, 3, o2).chosen != a.chosen;
  }
  CHECK(differs);
}

TEST_CASE("degenerate budgets and pools") {
  CandidateResultSet crs = ts::worked_crs();
  ViewSet vs = build_view_set(crs);
  SelectionOptions opt;
  CostModel w;

  for (auto* fn : {brute_select, greedy_select, random_select}) {
    SelectionResult res = fn(vs, crs.correspondences, w, 0, opt);
    CHECK(res.chosen.empty());
    CHECK(res.total_cost == 0);
    CHECK(res.objective_value == doctest::Approx(0.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(brute_select(vs, crs.correspondences, w, -1, opt), Error);

  std::vector<Correspondence> dup{crs.correspondences[0], crs.correspondences[0]};
  CHECK_THROWS_AS(greedy_select(vs, dup, w, 5, opt), Error);
}

TEST_CASE("brute refuses oversized pools") {
  Rng rng(99);
  CandidateResultSet crs = ts::random_crs(rng, 25, 3);
  ViewSet vs = build_view_set(crs);
  SelectionOptions opt;
  CostModel w;
  try {
    brute_select(vs, crs.correspondences, w, 10, opt);
    FAIL("expected InstanceTooLarge");
  } catch (const Error& e) {
    CHECK(e.kind == "InstanceTooLarge");
  }
  CHECK_NOTHROW(greedy_select(vs, crs.correspondences, w, 10, opt));
}

TEST_CASE("selection can fall back to sampling past the cap") {
  CandidateResultSet crs = ts::worked_crs();
  ViewSet vs = build_view_set(crs);
  SelectionOptions opt;
  opt.eval.exact_cap = 2;
  opt.auto_monte_carlo = true;
  opt.eval.mc_samples = 4000;
  opt.seed = 5;
  CostModel w;

  SelectionResult a = greedy_select(vs, crs.correspondences, w, 6, opt);
  SelectionResult b = greedy_select(vs, crs.correspondences, w, 6, opt);
  CHECK(a.chosen == b.chosen);
  CHECK(a.objective_value == b.objective_value);

  SelectionOptions strict = opt;
  strict.auto_monte_carlo = false;
  CHECK_THROWS_AS(greedy_select(vs, crs.correspondences, w, 6, strict), Error);
}
