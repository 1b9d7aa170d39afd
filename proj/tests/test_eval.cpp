#include <doctest.h>

#include <cmath>

#include <promptmatcher/errors.hpp>
#include <promptmatcher/eval.hpp>

#include "support.hpp"

using namespace pm;

TEST_CASE("candidate f1 against attribute-level truth") {
  CandidateResultSet crs;
  crs.source_schema = "S";
  crs.target_schema = "T";
  GroundTruth gt;
  for (int i = 1; i <= 6; ++i) {
    Correspondence c = ts::simple_corr("t" + std::to_string(i), "a" + std::to_string(i),
                                       "b" + std::to_string(i));
    gt.entries[GroundTruth::key_for(c)] = true;
    crs.correspondences.push_back(std::move(c));
  }
  Correspondence wrong = ts::simple_corr("w1", "a1", "b2");
  crs.correspondences.push_back(wrong);

  CandidateResult cand{"x", {"t1", "t2", "t3", "w1"}, 1.0};
  crs.candidates.push_back(cand);

  F1Score s = candidate_f1(crs, cand, gt);
  CHECK(s.precision == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(s.recall == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s.f1 == doctest::Approx(0.6).epsilon(1e-12));

  CandidateResult miss{"y", {"w1"}, 1.0};
  F1Score z = candidate_f1(crs, miss, gt);
  CHECK(z.precision == 0.0);
  CHECK(z.recall == 0.0);
  CHECK(z.f1 == 0.0);

  CandidateResult broken{"z", {"nope"}, 1.0};
  CHECK_THROWS_AS(candidate_f1(crs, broken, gt), Error);
}

TEST_CASE("worked instance f1 and mrr") {
  CandidateResultSet crs = ts::worked_crs();
  GroundTruth gt = load_ground_truth(ts::fixture("fixtures/employee_gt.json"));
  CHECK(candidate_f1(crs, crs.candidates[0], gt).f1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(candidate_f1(crs, crs.candidates[1], gt).f1 == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(candidate_f1(crs, crs.candidates[2], gt).f1 == doctest::Approx(0.75).epsilon(1e-12));

  ViewSet vs = build_view_set(crs);
  MrrResult m = mrr_of(crs, vs, gt);
  CHECK(m.best_f1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.optimal_candidates == std::vector<std::string>{"s1"});
  CHECK(m.rank == 1);  // s1 already carries the highest prior
  CHECK(m.mrr == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ranking is stable and mrr takes the best position on ties") {
  CandidateResultSet crs;
  crs.source_schema = "S";
  crs.target_schema = "T";
  for (int i = 1; i <= 5; ++i)
    crs.correspondences.push_back(
        ts::simple_corr("c" + std::to_string(i), "a" + std::to_string(i), "b" + std::to_string(i)));
  crs.candidates = {
      {"s1", {"c1"}, 0.30},
      {"s2", {"c2"}, 0.25},  // an optimal candidate at position 2
      {"s3", {"c3"}, 0.25},
      {"s4", {"c4"}, 0.15},
      {"s5", {"c2", "c5"}, 0.05},  // the other optimal candidate, position 5
  };
  ViewSet vs = build_view_set(crs);

  std::vector<size_t> order = rank_candidates(vs);
  REQUIRE(order.size() == 5);
  CHECK(order[0] == 0);
  CHECK(order[1] == 1);  // tie at 0.25 keeps the earlier view first
  CHECK(order[2] == 2);
  CHECK(order[4] == 4);

  GroundTruth gt;
  gt.entries[GroundTruth::key_for(crs.correspondences[1])] = true;  // c2 is the only true pair
  for (size_t i : {0u, 2u, 3u, 4u})
    gt.entries[GroundTruth::key_for(crs.correspondences[i])] = false;

  MrrResult m = mrr_of(crs, vs, gt);
  CHECK(m.best_f1 == doctest::Approx(1.0).epsilon(1e-12));
  REQUIRE(m.optimal_candidates.size() == 1);
  CHECK(m.optimal_candidates[0] == "s2");
  CHECK(m.rank == 2);
  CHECK(m.mrr == doctest::Approx(0.5).epsilon(1e-12));

  // two optima: the smaller rank counts
  GroundTruth gt2 = gt;
  gt2.entries[GroundTruth::key_for(crs.correspondences[4])] = true;  // s5 now also partial
  MrrResult m2 = mrr_of(crs, vs, gt2);
  CHECK(m2.optimal_candidates == std::vector<std::string>{"s5"});
  CHECK(m2.rank == 5);
}

TEST_CASE("experiment grids are complete, deterministic, and fault-tolerant") {
  ExperimentSpec spec;
  spec.datasets = {
      {"employee", ts::fixture("fixtures/employee_crs.json"), ts::fixture("fixtures/employee_gt.json")},
      {"missing", "/nonexistent/crs.json", "/nonexistent/gt.json"},
  };
  spec.strategies = {Strategy::Greedy, Strategy::Random};
  spec.budgets = {3, 6};
  spec.seeds = {1, 2, 3};
  spec.rounds_k = 2;
  spec.planning_accuracy = 0.9;
  spec.oracle_accuracy = 0.9;

  ExperimentReport rep = run_experiment(spec);
  CHECK(rep.cells.size() == 2 * 2 * 2 * 3);
  size_t ok = 0, failed = 0;
  for (const ExperimentCell& c : rep.cells) {
    if (c.ok) {
      ++ok;
      CHECK(c.error.empty());
      CHECK(c.mrr > 0.0);
      CHECK(c.rank_of_best >= 1);
    } else {
      ++failed;
      CHECK(c.dataset == "missing");
      CHECK(!c.error.empty());
    }
  }
  CHECK(ok == 12);
  CHECK(failed == 12);

  ExperimentReport again = run_experiment(spec);
  CHECK(experiment_to_json(again) == experiment_to_json(rep));

  std::string csv = experiment_to_csv(rep);
  CHECK(csv.rfind("dataset,strategy,budget,seed,mrr,final_entropy_nats,rank_of_best,wall_ms\n",
                  0) == 0);
  size_t rows = 0;
  for (char ch : csv)
    if (ch == '\n') ++rows;
  CHECK(rows == 1 + 12);  // header plus one row per successful cell
}

TEST_CASE("mean final entropy falls as the budget grows") {
  ExperimentSpec spec;
  spec.datasets = {
      {"employee", ts::fixture("fixtures/employee_crs.json"), ts::fixture("fixtures/employee_gt.json")}};
  spec.strategies = {Strategy::Greedy};
  spec.budgets = {1, 2, 3, 4, 5, 6};
  for (uint64_t s = 1; s <= 10; ++s) spec.seeds.push_back(s);
  spec.rounds_k = 1;

  ExperimentReport rep = run_experiment(spec);
  std::vector<double> budgets{1, 2, 3, 4, 5, 6};
  std::vector<double> mean_h(6, 0.0);
  std::vector<int> n(6, 0);
  for (const ExperimentCell& c : rep.cells) {
    REQUIRE(c.ok);
    size_t b = static_cast<size_t>(c.budget - 1);
    mean_h[b] += c.final_entropy;
    n[b] += 1;
  }
  for (size_t i = 0; i < 6; ++i) mean_h[i] /= n[i];
  CHECK(ts::spearman(budgets, mean_h) <= -0.8);
}

TEST_CASE("demo schema generator produces a valid ensemble") {
  CandidateResultSet crs = gen_demo_crs(demo_source_schema(), demo_target_schema(), 3);
  ValidationReport rep = validate_crs(crs);
  CHECK(rep.ok());
  CHECK(crs.candidates.size() >= 2);
  ViewSet vs = build_view_set(crs);
  CHECK(vs.view_count() >= 2);

  SchemaDef a{"A", {{"alpha", {}}, {"beta", {}}}};
  CandidateResultSet same = gen_demo_crs(a, a, 1);
  CHECK(validate_crs(same).ok());
  bool exact = false;
  for (const auto& cand : same.candidates)
    if (cand.correspondence_ids.size() == 2) exact = true;
  CHECK(exact);  // identical names must yield the identity matching

  SchemaDef l{"L", {{"qqqq", {}}}};
  SchemaDef r{"R", {{"zzzzzz", {}}}};
  try {
    gen_demo_crs(l, r, 1);
    FAIL("expected DegenerateSchemas");
  } catch (const Error& e) {
    CHECK(e.kind == "DegenerateSchemas");
  }
}

TEST_CASE("schema definitions parse and reject junk") {
  SchemaDef s = parse_schema(
      "{\"name\": \"S\", \"attributes\": [{\"name\": \"id\", \"values\": [\"1\"]}]}");
  CHECK(s.name == "S");
  REQUIRE(s.attributes.size() == 1);
  CHECK(s.attributes[0].first == "id");
  CHECK_THROWS_AS(parse_schema("[]"), Error);
  CHECK_THROWS_AS(load_schema("/nonexistent/schema.json"), Error);
}

TEST_CASE("synthetic fixtures are deterministic and contain their own truth") {
  SyntheticSpec spec;
  spec.seed = 1001;
  spec.source_attrs = 12;
  spec.target_attrs = 12;
  spec.candidates = 6;
  spec.min_edits = 3;
  spec.max_edits = 4;

  SyntheticFixture fx = gen_synthetic_crs(spec);
  ValidationReport rep = validate_crs(fx.crs);
  CHECK(rep.ok());

  SyntheticFixture again = gen_synthetic_crs(spec);
  CHECK(dump_crs(again.crs) == dump_crs(fx.crs));
  CHECK(dump_ground_truth(again.gt) == dump_ground_truth(fx.gt));

  // the generator parameters behind the first shipped fixture
  CHECK(dump_crs(fx.crs) == ts::read_file(ts::fixture("fixtures/synthetic_01_crs.json")));
  CHECK(dump_ground_truth(fx.gt) ==
        ts::read_file(ts::fixture("fixtures/synthetic_01_gt.json")));

  ViewSet vs = build_view_set(fx.crs);
  MrrResult m = mrr_of(fx.crs, vs, fx.gt);
  CHECK(m.best_f1 == doctest::Approx(1.0).epsilon(1e-12));  // the true matching is a candidate

  SyntheticSpec other = spec;
  other.seed = 1002;
  CHECK(dump_crs(gen_synthetic_crs(other).crs) != dump_crs(fx.crs));
}

TEST_CASE("bench rows cover the grid and keep brute ahead on the objective") {
  CandidateResultSet crs = load_crs(ts::fixture("fixtures/employee_crs.json"));
  std::vector<BenchRow> rows =
      run_bench(crs, {2, 4}, {Strategy::Greedy, Strategy::Brute, Strategy::Random}, 0.9, 1);
  REQUIRE(rows.size() == 6);

  double greedy2 = -1, brute2 = -1, rand2 = -1;
  for (const BenchRow& r : rows) {
    CHECK(r.cost <= r.budget);
    if (r.budget == 2 && r.strategy == "greedy") greedy2 = r.objective;
    if (r.budget == 2 && r.strategy == "brute") brute2 = r.objective;
    if (r.budget == 2 && r.strategy == "random") rand2 = r.objective;
  }
  CHECK(brute2 >= greedy2 - 1e-9);
  CHECK(brute2 >= rand2 - 1e-9);

  std::string csv = bench_to_csv(rows);
  CHECK(csv.rfind("budget,strategy,wall_ms,objective_nats,evaluations,cost,chosen\n", 0) == 0);
}
