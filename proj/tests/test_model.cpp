#include <doctest.h>

#include <promptmatcher/errors.hpp>
#include <promptmatcher/model.hpp>

#include "support.hpp"

using namespace pm;

namespace {

bool has_entry(const std::vector<std::string>& lines, const std::string& needle) {
  for (const auto& l : lines)
    if (l.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("worked instance builds a three-view set") {
  CandidateResultSet crs = ts::worked_crs();
  ValidationReport rep = validate_crs(crs);
  CHECK(rep.ok());
  CHECK(rep.warnings.empty());

  ViewSet vs = build_view_set(crs);
  REQUIRE(vs.view_count() == 3);
  REQUIRE(vs.corr_count() == 6);
  CHECK(vs.correspondence_ids ==
        std::vector<std::string>{"c1", "c2", "c3", "c4", "c5", "c6"});
  CHECK(vs.probabilities[0] == doctest::Approx(0.55).epsilon(1e-12));
  CHECK(vs.probabilities[1] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(vs.probabilities[2] == doctest::Approx(0.20).epsilon(1e-12));
  CHECK(vs.rows[0] == std::vector<uint8_t>{1, 1, 1, 1, 0, 1});
  CHECK(vs.rows[1] == std::vector<uint8_t>{1, 1, 0, 1, 1, 1});
  CHECK(vs.rows[2] == std::vector<uint8_t>{0, 1, 1, 0, 0, 1});
  CHECK(vs.view_candidates[0] == std::vector<std::string>{"s1"});
  CHECK(vs.view_candidates[2] == std::vector<std::string>{"s3"});
  CHECK(vs.index_of("c5") == 4);
  CHECK_THROWS_AS(vs.index_of("zz"), Error);
}

TEST_CASE("duplicate candidate rows merge, zero-probability rows drop") {
  CandidateResultSet crs = ts::worked_crs();
  crs.candidates[0].probability = 0.35;
  crs.candidates.push_back({"s4", {"c1", "c2", "c3", "c4", "c6"}, 0.20});

  ValidationReport rep = validate_crs(crs);
  CHECK(rep.ok());
  CHECK(has_entry(rep.warnings, "same correspondence set"));

  ViewSet vs = build_view_set(crs);
  REQUIRE(vs.view_count() == 3);
  CHECK(vs.probabilities[0] == doctest::Approx(0.55).epsilon(1e-12));
  CHECK(vs.view_candidates[0] == std::vector<std::string>{"s1", "s4"});

  CandidateResultSet zp = ts::worked_crs();
  zp.candidates[2].probability = 0.0;
  zp.candidates[0].probability = 0.75;
  ViewSet vz = build_view_set(zp);
  CHECK(vz.view_count() == 2);
}

TEST_CASE("marginal probability sums over views") {
  ViewSet vs = build_view_set(ts::worked_crs());
  CHECK(marginal_probability(vs, "c1") == doctest::Approx(0.80).epsilon(1e-12));
  CHECK(marginal_probability(vs, "c2") == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(marginal_probability(vs, "c3") == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(marginal_probability(vs, "c5") == doctest::Approx(0.25).epsilon(1e-12));
  CHECK_THROWS_AS(marginal_probability(vs, "nope"), Error);
}

TEST_CASE("validation flags structural defects") {
  SUBCASE("duplicate correspondence id") {
    CandidateResultSet crs = ts::worked_crs();
    crs.correspondences.push_back(ts::simple_corr("c1", "X", "Y"));
    CHECK(has_entry(validate_crs(crs).errors, "duplicate correspondence id \"c1\""));
  }
  SUBCASE("unknown reference") {
    CandidateResultSet crs = ts::worked_crs();
    crs.candidates[0].correspondence_ids.push_back("c9");
    CHECK(has_entry(validate_crs(crs).errors, "unknown correspondence \"c9\""));
  }
  SUBCASE("missing attributes") {
    CandidateResultSet crs = ts::worked_crs();
    crs.correspondences[0].source_attrs.clear();
    CHECK(has_entry(validate_crs(crs).errors, "no source attributes"));
  }
  SUBCASE("attribute reused inside a candidate") {
    CandidateResultSet crs = ts::worked_crs();
    crs.correspondences[1].source_attrs[0].name = "ID";  // collides with c1's source
    CHECK(has_entry(validate_crs(crs).errors, "claimed by correspondences"));
  }
  SUBCASE("probability out of range") {
    CandidateResultSet crs = ts::worked_crs();
    crs.candidates[0].probability = 1.25;
    CHECK(has_entry(validate_crs(crs).errors, "outside [0, 1]"));
  }
  SUBCASE("sum far from one") {
    CandidateResultSet crs = ts::worked_crs();
    crs.candidates[0].probability = 0.25;
    CHECK(has_entry(validate_crs(crs).errors, "must sum to 1"));
  }
  SUBCASE("duplicate candidate id") {
    CandidateResultSet crs = ts::worked_crs();
    crs.candidates[1].id = "s1";
    CHECK(has_entry(validate_crs(crs).errors, "duplicate candidate id \"s1\""));
  }
  SUBCASE("correspondence listed twice") {
    CandidateResultSet crs = ts::worked_crs();
    crs.candidates[0].correspondence_ids.push_back("c1");
    CHECK(has_entry(validate_crs(crs).errors, "more than once"));
  }
  SUBCASE("negative cost") {
    CandidateResultSet crs = ts::worked_crs();
    crs.correspondences[0].cost = -3;
    CHECK(has_entry(validate_crs(crs).errors, "negative cost"));
  }
  SUBCASE("zero cost is only a warning") {
    CandidateResultSet crs = ts::worked_crs();
    crs.correspondences[0].cost = 0;
    ValidationReport rep = validate_crs(crs);
    CHECK(rep.ok());
    CHECK(has_entry(rep.warnings, "zero cost"));
  }
  SUBCASE("orphan correspondence is only a warning") {
    CandidateResultSet crs = ts::worked_crs();
    crs.correspondences.push_back(ts::simple_corr("c7", "X", "Y"));
    ValidationReport rep = validate_crs(crs);
    CHECK(rep.ok());
    CHECK(has_entry(rep.warnings, "\"c7\" appears in no candidate"));
  }
}

TEST_CASE("small probability drift renormalizes in place") {
  CandidateResultSet crs = ts::worked_crs();
  crs.candidates[0].probability = 0.55 + 3e-7;
  ValidationReport rep = validate_crs(crs);
  CHECK(rep.ok());
  CHECK(rep.renormalized);
  CHECK(has_entry(rep.warnings, "renormalized"));
  double sum = 0.0;
  for (const auto& c : crs.candidates) sum += c.probability;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("build_view_set rejects invalid input") {
  CandidateResultSet crs = ts::worked_crs();
  crs.candidates[0].correspondence_ids.push_back("c9");
  try {
    build_view_set(crs);
    FAIL("expected MalformedInput");
  } catch (const Error& e) {
    CHECK(e.cls == ErrorClass::Domain);
    CHECK(e.kind == "MalformedInput");
  }
}

TEST_CASE("serialization round-trips canonically") {
  CandidateResultSet crs = ts::worked_crs();
  crs.correspondences[0].source_attrs[0].values = {"1001", "1002"};
  crs.correspondences[0].cost = 7;
  std::string once = dump_crs(crs);
  CandidateResultSet back = parse_crs(once);
  CHECK(dump_crs(back) == once);
  CHECK(back.candidates[0].probability == crs.candidates[0].probability);
  CHECK(back.correspondences[0].cost == crs.correspondences[0].cost);
  CHECK(back.correspondences[0].source_attrs[0].values == crs.correspondences[0].source_attrs[0].values);
}

TEST_CASE("fixture file is canonical and loads cleanly") {
  std::string path = ts::fixture("fixtures/employee_crs.json");
  CandidateResultSet crs = load_crs(path);
  ValidationReport rep = validate_crs(crs);
  CHECK(rep.ok());
  CHECK(crs.candidates.size() == 3);
  CHECK(crs.correspondences.size() == 6);
  CHECK(dump_crs(crs) == ts::read_file(path));
}

TEST_CASE("file errors carry the io class") {
  try {
    load_crs("/nonexistent/path.json");
    FAIL("expected FileUnreadable");
  } catch (const Error& e) {
    CHECK(e.cls == ErrorClass::Io);
    CHECK(e.kind == "FileUnreadable");
  }
  CHECK_THROWS_AS(parse_crs("{ not json"), Error);
}
