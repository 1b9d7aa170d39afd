#include <doctest.h>

#include <cmath>

#include <promptmatcher/errors.hpp>
#include <promptmatcher/model.hpp>
#include <promptmatcher/objective.hpp>
#include <promptmatcher/rng.hpp>
#include <promptmatcher/update.hpp>

#include "support.hpp"

using namespace pm;

namespace {

Answer ans(const std::string& id, bool verdict, double conf) {
  Answer a;
  a.corr_id = id;
  a.verdict = verdict;
  a.confidence = conf;
  return a;
}

}  // namespace

TEST_CASE("worked-example posterior") {
  ViewSet vs = build_view_set(ts::worked_crs());
  ViewSet post = apply_answer(vs, ans("c1", true, 0.8));
  REQUIRE(post.view_count() == 3);
  CHECK(post.probabilities[0] == doctest::Approx(0.44 / 0.68).epsilon(1e-9));
  CHECK(post.probabilities[1] == doctest::Approx(0.20 / 0.68).epsilon(1e-9));
  CHECK(post.probabilities[2] == doctest::Approx(0.04 / 0.68).epsilon(1e-9));
  CHECK(entropy(post.probabilities) == doctest::Approx(0.8082699580).epsilon(1e-8));

  ViewSet neg = apply_answer(vs, ans("c1", false, 0.8));
  CHECK(neg.probabilities[0] == doctest::Approx(0.11 / 0.32).epsilon(1e-9));
  CHECK(neg.probabilities[1] == doctest::Approx(0.05 / 0.32).epsilon(1e-9));
  CHECK(neg.probabilities[2] == doctest::Approx(0.16 / 0.32).epsilon(1e-9));
}

TEST_CASE("confidence one half carries no information") {
  ViewSet vs = build_view_set(ts::worked_crs());
  ViewSet post = apply_answer(vs, ans("c3", true, 0.5));
  for (size_t v = 0; v < vs.view_count(); ++v)
    CHECK(std::fabs(post.probabilities[v] - vs.probabilities[v]) <= 1e-15);
}

TEST_CASE("certain answers zero out views but keep the rows") {
  ViewSet vs = build_view_set(ts::worked_crs());
  ViewSet post = apply_answer(vs, ans("c1", true, 1.0));
  REQUIRE(post.view_count() == 3);
  CHECK(post.probabilities[0] == doctest::Approx(0.55 / 0.80).epsilon(1e-12));
  CHECK(post.probabilities[1] == doctest::Approx(0.25 / 0.80).epsilon(1e-12));
  CHECK(post.probabilities[2] == doctest::Approx(0.0).epsilon(1e-15));

  // a later answer still renormalizes over the survivors
  ViewSet post2 = apply_answer(post, ans("c5", true, 1.0));
  CHECK(post2.probabilities[1] == doctest::Approx(1.0).epsilon(1e-12));

  // c2 holds everywhere; denying it with certainty annihilates the set
  CHECK_THROWS_AS(apply_answer(vs, ans("c2", false, 1.0)), Error);
  try {
    apply_answer(vs, ans("c2", false, 1.0));
    FAIL("expected InconsistentAnswer");
  } catch (const Error& e) {
    CHECK(e.kind == "InconsistentAnswer");
    CHECK(e.cls == ErrorClass::Domain);
  }
}

TEST_CASE("answer validation") {
  ViewSet vs = build_view_set(ts::worked_crs());
  CHECK_THROWS_AS(apply_answer(vs, ans("cX", true, 0.8)), Error);
  CHECK_THROWS_AS(apply_answer(vs, ans("c1", true, 0.4)), Error);
  CHECK_THROWS_AS(apply_answer(vs, ans("c1", true, 1.2)), Error);
}

TEST_CASE("sequential updates equal the joint update") {
  Rng rng(314159);
  for (int trial = 0; trial < 40; ++trial) {
    CandidateResultSet crs = ts::random_crs(rng, 2 + static_cast<int>(rng.below(6)),
                                            2 + static_cast<int>(rng.below(5)));
    ViewSet vs = build_view_set(crs);

    AnswerFamily fam;
    for (const auto& id : vs.correspondence_ids) {
      if (rng.u01() < 0.5) continue;
      fam.corr_ids.push_back(id);
      fam.verdicts.push_back(rng.u01() < 0.5 ? 1 : 0);
      fam.confidences.push_back(0.55 + 0.4 * rng.u01());
    }
    if (fam.corr_ids.empty()) continue;

    // direct joint posterior from the definition
    std::vector<double> joint(vs.view_count());
    double z = 0.0;
    for (size_t v = 0; v < vs.view_count(); ++v) {
      joint[v] = vs.probabilities[v] * answer_likelihood(vs, v, fam);
      z += joint[v];
    }
    REQUIRE(z > 0.0);
    for (double& p : joint) p /= z;

    ViewSet seq = apply_family(vs, fam);
    for (size_t v = 0; v < vs.view_count(); ++v)
      CHECK(seq.probabilities[v] == doctest::Approx(joint[v]).epsilon(1e-12));

    // permutation of the family reaches the same posterior
    AnswerFamily rev;
    for (size_t i = fam.corr_ids.size(); i-- > 0;) {
      rev.corr_ids.push_back(fam.corr_ids[i]);
      rev.verdicts.push_back(fam.verdicts[i]);
      rev.confidences.push_back(fam.confidences[i]);
    }
    ViewSet per = apply_family(vs, rev);
    for (size_t v = 0; v < vs.view_count(); ++v)
      CHECK(per.probabilities[v] == doctest::Approx(seq.probabilities[v]).epsilon(1e-12));
  }
}

TEST_CASE("posteriors average back to the prior") {
  ViewSet vs = build_view_set(ts::worked_crs());
  std::vector<std::string> targets{"c1", "c3", "c5"};
  std::vector<double> mix(vs.view_count(), 0.0);
  double total = 0.0;
  for (uint64_t mask = 0; mask < 8; ++mask) {
    AnswerFamily fam;
    for (size_t i = 0; i < targets.size(); ++i) {
      fam.corr_ids.push_back(targets[i]);
      fam.verdicts.push_back((mask >> i) & 1);
      fam.confidences.push_back(0.8);
    }
    double pa = family_probability(vs, fam);
    total += pa;
    if (pa <= 0.0) continue;
    ViewSet post = apply_family(vs, fam);
    for (size_t v = 0; v < vs.view_count(); ++v) mix[v] += pa * post.probabilities[v];
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  for (size_t v = 0; v < vs.view_count(); ++v)
    CHECK(mix[v] == doctest::Approx(vs.probabilities[v]).epsilon(1e-9));
}
