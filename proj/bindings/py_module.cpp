// Python surface: the candidate-set model, the information objective,
// selection, the verify-update loop, and the evaluation helpers. Reports
// cross the boundary as JSON strings; the package wrapper parses them.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include <promptmatcher/engine.hpp>
#include <promptmatcher/errors.hpp>
#include <promptmatcher/eval.hpp>
#include <promptmatcher/model.hpp>
#include <promptmatcher/objective.hpp>
#include <promptmatcher/oracle.hpp>
#include <promptmatcher/selection.hpp>
#include <promptmatcher/update.hpp>

namespace py = pybind11;

namespace {

pm::OracleKind oracle_kind_from(const std::string& name) {
  if (name == "simulated" || name == "sim") return pm::OracleKind::Simulated;
  if (name == "replay") return pm::OracleKind::Replay;
  if (name == "llm") return pm::OracleKind::Llm;
  throw pm::domain_error("BadConfig",
                         "unknown oracle kind \"" + name + "\" (valid: simulated, replay, llm)");
}

pm::PromptKind prompt_kind_from(const std::string& name) {
  if (name == "semantic") return pm::PromptKind::Semantic;
  if (name == "abbreviation") return pm::PromptKind::Abbreviation;
  throw pm::domain_error(
      "BadConfig", "unknown prompt template \"" + name + "\" (valid: semantic, abbreviation)");
}

const pm::Correspondence& find_corr(const pm::CandidateResultSet& crs, const std::string& id) {
  const pm::Correspondence* c = crs.find(id);
  if (c == nullptr) {
    throw pm::domain_error("UnknownCorrespondence", "no correspondence \"" + id + "\"");
  }
  return *c;
}

pm::EvalOptions eval_options(const std::string& mode, int exact_cap, int mc_samples,
                             uint64_t mc_seed) {
  pm::EvalOptions opt;
  if (mode == "exact") {
    opt.mode = pm::EvalMode::Exact;
  } else if (mode == "monte_carlo") {
    opt.mode = pm::EvalMode::MonteCarlo;
  } else {
    throw pm::domain_error("BadConfig",
                           "unknown mode \"" + mode + "\" (valid: exact, monte_carlo)");
  }
  opt.exact_cap = exact_cap;
  opt.mc_samples = mc_samples;
  opt.mc_seed = mc_seed;
  return opt;
}

py::dict selection_dict(const pm::SelectionResult& res) {
  py::dict d;
  d["chosen"] = res.chosen;
  d["total_cost"] = res.total_cost;
  d["objective_nats"] = res.objective_value;
  d["evaluations"] = res.evaluations;
  return d;
}

py::dict select_questions(const pm::CandidateResultSet& crs, int64_t budget, const std::string& strategy,
                double planning_accuracy, uint64_t seed, int64_t chars_per_token, int exact_cap,
                int mc_samples, bool auto_monte_carlo) {
  const pm::ViewSet vs = pm::build_view_set(crs);
  pm::SelectionOptions opt;
  opt.accuracy.global = planning_accuracy;
  opt.accuracy.validate();
  opt.eval.exact_cap = exact_cap;
  opt.eval.mc_samples = mc_samples;
  opt.eval.mc_seed = seed;
  opt.auto_monte_carlo = auto_monte_carlo;
  opt.seed = seed;
  const pm::CostModel w{chars_per_token};
  switch (pm::strategy_from_name(strategy)) {
    case pm::Strategy::Brute:
      return selection_dict(pm::brute_select(vs, crs.correspondences, w, budget, opt));
    case pm::Strategy::Greedy:
      return selection_dict(pm::greedy_select(vs, crs.correspondences, w, budget, opt));
    case pm::Strategy::Random:
      break;
  }
  return selection_dict(pm::random_select(vs, crs.correspondences, w, budget, opt));
}

std::string run_json(const pm::CandidateResultSet& crs, int64_t budget, const std::string& oracle,
                     const std::string& ground_truth, const std::string& transcript, int rounds,
                     const std::string& strategy, double planning_accuracy, double oracle_accuracy,
                     uint64_t seed, std::optional<uint64_t> oracle_seed,
                     std::optional<double> stop_entropy, bool allow_requery,
                     const std::string& on_oracle_error, int64_t chars_per_token, int exact_cap,
                     int mc_samples, const std::string& record_transcript) {
  pm::RunConfig rc;
  rc.total_budget = budget;
  rc.rounds_k = rounds;
  rc.strategy = pm::strategy_from_name(strategy);
  rc.planning_accuracy.global = planning_accuracy;
  rc.seed = seed;
  rc.exact_cap = exact_cap;
  rc.mc_samples = mc_samples;
  rc.stop_entropy = stop_entropy;
  rc.allow_requery = allow_requery;
  if (on_oracle_error == "abort") {
    rc.on_oracle_error = pm::OracleErrorPolicy::Abort;
  } else if (on_oracle_error == "skip") {
    rc.on_oracle_error = pm::OracleErrorPolicy::Skip;
  } else {
    throw pm::domain_error("BadConfig", "unknown oracle error policy \"" + on_oracle_error +
                                            "\" (valid: abort, skip)");
  }
  rc.chars_per_token = chars_per_token;

  pm::OracleConfig oc;
  oc.kind = oracle_kind_from(oracle);
  oc.accuracy = oracle_accuracy;
  oc.seed = oracle_seed.value_or(seed);
  oc.ground_truth_path = ground_truth;
  oc.transcript_path = transcript;
  oc.record_transcript_path = record_transcript;

  pm::Oracle o(oc);
  return pm::report_to_json(pm::run(crs, rc, o));
}

py::dict score(const pm::CandidateResultSet& crs, const pm::ViewSet& vs,
               const std::string& ground_truth_path) {
  const pm::GroundTruth gt = pm::load_ground_truth(ground_truth_path);
  const pm::MrrResult m = pm::mrr_of(crs, vs, gt);
  py::dict d;
  d["best_f1"] = m.best_f1;
  d["optimal_candidates"] = m.optimal_candidates;
  d["rank_of_best"] = m.rank;
  d["mrr"] = m.mrr;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Budgeted oracle-query selection over probabilistic schema matchings";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const pm::Error& e) {
      switch (e.cls) {
        case pm::ErrorClass::Io:
          PyErr_SetString(PyExc_OSError, e.what());
          return;
        case pm::ErrorClass::Oracle:
          PyErr_SetString(PyExc_RuntimeError, e.what());
          return;
        case pm::ErrorClass::Domain:
          break;
      }
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  py::class_<pm::CandidateResultSet>(m, "CandidateResultSet")
      .def_readonly("source_schema", &pm::CandidateResultSet::source_schema)
      .def_readonly("target_schema", &pm::CandidateResultSet::target_schema)
      .def_property_readonly("correspondence_ids",
                             [](const pm::CandidateResultSet& crs) {
                               std::vector<std::string> ids;
                               for (const auto& c : crs.correspondences) ids.push_back(c.id);
                               return ids;
                             })
      .def_property_readonly("candidates",
                             [](const pm::CandidateResultSet& crs) {
                               py::list out;
                               for (const auto& c : crs.candidates) {
                                 py::dict d;
                                 d["id"] = c.id;
                                 d["correspondence_ids"] = c.correspondence_ids;
                                 d["probability"] = c.probability;
                                 out.append(d);
                               }
                               return out;
                             })
      .def("to_json", &pm::dump_crs)
      .def("__repr__", [](const pm::CandidateResultSet& crs) {
        return "<CandidateResultSet " + crs.source_schema + " -> " + crs.target_schema + ", " +
               std::to_string(crs.candidates.size()) + " candidates, " +
               std::to_string(crs.correspondences.size()) + " correspondences>";
      });

  py::class_<pm::ViewSet>(m, "ViewSet")
      .def_readonly("correspondence_ids", &pm::ViewSet::correspondence_ids)
      .def_readonly("probabilities", &pm::ViewSet::probabilities)
      .def_readonly("view_candidates", &pm::ViewSet::view_candidates)
      .def_property_readonly("rows",
                             [](const pm::ViewSet& vs) {
                               py::list out;
                               for (const auto& row : vs.rows) {
                                 py::list r;
                                 for (uint8_t x : row) r.append(x != 0);
                                 out.append(r);
                               }
                               return out;
                             })
      .def("view_count", &pm::ViewSet::view_count)
      .def("corr_count", &pm::ViewSet::corr_count)
      .def("index_of", &pm::ViewSet::index_of, py::arg("corr_id"))
      .def("marginal", &pm::marginal_probability, py::arg("corr_id"))
      .def("__repr__", [](const pm::ViewSet& vs) {
        return "<ViewSet " + std::to_string(vs.view_count()) + " views x " +
               std::to_string(vs.corr_count()) + " correspondences>";
      });

  m.def("load_crs", &pm::load_crs, py::arg("path"));
  m.def("parse_crs", &pm::parse_crs, py::arg("json_text"));
  m.def("dump_crs", &pm::dump_crs, py::arg("crs"));
  m.def("save_crs", &pm::save_crs, py::arg("crs"), py::arg("path"));

  m.def(
      "validate",
      [](pm::CandidateResultSet& crs) {
        const pm::ValidationReport rep = pm::validate_crs(crs);
        py::dict d;
        d["errors"] = rep.errors;
        d["warnings"] = rep.warnings;
        d["renormalized"] = rep.renormalized;
        d["ok"] = rep.ok();
        return d;
      },
      py::arg("crs"), "Structural checks; may renormalize tiny probability drift in place.");

  m.def("build_view_set", &pm::build_view_set, py::arg("crs"));

  m.def(
      "entropy", [](const std::vector<double>& p) { return pm::entropy(p); }, py::arg("probs"),
      "Shannon entropy in nats.");

  m.def(
      "expected_reduction",
      [](const pm::ViewSet& vs, const std::vector<std::string>& targets, double accuracy,
         const std::string& mode, int exact_cap, int mc_samples, uint64_t mc_seed) {
        pm::PlanningAccuracy acc;
        acc.global = accuracy;
        acc.validate();
        return pm::expected_reduction(vs, targets, acc,
                                      eval_options(mode, exact_cap, mc_samples, mc_seed));
      },
      py::arg("view_set"), py::arg("targets"), py::arg("accuracy") = 0.9,
      py::arg("mode") = "exact", py::arg("exact_cap") = 16, py::arg("mc_samples") = 100000,
      py::arg("mc_seed") = 0,
      "Expected entropy drop (nats) from asking the targets at the given accuracy.");

  m.def(
      "apply_answer",
      [](const pm::ViewSet& vs, const std::string& corr_id, bool verdict, double confidence) {
        pm::Answer a;
        a.corr_id = corr_id;
        a.verdict = verdict;
        a.confidence = confidence;
        return pm::apply_answer(vs, a);
      },
      py::arg("view_set"), py::arg("corr_id"), py::arg("verdict"), py::arg("confidence") = 0.9,
      "Posterior view distribution after one oracle answer.");

  m.def("select", &select_questions, py::arg("crs"), py::arg("budget"), py::arg("strategy") = "greedy",
        py::arg("planning_accuracy") = 0.9, py::arg("seed") = 0, py::arg("chars_per_token") = 4,
        py::arg("exact_cap") = 16, py::arg("mc_samples") = 20000,
        py::arg("auto_monte_carlo") = true,
        "Pick the best question set under the token budget.");

  m.def("run_json", &run_json, py::arg("crs"), py::arg("budget"),
        py::arg("oracle") = "simulated", py::arg("ground_truth") = "",
        py::arg("transcript") = "", py::arg("rounds") = 1, py::arg("strategy") = "greedy",
        py::arg("planning_accuracy") = 0.9, py::arg("oracle_accuracy") = 0.9, py::arg("seed") = 0,
        py::arg("oracle_seed") = std::nullopt, py::arg("stop_entropy") = std::nullopt,
        py::arg("allow_requery") = false, py::arg("on_oracle_error") = "abort",
        py::arg("chars_per_token") = 4, py::arg("exact_cap") = 16, py::arg("mc_samples") = 20000,
        py::arg("record_transcript") = "",
        "Full verify-update loop; returns the run report as a JSON string.");

  m.def(
      "token_cost",
      [](const pm::CandidateResultSet& crs, const std::string& corr_id, int64_t chars_per_token) {
        return pm::token_cost(find_corr(crs, corr_id), chars_per_token);
      },
      py::arg("crs"), py::arg("corr_id"), py::arg("chars_per_token") = 4);

  m.def(
      "render_prompt",
      [](const pm::CandidateResultSet& crs, const std::string& corr_id, const std::string& kind,
         const std::string& schema_name) {
        const std::string schema = schema_name.empty() ? crs.source_schema : schema_name;
        return pm::render_prompt(find_corr(crs, corr_id), prompt_kind_from(kind), schema);
      },
      py::arg("crs"), py::arg("corr_id"), py::arg("kind") = "semantic",
      py::arg("schema_name") = "");

  m.def("score", &score, py::arg("crs"), py::arg("view_set"), py::arg("ground_truth_path"),
        "Best F1, optimal candidates, rank of best, and MRR against a ground truth file.");
}
