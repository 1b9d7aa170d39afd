#include "promptmatcher/engine.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "promptmatcher/config.hpp"
#include "promptmatcher/errors.hpp"
#include "promptmatcher/rng.hpp"
#include "promptmatcher/update.hpp"

namespace pm {

using nlohmann::json;

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Greedy:
      return "greedy";
    case Strategy::Brute:
      return "brute";
    case Strategy::Random:
      return "random";
  }
  return "greedy";
}

Strategy strategy_from_name(const std::string& name) {
  if (name == "greedy") return Strategy::Greedy;
  if (name == "brute") return Strategy::Brute;
  if (name == "random") return Strategy::Random;
  throw domain_error("BadConfig", "unknown strategy \"" + name + "\" (valid: greedy, brute, random)");
}

namespace {

const char* oracle_kind_name(OracleKind k) {
  switch (k) {
    case OracleKind::Simulated:
      return "simulated";
    case OracleKind::Replay:
      return "replay";
    case OracleKind::Llm:
      return "llm";
  }
  return "simulated";
}

std::vector<size_t> rank_views(const ViewSet& vs) {
  std::vector<size_t> order(vs.view_count());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return vs.probabilities[a] > vs.probabilities[b]; });
  return order;
}

void validate_config(const RunConfig& cfg) {
  if (cfg.total_budget < 0) {
    throw domain_error("BadConfig", "total_budget must be non-negative");
  }
  if (cfg.rounds_k < 1) {
    throw domain_error("BadConfig", "rounds must be at least 1");
  }
  if (cfg.exact_cap < 0) {
    throw domain_error("BadConfig", "exact_cap must be non-negative");
  }
  if (cfg.mc_samples < 1) {
    throw domain_error("BadConfig", "mc_samples must be at least 1");
  }
  if (cfg.chars_per_token <= 0) {
    throw domain_error("BadConfig", "chars_per_token must be positive");
  }
  if (cfg.stop_entropy && *cfg.stop_entropy < 0.0) {
    throw domain_error("BadConfig", "stop_entropy must be non-negative");
  }
  cfg.planning_accuracy.validate();
}

}  // namespace

RunReport run(const CandidateResultSet& crs, const RunConfig& cfg, Oracle& oracle) {
  validate_config(cfg);

  CandidateResultSet working = crs;
  ValidationReport vrep = validate_crs(working);
  for (const std::string& w : vrep.warnings) log_line(LogLevel::Warn, "validate: " + w);
  if (!vrep.ok()) {
    throw domain_error("MalformedInput", vrep.errors.front());
  }
  ViewSet vs = build_view_set(working);

  std::map<std::string, const Correspondence*> by_id;
  for (const Correspondence& c : working.correspondences) by_id[c.id] = &c;
  CostModel cost_model{cfg.chars_per_token};
  std::map<std::string, int64_t> cost_of;
  for (const Correspondence& c : working.correspondences) cost_of[c.id] = cost_model.cost(c);

  RunReport rep;
  rep.config = cfg;
  rep.oracle_kind = oracle_kind_name(oracle.config().kind);
  rep.initial_distribution = vs.probabilities;
  rep.initial_entropy = entropy(vs.probabilities);

  const int64_t share = cfg.total_budget / cfg.rounds_k;
  std::set<std::string> asked;
  int64_t spent = 0;
  int64_t carry = 0;
  rep.stop_reason = "rounds_exhausted";

  for (int round = 1; round <= cfg.rounds_k; ++round) {
    double h_now = entropy(vs.probabilities);
    if (cfg.stop_entropy && h_now <= *cfg.stop_entropy) {
      rep.stop_reason = "entropy_target";
      break;
    }
    std::vector<Correspondence> pool;
    for (const Correspondence& c : working.correspondences) {
      if (cfg.allow_requery || !asked.count(c.id)) pool.push_back(c);
    }
    if (pool.empty()) {
      rep.stop_reason = "all_asked";
      break;
    }
    int64_t cheapest = cost_of[pool.front().id];
    for (const Correspondence& c : pool) cheapest = std::min(cheapest, cost_of[c.id]);
    if (cfg.total_budget - spent < cheapest) {
      rep.stop_reason = "budget_exhausted";
      break;
    }

    int64_t round_budget = share + carry;
    SelectionOptions sopt;
    sopt.accuracy = cfg.planning_accuracy;
    sopt.eval.mode = EvalMode::Exact;
    sopt.eval.exact_cap = cfg.exact_cap;
    sopt.eval.mc_samples = cfg.mc_samples;
    sopt.eval.mc_seed = mix_seed(cfg.seed, static_cast<uint64_t>(round));
    sopt.auto_monte_carlo = true;
    sopt.seed = mix_seed(cfg.seed, static_cast<uint64_t>(round));

    SelectionResult sel;
    switch (cfg.strategy) {
      case Strategy::Greedy:
        sel = greedy_select(vs, pool, cost_model, round_budget, sopt);
        break;
      case Strategy::Brute:
        sel = brute_select(vs, pool, cost_model, round_budget, sopt);
        break;
      case Strategy::Random:
        sel = random_select(vs, pool, cost_model, round_budget, sopt);
        break;
    }

    RoundRecord rec;
    rec.round = round;
    rec.budget_share = share;
    rec.carry_in = carry;
    rec.selected = sel.chosen;
    rec.planned_reduction = sel.objective_value;
    rec.evaluations = sel.evaluations;
    rec.entropy_before = h_now;

    for (const std::string& id : sel.chosen) {
      const Correspondence& c = *by_id.at(id);
      Answer a;
      try {
        a = oracle.verify(c);
      } catch (const Error& e) {
        if (e.cls == ErrorClass::Oracle && cfg.on_oracle_error == OracleErrorPolicy::Skip) {
          log_line(LogLevel::Warn, std::string("oracle failure on \"") + id + "\" skipped: " + e.what());
          rec.skipped.push_back(id);
          asked.insert(id);
          continue;
        }
        throw;
      }
      vs = apply_answer(vs, a);
      rec.answers.push_back(a);
      asked.insert(id);
      rec.round_cost += cost_of[id];
      spent += cost_of[id];
    }

    carry = round_budget - rec.round_cost;
    rec.entropy_after = entropy(vs.probabilities);
    rec.spent_total = spent;
    rec.remaining_total = cfg.total_budget - spent;
    rep.rounds.push_back(std::move(rec));
  }

  rep.final_distribution = vs.probabilities;
  rep.final_entropy = entropy(vs.probabilities);
  rep.view_ranking = rank_views(vs);

  // Candidate posterior: the view's posterior mass split by prior weight
  // inside the view. Ties resolve to the original candidate order.
  std::map<std::string, double> prior_of;
  std::map<std::string, size_t> index_of_cand;
  for (size_t i = 0; i < working.candidates.size(); ++i) {
    prior_of[working.candidates[i].id] = working.candidates[i].probability;
    index_of_cand[working.candidates[i].id] = i;
  }
  std::vector<std::pair<std::string, double>> posterior;
  for (size_t v = 0; v < vs.view_count(); ++v) {
    double prior_sum = 0.0;
    for (const std::string& cid : vs.view_candidates[v]) prior_sum += prior_of[cid];
    for (const std::string& cid : vs.view_candidates[v]) {
      double w = prior_sum > 0.0 ? prior_of[cid] / prior_sum : 0.0;
      posterior.emplace_back(cid, vs.probabilities[v] * w);
    }
  }
  std::stable_sort(posterior.begin(), posterior.end(), [&](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return index_of_cand[a.first] < index_of_cand[b.first];
  });
  for (const auto& [cid, p] : posterior) {
    rep.candidate_ranking.push_back(cid);
    rep.candidate_posteriors.push_back(p);
  }

  return rep;
}

std::string report_to_json(const RunReport& rep) {
  json cfg;
  cfg["allow_requery"] = rep.config.allow_requery;
  cfg["chars_per_token"] = rep.config.chars_per_token;
  cfg["exact_cap"] = rep.config.exact_cap;
  cfg["mc_samples"] = rep.config.mc_samples;
  cfg["on_oracle_error"] =
      rep.config.on_oracle_error == OracleErrorPolicy::Abort ? "abort" : "skip";
  json acc;
  acc["global"] = rep.config.planning_accuracy.global;
  json overrides = json::object();
  for (const auto& [id, v] : rep.config.planning_accuracy.overrides) overrides[id] = v;
  acc["overrides"] = std::move(overrides);
  cfg["planning_accuracy"] = std::move(acc);
  cfg["rounds"] = rep.config.rounds_k;
  cfg["seed"] = rep.config.seed;
  if (rep.config.stop_entropy) {
    cfg["stop_entropy"] = *rep.config.stop_entropy;
  } else {
    cfg["stop_entropy"] = nullptr;
  }
  cfg["strategy"] = strategy_name(rep.config.strategy);
  cfg["total_budget"] = rep.config.total_budget;

  json rounds = json::array();
  for (const RoundRecord& r : rep.rounds) {
    json jr;
    jr["round"] = r.round;
    jr["budget_share"] = r.budget_share;
    jr["carry_in"] = r.carry_in;
    jr["selected"] = r.selected;
    jr["round_cost"] = r.round_cost;
    jr["planned_reduction"] = r.planned_reduction;
    jr["evaluations"] = r.evaluations;
    json answers = json::array();
    for (const Answer& a : r.answers) {
      json ja;
      ja["confidence"] = a.confidence;
      ja["corr_id"] = a.corr_id;
      ja["provenance"] = a.provenance;
      ja["raw_response"] = a.raw_response;
      ja["verdict"] = a.verdict;
      answers.push_back(std::move(ja));
    }
    jr["answers"] = std::move(answers);
    jr["skipped"] = r.skipped;
    jr["entropy_before"] = r.entropy_before;
    jr["entropy_after"] = r.entropy_after;
    jr["spent_total"] = r.spent_total;
    jr["remaining_total"] = r.remaining_total;
    rounds.push_back(std::move(jr));
  }

  json j;
  j["config"] = std::move(cfg);
  j["oracle_kind"] = rep.oracle_kind;
  j["initial_entropy"] = rep.initial_entropy;
  j["initial_distribution"] = rep.initial_distribution;
  j["rounds"] = std::move(rounds);
  j["final_distribution"] = rep.final_distribution;
  j["final_entropy"] = rep.final_entropy;
  json ranking = json::array();
  for (size_t i = 0; i < rep.candidate_ranking.size(); ++i) {
    json row;
    row["id"] = rep.candidate_ranking[i];
    row["posterior"] = rep.candidate_posteriors[i];
    ranking.push_back(std::move(row));
  }
  j["candidate_ranking"] = std::move(ranking);
  j["view_ranking"] = rep.view_ranking;
  j["stop_reason"] = rep.stop_reason;
  return j.dump(2) + "\n";
}

}  // namespace pm
