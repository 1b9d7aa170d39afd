#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <promptmatcher/config.hpp>
#include <promptmatcher/engine.hpp>
#include <promptmatcher/errors.hpp>
#include <promptmatcher/eval.hpp>
#include <promptmatcher/model.hpp>
#include <promptmatcher/objective.hpp>
#include <promptmatcher/oracle.hpp>
#include <promptmatcher/selection.hpp>

using nlohmann::json;

namespace {

std::string fmt4(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

std::string join_ids(const std::vector<std::string>& ids) {
  if (ids.empty()) return "(none)";
  std::string out;
  for (size_t i = 0; i < ids.size(); ++i) {
    if (i > 0) out += ' ';
    out += ids[i];
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw pm::io_error("FileUnreadable", "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) throw pm::io_error("FileUnwritable", "cannot write " + path);
}

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

pm::OracleErrorPolicy policy_from(const std::string& name) {
  if (name == "abort") return pm::OracleErrorPolicy::Abort;
  if (name == "skip") return pm::OracleErrorPolicy::Skip;
  throw pm::domain_error("BadConfig", "unknown oracle error policy \"" + name +
                                          "\" (valid: abort, skip)");
}

int64_t require_budget(const pm::CliConfig& m) {
  if (!m.budget) {
    throw pm::domain_error("BadConfig", "budget is required (flag --budget or config key \"budget\")");
  }
  return *m.budget;
}

pm::SelectionOptions selection_options(const pm::CliConfig& m) {
  pm::SelectionOptions opt;
  opt.accuracy.global = m.planning_accuracy.value_or(0.9);
  opt.accuracy.validate();
  opt.eval.mode = pm::EvalMode::Exact;
  opt.eval.exact_cap = m.exact_cap.value_or(16);
  opt.eval.mc_samples = m.mc_samples.value_or(20000);
  opt.eval.mc_seed = m.seed.value_or(0);
  opt.auto_monte_carlo = true;
  opt.seed = m.seed.value_or(0);
  return opt;
}

pm::RunConfig run_config(const pm::CliConfig& m) {
  pm::RunConfig rc;
  rc.total_budget = require_budget(m);
  rc.rounds_k = m.rounds.value_or(1);
  rc.strategy = pm::strategy_from_name(m.strategy.value_or("greedy"));
  rc.planning_accuracy.global = m.planning_accuracy.value_or(0.9);
  rc.seed = m.seed.value_or(0);
  rc.exact_cap = m.exact_cap.value_or(16);
  rc.mc_samples = m.mc_samples.value_or(20000);
  if (m.stop_entropy) rc.stop_entropy = *m.stop_entropy;
  rc.allow_requery = m.allow_requery.value_or(false);
  rc.on_oracle_error = policy_from(m.on_oracle_error.value_or("abort"));
  rc.chars_per_token = m.chars_per_token.value_or(4);
  return rc;
}

pm::OracleConfig oracle_config(const pm::CliConfig& m, const pm::CandidateResultSet& crs,
                               uint64_t default_seed) {
  pm::OracleConfig oc;
  oc.kind = oracle_kind_from(m.oracle_kind.value_or("simulated"));
  oc.accuracy = m.oracle_accuracy.value_or(0.9);
  oc.seed = m.oracle_seed.value_or(default_seed);
  oc.ground_truth_path = m.ground_truth.value_or("");
  oc.transcript_path = m.transcript.value_or("");
  oc.endpoint_url = m.endpoint_url.value_or("");
  oc.model_name = m.model.value_or("");
  oc.prompt = prompt_kind_from(m.prompt_template.value_or("semantic"));
  oc.schema_name = m.schema_name.value_or(crs.source_schema);
  oc.temperature = m.temperature.value_or(0.0);
  oc.max_retries = m.max_retries.value_or(3);
  oc.backoff_ms = m.backoff_ms.value_or(500);
  oc.max_parallel = m.max_parallel.value_or(4);
  oc.cache_dir = m.cache_dir.value_or("");
  oc.fixed_confidence = m.fixed_confidence.value_or(0.9);
  oc.record_transcript_path = m.record_transcript.value_or("");
  return oc;
}

pm::ExperimentSpec parse_experiment_spec(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw pm::io_error("MalformedInput", "experiment spec " + path + ": " + e.what());
  }
  if (!j.is_object()) {
    throw pm::domain_error("MalformedInput", "experiment spec must be a JSON object");
  }
  pm::ExperimentSpec spec;
  const std::filesystem::path dir = std::filesystem::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path fp(p);
    return fp.is_absolute() ? fp.string() : (dir / fp).string();
  };
  for (const auto& d : j.at("datasets")) {
    pm::ExperimentDataset ds;
    ds.name = d.at("name").get<std::string>();
    ds.crs_path = resolve(d.at("crs").get<std::string>());
    ds.gt_path = resolve(d.at("gt").get<std::string>());
    spec.datasets.push_back(std::move(ds));
  }
  spec.strategies.clear();
  for (const auto& s : j.at("strategies")) {
    spec.strategies.push_back(pm::strategy_from_name(s.get<std::string>()));
  }
  if (j.contains("budget_fractions")) {
    spec.budget_fractions = j["budget_fractions"].get<std::vector<double>>();
  }
  if (j.contains("budgets")) spec.budgets = j["budgets"].get<std::vector<int64_t>>();
  spec.seeds = j.at("seeds").get<std::vector<uint64_t>>();
  if (j.contains("rounds")) spec.rounds_k = j["rounds"].get<int>();
  if (j.contains("planning_accuracy")) {
    spec.planning_accuracy = j["planning_accuracy"].get<double>();
  }
  if (j.contains("oracle_accuracy")) spec.oracle_accuracy = j["oracle_accuracy"].get<double>();
  if (j.contains("exact_cap")) spec.exact_cap = j["exact_cap"].get<int>();
  if (j.contains("mc_samples")) spec.mc_samples = j["mc_samples"].get<int>();
  if (j.contains("chars_per_token")) {
    spec.chars_per_token = j["chars_per_token"].get<int64_t>();
  }
  return spec;
}

int cmd_validate(const std::string& path) {
  pm::CandidateResultSet crs = pm::load_crs(path);
  const pm::ValidationReport report = pm::validate_crs(crs);
  for (const auto& e : report.errors) std::cout << "error: " << e << "\n";
  for (const auto& w : report.warnings) std::cout << "warning: " << w << "\n";
  if (!report.ok()) return 1;
  std::cout << "OK: " << crs.candidates.size() << " candidates, " << crs.correspondences.size()
            << " correspondences\n";
  return 0;
}

int cmd_demo(const pm::CliConfig& m, const std::string& source_path,
             const std::string& target_path, const std::string& out_path) {
  const pm::SchemaDef src =
      source_path.empty() ? pm::demo_source_schema() : pm::load_schema(source_path);
  const pm::SchemaDef tgt =
      target_path.empty() ? pm::demo_target_schema() : pm::load_schema(target_path);
  const pm::CandidateResultSet crs = pm::gen_demo_crs(src, tgt, m.seed.value_or(0));
  if (out_path.empty()) {
    std::cout << pm::dump_crs(crs);
  } else {
    pm::save_crs(crs, out_path);
    std::cout << "wrote " << out_path << ": " << crs.candidates.size() << " candidates, "
              << crs.correspondences.size() << " correspondences\n";
  }
  return 0;
}

int cmd_select(const pm::CliConfig& m, const std::string& path) {
  const pm::CandidateResultSet crs = pm::load_crs(path);
  const pm::ViewSet vs = pm::build_view_set(crs);
  const int64_t budget = require_budget(m);
  const pm::Strategy strat = pm::strategy_from_name(m.strategy.value_or("greedy"));
  const pm::SelectionOptions opt = selection_options(m);
  const pm::CostModel w{m.chars_per_token.value_or(4)};
  pm::SelectionResult res;
  switch (strat) {
    case pm::Strategy::Brute:
      res = pm::brute_select(vs, crs.correspondences, w, budget, opt);
      break;
    case pm::Strategy::Greedy:
      res = pm::greedy_select(vs, crs.correspondences, w, budget, opt);
      break;
    case pm::Strategy::Random:
      res = pm::random_select(vs, crs.correspondences, w, budget, opt);
      break;
  }
  std::cout << "strategy: " << pm::strategy_name(strat) << "\n"
            << "budget: " << budget << "\n"
            << "chosen: " << join_ids(res.chosen) << "\n"
            << "cost: " << res.total_cost << "\n"
            << "expected_reduction_nats: " << fmt4(res.objective_value) << "\n"
            << "evaluations: " << res.evaluations << "\n";
  return 0;
}

int cmd_run(const pm::CliConfig& m, const std::string& path, const std::string& out_path) {
  const pm::CandidateResultSet crs = pm::load_crs(path);
  const pm::RunConfig rc = run_config(m);
  pm::Oracle oracle(oracle_config(m, crs, rc.seed));
  const pm::RunReport rep = pm::run(crs, rc, oracle);

  std::cout << "oracle: " << rep.oracle_kind << "\n"
            << "strategy: " << pm::strategy_name(rep.config.strategy) << "\n"
            << "initial_entropy_nats: " << fmt4(rep.initial_entropy) << "\n";
  for (const pm::RoundRecord& r : rep.rounds) {
    std::cout << "round " << r.round << ": selected " << join_ids(r.selected) << " | cost "
              << r.round_cost << " | entropy " << fmt4(r.entropy_before) << " -> "
              << fmt4(r.entropy_after);
    if (!r.skipped.empty()) std::cout << " | skipped " << join_ids(r.skipped);
    std::cout << "\n";
  }
  std::cout << "final_entropy_nats: " << fmt4(rep.final_entropy) << "\n"
            << "stop_reason: " << rep.stop_reason << "\n"
            << "ranking:\n";
  for (size_t i = 0; i < rep.candidate_ranking.size(); ++i) {
    std::cout << "  " << (i + 1) << ". " << rep.candidate_ranking[i]
              << " p=" << fmt4(rep.candidate_posteriors[i]) << "\n";
  }
  if (!out_path.empty()) write_text(out_path, pm::report_to_json(rep));
  return 0;
}

int cmd_eval_report(const std::string& report_path, const std::string& crs_path,
                    const std::string& gt_path) {
  json rep;
  try {
    rep = json::parse(read_file(report_path));
  } catch (const json::parse_error& e) {
    throw pm::io_error("MalformedInput", "report " + report_path + ": " + e.what());
  }
  const pm::CandidateResultSet crs = pm::load_crs(crs_path);
  const pm::GroundTruth gt = pm::load_ground_truth(gt_path);
  pm::ViewSet vs = pm::build_view_set(crs);
  const auto dist = rep.at("final_distribution").get<std::vector<double>>();
  if (dist.size() != vs.view_count()) {
    throw pm::domain_error("MalformedInput",
                           "final_distribution length does not match the view set");
  }
  vs.probabilities = dist;
  const pm::MrrResult mr = pm::mrr_of(crs, vs, gt);
  std::cout << "best_f1: " << fmt4(mr.best_f1) << "\n"
            << "optimal: " << join_ids(mr.optimal_candidates) << "\n"
            << "rank_of_best: " << mr.rank << "\n"
            << "mrr: " << fmt4(mr.mrr) << "\n"
            << "final_entropy_nats: " << fmt4(pm::entropy(vs.probabilities)) << "\n";
  return 0;
}

int cmd_eval_experiment(const std::string& spec_path, const std::string& out_json,
                        const std::string& out_csv) {
  const pm::ExperimentSpec spec = parse_experiment_spec(spec_path);
  const pm::ExperimentReport report = pm::run_experiment(spec);
  size_t ok = 0;
  for (const auto& c : report.cells) ok += c.ok ? 1 : 0;
  std::cout << "cells: " << report.cells.size() << " (" << ok << " ok, "
            << (report.cells.size() - ok) << " failed)\n";
  for (const pm::Strategy s : spec.strategies) {
    const std::string name = pm::strategy_name(s);
    double mrr_sum = 0.0, ent_sum = 0.0;
    size_t n = 0;
    for (const auto& c : report.cells) {
      if (!c.ok || c.strategy != name) continue;
      mrr_sum += c.mrr;
      ent_sum += c.final_entropy;
      ++n;
    }
    if (n == 0) continue;
    std::cout << name << ": mean_mrr " << fmt4(mrr_sum / static_cast<double>(n))
              << " | mean_final_entropy_nats " << fmt4(ent_sum / static_cast<double>(n))
              << "\n";
  }
  if (!out_json.empty()) {
    write_text(out_json, pm::experiment_to_json(report));
    std::cout << "wrote " << out_json << "\n";
  }
  if (!out_csv.empty()) {
    write_text(out_csv, pm::experiment_to_csv(report));
    std::cout << "wrote " << out_csv << "\n";
  }
  return 0;
}

int cmd_bench(const pm::CliConfig& m, const std::string& path,
              const std::vector<int64_t>& budgets, const std::vector<std::string>& strategy_names,
              const std::string& out_path) {
  const pm::CandidateResultSet crs = pm::load_crs(path);
  std::vector<pm::Strategy> strategies;
  for (const auto& name : strategy_names) strategies.push_back(pm::strategy_from_name(name));
  const std::vector<pm::BenchRow> rows =
      pm::run_bench(crs, budgets, strategies, m.planning_accuracy.value_or(0.9),
                    m.seed.value_or(0), m.exact_cap.value_or(16));
  const std::string csv = pm::bench_to_csv(rows);
  if (out_path.empty()) {
    std::cout << csv;
  } else {
    write_text(out_path, csv);
    std::cout << "wrote " << out_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uncertainty reduction for probabilistic schema matching"};
  app.require_subcommand(1);

  std::string config_path;
  uint64_t seed_flag = 0;
  std::string log_flag;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--seed", seed_flag, "master random seed");
  app.add_option("--log-level", log_flag, "debug | info | warn | error");

  auto* c_validate = app.add_subcommand("validate", "check a candidate result set");
  c_validate->fallthrough();
  std::string v_path;
  c_validate->add_option("crs", v_path, "candidate result set JSON")->required();

  auto* c_demo = app.add_subcommand("demo", "generate a candidate set from two schemas");
  c_demo->fallthrough();
  std::string d_source, d_target, d_out;
  c_demo->add_option("--source", d_source, "source schema JSON (default: built-in)");
  c_demo->add_option("--target", d_target, "target schema JSON (default: built-in)");
  c_demo->add_option("--out", d_out, "output path (default: stdout)");

  auto* c_select = app.add_subcommand("select", "pick the best question set for a budget");
  c_select->fallthrough();
  std::string s_path;
  int64_t s_budget = 0;
  std::string s_strategy;
  double s_accuracy = 0.9;
  int s_exact_cap = 16, s_mc_samples = 20000;
  int64_t s_cpt = 4;
  c_select->add_option("crs", s_path, "candidate result set JSON")->required();
  c_select->add_option("--budget", s_budget, "token budget");
  c_select->add_option("--strategy", s_strategy, "greedy | brute | random");
  c_select->add_option("--planning-accuracy", s_accuracy, "assumed oracle accuracy");
  c_select->add_option("--exact-cap", s_exact_cap, "exact enumeration guard");
  c_select->add_option("--mc-samples", s_mc_samples, "monte-carlo samples");
  c_select->add_option("--chars-per-token", s_cpt, "token cost divisor");

  auto* c_run = app.add_subcommand("run", "full select-verify-update loop");
  c_run->fallthrough();
  std::string r_path, r_out;
  int64_t r_budget = 0;
  int r_rounds = 1;
  std::string r_strategy;
  double r_accuracy = 0.9;
  int r_exact_cap = 16, r_mc_samples = 20000;
  double r_stop_entropy = 0.0;
  bool r_allow_requery = false;
  std::string r_policy;
  int64_t r_cpt = 4;
  std::string r_oracle, r_gt, r_transcript, r_endpoint, r_model, r_template, r_schema;
  double r_oracle_accuracy = 0.9;
  uint64_t r_oracle_seed = 0;
  double r_temperature = 0.0;
  int r_max_retries = 3, r_backoff = 500, r_max_parallel = 4;
  std::string r_cache_dir, r_record;
  double r_fixed_conf = 0.9;
  c_run->add_option("crs", r_path, "candidate result set JSON")->required();
  c_run->add_option("--budget", r_budget, "total token budget");
  c_run->add_option("--rounds", r_rounds, "number of budget shares");
  c_run->add_option("--strategy", r_strategy, "greedy | brute | random");
  c_run->add_option("--planning-accuracy", r_accuracy, "assumed oracle accuracy");
  c_run->add_option("--exact-cap", r_exact_cap, "exact enumeration guard");
  c_run->add_option("--mc-samples", r_mc_samples, "monte-carlo samples");
  c_run->add_option("--stop-entropy", r_stop_entropy, "stop once entropy (nats) falls this low");
  c_run->add_flag("--allow-requery", r_allow_requery, "allow asking a correspondence twice");
  c_run->add_option("--on-oracle-error", r_policy, "abort | skip");
  c_run->add_option("--chars-per-token", r_cpt, "token cost divisor");
  c_run->add_option("--oracle", r_oracle, "simulated | replay | llm");
  c_run->add_option("--oracle-accuracy", r_oracle_accuracy, "simulated oracle accuracy");
  c_run->add_option("--oracle-seed", r_oracle_seed, "simulated oracle seed (default: --seed)");
  c_run->add_option("--ground-truth", r_gt, "ground truth JSON for the simulated oracle");
  c_run->add_option("--transcript", r_transcript, "JSONL transcript for the replay oracle");
  c_run->add_option("--endpoint-url", r_endpoint, "chat-completion endpoint");
  c_run->add_option("--model", r_model, "model name");
  c_run->add_option("--prompt-template", r_template, "semantic | abbreviation");
  c_run->add_option("--schema-name", r_schema, "domain context (default: source schema)");
  c_run->add_option("--temperature", r_temperature, "sampling temperature");
  c_run->add_option("--max-retries", r_max_retries, "HTTP retry attempts");
  c_run->add_option("--backoff-ms", r_backoff, "base retry backoff");
  c_run->add_option("--max-parallel", r_max_parallel, "parallel in-flight requests");
  c_run->add_option("--cache-dir", r_cache_dir, "response cache directory");
  c_run->add_option("--fixed-confidence", r_fixed_conf, "confidence when the reply has none");
  c_run->add_option("--record-transcript", r_record, "JSONL transcript to append");
  c_run->add_option("--out", r_out, "write the run report JSON here");

  auto* c_eval = app.add_subcommand("eval", "score a report or run an experiment grid");
  c_eval->fallthrough();
  std::string e_report, e_crs, e_gt, e_experiment, e_out_json, e_out_csv;
  c_eval->add_option("--report", e_report, "run report JSON");
  c_eval->add_option("--crs", e_crs, "candidate result set the report was produced from");
  c_eval->add_option("--gt", e_gt, "ground truth JSON");
  c_eval->add_option("--experiment", e_experiment, "experiment spec JSON (grid mode)");
  c_eval->add_option("--out-json", e_out_json, "grid mode: write the cell report here");
  c_eval->add_option("--out-csv", e_out_csv, "grid mode: write the flat CSV here");

  auto* c_bench = app.add_subcommand("bench", "time the strategies over a budget grid");
  c_bench->fallthrough();
  std::string b_path, b_out;
  std::vector<int64_t> b_budgets;
  std::vector<std::string> b_strategies = {"greedy", "brute", "random"};
  double b_accuracy = 0.9;
  int b_exact_cap = 16;
  c_bench->add_option("crs", b_path, "candidate result set JSON")->required();
  c_bench->add_option("--budgets", b_budgets, "budget grid")->delimiter(',')->required();
  c_bench->add_option("--strategies", b_strategies, "strategies to time")->delimiter(',');
  c_bench->add_option("--planning-accuracy", b_accuracy, "assumed oracle accuracy");
  c_bench->add_option("--exact-cap", b_exact_cap, "exact enumeration guard");
  c_bench->add_option("--out", b_out, "output CSV path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    pm::CliConfig m;
    if (app.count("--config") > 0) m = pm::load_cli_config(config_path);
    pm::apply_env(m);
    if (app.count("--seed") > 0) m.seed = seed_flag;
    if (app.count("--log-level") > 0) m.log_level = log_flag;
    pm::set_log_level(m.log_level ? pm::log_level_from_name(*m.log_level)
                                  : pm::LogLevel::Warn);

    if (app.got_subcommand(c_validate)) return cmd_validate(v_path);
    if (app.got_subcommand(c_demo)) return cmd_demo(m, d_source, d_target, d_out);

    if (app.got_subcommand(c_select)) {
      if (c_select->count("--budget") > 0) m.budget = s_budget;
      if (c_select->count("--strategy") > 0) m.strategy = s_strategy;
      if (c_select->count("--planning-accuracy") > 0) m.planning_accuracy = s_accuracy;
      if (c_select->count("--exact-cap") > 0) m.exact_cap = s_exact_cap;
      if (c_select->count("--mc-samples") > 0) m.mc_samples = s_mc_samples;
      if (c_select->count("--chars-per-token") > 0) m.chars_per_token = s_cpt;
      return cmd_select(m, s_path);
    }

    if (app.got_subcommand(c_run)) {
      if (c_run->count("--budget") > 0) m.budget = r_budget;
      if (c_run->count("--rounds") > 0) m.rounds = r_rounds;
      if (c_run->count("--strategy") > 0) m.strategy = r_strategy;
      if (c_run->count("--planning-accuracy") > 0) m.planning_accuracy = r_accuracy;
      if (c_run->count("--exact-cap") > 0) m.exact_cap = r_exact_cap;
      if (c_run->count("--mc-samples") > 0) m.mc_samples = r_mc_samples;
      if (c_run->count("--stop-entropy") > 0) m.stop_entropy = r_stop_entropy;
      if (c_run->count("--allow-requery") > 0) m.allow_requery = r_allow_requery;
      if (c_run->count("--on-oracle-error") > 0) m.on_oracle_error = r_policy;
      if (c_run->count("--chars-per-token") > 0) m.chars_per_token = r_cpt;
      if (c_run->count("--oracle") > 0) m.oracle_kind = r_oracle;
      if (c_run->count("--oracle-accuracy") > 0) m.oracle_accuracy = r_oracle_accuracy;
      if (c_run->count("--oracle-seed") > 0) m.oracle_seed = r_oracle_seed;
      if (c_run->count("--ground-truth") > 0) m.ground_truth = r_gt;
      if (c_run->count("--transcript") > 0) m.transcript = r_transcript;
      if (c_run->count("--endpoint-url") > 0) m.endpoint_url = r_endpoint;
      if (c_run->count("--model") > 0) m.model = r_model;
      if (c_run->count("--prompt-template") > 0) m.prompt_template = r_template;
      if (c_run->count("--schema-name") > 0) m.schema_name = r_schema;
      if (c_run->count("--temperature") > 0) m.temperature = r_temperature;
      if (c_run->count("--max-retries") > 0) m.max_retries = r_max_retries;
      if (c_run->count("--backoff-ms") > 0) m.backoff_ms = r_backoff;
      if (c_run->count("--max-parallel") > 0) m.max_parallel = r_max_parallel;
      if (c_run->count("--cache-dir") > 0) m.cache_dir = r_cache_dir;
      if (c_run->count("--fixed-confidence") > 0) m.fixed_confidence = r_fixed_conf;
      if (c_run->count("--record-transcript") > 0) m.record_transcript = r_record;
      return cmd_run(m, r_path, r_out);
    }

    if (app.got_subcommand(c_eval)) {
      if (!e_experiment.empty()) return cmd_eval_experiment(e_experiment, e_out_json, e_out_csv);
      if (e_report.empty() || e_crs.empty() || e_gt.empty()) {
        throw pm::domain_error(
            "BadConfig", "eval needs either --experiment or all of --report, --crs and --gt");
      }
      return cmd_eval_report(e_report, e_crs, e_gt);
    }

    if (app.got_subcommand(c_bench)) {
      if (c_bench->count("--planning-accuracy") > 0) m.planning_accuracy = b_accuracy;
      if (c_bench->count("--exact-cap") > 0) m.exact_cap = b_exact_cap;
      return cmd_bench(m, b_path, b_budgets, b_strategies, b_out);
    }

    std::cerr << "error: no subcommand\n";
    return 2;
  } catch (const pm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.cls);
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
