#include "promptmatcher/eval.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "promptmatcher/errors.hpp"
#include "promptmatcher/rng.hpp"
#include "promptmatcher/selection.hpp"

namespace pm {

using nlohmann::json;

F1Score candidate_f1(const CandidateResultSet& crs, const CandidateResult& cand,
                     const GroundTruth& gt) {
  std::set<std::string> true_keys;
  for (const auto& [key, match] : gt.entries) {
    if (match) true_keys.insert(key);
  }
  std::set<std::string> cand_keys;
  for (const std::string& cid : cand.correspondence_ids) {
    const Correspondence* c = crs.find(cid);
    if (c == nullptr) {
      throw domain_error("UnknownCorrespondence",
                         "candidate \"" + cand.id + "\" references unknown correspondence \"" +
                             cid + "\"");
    }
    cand_keys.insert(GroundTruth::key_for(*c));
  }
  size_t tp = 0;
  for (const std::string& k : cand_keys) {
    if (true_keys.count(k)) ++tp;
  }
  F1Score s;
  s.precision = cand_keys.empty() ? 0.0 : static_cast<double>(tp) / cand_keys.size();
  s.recall = true_keys.empty() ? 0.0 : static_cast<double>(tp) / true_keys.size();
  s.f1 = (s.precision + s.recall) > 0.0
             ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
             : 0.0;
  return s;
}

std::vector<size_t> rank_candidates(const ViewSet& vs) {
  std::vector<size_t> order(vs.view_count());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return vs.probabilities[a] > vs.probabilities[b]; });
  return order;
}

MrrResult mrr_of(const CandidateResultSet& crs, const ViewSet& vs, const GroundTruth& gt) {
  MrrResult res;
  std::vector<double> f1(crs.candidates.size(), 0.0);
  for (size_t i = 0; i < crs.candidates.size(); ++i) {
    f1[i] = candidate_f1(crs, crs.candidates[i], gt).f1;
    res.best_f1 = std::max(res.best_f1, f1[i]);
  }
  std::set<std::string> optimal;
  for (size_t i = 0; i < crs.candidates.size(); ++i) {
    if (f1[i] >= res.best_f1 - 1e-12) {
      res.optimal_candidates.push_back(crs.candidates[i].id);
      optimal.insert(crs.candidates[i].id);
    }
  }

  std::vector<size_t> order = rank_candidates(vs);
  size_t rank = vs.view_count() + 1;
  for (size_t pos = 0; pos < order.size(); ++pos) {
    for (const std::string& cid : vs.view_candidates[order[pos]]) {
      if (optimal.count(cid)) {
        rank = std::min(rank, pos + 1);
        break;
      }
    }
    if (rank <= pos + 1) break;
  }
  res.rank = rank;
  res.mrr = 1.0 / static_cast<double>(rank);
  return res;
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  ExperimentReport rep;
  for (const ExperimentDataset& ds : spec.datasets) {
    CandidateResultSet crs;
    GroundTruth gt;
    std::string load_error;
    try {
      crs = load_crs(ds.crs_path);
      gt = load_ground_truth(ds.gt_path);
    } catch (const std::exception& e) {
      load_error = e.what();
    }

    std::vector<int64_t> budgets = spec.budgets;
    if (load_error.empty() && !spec.budget_fractions.empty()) {
      CostModel cm{spec.chars_per_token};
      int64_t total = 0;
      for (const Correspondence& c : crs.correspondences) total += cm.cost(c);
      budgets.clear();
      for (double f : spec.budget_fractions) {
        budgets.push_back(std::llround(f * static_cast<double>(total)));
      }
    }
    if (budgets.empty()) budgets.push_back(0);

    for (Strategy strat : spec.strategies) {
      for (int64_t budget : budgets) {
        for (uint64_t seed : spec.seeds) {
          ExperimentCell cell;
          cell.dataset = ds.name;
          cell.strategy = strategy_name(strat);
          cell.budget = budget;
          cell.seed = seed;
          if (!load_error.empty()) {
            cell.error = load_error;
            rep.cells.push_back(std::move(cell));
            continue;
          }
          uint64_t h = fnv1a64(ds.name);
          h = mix_seed(h, fnv1a64(strategy_name(strat)));
          h = mix_seed(h, static_cast<uint64_t>(budget));
          h = mix_seed(h, seed);
          RunConfig rc;
          rc.total_budget = budget;
          rc.rounds_k = spec.rounds_k;
          rc.strategy = strat;
          rc.planning_accuracy.global = spec.planning_accuracy;
          rc.seed = h;
          rc.exact_cap = spec.exact_cap;
          rc.mc_samples = spec.mc_samples;
          rc.chars_per_token = spec.chars_per_token;
          OracleConfig oc;
          oc.kind = OracleKind::Simulated;
          oc.accuracy = spec.oracle_accuracy;
          oc.seed = mix_seed(h, 0xC0FFEEULL);
          oc.ground_truth = gt;
          try {
            auto t0 = std::chrono::steady_clock::now();
            Oracle oracle(oc);
            RunReport rr = run(crs, rc, oracle);
            auto t1 = std::chrono::steady_clock::now();
            ViewSet vs = build_view_set(crs);
            vs.probabilities = rr.final_distribution;
            MrrResult m = mrr_of(crs, vs, gt);
            cell.ok = true;
            cell.mrr = m.mrr;
            cell.rank_of_best = m.rank;
            cell.final_entropy = rr.final_entropy;
            cell.initial_entropy = rr.initial_entropy;
            cell.wall_ms =
                std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
          } catch (const std::exception& e) {
            cell.ok = false;
            cell.error = e.what();
          }
          rep.cells.push_back(std::move(cell));
        }
      }
    }
  }
  return rep;
}

std::string experiment_to_json(const ExperimentReport& rep) {
  json cells = json::array();
  for (const ExperimentCell& c : rep.cells) {
    json jc;
    jc["dataset"] = c.dataset;
    jc["strategy"] = c.strategy;
    jc["budget"] = c.budget;
    jc["seed"] = c.seed;
    jc["ok"] = c.ok;
    jc["error"] = c.error;
    jc["mrr"] = c.mrr;
    jc["rank_of_best"] = c.rank_of_best;
    jc["final_entropy"] = c.final_entropy;
    jc["initial_entropy"] = c.initial_entropy;
    jc["wall_ms"] = c.wall_ms;
    cells.push_back(std::move(jc));
  }
  json j;
  j["cells"] = std::move(cells);
  return j.dump(2) + "\n";
}

std::string experiment_to_csv(const ExperimentReport& rep) {
  std::string out = "dataset,strategy,budget,seed,mrr,final_entropy_nats,rank_of_best,wall_ms\n";
  char buf[256];
  for (const ExperimentCell& c : rep.cells) {
    if (!c.ok) continue;
    std::snprintf(buf, sizeof buf, "%s,%s,%lld,%llu,%.6f,%.6f,%zu,%lld\n", c.dataset.c_str(),
                  c.strategy.c_str(), static_cast<long long>(c.budget),
                  static_cast<unsigned long long>(c.seed), c.mrr, c.final_entropy, c.rank_of_best,
                  static_cast<long long>(c.wall_ms));
    out += buf;
  }
  return out;
}

SchemaDef parse_schema(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw io_error("MalformedInput", std::string("schema is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("name") || !j["name"].is_string() ||
      !j.contains("attributes") || !j["attributes"].is_array()) {
    throw domain_error("MalformedInput",
                       "schema must be {\"name\": str, \"attributes\": [{\"name\", \"values\"?}]}");
  }
  SchemaDef def;
  def.name = j["name"].get<std::string>();
  for (const json& aj : j["attributes"]) {
    if (!aj.is_object() || !aj.contains("name") || !aj["name"].is_string()) {
      throw domain_error("MalformedInput", "schema attributes must be objects with a \"name\"");
    }
    std::vector<std::string> values;
    if (aj.contains("values")) {
      if (!aj["values"].is_array()) {
        throw domain_error("MalformedInput", "schema attribute values must be an array");
      }
      for (const json& v : aj["values"]) {
        values.push_back(v.is_string() ? v.get<std::string>() : v.dump());
      }
    }
    def.attributes.emplace_back(aj["name"].get<std::string>(), std::move(values));
  }
  if (def.attributes.empty()) {
    throw domain_error("MalformedInput", "schema \"" + def.name + "\" has no attributes");
  }
  return def;
}

SchemaDef load_schema(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw io_error("FileUnreadable", "cannot open schema file \"" + path + "\"");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_schema(buf.str());
}

namespace {

std::string fold_squash(const std::string& s) {
  std::string out;
  for (char ch : s) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

std::set<std::string> trigrams(const std::string& s) {
  std::set<std::string> out;
  if (s.size() < 3) {
    if (!s.empty()) out.insert(s);
    return out;
  }
  for (size_t i = 0; i + 3 <= s.size(); ++i) out.insert(s.substr(i, 3));
  return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 0.0;
  size_t inter = 0;
  for (const std::string& x : a) {
    if (b.count(x)) ++inter;
  }
  size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

size_t levenshtein(const std::string& a, const std::string& b) {
  std::vector<size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (size_t j = 1; j <= b.size(); ++j) {
      size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double edit_similarity(const std::string& a, const std::string& b) {
  size_t maxlen = std::max(a.size(), b.size());
  if (maxlen == 0) return 0.0;
  return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(maxlen);
}

using Matching = std::set<std::pair<size_t, size_t>>;

// Greedy one-to-one assignment over scored pairs; the seed only breaks score
// ties so equal-quality pairs do not depend on input order.
Matching assign(const std::vector<std::tuple<double, size_t, size_t>>& scored, uint64_t tie_seed,
                const SchemaDef& src, const SchemaDef& tgt) {
  std::vector<std::tuple<double, uint64_t, size_t, size_t>> order;
  order.reserve(scored.size());
  for (const auto& [score, i, j] : scored) {
    uint64_t tie = splitmix64(mix_seed(
        tie_seed, fnv1a64(src.attributes[i].first + "\x1f" + tgt.attributes[j].first)));
    order.emplace_back(score, tie, i, j);
  }
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    return std::get<1>(a) < std::get<1>(b);
  });
  Matching m;
  std::set<size_t> used_src, used_tgt;
  for (const auto& [score, tie, i, j] : order) {
    if (used_src.count(i) || used_tgt.count(j)) continue;
    used_src.insert(i);
    used_tgt.insert(j);
    m.emplace(i, j);
  }
  return m;
}

}  // namespace

CandidateResultSet gen_demo_crs(const SchemaDef& source, const SchemaDef& target, uint64_t seed) {
  const size_t ns = source.attributes.size();
  const size_t nt = target.attributes.size();
  std::vector<std::string> src_norm(ns), tgt_norm(nt);
  std::vector<std::set<std::string>> src_tri(ns), tgt_tri(nt);
  for (size_t i = 0; i < ns; ++i) {
    src_norm[i] = fold_squash(source.attributes[i].first);
    src_tri[i] = trigrams(src_norm[i]);
  }
  for (size_t j = 0; j < nt; ++j) {
    tgt_norm[j] = fold_squash(target.attributes[j].first);
    tgt_tri[j] = trigrams(tgt_norm[j]);
  }

  std::vector<Matching> matchings;
  auto add_matcher = [&](uint64_t idx, auto&& score_fn) {
    std::vector<std::tuple<double, size_t, size_t>> scored;
    for (size_t i = 0; i < ns; ++i) {
      for (size_t j = 0; j < nt; ++j) {
        double s = score_fn(i, j);
        if (s > 0.0) scored.emplace_back(s, i, j);
      }
    }
    Matching m = assign(scored, mix_seed(seed, idx), source, target);
    if (m.empty()) return;
    for (const Matching& prev : matchings) {
      if (prev == m) return;
    }
    matchings.push_back(std::move(m));
  };

  add_matcher(0, [&](size_t i, size_t j) {
    return source.attributes[i].first == target.attributes[j].first ? 1.0 : 0.0;
  });
  add_matcher(1, [&](size_t i, size_t j) {
    return !src_norm[i].empty() && src_norm[i] == tgt_norm[j] ? 1.0 : 0.0;
  });
  add_matcher(2, [&](size_t i, size_t j) {
    const std::string& a = src_norm[i];
    const std::string& b = tgt_norm[j];
    size_t minlen = std::min(a.size(), b.size());
    if (minlen < 2 || a == b) return a == b && !a.empty() ? 1.0 : 0.0;
    bool prefix = a.compare(0, minlen, b, 0, minlen) == 0;
    return prefix ? static_cast<double>(minlen) / std::max(a.size(), b.size()) : 0.0;
  });
  auto tri_matcher = [&](double threshold) {
    return [&, threshold](size_t i, size_t j) {
      double s = jaccard(src_tri[i], tgt_tri[j]);
      return s >= threshold ? s : 0.0;
    };
  };
  add_matcher(3, tri_matcher(0.30));
  add_matcher(4, tri_matcher(0.60));
  auto edit_matcher = [&](double threshold) {
    return [&, threshold](size_t i, size_t j) {
      double s = edit_similarity(src_norm[i], tgt_norm[j]);
      return s >= threshold ? s : 0.0;
    };
  };
  add_matcher(5, edit_matcher(0.50));
  add_matcher(6, edit_matcher(0.75));

  if (matchings.empty()) {
    throw domain_error("DegenerateSchemas", "no matcher found any attribute pair between \"" +
                                                source.name + "\" and \"" + target.name + "\"");
  }

  std::set<std::pair<size_t, size_t>> all_pairs;
  for (const Matching& m : matchings) all_pairs.insert(m.begin(), m.end());

  CandidateResultSet crs;
  crs.source_schema = source.name;
  crs.target_schema = target.name;
  std::map<std::pair<size_t, size_t>, std::string> id_of;
  int width = all_pairs.size() >= 100 ? 3 : 2;
  size_t n = 0;
  for (const auto& pr : all_pairs) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "c%0*zu", width, ++n);
    id_of[pr] = buf;
    Correspondence c;
    c.id = buf;
    AttributeRef sa;
    sa.side = SchemaSide::Source;
    sa.name = source.attributes[pr.first].first;
    sa.values = source.attributes[pr.first].second;
    AttributeRef ta;
    ta.side = SchemaSide::Target;
    ta.name = target.attributes[pr.second].first;
    ta.values = target.attributes[pr.second].second;
    c.source_attrs.push_back(std::move(sa));
    c.target_attrs.push_back(std::move(ta));
    crs.correspondences.push_back(std::move(c));
  }

  const size_t k = matchings.size();
  for (size_t m = 0; m < k; ++m) {
    CandidateResult cand;
    cand.id = "s" + std::to_string(m + 1);
    for (const auto& pr : matchings[m]) cand.correspondence_ids.push_back(id_of[pr]);
    cand.probability = 1.0 / static_cast<double>(k);
    crs.candidates.push_back(std::move(cand));
  }
  double head = 0.0;
  for (size_t m = 0; m + 1 < k; ++m) head += crs.candidates[m].probability;
  crs.candidates.back().probability = 1.0 - head;
  return crs;
}

SchemaDef demo_source_schema() {
  SchemaDef s;
  s.name = "Employee";
  s.attributes = {
      {"ID", {"1001", "1002", "1003", "1004", "1005"}},
      {"Name", {"Alice Fox", "Bruno Marsh", "Carla Ibanez"}},
      {"Email", {"alice.fox@corp.example", "bruno.marsh@corp.example", "carla.ibanez@corp.example"}},
      {"Address", {"12 Elm St", "98 Oak Ave", "5 Pine Rd"}},
      {"Age", {"29", "41", "35"}},
      {"Gender", {"F", "M"}},
  };
  return s;
}

SchemaDef demo_target_schema() {
  SchemaDef s;
  s.name = "EmployeeInfo";
  s.attributes = {
      {"EmployeeID", {"E-1001", "E-1002", "E-1003"}},
      {"First Name", {"Alice", "Bruno", "Carla"}},
      {"Last Name", {"Fox", "Marsh", "Ibanez"}},
      {"Email Address", {"a.fox@hr.example", "b.marsh@hr.example", "c.ibanez@hr.example"}},
      {"Home Address", {"12 Elm Street", "98 Oak Avenue", "5 Pine Road"}},
      {"Years of Experience", {}},
      {"Sex", {"female", "male"}},
  };
  return s;
}

namespace {

std::string vowel_drop(const std::string& s) {
  std::string out;
  for (size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (i > 0 && (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u')) continue;
    out.push_back(c);
  }
  return out.empty() ? s : out;
}

std::string pascal_case(const std::string& s) {
  std::string out;
  bool up = true;
  for (char c : s) {
    if (c == '_') {
      up = true;
      continue;
    }
    out.push_back(up ? static_cast<char>(std::toupper(static_cast<unsigned char>(c))) : c);
    up = false;
  }
  return out;
}

std::string variant_name(const std::string& base, uint64_t style, Rng& rng) {
  switch (style % 6) {
    case 0:
      return base;
    case 1:
      return vowel_drop(base);
    case 2:
      return base.size() > 4 ? base.substr(0, 4) : base;
    case 3:
      return pascal_case(base);
    case 4:
      return base + "_no";
    default: {
      std::string acro;
      acro.push_back(base[0]);
      for (size_t i = 1; i < base.size(); ++i) {
        if (base[i - 1] == '_') acro.push_back(base[i]);
      }
      if (acro.size() < 2) return vowel_drop(base) + std::to_string(rng.below(9) + 1);
      return acro;
    }
  }
}

std::string random_token(Rng& rng) {
  size_t len = 3 + rng.below(4);
  std::string out;
  for (size_t i = 0; i < len; ++i) out.push_back(static_cast<char>('a' + rng.below(26)));
  out += std::to_string(rng.below(90) + 10);
  return out;
}

}  // namespace

SyntheticFixture gen_synthetic_crs(const SyntheticSpec& spec) {
  if (spec.source_attrs < 3 || spec.target_attrs < 3) {
    throw domain_error("BadConfig", "synthetic schemas need at least 3 attributes per side");
  }
  if (spec.candidates < 2) {
    throw domain_error("BadConfig", "synthetic fixtures need at least 2 candidates");
  }
  if (spec.min_edits < 1 || spec.max_edits < spec.min_edits) {
    throw domain_error("BadConfig", "edit bounds must satisfy 1 <= min_edits <= max_edits");
  }
  Rng rng(mix_seed(spec.seed, 0x53594eULL));

  static const std::vector<std::string> bases = {
      "account", "address",  "amount",   "balance",  "category", "city",     "comment",
      "country", "currency", "customer", "date",     "department", "description", "discount",
      "email",   "employee", "invoice",  "item",     "location", "manager",  "name",
      "order",   "payment",  "phone",    "price",    "product",  "quantity", "region",
      "salary",  "status",   "supplier", "tax"};
  static const std::vector<std::string> quals = {"id", "code", "num", "type", "key", "ref"};

  std::vector<size_t> base_idx(bases.size());
  std::iota(base_idx.begin(), base_idx.end(), size_t{0});
  rng.shuffle(base_idx);

  const size_t ns = static_cast<size_t>(spec.source_attrs);
  const size_t nt = static_cast<size_t>(spec.target_attrs);
  std::set<std::string> used_src, used_tgt;
  std::vector<std::string> src_names, tgt_names;

  auto fresh = [&](std::set<std::string>& used, std::string name) {
    while (used.count(name)) name += "_" + std::to_string(rng.below(90) + 10);
    used.insert(name);
    return name;
  };

  for (size_t i = 0; i < ns; ++i) {
    std::string base = bases[base_idx[i % base_idx.size()]];
    std::string name = base;
    if (rng.below(3) == 0) name = base + "_" + quals[rng.below(quals.size())];
    src_names.push_back(fresh(used_src, name));
  }

  size_t n_match = std::max<size_t>(2, std::min(ns, nt) * 7 / 10);
  for (size_t i = 0; i < n_match; ++i) {
    tgt_names.push_back(fresh(used_tgt, variant_name(src_names[i], rng.next(), rng)));
  }
  for (size_t i = n_match; i < nt; ++i) {
    std::string base = bases[base_idx[(ns + i) % base_idx.size()]];
    tgt_names.push_back(fresh(used_tgt, variant_name(base, rng.next(), rng)));
  }

  // Matched pairs share sample values; everything else gets fresh ones.
  std::vector<std::vector<std::string>> src_vals(ns), tgt_vals(nt);
  for (size_t i = 0; i < ns; ++i) {
    size_t k = 2 + rng.below(3);
    for (size_t v = 0; v < k; ++v) src_vals[i].push_back(random_token(rng));
  }
  for (size_t j = 0; j < nt; ++j) {
    if (j < n_match) {
      tgt_vals[j] = src_vals[j];
      if (!tgt_vals[j].empty() && rng.below(2) == 0) tgt_vals[j].pop_back();
    } else {
      size_t k = 2 + rng.below(3);
      for (size_t v = 0; v < k; ++v) tgt_vals[j].push_back(random_token(rng));
    }
  }

  // The correspondence pool: every true pair plus off-diagonal distractors.
  std::vector<std::pair<size_t, size_t>> pairs;
  std::set<std::pair<size_t, size_t>> seen_pairs;
  for (size_t i = 0; i < n_match; ++i) {
    pairs.emplace_back(i, i);
    seen_pairs.emplace(i, i);
  }
  size_t n_distract = 4 + rng.below(3);
  size_t guard = 0;
  while (pairs.size() < n_match + n_distract && guard++ < 500) {
    size_t a = rng.below(ns);
    size_t b = rng.below(nt);
    if (a == b && a < n_match) continue;
    if (!seen_pairs.emplace(a, b).second) continue;
    pairs.emplace_back(a, b);
  }
  size_t first_distract = n_match;

  SyntheticFixture fx;
  fx.crs.source_schema = "synthetic_source_" + std::to_string(spec.seed);
  fx.crs.target_schema = "synthetic_target_" + std::to_string(spec.seed);

  int width = pairs.size() >= 100 ? 3 : 2;
  std::vector<std::string> corr_ids(pairs.size());
  for (size_t k = 0; k < pairs.size(); ++k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "c%0*u", width, static_cast<unsigned>(k + 1));
    corr_ids[k] = buf;
    const std::string& sname = src_names[pairs[k].first];
    const std::string& tname = tgt_names[pairs[k].second];
    Correspondence c;
    c.id = buf;
    AttributeRef sa;
    sa.side = SchemaSide::Source;
    sa.name = sname;
    sa.values = src_vals[pairs[k].first];
    AttributeRef ta;
    ta.side = SchemaSide::Target;
    ta.name = tname;
    ta.values = tgt_vals[pairs[k].second];
    c.source_attrs.push_back(std::move(sa));
    c.target_attrs.push_back(std::move(ta));
    fx.crs.correspondences.push_back(std::move(c));
    fx.gt.entries[GroundTruth::key({sname}, {tname})] = k < first_distract;
  }

  std::set<std::vector<std::string>> cand_sets;
  auto sorted_ids = [](std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    return v;
  };

  std::vector<std::vector<std::string>> cand_lists;
  std::vector<std::string> truth_ids(corr_ids.begin(), corr_ids.begin() + first_distract);
  cand_lists.push_back(truth_ids);
  cand_sets.insert(sorted_ids(truth_ids));

  size_t attempts = 0;
  while (cand_lists.size() < static_cast<size_t>(spec.candidates) && attempts++ < 400) {
    size_t span = static_cast<size_t>(spec.max_edits - spec.min_edits + 1);
    size_t edits = static_cast<size_t>(spec.min_edits) + rng.below(span);
    size_t removals = 1 + rng.below(std::min(edits, first_distract - 1));
    size_t additions = edits > removals ? edits - removals : 0;

    std::vector<size_t> gt_order(first_distract);
    std::iota(gt_order.begin(), gt_order.end(), size_t{0});
    rng.shuffle(gt_order);
    std::set<size_t> removed(gt_order.begin(), gt_order.begin() + removals);

    std::set<size_t> used_s, used_t;
    for (size_t k = 0; k < first_distract; ++k) {
      if (removed.count(k)) continue;
      used_s.insert(pairs[k].first);
      used_t.insert(pairs[k].second);
    }
    std::vector<size_t> dist_order;
    for (size_t k = first_distract; k < pairs.size(); ++k) dist_order.push_back(k);
    rng.shuffle(dist_order);
    std::vector<std::string> ids;
    for (size_t k = 0; k < first_distract; ++k) {
      if (!removed.count(k)) ids.push_back(corr_ids[k]);
    }
    size_t added = 0;
    for (size_t k : dist_order) {
      if (added == additions) break;
      if (used_s.count(pairs[k].first) || used_t.count(pairs[k].second)) continue;
      used_s.insert(pairs[k].first);
      used_t.insert(pairs[k].second);
      ids.push_back(corr_ids[k]);
      ++added;
    }
    size_t distance = removals + added;
    if (distance < static_cast<size_t>(spec.min_edits) ||
        distance > static_cast<size_t>(spec.max_edits)) {
      continue;
    }
    if (ids.empty() || !cand_sets.insert(sorted_ids(ids)).second) continue;
    cand_lists.push_back(std::move(ids));
  }

  rng.shuffle(cand_lists);
  const size_t k = cand_lists.size();
  for (size_t m = 0; m < k; ++m) {
    CandidateResult cand;
    cand.id = "s" + std::to_string(m + 1);
    cand.correspondence_ids = cand_lists[m];
    cand.probability = 1.0 / static_cast<double>(k);
    fx.crs.candidates.push_back(std::move(cand));
  }
  double head = 0.0;
  for (size_t m = 0; m + 1 < k; ++m) head += fx.crs.candidates[m].probability;
  fx.crs.candidates.back().probability = 1.0 - head;
  return fx;
}

std::vector<BenchRow> run_bench(const CandidateResultSet& crs, const std::vector<int64_t>& budgets,
                                const std::vector<Strategy>& strategies, double planning_accuracy,
                                uint64_t seed, int exact_cap) {
  ViewSet vs = build_view_set(crs);
  CostModel cm;
  std::vector<BenchRow> rows;
  for (int64_t budget : budgets) {
    for (Strategy strat : strategies) {
      SelectionOptions opt;
      opt.accuracy.global = planning_accuracy;
      opt.eval.exact_cap = exact_cap;
      opt.eval.mc_seed = mix_seed(seed, static_cast<uint64_t>(budget));
      opt.auto_monte_carlo = true;
      opt.seed = mix_seed(seed, static_cast<uint64_t>(budget));
      auto t0 = std::chrono::steady_clock::now();
      SelectionResult sel;
      switch (strat) {
        case Strategy::Greedy:
          sel = greedy_select(vs, crs.correspondences, cm, budget, opt);
          break;
        case Strategy::Brute:
          sel = brute_select(vs, crs.correspondences, cm, budget, opt);
          break;
        case Strategy::Random:
          sel = random_select(vs, crs.correspondences, cm, budget, opt);
          break;
      }
      auto t1 = std::chrono::steady_clock::now();
      BenchRow row;
      row.strategy = strategy_name(strat);
      row.budget = budget;
      row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
      row.objective = sel.objective_value;
      row.evaluations = sel.evaluations;
      row.cost = sel.total_cost;
      row.chosen = sel.chosen.size();
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string bench_to_csv(const std::vector<BenchRow>& rows) {
  std::string out = "budget,strategy,wall_ms,objective_nats,evaluations,cost,chosen\n";
  char buf[192];
  for (const BenchRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%lld,%s,%.3f,%.6f,%llu,%lld,%zu\n",
                  static_cast<long long>(r.budget), r.strategy.c_str(), r.wall_ms, r.objective,
                  static_cast<unsigned long long>(r.evaluations), static_cast<long long>(r.cost),
                  r.chosen);
    out += buf;
  }
  return out;
}

}  // namespace pm
