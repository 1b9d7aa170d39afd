#include "promptmatcher/model.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "promptmatcher/errors.hpp"

namespace pm {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

const json& need(const json& obj, const char* key, const std::string& ctx) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw domain_error("MalformedInput", ctx + " lacks required key \"" + key + "\"");
  }
  return *it;
}

std::string need_string(const json& obj, const char* key, const std::string& ctx) {
  const json& v = need(obj, key, ctx);
  if (!v.is_string()) {
    throw domain_error("MalformedInput", ctx + " key \"" + key + "\" must be a string");
  }
  return v.get<std::string>();
}

std::vector<AttributeRef> parse_attrs(const json& arr, SchemaSide side, const std::string& ctx) {
  if (!arr.is_array()) {
    throw domain_error("MalformedInput", ctx + " must be an array of attribute objects");
  }
  std::vector<AttributeRef> out;
  for (const json& a : arr) {
    if (!a.is_object()) {
      throw domain_error("MalformedInput", ctx + " entries must be objects with \"name\" and \"values\"");
    }
    AttributeRef ref;
    ref.side = side;
    ref.name = trim(need_string(a, "name", ctx));
    auto vit = a.find("values");
    if (vit != a.end()) {
      if (!vit->is_array()) {
        throw domain_error("MalformedInput", ctx + " attribute \"" + ref.name + "\" values must be an array");
      }
      for (const json& v : *vit) {
        if (v.is_string()) {
          ref.values.push_back(v.get<std::string>());
        } else {
          ref.values.push_back(v.dump());
        }
      }
    }
    out.push_back(std::move(ref));
  }
  return out;
}

json attrs_to_json(const std::vector<AttributeRef>& attrs) {
  json arr = json::array();
  for (const AttributeRef& a : attrs) {
    json o;
    o["name"] = a.name;
    o["values"] = a.values;
    arr.push_back(std::move(o));
  }
  return arr;
}

}  // namespace

const Correspondence* CandidateResultSet::find(const std::string& corr_id) const {
  for (const Correspondence& c : correspondences) {
    if (c.id == corr_id) return &c;
  }
  return nullptr;
}

size_t ViewSet::index_of(const std::string& corr_id) const {
  for (size_t i = 0; i < correspondence_ids.size(); ++i) {
    if (correspondence_ids[i] == corr_id) return i;
  }
  throw domain_error("UnknownCorrespondence", "no correspondence with id \"" + corr_id + "\"");
}

ValidationReport validate_crs(CandidateResultSet& crs) {
  ValidationReport rep;
  auto err = [&](std::string m) { rep.errors.push_back(std::move(m)); };
  auto warn = [&](std::string m) { rep.warnings.push_back(std::move(m)); };

  if (crs.correspondences.empty()) err("correspondence list is empty");
  if (crs.candidates.empty()) err("candidate list is empty");

  std::map<std::string, const Correspondence*> by_id;
  for (const Correspondence& c : crs.correspondences) {
    if (c.id.empty()) {
      err("a correspondence has an empty id");
      continue;
    }
    if (!by_id.emplace(c.id, &c).second) {
      err("duplicate correspondence id \"" + c.id + "\"");
    }
    if (c.source_attrs.empty()) err("correspondence \"" + c.id + "\" has no source attributes");
    if (c.target_attrs.empty()) err("correspondence \"" + c.id + "\" has no target attributes");
    for (const auto* attrs : {&c.source_attrs, &c.target_attrs}) {
      for (const AttributeRef& a : *attrs) {
        if (trim(a.name).empty()) {
          err("correspondence \"" + c.id + "\" has an attribute with an empty name");
        }
      }
    }
    if (c.cost) {
      if (*c.cost < 0) {
        err("correspondence \"" + c.id + "\" has a negative cost");
      } else if (*c.cost == 0) {
        warn("correspondence \"" + c.id + "\" has zero cost");
      }
    }
  }

  std::set<std::string> referenced;
  std::set<std::string> cand_ids;
  std::map<std::vector<std::string>, std::string> seen_sets;
  double sum = 0.0;
  for (const CandidateResult& cand : crs.candidates) {
    if (cand.id.empty()) {
      err("a candidate has an empty id");
    } else if (!cand_ids.insert(cand.id).second) {
      err("duplicate candidate id \"" + cand.id + "\"");
    }
    if (cand.correspondence_ids.empty()) {
      err("candidate \"" + cand.id + "\" lists no correspondences");
    }
    std::vector<std::string> sorted_ids = cand.correspondence_ids;
    std::sort(sorted_ids.begin(), sorted_ids.end());
    for (size_t i = 1; i < sorted_ids.size(); ++i) {
      if (sorted_ids[i] == sorted_ids[i - 1]) {
        err("candidate \"" + cand.id + "\" lists correspondence \"" + sorted_ids[i] + "\" more than once");
      }
    }
    auto dup = seen_sets.emplace(sorted_ids, cand.id);
    if (!dup.second) {
      warn("candidates \"" + dup.first->second + "\" and \"" + cand.id +
           "\" contain the same correspondence set; their rows will be merged");
    }
    // One attribute may back at most one correspondence inside a candidate.
    std::map<std::pair<int, std::string>, std::string> used;
    for (const std::string& cid : cand.correspondence_ids) {
      auto it = by_id.find(cid);
      if (it == by_id.end()) {
        err("candidate \"" + cand.id + "\" references unknown correspondence \"" + cid + "\"");
        continue;
      }
      referenced.insert(cid);
      const Correspondence& c = *it->second;
      for (const auto* attrs : {&c.source_attrs, &c.target_attrs}) {
        for (const AttributeRef& a : *attrs) {
          auto key = std::make_pair(a.side == SchemaSide::Source ? 0 : 1, a.name);
          auto u = used.emplace(key, cid);
          if (!u.second && u.first->second != cid) {
            err("candidate \"" + cand.id + "\": attribute \"" + a.name +
                "\" is claimed by correspondences \"" + u.first->second + "\" and \"" + cid + "\"");
          }
        }
      }
    }
    if (!(cand.probability >= 0.0) || cand.probability > 1.0) {
      std::ostringstream os;
      os << "candidate \"" << cand.id << "\" probability " << cand.probability
         << " lies outside [0, 1]";
      err(os.str());
    } else {
      sum += cand.probability;
    }
  }

  for (const Correspondence& c : crs.correspondences) {
    if (!c.id.empty() && !referenced.count(c.id)) {
      warn("correspondence \"" + c.id + "\" appears in no candidate");
    }
  }

  if (rep.errors.empty()) {
    double drift = std::fabs(sum - 1.0);
    if (drift > 1e-6) {
      std::ostringstream os;
      os.precision(12);
      os << "candidate probabilities must sum to 1 (got " << sum << ")";
      err(os.str());
    } else if (drift > 0.0) {
      for (CandidateResult& cand : crs.candidates) cand.probability /= sum;
      rep.renormalized = true;
      std::ostringstream os;
      os.precision(12);
      os << "candidate probabilities summed to " << sum << "; renormalized";
      warn(os.str());
    }
  }
  return rep;
}

ViewSet build_view_set(const CandidateResultSet& crs) {
  CandidateResultSet copy = crs;
  ValidationReport rep = validate_crs(copy);
  if (!rep.ok()) {
    std::string msg = rep.errors.front();
    if (rep.errors.size() > 1) {
      msg += " (and " + std::to_string(rep.errors.size() - 1) + " more)";
    }
    throw domain_error("MalformedInput", msg);
  }

  ViewSet vs;
  vs.correspondence_ids.reserve(copy.correspondences.size());
  std::map<std::string, size_t> col;
  for (const Correspondence& c : copy.correspondences) {
    col.emplace(c.id, vs.correspondence_ids.size());
    vs.correspondence_ids.push_back(c.id);
  }

  std::map<std::vector<uint8_t>, size_t> row_index;
  for (const CandidateResult& cand : copy.candidates) {
    std::vector<uint8_t> row(vs.correspondence_ids.size(), 0);
    for (const std::string& cid : cand.correspondence_ids) row[col.at(cid)] = 1;
    auto it = row_index.find(row);
    if (it == row_index.end()) {
      row_index.emplace(row, vs.rows.size());
      vs.rows.push_back(std::move(row));
      vs.probabilities.push_back(cand.probability);
      vs.view_candidates.push_back({cand.id});
    } else {
      vs.probabilities[it->second] += cand.probability;
      vs.view_candidates[it->second].push_back(cand.id);
    }
  }

  // Zero-probability rows carry no mass and no candidate ever revives them.
  size_t w = 0;
  for (size_t v = 0; v < vs.rows.size(); ++v) {
    if (vs.probabilities[v] > 0.0) {
      if (w != v) {
        vs.rows[w] = std::move(vs.rows[v]);
        vs.probabilities[w] = vs.probabilities[v];
        vs.view_candidates[w] = std::move(vs.view_candidates[v]);
      }
      ++w;
    }
  }
  vs.rows.resize(w);
  vs.probabilities.resize(w);
  vs.view_candidates.resize(w);

  double total = 0.0;
  for (double p : vs.probabilities) total += p;
  for (double& p : vs.probabilities) p /= total;
  return vs;
}

double marginal_probability(const ViewSet& vs, const std::string& corr_id) {
  size_t i = vs.index_of(corr_id);
  double p = 0.0;
  for (size_t v = 0; v < vs.rows.size(); ++v) {
    if (vs.rows[v][i]) p += vs.probabilities[v];
  }
  return p;
}

CandidateResultSet parse_crs(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw io_error("MalformedInput", std::string("candidate set is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) {
    throw domain_error("MalformedInput", "candidate set must be a JSON object");
  }
  CandidateResultSet crs;
  crs.source_schema = trim(need_string(j, "source_schema", "candidate set"));
  crs.target_schema = trim(need_string(j, "target_schema", "candidate set"));

  const json& corrs = need(j, "correspondences", "candidate set");
  if (!corrs.is_array()) {
    throw domain_error("MalformedInput", "\"correspondences\" must be an array");
  }
  for (const json& cj : corrs) {
    if (!cj.is_object()) {
      throw domain_error("MalformedInput", "correspondence entries must be objects");
    }
    Correspondence c;
    c.id = trim(need_string(cj, "id", "correspondence"));
    std::string ctx = "correspondence \"" + c.id + "\"";
    c.source_attrs = parse_attrs(need(cj, "source_attrs", ctx), SchemaSide::Source, ctx + " source_attrs");
    c.target_attrs = parse_attrs(need(cj, "target_attrs", ctx), SchemaSide::Target, ctx + " target_attrs");
    auto it = cj.find("cost");
    if (it != cj.end() && !it->is_null()) {
      if (!it->is_number_integer()) {
        throw domain_error("MalformedInput", ctx + " cost must be an integer");
      }
      c.cost = it->get<int64_t>();
    }
    crs.correspondences.push_back(std::move(c));
  }

  const json& cands = need(j, "candidates", "candidate set");
  if (!cands.is_array()) {
    throw domain_error("MalformedInput", "\"candidates\" must be an array");
  }
  for (const json& sj : cands) {
    if (!sj.is_object()) {
      throw domain_error("MalformedInput", "candidate entries must be objects");
    }
    CandidateResult cand;
    cand.id = trim(need_string(sj, "id", "candidate"));
    std::string ctx = "candidate \"" + cand.id + "\"";
    const json& ids = need(sj, "correspondences", ctx);
    if (!ids.is_array()) {
      throw domain_error("MalformedInput", ctx + " \"correspondences\" must be an array of ids");
    }
    for (const json& idj : ids) {
      if (!idj.is_string()) {
        throw domain_error("MalformedInput", ctx + " correspondence ids must be strings");
      }
      cand.correspondence_ids.push_back(trim(idj.get<std::string>()));
    }
    const json& pj = need(sj, "probability", ctx);
    if (!pj.is_number()) {
      throw domain_error("MalformedInput", ctx + " probability must be a number");
    }
    cand.probability = pj.get<double>();
    crs.candidates.push_back(std::move(cand));
  }
  return crs;
}

CandidateResultSet load_crs(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw io_error("FileUnreadable", "cannot open candidate set file \"" + path + "\"");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_crs(buf.str());
}

std::string dump_crs(const CandidateResultSet& crs) {
  json j;
  j["source_schema"] = crs.source_schema;
  j["target_schema"] = crs.target_schema;
  json corrs = json::array();
  for (const Correspondence& c : crs.correspondences) {
    json cj;
    cj["id"] = c.id;
    cj["source_attrs"] = attrs_to_json(c.source_attrs);
    cj["target_attrs"] = attrs_to_json(c.target_attrs);
    if (c.cost) cj["cost"] = *c.cost;
    corrs.push_back(std::move(cj));
  }
  j["correspondences"] = std::move(corrs);
  json cands = json::array();
  for (const CandidateResult& cand : crs.candidates) {
    json sj;
    sj["id"] = cand.id;
    sj["correspondences"] = cand.correspondence_ids;
    sj["probability"] = cand.probability;
    cands.push_back(std::move(sj));
  }
  j["candidates"] = std::move(cands);
  return j.dump(2) + "\n";
}

void save_crs(const CandidateResultSet& crs, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw io_error("FileUnwritable", "cannot write candidate set file \"" + path + "\"");
  }
  out << dump_crs(crs);
  if (!out) {
    throw io_error("FileUnwritable", "failed while writing \"" + path + "\"");
  }
}

}  // namespace pm
