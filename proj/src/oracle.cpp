#include "promptmatcher/oracle.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <mutex>
#include <optional>
#include <regex>
#include <sstream>
#include <thread>

#include "promptmatcher/errors.hpp"
#include "promptmatcher/hash.hpp"
#include "promptmatcher/rng.hpp"

namespace pm {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string names_of(const std::vector<AttributeRef>& attrs) {
  std::vector<std::string> names;
  names.reserve(attrs.size());
  for (const AttributeRef& a : attrs) names.push_back(a.name);
  return join(names, ", ");
}

std::string values_line(const std::vector<AttributeRef>& attrs) {
  std::vector<std::string> parts;
  for (const AttributeRef& a : attrs) {
    std::string p = a.name + ": ";
    if (a.values.empty()) {
      p += "(no sample values)";
    } else {
      std::vector<std::string> vals(a.values.begin(),
                                    a.values.begin() + std::min<size_t>(3, a.values.size()));
      p += join(vals, ", ");
    }
    parts.push_back(std::move(p));
  }
  return join(parts, "; ");
}

const char* prompt_kind_name(PromptKind k) {
  return k == PromptKind::Semantic ? "semantic" : "abbreviation";
}

std::string utc_timestamp() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::optional<double> find_confidence(const std::string& text) {
  static const std::regex pct(R"(([0-9]+(?:\.[0-9]+)?)\s*%)");
  std::smatch m;
  if (std::regex_search(text, m, pct)) {
    return std::stod(m[1].str()) / 100.0;
  }
  static const std::regex dec(R"((?:^|[^0-9])([01]?\.[0-9]+))");
  if (std::regex_search(text, m, dec)) {
    double v = std::stod(m[1].str());
    if (v <= 1.0) return v;
  }
  return std::nullopt;
}

}  // namespace

std::string GroundTruth::key(std::vector<std::string> source_names,
                             std::vector<std::string> target_names) {
  std::sort(source_names.begin(), source_names.end());
  std::sort(target_names.begin(), target_names.end());
  return join(source_names, "\x1f") + "\x1e" + join(target_names, "\x1f");
}

std::string GroundTruth::key_for(const Correspondence& c) {
  std::vector<std::string> s, t;
  for (const AttributeRef& a : c.source_attrs) s.push_back(a.name);
  for (const AttributeRef& a : c.target_attrs) t.push_back(a.name);
  return key(std::move(s), std::move(t));
}

bool GroundTruth::lookup(const Correspondence& c) const {
  auto it = entries.find(key_for(c));
  if (it == entries.end()) {
    std::vector<std::string> s, t;
    for (const AttributeRef& a : c.source_attrs) s.push_back(a.name);
    for (const AttributeRef& a : c.target_attrs) t.push_back(a.name);
    throw oracle_error("GroundTruthMissing", "no ground-truth verdict for correspondence \"" +
                                                 c.id + "\" (" + join(s, " + ") + " <-> " +
                                                 join(t, " + ") + ")");
  }
  return it->second;
}

GroundTruth parse_ground_truth(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw io_error("MalformedInput", std::string("ground truth is not valid JSON: ") + e.what());
  }
  if (!j.is_array()) {
    throw domain_error("MalformedInput", "ground truth must be a JSON array of pair entries");
  }
  GroundTruth gt;
  for (const json& ej : j) {
    if (!ej.is_object()) {
      throw domain_error("MalformedInput", "ground truth entries must be objects");
    }
    auto read_names = [&](const char* key) {
      auto it = ej.find(key);
      if (it == ej.end() || !it->is_array()) {
        throw domain_error("MalformedInput",
                           std::string("ground truth entry needs a \"") + key + "\" name array");
      }
      std::vector<std::string> names;
      for (const json& n : *it) {
        if (!n.is_string()) {
          throw domain_error("MalformedInput", "ground truth attribute names must be strings");
        }
        names.push_back(trim(n.get<std::string>()));
      }
      if (names.empty()) {
        throw domain_error("MalformedInput",
                           std::string("ground truth entry has an empty \"") + key + "\" array");
      }
      return names;
    };
    std::vector<std::string> s = read_names("source_attrs");
    std::vector<std::string> t = read_names("target_attrs");
    auto mit = ej.find("match");
    if (mit == ej.end() || !mit->is_boolean()) {
      throw domain_error("MalformedInput", "ground truth entry needs a boolean \"match\"");
    }
    gt.entries[GroundTruth::key(std::move(s), std::move(t))] = mit->get<bool>();
  }
  return gt;
}

GroundTruth load_ground_truth(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw io_error("FileUnreadable", "cannot open ground truth file \"" + path + "\"");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_ground_truth(buf.str());
}

std::string dump_ground_truth(const GroundTruth& gt) {
  json arr = json::array();
  for (const auto& [key, match] : gt.entries) {
    size_t sep = key.find('\x1e');
    auto split = [](const std::string& part) {
      std::vector<std::string> names;
      size_t start = 0;
      while (true) {
        size_t p = part.find('\x1f', start);
        names.push_back(part.substr(start, p == std::string::npos ? p : p - start));
        if (p == std::string::npos) break;
        start = p + 1;
      }
      return names;
    };
    json e;
    e["source_attrs"] = split(key.substr(0, sep));
    e["target_attrs"] = split(key.substr(sep + 1));
    e["match"] = match;
    arr.push_back(std::move(e));
  }
  return arr.dump(2) + "\n";
}

std::string render_prompt(const Correspondence& c, PromptKind kind,
                          const std::string& schema_name) {
  if (c.source_attrs.empty() || c.target_attrs.empty()) {
    throw domain_error("MalformedInput",
                       "correspondence \"" + c.id + "\" lacks attributes on one side");
  }
  std::string head = "Determine whether the two attributes match with each other in schema match.";
  std::string tail =
      "Answer with a single JSON object of the form "
      "{\"answer\": true or false, \"confidence\": a number between 0.0 and 1.0}.";
  if (kind == PromptKind::Semantic) {
    return head + "\n\nSource attribute: " + names_of(c.source_attrs) +
           "\nTarget attribute: " + names_of(c.target_attrs) + "\n\n" + tail;
  }
  if (trim(schema_name).empty()) {
    throw domain_error("MissingSchemaName",
                       "the abbreviation prompt needs a schema name for its domain line");
  }
  std::string tips =
      "Tips:\n"
      "1. Both attributes belong to the schema \"" + trim(schema_name) +
      "\"; judge them in that domain.\n"
      "2. An abbreviation may keep only a prefix of a word: quantity can appear as qty, "
      "number as no.\n"
      "3. An abbreviation may take the first letters of several words or drop vowels: "
      "purchase order can appear as po, number as nbr.\n"
      "4. Exchange the attribute values below and check their overlap; shared values "
      "suggest a match.";
  return head + "\n\n" + tips + "\n\nSource attribute: " + names_of(c.source_attrs) +
         "\nSource values: " + values_line(c.source_attrs) +
         "\nTarget attribute: " + names_of(c.target_attrs) +
         "\nTarget values: " + values_line(c.target_attrs) + "\n\n" + tail;
}

std::pair<bool, double> parse_llm_response(const std::string& text, double fixed_confidence) {
  std::optional<bool> verdict;
  std::optional<double> conf;

  for (size_t i = 0; i < text.size() && !verdict; ++i) {
    if (text[i] != '{') continue;
    int depth = 0;
    bool in_str = false;
    bool esc = false;
    size_t end = std::string::npos;
    for (size_t j = i; j < text.size(); ++j) {
      char ch = text[j];
      if (in_str) {
        if (esc) {
          esc = false;
        } else if (ch == '\\') {
          esc = true;
        } else if (ch == '"') {
          in_str = false;
        }
      } else if (ch == '"') {
        in_str = true;
      } else if (ch == '{') {
        ++depth;
      } else if (ch == '}') {
        if (--depth == 0) {
          end = j;
          break;
        }
      }
    }
    if (end == std::string::npos) continue;
    json j = json::parse(text.substr(i, end - i + 1), nullptr, false);
    if (j.is_discarded() || !j.is_object()) continue;
    auto it = j.find("answer");
    if (it == j.end()) continue;
    if (it->is_boolean()) {
      verdict = it->get<bool>();
    } else if (it->is_string()) {
      std::string v = lower(trim(it->get<std::string>()));
      if (v == "true" || v == "yes") {
        verdict = true;
      } else if (v == "false" || v == "no") {
        verdict = false;
      } else {
        continue;
      }
    } else {
      continue;
    }
    auto cit = j.find("confidence");
    if (cit != j.end()) {
      if (cit->is_number()) {
        conf = cit->get<double>();
      } else if (cit->is_string()) {
        conf = find_confidence(cit->get<std::string>());
      }
    }
  }

  if (!verdict) {
    static const std::regex tok(R"(\b(true|false)\b)", std::regex::icase);
    std::smatch m;
    if (std::regex_search(text, m, tok)) {
      verdict = lower(m[1].str()) == "true";
    }
  }
  if (!verdict) {
    throw oracle_error("ParseFailure", "no verdict found in oracle reply");
  }
  if (!conf) conf = find_confidence(text);

  double c = conf.value_or(fixed_confidence);
  if (std::isnan(c)) c = fixed_confidence;
  if (c > 1.0 && c <= 100.0) c /= 100.0;
  c = std::clamp(c, 0.0, 1.0);
  bool v = *verdict;
  if (c < 0.5) {
    v = !v;
    c = 1.0 - c;
  }
  return {v, std::clamp(c, 0.5, 1.0)};
}

struct Oracle::Impl {
  GroundTruth gt;
  std::map<std::string, Answer> transcript;
  std::string api_key;
  std::string endpoint_base;
  std::string endpoint_path;
  std::mutex record_mu;
  std::ofstream record;

  void record_answer(const OracleConfig& cfg, const Answer& a, const std::string& prompt) {
    if (!record.is_open()) return;
    json j;
    j["confidence"] = a.confidence;
    j["corr_id"] = a.corr_id;
    j["prompt_sha256"] = prompt.empty() ? "" : sha256_hex(prompt);
    j["template"] = prompt.empty() ? "" : prompt_kind_name(cfg.prompt);
    j["timestamp"] = utc_timestamp();
    j["verdict"] = a.verdict;
    std::lock_guard<std::mutex> lock(record_mu);
    record << j.dump() << '\n';
    record.flush();
  }
};

Oracle::Oracle(OracleConfig cfg) : cfg_(std::move(cfg)), impl_(std::make_unique<Impl>()) {
  switch (cfg_.kind) {
    case OracleKind::Simulated: {
      if (!(cfg_.accuracy > 0.5) || cfg_.accuracy > 1.0) {
        std::ostringstream os;
        os << "simulated oracle accuracy must lie in (0.5, 1], got " << cfg_.accuracy;
        throw domain_error("MalformedInput", os.str());
      }
      if (cfg_.ground_truth) {
        impl_->gt = *cfg_.ground_truth;
      } else if (!cfg_.ground_truth_path.empty()) {
        impl_->gt = load_ground_truth(cfg_.ground_truth_path);
      } else {
        throw domain_error("BadConfig", "the simulated oracle needs ground truth (path or inline)");
      }
      break;
    }
    case OracleKind::Replay: {
      if (cfg_.transcript_path.empty()) {
        throw domain_error("BadConfig", "the replay oracle needs a transcript path");
      }
      std::ifstream in(cfg_.transcript_path, std::ios::binary);
      if (!in) {
        throw io_error("FileUnreadable",
                       "cannot open transcript file \"" + cfg_.transcript_path + "\"");
      }
      std::string line;
      size_t lineno = 0;
      while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
          throw io_error("MalformedInput", "transcript line " + std::to_string(lineno) +
                                               " is not a JSON object");
        }
        auto cid = j.find("corr_id");
        auto ver = j.find("verdict");
        auto con = j.find("confidence");
        if (cid == j.end() || !cid->is_string() || ver == j.end() || !ver->is_boolean() ||
            con == j.end() || !con->is_number()) {
          throw domain_error("MalformedInput",
                             "transcript line " + std::to_string(lineno) +
                                 " needs corr_id (string), verdict (bool), confidence (number)");
        }
        double c = con->get<double>();
        if (!(c >= 0.5) || c > 1.0) {
          std::ostringstream os;
          os << "transcript line " << lineno << " confidence " << c << " lies outside [0.5, 1]";
          throw domain_error("MalformedInput", os.str());
        }
        Answer a;
        a.corr_id = cid->get<std::string>();
        a.verdict = ver->get<bool>();
        a.confidence = c;
        a.provenance = "replay";
        auto raw = j.find("raw_response");
        if (raw != j.end() && raw->is_string()) a.raw_response = raw->get<std::string>();
        impl_->transcript.emplace(a.corr_id, std::move(a));  // first occurrence wins
      }
      break;
    }
    case OracleKind::Llm: {
      if (cfg_.endpoint_url.empty()) {
        throw domain_error("BadConfig", "the llm oracle needs an endpoint url");
      }
      if (cfg_.model_name.empty()) {
        throw domain_error("BadConfig", "the llm oracle needs a model name");
      }
      if (cfg_.max_retries < 0 || cfg_.backoff_ms < 0 || cfg_.max_parallel < 1) {
        throw domain_error("BadConfig", "retry, backoff and parallel settings must be non-negative");
      }
      if (!(cfg_.fixed_confidence >= 0.5) || cfg_.fixed_confidence > 1.0) {
        throw domain_error("BadConfig", "fixed_confidence must lie in [0.5, 1]");
      }
      const char* key = std::getenv("ORACLE_API_KEY");
      if (key == nullptr || std::string(key).empty()) {
        throw oracle_error("MissingApiKey",
                           "set ORACLE_API_KEY in the environment to use the llm oracle");
      }
      impl_->api_key = key;
      size_t scheme = cfg_.endpoint_url.find("://");
      if (scheme == std::string::npos) {
        throw domain_error("BadConfig", "endpoint url must include a scheme, got \"" +
                                            cfg_.endpoint_url + "\"");
      }
      size_t slash = cfg_.endpoint_url.find('/', scheme + 3);
      if (slash == std::string::npos) {
        impl_->endpoint_base = cfg_.endpoint_url;
        impl_->endpoint_path = "/";
      } else {
        impl_->endpoint_base = cfg_.endpoint_url.substr(0, slash);
        impl_->endpoint_path = cfg_.endpoint_url.substr(slash);
      }
      if (!cfg_.cache_dir.empty()) {
        std::error_code ec;
        fs::create_directories(cfg_.cache_dir, ec);
        if (ec) {
          throw io_error("FileUnwritable",
                         "cannot create cache directory \"" + cfg_.cache_dir + "\"");
        }
      }
      break;
    }
  }
  if (!cfg_.record_transcript_path.empty()) {
    impl_->record.open(cfg_.record_transcript_path, std::ios::app | std::ios::binary);
    if (!impl_->record) {
      throw io_error("FileUnwritable",
                     "cannot open transcript record file \"" + cfg_.record_transcript_path + "\"");
    }
  }
}

Oracle::~Oracle() = default;

namespace {

std::string http_chat(const OracleConfig& cfg, const std::string& endpoint_base,
                      const std::string& endpoint_path, const std::string& api_key,
                      const std::string& prompt);

}  // namespace

Answer Oracle::verify(const Correspondence& c) {
  switch (cfg_.kind) {
    case OracleKind::Simulated: {
      bool truth = impl_->gt.lookup(c);
      Rng rng(mix_seed(cfg_.seed, fnv1a64(c.id)));
      bool correct = rng.u01() < cfg_.accuracy;
      Answer a;
      a.corr_id = c.id;
      a.verdict = correct ? truth : !truth;
      a.confidence = cfg_.accuracy;
      a.provenance = "simulated";
      impl_->record_answer(cfg_, a, "");
      return a;
    }
    case OracleKind::Replay: {
      auto it = impl_->transcript.find(c.id);
      if (it == impl_->transcript.end()) {
        throw oracle_error("TranscriptMiss",
                           "transcript has no answer for correspondence \"" + c.id + "\"");
      }
      Answer a = it->second;
      impl_->record_answer(cfg_, a, "");
      return a;
    }
    case OracleKind::Llm:
      break;
  }

  std::string prompt = render_prompt(c, cfg_.prompt, cfg_.schema_name);
  std::string cache_key =
      sha256_hex(cfg_.model_name + "\x1f" + prompt_kind_name(cfg_.prompt) + "\x1f" + prompt);
  fs::path cache_file;
  if (!cfg_.cache_dir.empty()) {
    cache_file = fs::path(cfg_.cache_dir) / (cache_key + ".json");
    std::ifstream in(cache_file, std::ios::binary);
    if (in) {
      std::ostringstream buf;
      buf << in.rdbuf();
      json j = json::parse(buf.str(), nullptr, false);
      if (j.is_object() && j.contains("verdict") && j["verdict"].is_boolean() &&
          j.contains("confidence") && j["confidence"].is_number()) {
        Answer a;
        a.corr_id = c.id;
        a.verdict = j["verdict"].get<bool>();
        a.confidence = j["confidence"].get<double>();
        if (j.contains("raw_response") && j["raw_response"].is_string()) {
          a.raw_response = j["raw_response"].get<std::string>();
        }
        a.provenance = "cache";
        impl_->record_answer(cfg_, a, prompt);
        return a;
      }
      // unreadable cache entries are treated as misses
    }
  }

  std::string raw =
      http_chat(cfg_, impl_->endpoint_base, impl_->endpoint_path, impl_->api_key, prompt);
  auto [verdict, confidence] = parse_llm_response(raw, cfg_.fixed_confidence);
  Answer a;
  a.corr_id = c.id;
  a.verdict = verdict;
  a.confidence = confidence;
  a.provenance = "llm";
  a.raw_response = raw;

  if (!cache_file.empty()) {
    static std::atomic<uint64_t> ctr{0};
    json j;
    j["confidence"] = a.confidence;
    j["raw_response"] = a.raw_response;
    j["verdict"] = a.verdict;
    fs::path tmp = cache_file;
    tmp += ".tmp" + std::to_string(ctr.fetch_add(1));
    std::ofstream out(tmp, std::ios::binary);
    out << j.dump(2) << '\n';
    out.close();
    std::error_code ec;
    fs::rename(tmp, cache_file, ec);  // best effort; a lost cache entry is harmless
    if (ec) fs::remove(tmp, ec);
  }
  impl_->record_answer(cfg_, a, prompt);
  return a;
}

std::vector<Answer> Oracle::verify_batch(const std::vector<Correspondence>& cs) {
  std::vector<Answer> out(cs.size());
  if (cfg_.kind == OracleKind::Llm && cfg_.max_parallel > 1 && cs.size() > 1) {
    size_t wave = static_cast<size_t>(cfg_.max_parallel);
    for (size_t base = 0; base < cs.size(); base += wave) {
      size_t end = std::min(cs.size(), base + wave);
      std::vector<std::future<Answer>> futs;
      for (size_t i = base; i < end; ++i) {
        futs.push_back(std::async(std::launch::async, [this, &cs, i] { return verify(cs[i]); }));
      }
      for (size_t i = base; i < end; ++i) out[i] = futs[i - base].get();
    }
    return out;
  }
  for (size_t i = 0; i < cs.size(); ++i) out[i] = verify(cs[i]);
  return out;
}

namespace {

std::string http_chat(const OracleConfig& cfg, const std::string& endpoint_base,
                      const std::string& endpoint_path, const std::string& api_key,
                      const std::string& prompt) {
  json body;
  body["model"] = cfg.model_name;
  body["temperature"] = cfg.temperature;
  body["messages"] = json::array({json{{"role", "user"}, {"content", prompt}}});
  std::string payload = body.dump();

  std::string last;
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    if (attempt > 0) {
      int64_t wait = static_cast<int64_t>(cfg.backoff_ms) << (attempt - 1);
      std::this_thread::sleep_for(std::chrono::milliseconds(wait));
    }
    httplib::Client cli(endpoint_base);
    cli.set_connection_timeout(15, 0);
    cli.set_read_timeout(120, 0);
    cli.set_bearer_token_auth(api_key);
    auto res = cli.Post(endpoint_path.c_str(), payload, "application/json");
    if (res && res->status == 200) {
      json j = json::parse(res->body, nullptr, false);
      if (j.is_discarded()) {
        throw oracle_error("ParseFailure", "oracle endpoint returned a non-JSON body");
      }
      try {
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const json::exception&) {
        throw oracle_error("ParseFailure", "chat reply lacks choices[0].message.content");
      }
    }
    bool retryable = !res || res->status == 429 || res->status >= 500;
    if (res) {
      std::string snippet = res->body.substr(0, 200);
      last = "status " + std::to_string(res->status) +
             (snippet.empty() ? "" : " body: " + snippet);
    } else {
      last = "transport error: " + httplib::to_string(res.error());
    }
    if (!retryable) {
      throw oracle_error("HttpFailure", "oracle endpoint rejected the request (" + last + ")");
    }
  }
  throw oracle_error("HttpFailure", "oracle endpoint unreachable after " +
                                        std::to_string(cfg.max_retries + 1) + " attempts (last: " +
                                        last + ")");
}

}  // namespace

}  // namespace pm
