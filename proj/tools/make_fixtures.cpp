// Regenerates the committed fixtures under data/. Output is deterministic;
// the unit suite diffs a fresh run against the repository copies.
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <promptmatcher/eval.hpp>
#include <promptmatcher/model.hpp>
#include <promptmatcher/oracle.hpp>

namespace fs = std::filesystem;

namespace {

pm::AttributeRef attr(pm::SchemaSide side, std::string name, std::vector<std::string> values) {
  pm::AttributeRef a;
  a.side = side;
  a.name = std::move(name);
  a.values = std::move(values);
  return a;
}

pm::Correspondence corr(std::string id, std::vector<pm::AttributeRef> src,
                        std::vector<pm::AttributeRef> tgt, int64_t cost) {
  pm::Correspondence c;
  c.id = std::move(id);
  c.source_attrs = std::move(src);
  c.target_attrs = std::move(tgt);
  c.cost = cost;
  return c;
}

pm::CandidateResult cand(std::string id, std::vector<std::string> corr_ids, double p) {
  pm::CandidateResult c;
  c.id = std::move(id);
  c.correspondence_ids = std::move(corr_ids);
  c.probability = p;
  return c;
}

constexpr auto kSrc = pm::SchemaSide::Source;
constexpr auto kTgt = pm::SchemaSide::Target;

// Worked-example instance: three alternative matchings of the Employee and
// EmployeeInfo toy schemas with probabilities 0.55 / 0.25 / 0.20. Every
// correspondence costs one token so that budgets count questions directly.
pm::CandidateResultSet employee_crs() {
  pm::CandidateResultSet crs;
  crs.source_schema = "Employee";
  crs.target_schema = "EmployeeInfo";
  crs.correspondences = {
      corr("c1", {attr(kSrc, "ID", {"1001", "1002", "1003", "1004", "1005"})},
           {attr(kTgt, "EmployeeID", {"E-1001", "E-1002", "E-1003"})}, 1),
      corr("c2", {attr(kSrc, "Name", {"Alice Fox", "Bruno Marsh", "Carla Ibanez"})},
           {attr(kTgt, "First Name", {"Alice", "Bruno", "Carla"}),
            attr(kTgt, "Last Name", {"Fox", "Marsh", "Ibanez"})},
           1),
      corr("c3",
           {attr(kSrc, "Email",
                 {"alice.fox@corp.example", "bruno.marsh@corp.example",
                  "carla.ibanez@corp.example"})},
           {attr(kTgt, "Email Address",
                 {"a.fox@hr.example", "b.marsh@hr.example", "c.ibanez@hr.example"})},
           1),
      corr("c4", {attr(kSrc, "Address", {"12 Elm St", "98 Oak Ave", "5 Pine Rd"})},
           {attr(kTgt, "Home Address", {"12 Elm Street", "98 Oak Avenue", "5 Pine Road"})}, 1),
      corr("c5", {attr(kSrc, "Age", {"29", "41", "35"})},
           {attr(kTgt, "Years of Experience", {})}, 1),
      corr("c6", {attr(kSrc, "Gender", {"F", "M"})}, {attr(kTgt, "Sex", {"female", "male"})},
           1),
  };
  crs.candidates = {
      cand("s1", {"c1", "c2", "c3", "c4", "c6"}, 0.55),
      cand("s2", {"c1", "c2", "c4", "c5", "c6"}, 0.25),
      cand("s3", {"c2", "c3", "c6"}, 0.20),
  };
  return crs;
}

pm::GroundTruth employee_gt() {
  pm::GroundTruth gt;
  gt.entries[pm::GroundTruth::key({"ID"}, {"EmployeeID"})] = true;
  gt.entries[pm::GroundTruth::key({"Name"}, {"First Name", "Last Name"})] = true;
  gt.entries[pm::GroundTruth::key({"Email"}, {"Email Address"})] = true;
  gt.entries[pm::GroundTruth::key({"Address"}, {"Home Address"})] = true;
  gt.entries[pm::GroundTruth::key({"Age"}, {"Years of Experience"})] = false;
  gt.entries[pm::GroundTruth::key({"Gender"}, {"Sex"})] = true;
  return gt;
}

// Twenty correspondences at uniform cost 15 for the runtime-ordering bench.
// The six views group them into seven blocks of identical truth columns, so
// exact planning stays cheap while exhaustive search still has to walk every
// subset of up to fourteen items at the largest budget.
pm::CandidateResultSet bench20_crs() {
  pm::CandidateResultSet crs;
  crs.source_schema = "BenchSource";
  crs.target_schema = "BenchTarget";
  for (int i = 1; i <= 20; ++i) {
    char sid[16], a[16], b[16];
    std::snprintf(sid, sizeof sid, "c%02d", i);
    std::snprintf(a, sizeof a, "a%02d", i);
    std::snprintf(b, sizeof b, "b%02d", i);
    crs.correspondences.push_back(corr(sid, {attr(kSrc, a, {})}, {attr(kTgt, b, {})}, 15));
  }
  auto block = [](int first, int last) {
    std::vector<std::string> ids;
    for (int i = first; i <= last; ++i) {
      char sid[16];
      std::snprintf(sid, sizeof sid, "c%02d", i);
      ids.emplace_back(sid);
    }
    return ids;
  };
  auto join = [](std::initializer_list<std::vector<std::string>> parts) {
    std::vector<std::string> ids;
    for (const auto& p : parts) ids.insert(ids.end(), p.begin(), p.end());
    return ids;
  };
  const auto A = block(1, 3), B = block(4, 6), C = block(7, 9), D = block(10, 12),
             E = block(13, 15), F = block(16, 18), G = block(19, 20);
  crs.candidates = {
      cand("s1", join({A, B, C, D}), 0.300),
      cand("s2", join({A, B, E, F}), 0.225),
      cand("s3", join({A, C, E, G}), 0.175),
      cand("s4", join({B, D, G}), 0.125),
      cand("s5", join({C, D, F}), 0.100),
      cand("s6", join({E, F, G}), 0.075),
  };
  return crs;
}

void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
  out.close();
  if (!out) {
    std::fprintf(stderr, "cannot write %s\n", p.string().c_str());
    std::exit(2);
  }
  std::printf("wrote %s\n", p.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  fs::path root = "data";
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--out") == 0 && i + 1 < argc) {
      root = argv[++i];
    } else {
      std::fprintf(stderr, "usage: make_fixtures [--out DIR]\n");
      return 2;
    }
  }

  const auto employee = employee_crs();
  write_file(root / "fixtures" / "employee_crs.json", pm::dump_crs(employee));
  write_file(root / "fixtures" / "employee_gt.json", pm::dump_ground_truth(employee_gt()));
  write_file(root / "fixtures" / "bench20_crs.json", pm::dump_crs(bench20_crs()));

  struct Shape {
    int src, tgt, cands, min_edits, max_edits;
  };
  const Shape shapes[8] = {
      {12, 12, 6, 3, 4}, {12, 14, 8, 3, 4},  {14, 14, 8, 3, 5}, {14, 16, 10, 3, 5},
      {16, 16, 8, 3, 4}, {16, 18, 10, 3, 5}, {18, 18, 12, 3, 5}, {20, 20, 10, 3, 4},
  };
  for (int i = 0; i < 8; ++i) {
    pm::SyntheticSpec spec;
    spec.seed = 1001 + i;
    spec.source_attrs = shapes[i].src;
    spec.target_attrs = shapes[i].tgt;
    spec.candidates = shapes[i].cands;
    spec.min_edits = shapes[i].min_edits;
    spec.max_edits = shapes[i].max_edits;
    const auto fx = pm::gen_synthetic_crs(spec);
    char crs_name[40], gt_name[40];
    std::snprintf(crs_name, sizeof crs_name, "synthetic_%02d_crs.json", i + 1);
    std::snprintf(gt_name, sizeof gt_name, "synthetic_%02d_gt.json", i + 1);
    write_file(root / "fixtures" / crs_name, pm::dump_crs(fx.crs));
    write_file(root / "fixtures" / gt_name, pm::dump_ground_truth(fx.gt));
  }

  const char* golden_ids[5] = {"c1", "c2", "c3", "c5", "c6"};
  for (const char* id : golden_ids) {
    const pm::Correspondence* c = employee.find(id);
    if (c == nullptr) {
      std::fprintf(stderr, "fixture bug: %s missing\n", id);
      return 1;
    }
    write_file(root / "golden" / "prompts" / (std::string(id) + "_semantic.txt"),
               pm::render_prompt(*c, pm::PromptKind::Semantic, "Employee"));
    write_file(root / "golden" / "prompts" / (std::string(id) + "_abbreviation.txt"),
               pm::render_prompt(*c, pm::PromptKind::Abbreviation, "Employee"));
  }
  return 0;
}
