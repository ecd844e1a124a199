/* Copyright 2026 The Autoshard Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Acceptance checks. Prints one PASS or FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "autoshard/cost.h"
#include "autoshard/dimgraph.h"
#include "autoshard/driver.h"
#include "autoshard/interpreter.h"
#include "autoshard/ir.h"
#include "autoshard/lowering.h"
#include "autoshard/search.h"
#include "tests/test_util.h"

namespace autoshard {
namespace {

using testing::AnalyzeOrDie;
using testing::ColorOf;
using testing::ParseOrDie;

// Pinned limits.
constexpr double kFloatTolerance = 1e-5;
constexpr double kGoldenSecs = 1.0;
constexpr double kEquivalenceSecs = 60.0;
constexpr double kSearchSecs = 30.0;
constexpr double kGroupingSecs = 5.0;
constexpr double kLinearitySecs = 10.0;
constexpr int kEquivalencePairs = 200;
constexpr int kLinearModules = 100;
constexpr int64_t kSearchBudget = 500;
constexpr uint64_t kSearchSeed = 0;

struct Verdict {
  bool pass = true;
  std::string detail;

  void Check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

constexpr char kMegatron[] =
    R"(def mlp(x: f32[256{b},32], w1: f32[32,64{m}], w2: f32[64{m},16]) {
  y: f32[256{b},64{m}] = matmul(x, w1)
  z: f32[256{b},64{m}] = relu(y)
  w_: f32[256{b},16] = matmul(z, w2)
  w: f32[256{b},16] = all_reduce {m} w_
  return w
}
)";

constexpr char kSequence[] =
    R"(def attn(x: f32[8{s},4], wq: f32[4,4], wk: f32[4,4], wv: f32[4,4]) {
  k: f32[8{s},4] = matmul(x, wk)
  v: f32[8{s},4] = matmul(x, wv)
  q: f32[8{s},4] = matmul(x, wq)
  qt: f32[4,8{s}] = transpose[0, 1](q)
  k_: f32[8,4] = all_gather {s} k
  a: f32[8,8{s}] = matmul(k_, qt)
  b: f32[8{s}] = reduce[0, add](a)
  c: f32[8,8{s}] = broadcast[0, 8](b)
  d: f32[8,8{s}] = div(a, c)
  z_: f32[8,4] = matmul(d, v)
  z: f32[8{s},4] = reduce_scatter {s} z_
  return z
}
)";

ShardingState MegatronState(const ProgramAnalysis& a, const Module& m) {
  ShardingState s;
  s.axes_of[ColorOf(a, m, "x", 0)] = {"b"};
  s.axes_of[ColorOf(a, m, "y", 1)] = {"m"};
  return s;
}

ShardingState SequenceState(const ProgramAnalysis& a, const Module& m,
                            int bit) {
  ShardingState s;
  s.axes_of[ColorOf(a, m, "x", 0)] = {"s"};
  s.resolution_bits[0] = bit;
  return s;
}

Verdict MlpColors() {
  Verdict v;
  Module m = ParseOrDie(testing::MlpText());
  ProgramAnalysis a = AnalyzeOrDie(m);
  auto c = [&](const char* var, int dim) { return ColorOf(a, m, var, dim); };
  const int32_t b = c("x", 0), x = c("x", 1), u = c("w1", 1), w = c("w2", 1);
  v.Check(a.full.num_colors() == 4,
          absl::StrCat(a.full.num_colors(), " colors"));
  v.Check(std::set<int32_t>{b, x, u, w}.size() == 4, "colors not distinct");
  v.Check(c("w1", 0) == x, "w1[0] is not X");
  v.Check(c("w2", 0) == u, "w2[0] is not U");
  v.Check(c("y", 0) == b && c("y", 1) == u, "y is not [B,U]");
  v.Check(c("z", 0) == b && c("z", 1) == u, "z is not [B,U]");
  v.Check(c("w", 0) == b && c("w", 1) == w, "w is not [B,W]");
  if (v.pass) v.detail = "4 colors, memberships match";
  return v;
}

Verdict AttnConflicts() {
  Verdict v;
  Module m = ParseOrDie(testing::AttnText());
  ProgramAnalysis a = AnalyzeOrDie(m);
  const int64_t resolutions = int64_t{1} << a.groups.size();
  v.Check(a.graph.conflicts.size() == 5,
          absl::StrCat(a.graph.conflicts.size(), " conflicts"));
  v.Check(a.sets.size() == 1, absl::StrCat(a.sets.size(), " sets"));
  v.Check(resolutions == 2, absl::StrCat(resolutions, " resolutions"));
  if (v.pass) v.detail = "5 conflicts, 1 compatibility set, 2 resolutions";
  return v;
}

Verdict SequenceLowering() {
  Verdict v;
  Module m = ParseOrDie(testing::AttnText());
  ProgramAnalysis a = AnalyzeOrDie(m);
  Mesh mesh = *Mesh::Parse("s=2");
  int golden_bits = 0, two_gather_bits = 0;
  for (int bit = 0; bit < 2; ++bit) {
    absl::StatusOr<ShardedModule> sm =
        Apply(m, a, SequenceState(a, m, bit), mesh);
    if (!sm.ok()) {
      v.Check(false, std::string(sm.status().message()));
      continue;
    }
    const bool golden =
        PrintShardedModule(*sm) == kSequence &&
        sm->CountCollectives(CollectiveKind::kAllGather) == 1 &&
        sm->CountCollectives(CollectiveKind::kReduceScatter) == 1 &&
        sm->Collectives().size() == 2;
    golden_bits += golden;
    two_gather_bits +=
        !golden && sm->CountCollectives(CollectiveKind::kAllGather) == 2;
  }
  v.Check(golden_bits == 1, "no resolution matches the sequence listing");
  v.Check(two_gather_bits == 1,
          "the other resolution does not insert two all_gathers");
  if (v.pass) v.detail = "one resolution matches exactly, the other has 2 all_gathers";
  return v;
}

Verdict MegatronLowering() {
  Verdict v;
  Module m = ParseOrDie(testing::MlpText());
  ProgramAnalysis a = AnalyzeOrDie(m);
  Mesh mesh = *Mesh::Parse("b=2,m=2");
  absl::StatusOr<ShardedModule> sm = Apply(m, a, MegatronState(a, m), mesh);
  if (!sm.ok()) {
    v.Check(false, std::string(sm.status().message()));
    return v;
  }
  v.Check(PrintShardedModule(*sm) == kMegatron, "listing differs");
  v.Check(sm->Collectives().size() == 1 &&
              sm->CountCollectives(CollectiveKind::kAllReduce) == 1 &&
              sm->Collectives()[0]->axes == std::vector<std::string>{"m"},
          "expected exactly one all_reduce {m}");
  if (v.pass) v.detail = "listing matches, one all_reduce {m}";
  return v;
}

Verdict SemanticEquivalence() {
  Verdict v;
  std::mt19937_64 rng(2026);
  const std::vector<std::string> meshes = {"a=2", "a=2,b=2", "a=4,b=2",
                                           "a=2,b=2,c=2"};
  int failures = 0, sharded = 0;
  for (int i = 0; i < kEquivalencePairs; ++i) {
    Module m = ParseOrDie(testing::RandomModuleText(rng));
    ProgramAnalysis a = AnalyzeOrDie(m);
    Mesh mesh = *Mesh::Parse(meshes[i % meshes.size()]);
    ShardingState s = testing::RandomState(a, mesh, rng);
    sharded += !s.axes_of.empty();
    absl::StatusOr<ShardedModule> sm = Apply(m, a, s, mesh);
    TensorMap in = testing::RandomIntInputs(m, rng);
    if (!sm.ok()) {
      ++failures;
      continue;
    }
    absl::StatusOr<Tensor> got = InterpretSharded(*sm, mesh, in);
    absl::StatusOr<Tensor> want = Interpret(m, in);
    failures += !(got.ok() && want.ok() && *got == *want);
  }
  // The goldens, on real-valued inputs.
  struct Golden {
    std::string text;
    std::string mesh;
    std::function<ShardingState(const ProgramAnalysis&, const Module&)> state;
  };
  const std::vector<Golden> goldens = {
      {testing::MlpText(), "b=2,m=2", MegatronState},
      {testing::AttnText(), "s=2",
       [](const ProgramAnalysis& a, const Module& m) {
         return SequenceState(a, m, 0);
       }},
      {testing::AttnText(), "s=2",
       [](const ProgramAnalysis& a, const Module& m) {
         return SequenceState(a, m, 1);
       }}};
  double worst = 0;
  for (const Golden& g : goldens) {
    Module m = ParseOrDie(g.text);
    ProgramAnalysis a = AnalyzeOrDie(m);
    Mesh mesh = *Mesh::Parse(g.mesh);
    absl::StatusOr<ShardedModule> sm = Apply(m, a, g.state(a, m), mesh);
    TensorMap in = testing::RandomRealInputs(m, rng);
    absl::StatusOr<Tensor> got =
        sm.ok() ? InterpretSharded(*sm, mesh, in) : sm.status();
    absl::StatusOr<Tensor> want = Interpret(m, in);
    if (!got.ok() || !want.ok()) {
      ++failures;
      continue;
    }
    worst = std::max(worst, MaxRelativeError(*got, *want));
  }
  v.Check(failures == 0, absl::StrCat(failures, " mismatching pairs"));
  v.Check(worst <= kFloatTolerance,
          absl::StrCat("golden relative error ", worst));
  v.detail = absl::StrCat(kEquivalencePairs, " random pairs (", sharded,
                          " sharded) exact, goldens max relative error ",
                          worst, v.detail.empty() ? "" : "; ", v.detail);
  return v;
}

Verdict BatchScaling() {
  Verdict v;
  Module m = ParseOrDie(testing::MlpText());
  ProgramAnalysis a = AnalyzeOrDie(m);
  for (int64_t b : {2, 4, 8}) {
    Mesh mesh = *Mesh::Parse(absl::StrCat("b=", b));
    MachineSpec spec = MachineSpec::Uniform(mesh, 1e12, 1e11, int64_t{1} << 34);
    ShardingState s;
    s.axes_of[ColorOf(a, m, "x", 0)] = {"b"};
    CostReport base = *Estimate(*Apply(m, a, {}, mesh), mesh, spec);
    CostReport cut = *Estimate(*Apply(m, a, s, mesh), mesh, spec);
    Score score = *ComputeScore(cut, base, spec);
    v.Check(cut.comm_secs == 0, absl::StrCat("b=", b, " has communication"));
    v.Check(cut.compute_secs == base.compute_secs / static_cast<double>(b),
            absl::StrCat("b=", b, " compute ", cut.compute_secs));
    v.Check(score.rt == 1.0 / static_cast<double>(b),
            absl::StrCat("b=", b, " rt ", score.rt));
  }
  if (v.pass) v.detail = "compute/b and rt = 1/b for b in {2,4,8}";
  return v;
}

Verdict MemoryPenalty() {
  Verdict v;
  CostReport r, base;
  r.runtime_secs = base.runtime_secs = 1;
  base.peak_bytes = 100;
  MachineSpec spec;
  spec.device_memory_bytes = 120;
  for (int64_t peak : {0, 50, 100, 120}) {
    r.peak_bytes = peak;
    v.Check(ComputeScore(r, base, spec, 100)->mp == 0,
            absl::StrCat("mp nonzero at peak ", peak));
  }
  r.peak_bytes = 150;
  Score s = *ComputeScore(r, base, spec, 100);
  v.Check(s.mp == 30, absl::StrCat("worked example mp ", s.mp));
  if (v.pass) v.detail = "mp = 0 within memory, worked example mp = 30";
  return v;
}

struct SearchCase {
  std::string name;
  std::string text;
  std::string mesh;
  // Device memory as a fraction of the unsharded peak; 0 keeps the default.
  double memory_fraction = 0;
};

Verdict SearchOptimality() {
  Verdict v;
  const std::vector<SearchCase> cases = {
      {"mlp", testing::MlpText(), "b=2,m=2"},
      {"attn", testing::AttnText(), "s=2", 0.75}};
  std::vector<std::string> notes;
  for (const SearchCase& sc : cases) {
    Module m = ParseOrDie(sc.text);
    ProgramAnalysis a = AnalyzeOrDie(m);
    Mesh mesh = *Mesh::Parse(sc.mesh);
    MachineSpec spec = MachineSpec::Uniform(mesh, kDefaultFlopsPerSec,
                                            kDefaultBytesPerSec,
                                            kDefaultDeviceMemory);
    SearchConfig cfg;
    cfg.min_unique_dims = 1;
    cfg.budget = kSearchBudget;
    cfg.seed = kSearchSeed;
    CostReport base = *Estimate(*Apply(m, a, {}, mesh), mesh, spec);
    if (sc.memory_fraction > 0) {
      spec.device_memory_bytes =
          static_cast<int64_t>(base.peak_bytes * sc.memory_fraction);
    }
    double best = std::numeric_limits<double>::infinity();
    for (const ShardingState& s : testing::EnumerateStates(a, mesh, 1)) {
      absl::StatusOr<Evaluation> e = EvaluateState(m, a, s, mesh, spec, base, cfg);
      if (e.ok()) best = std::min(best, e->score.c);
    }
    absl::StatusOr<SearchResult> r = MctsSearch(m, a, mesh, spec, cfg);
    if (!r.ok()) {
      v.Check(false, absl::StrCat(sc.name, ": ", r.status().message()));
      continue;
    }
    v.Check(r->best_score.c == best,
            absl::StrCat(sc.name, ": search c ", r->best_score.c, " vs optimum ",
                         best));
    notes.push_back(absl::StrCat(sc.name, " c ", r->best_score.c, " = optimum ",
                                 best));
    if (sc.name == "mlp") {
      auto axes = [&](int32_t color) {
        auto it = r->best_state.axes_of.find(color);
        return it == r->best_state.axes_of.end() ? std::vector<std::string>{}
                                                  : it->second;
      };
      std::vector<std::string> b = axes(ColorOf(a, m, "x", 0));
      std::vector<std::string> u = axes(ColorOf(a, m, "y", 1));
      const std::string shape = absl::StrCat(
          "B on [", absl::StrJoin(b, ","), "], U on [", absl::StrJoin(u, ","),
          "]");
      notes.push_back(absl::StrCat("mlp optimum ", shape));
      v.Check(b.size() == 1 && u.size() == 1 && b != u,
              absl::StrCat("mlp optimum does not shard B and U on distinct "
                           "axes: ",
                           shape));
    }
  }
  if (v.pass) {
    v.detail = absl::StrJoin(notes, "; ");
  } else {
    v.detail = absl::StrCat(v.detail, " (", absl::StrJoin(notes, "; "), ")");
  }
  return v;
}

Verdict CrossLayerGrouping() {
  Verdict v;
  std::vector<std::string> counts;
  for (int layers = 1; layers <= 4; ++layers) {
    Module m = ParseOrDie(testing::StackedAttnText(layers));
    ProgramAnalysis a = AnalyzeOrDie(m);
    const int64_t resolutions = int64_t{1} << a.groups.size();
    counts.push_back(absl::StrCat("L=", layers, ":", resolutions));
    v.Check(resolutions == 2,
            absl::StrCat("L=", layers, " has ", resolutions, " resolutions"));
    if (layers == 2) {
      v.Check(a.sets.size() == 2, absl::StrCat(a.sets.size(), " sets at L=2"));
      v.Check(a.groups.size() == 1 && a.groups[0].sets.size() == 2,
              "L=2 group does not cover both sets");
      AnalysisOptions separate;
      separate.group_sets = false;
      ProgramAnalysis b = AnalyzeOrDie(m, separate);
      v.Check((int64_t{1} << b.groups.size()) == 4,
              "ungrouped L=2 does not have 4 resolutions");
    }
  }
  if (v.pass) {
    v.detail = absl::StrCat("L=2 shrinks 4 to 2; ", absl::StrJoin(counts, " "));
  }
  return v;
}

// Every applicable action sequence over `space`, up to `max_len` actions.
void Sequences(const ShardingState& s, std::vector<Action>& prefix,
               const std::vector<Action>& space, const ProgramAnalysis& a,
               const Mesh& mesh, size_t max_len,
               std::vector<std::vector<Action>>& out) {
  out.push_back(prefix);
  if (prefix.size() == max_len) return;
  for (const Action& act : space) {
    if (act.stop || !ActionValid(s, act, a, mesh)) continue;
    prefix.push_back(act);
    Sequences(ApplyAction(s, act, a), prefix, space, a, mesh, max_len, out);
    prefix.pop_back();
  }
}

Verdict StateDedup() {
  Verdict v;
  const std::vector<std::pair<std::string, std::string>> cases = {
      {testing::MlpText(), "b=2,m=2"}, {testing::AttnText(), "s=2"}};
  int64_t sequences = 0, permutations = 0, states = 0;
  for (const auto& [text, mesh_spec] : cases) {
    Module m = ParseOrDie(text);
    ProgramAnalysis a = AnalyzeOrDie(m);
    Mesh mesh = *Mesh::Parse(mesh_spec);
    SearchConfig cfg;
    cfg.min_unique_dims = 1;
    std::vector<Action> space = BuildActionSpace(a, mesh, cfg);
    std::vector<std::vector<Action>> all;
    std::vector<Action> prefix;
    Sequences({}, prefix, space, a, mesh, mesh.axes().size(), all);
    std::map<std::string, ShardingState> by_key;
    for (std::vector<Action> seq : all) {
      ++sequences;
      ShardingState first;
      for (const Action& act : seq) first = ApplyAction(first, act, a);
      std::sort(seq.begin(), seq.end(), [](const Action& x, const Action& y) {
        return std::tie(x.unit, x.bits, x.axis_index) <
               std::tie(y.unit, y.bits, y.axis_index);
      });
      do {
        ShardingState s;
        bool applicable = true;
        for (const Action& act : seq) {
          applicable &= ActionValid(s, act, a, mesh);
          s = ApplyAction(s, act, a);
        }
        if (!applicable) continue;
        ++permutations;
        // Order within one unit sets the axis nesting, so it is part of the
        // state; everything else must collapse to one key.
        bool same_nesting = true;
        for (const auto& [color, axes] : first.axes_of) {
          same_nesting &= s.axes_of.at(color) == axes;
        }
        v.Check((StateKey(s) == StateKey(first)) == same_nesting,
                "permutation changed the key of an identical state");
        auto [it, fresh] = by_key.emplace(StateKey(s), s);
        v.Check(it->second == s, "two distinct states share a key");
      } while (std::next_permutation(
          seq.begin(), seq.end(), [](const Action& x, const Action& y) {
            return std::tie(x.unit, x.bits, x.axis_index) <
                   std::tie(y.unit, y.bits, y.axis_index);
          }));
    }
    std::set<std::string> keys;
    std::vector<ShardingState> enumerated = testing::EnumerateStates(a, mesh, 1);
    for (const ShardingState& s : enumerated) keys.insert(StateKey(s));
    states += static_cast<int64_t>(enumerated.size());
    v.Check(keys.size() == enumerated.size(), "enumeration keys collide");
  }
  if (v.pass) {
    v.detail = absl::StrCat(sequences, " sequences, ", permutations,
                            " permutations, ", states,
                            " enumerated states with unique keys");
  }
  return v;
}

Verdict Linearity() {
  Verdict v;
  std::mt19937_64 rng(4242);
  int with_conflicts = 0;
  for (int i = 0; i < kLinearModules; ++i) {
    Module m = ParseOrDie(testing::RandomLinearModuleText(rng));
    ProgramAnalysis a = AnalyzeOrDie(m);
    with_conflicts += !a.graph.conflicts.empty();
  }
  v.Check(with_conflicts == 0,
          absl::StrCat(with_conflicts, " modules have conflicts"));
  if (v.pass) v.detail = absl::StrCat(kLinearModules, " modules, 0 conflicts");
  return v;
}

std::string Slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict Determinism() {
  Verdict v;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "autoshard_acceptance";
  fs::create_directories(dir);
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"mlp", "b=2,m=2"}, {"attn", "s=2,t=2"}};
  for (const auto& [name, mesh] : cases) {
    const fs::path input = dir / (name + ".ir");
    std::ofstream(input) << (name == "mlp" ? testing::MlpText()
                                           : testing::AttnText());
    std::string ir[2], report[2];
    for (int run = 0; run < 2; ++run) {
      RunConfig cfg;
      cfg.subcommand = Subcommand::kPartition;
      cfg.input = input.string();
      cfg.mesh = mesh;
      cfg.search.min_unique_dims = 1;
      cfg.search.seed = kSearchSeed;
      cfg.search.workers = 1;
      cfg.emit_sharded = (dir / absl::StrCat(name, run, ".ir")).string();
      cfg.report = (dir / absl::StrCat(name, run, ".json")).string();
      std::ostringstream out;
      absl::Status s = Run(cfg, out);
      v.Check(s.ok(), std::string(s.message()));
      ir[run] = Slurp(cfg.emit_sharded);
      report[run] = Slurp(cfg.report);
    }
    v.Check(!ir[0].empty() && ir[0] == ir[1], name + " sharded IR differs");
    v.Check(!report[0].empty() && report[0] == report[1],
            name + " report differs");
  }
  if (v.pass) v.detail = "sharded IR and report byte-identical";
  return v;
}

struct Criterion {
  int id;
  std::string name;
  double limit_secs;  // 0 means unbounded
  std::function<Verdict()> run;
};

int Main() {
  const std::vector<Criterion> criteria = {
      {1, "mlp colors golden", kGoldenSecs, MlpColors},
      {2, "attention conflicts golden", kGoldenSecs, AttnConflicts},
      {3, "sequence sharding lowering golden", kGoldenSecs, SequenceLowering},
      {4, "megatron lowering golden", kGoldenSecs, MegatronLowering},
      {5, "semantic equivalence suite", kEquivalenceSecs, SemanticEquivalence},
      {6, "batch scaling law", 0, BatchScaling},
      {7, "memory penalty formula", 0, MemoryPenalty},
      {8, "search optimality at desk scale", kSearchSecs, SearchOptimality},
      {9, "cross-layer grouping", kGroupingSecs, CrossLayerGrouping},
      {10, "state dedup", 0, StateDedup},
      {11, "linearity property", kLinearitySecs, Linearity},
      {12, "determinism", 0, Determinism},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    Verdict v = c.run();
    double secs = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    if (c.limit_secs > 0 && secs > c.limit_secs) {
      v.Check(false, absl::StrCat("took ", secs, " s, limit ", c.limit_secs));
    }
    failed += !v.pass;
    std::printf("%s %d %s: %s\n", v.pass ? "PASS" : "FAIL", c.id,
                c.name.c_str(), v.detail.c_str());
  }
  std::printf("%d of %zu criteria passed\n",
              static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

}  // namespace
}  // namespace autoshard

int main() { return autoshard::Main(); }
