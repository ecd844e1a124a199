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

#include "autoshard/driver.h"

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "autoshard/cost.h"
#include "autoshard/dimgraph.h"
#include "autoshard/interpreter.h"
#include "autoshard/ir.h"
#include "autoshard/ir_text.h"
#include "autoshard/lowering.h"
#include "autoshard/serialize.h"

namespace autoshard {
namespace {

absl::StatusOr<std::string> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot read ", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

absl::Status WriteFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return absl::PermissionDeniedError(absl::StrCat("cannot write ", path));
  out << text;
  out.close();
  if (!out) return absl::DataLossError(absl::StrCat("failed writing ", path));
  return absl::OkStatus();
}

absl::Status Annotate(const absl::Status& s, absl::string_view context) {
  return absl::Status(s.code(), absl::StrCat(context, ": ", s.message()));
}

struct Loaded {
  Module module;
  ProgramAnalysis analysis;
};

absl::StatusOr<Loaded> Load(const RunConfig& cfg) {
  absl::StatusOr<std::string> text = ReadFile(cfg.input);
  if (!text.ok()) return text.status();
  absl::StatusOr<Module> module = ParseModule(*text);
  if (!module.ok()) return Annotate(module.status(), cfg.input);
  AnalysisOptions options;
  options.group_args = cfg.group_args;
  options.group_sets = cfg.group_sets;
  if (!cfg.groups.empty()) {
    absl::StatusOr<std::string> hints = ReadFile(cfg.groups);
    if (!hints.ok()) return hints.status();
    absl::StatusOr<std::vector<std::vector<std::string>>> names =
        ArgGroupHintsFromJson(*hints);
    if (!names.ok()) return Annotate(names.status(), cfg.groups);
    options.arg_group_names = *std::move(names);
  }
  absl::StatusOr<ProgramAnalysis> analysis = AnalyzeProgram(*module, options);
  if (!analysis.ok()) return Annotate(analysis.status(), cfg.input);
  return Loaded{*std::move(module), *std::move(analysis)};
}

absl::Status WriteDumps(const RunConfig& cfg, const Loaded& l) {
  if (!cfg.dump_nda.empty()) {
    if (absl::Status s = WriteFile(cfg.dump_nda, NdaToJson(l.module, l.analysis));
        !s.ok()) {
      return s;
    }
  }
  if (!cfg.dump_graph.empty()) {
    if (absl::Status s = WriteFile(
            cfg.dump_graph,
            ExportDot(l.analysis.graph, l.analysis.raw, l.module));
        !s.ok()) {
      return s;
    }
  }
  if (!cfg.dump_conflicts.empty()) {
    return WriteFile(cfg.dump_conflicts, ConflictsToJson(l.module, l.analysis));
  }
  return absl::OkStatus();
}

absl::StatusOr<Mesh> LoadMesh(const RunConfig& cfg) {
  if (cfg.mesh.empty()) {
    return absl::InvalidArgumentError("--mesh is required");
  }
  return Mesh::Parse(cfg.mesh);
}

absl::StatusOr<MachineSpec> LoadMachine(const RunConfig& cfg,
                                        const Mesh& mesh) {
  if (cfg.machine.empty()) {
    return MachineSpec::Uniform(mesh, kDefaultFlopsPerSec, kDefaultBytesPerSec,
                                kDefaultDeviceMemory);
  }
  absl::StatusOr<std::string> text = ReadFile(cfg.machine);
  if (!text.ok()) return text.status();
  absl::StatusOr<MachineSpec> spec = MachineSpecFromJson(*text);
  if (!spec.ok()) return Annotate(spec.status(), cfg.machine);
  return spec;
}

absl::StatusOr<ShardingState> LoadState(const RunConfig& cfg) {
  if (cfg.state.empty()) {
    return absl::InvalidArgumentError("--state is required");
  }
  absl::StatusOr<std::string> text = ReadFile(cfg.state);
  if (!text.ok()) return text.status();
  absl::StatusOr<ShardingState> state = StateFromJson(*text);
  if (!state.ok()) return Annotate(state.status(), cfg.state);
  return state;
}

// Integer-valued inputs keep the unsharded and sharded sums exact.
TensorMap SeededInputs(const Module& module, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dist(-3, 3);
  TensorMap out;
  for (const Param& p : module.params()) {
    Tensor t(p.shape.dims);
    for (double& x : t.data()) x = dist(rng);
    out.emplace(p.name, std::move(t));
  }
  return out;
}

absl::StatusOr<double> CheckEquivalence(const Module& module,
                                        const ShardedModule& sm,
                                        const Mesh& mesh,
                                        const TensorMap& inputs) {
  absl::StatusOr<Tensor> expected = Interpret(module, inputs);
  if (!expected.ok()) return expected.status();
  absl::StatusOr<Tensor> actual = InterpretSharded(sm, mesh, inputs);
  if (!actual.ok()) return actual.status();
  return MaxRelativeError(*actual, *expected);
}

absl::StatusOr<ShardedModule> Lower(const Loaded& l, const ShardingState& state,
                                    const Mesh& mesh) {
  if (absl::Status s = ValidateState(state, l.analysis, mesh); !s.ok()) {
    return s;
  }
  absl::StatusOr<ShardedModule> sm = Apply(l.module, l.analysis, state, mesh);
  if (!sm.ok()) return sm.status();
  std::vector<std::string> problems = Validate(*sm, mesh);
  if (!problems.empty()) {
    return absl::InternalError(absl::StrCat("lowered module is invalid: ",
                                            absl::StrJoin(problems, "; ")));
  }
  return sm;
}

// Score of `report`; a baseline with no runtime is treated as rt = 1.
absl::StatusOr<Score> ScoreOf(const CostReport& report,
                              const CostReport& baseline,
                              const MachineSpec& spec, double penalty) {
  if (baseline.runtime_secs > 0) {
    return ComputeScore(report, baseline, spec, penalty);
  }
  Score score;
  score.rt = 1;
  score.dm = spec.device_memory_bytes;
  score.penalty_constant = penalty;
  if (report.peak_bytes > spec.device_memory_bytes && baseline.peak_bytes > 0) {
    score.mp = penalty *
               static_cast<double>(report.peak_bytes - spec.device_memory_bytes) /
               static_cast<double>(baseline.peak_bytes);
  }
  score.c = score.rt + score.mp;
  return score;
}

absl::Status Finish(const RunConfig& cfg, const Loaded& l, const Mesh& mesh,
                    const ShardedModule& sm, RunReport& report,
                    std::ostream& out) {
  if (cfg.verify) {
    absl::StatusOr<double> err =
        CheckEquivalence(l.module, sm, mesh, SeededInputs(l.module, cfg.search.seed));
    if (!err.ok()) return Annotate(err.status(), "verification");
    if (!(*err <= kEquivalenceTolerance)) {
      return absl::InternalError(absl::StrCat(
          "verification: sharded result differs, max relative error ", *err));
    }
    report.verified = true;
    report.max_relative_error = *err;
  }
  const std::string printed = PrintShardedModule(sm);
  if (cfg.emit_sharded.empty()) {
    out << printed;
  } else {
    if (absl::Status s = WriteFile(cfg.emit_sharded, printed); !s.ok()) return s;
    out << "rt " << report.score.rt << " mp " << report.score.mp << " c "
        << report.score.c << "\n";
  }
  if (!cfg.report.empty()) {
    return WriteFile(cfg.report, ReportToJson(report, l.analysis));
  }
  return absl::OkStatus();
}

absl::Status RunAnalyze(const Loaded& l, std::ostream& out) {
  const ProgramAnalysis& a = l.analysis;
  out << "module " << l.module.name() << "\n"
      << "dimension names " << a.raw.num_names() << "\n"
      << "colors " << a.full.num_colors() << "\n"
      << "graph nodes " << a.graph.num_nodes << "\n"
      << "conflicts " << a.graph.conflicts.size() << "\n"
      << "compatibility sets " << a.sets.size() << "\n"
      << "set groups " << a.groups.size() << "\n"
      << "resolutions " << (int64_t{1} << a.groups.size()) << "\n"
      << "argument units " << a.units.size() << "\n";
  for (const std::string& w : a.warnings) out << "warning: " << w << "\n";
  return absl::OkStatus();
}

absl::Status RunPartition(const RunConfig& cfg, const Loaded& l,
                          std::ostream& out) {
  absl::StatusOr<Mesh> mesh = LoadMesh(cfg);
  if (!mesh.ok()) return mesh.status();
  absl::StatusOr<MachineSpec> spec = LoadMachine(cfg, *mesh);
  if (!spec.ok()) return spec.status();
  absl::StatusOr<SearchResult> result =
      MctsSearch(l.module, l.analysis, *mesh, *spec, cfg.search);
  if (!result.ok()) return Annotate(result.status(), "search");
  absl::StatusOr<ShardedModule> sm = Lower(l, result->best_state, *mesh);
  if (!sm.ok()) return sm.status();
  RunReport report;
  report.module = l.module.name();
  report.mesh = mesh->ToString();
  report.state = result->best_state;
  report.score = result->best_score;
  report.cost = result->best_report;
  report.baseline = result->baseline;
  report.search = &*result;
  report.search_config = &cfg.search;
  return Finish(cfg, l, *mesh, *sm, report, out);
}

absl::Status RunApply(const RunConfig& cfg, const Loaded& l, std::ostream& out) {
  absl::StatusOr<Mesh> mesh = LoadMesh(cfg);
  if (!mesh.ok()) return mesh.status();
  absl::StatusOr<MachineSpec> spec = LoadMachine(cfg, *mesh);
  if (!spec.ok()) return spec.status();
  absl::StatusOr<ShardingState> state = LoadState(cfg);
  if (!state.ok()) return state.status();
  absl::StatusOr<ShardedModule> sm = Lower(l, *state, *mesh);
  if (!sm.ok()) return sm.status();
  absl::StatusOr<ShardedModule> unsharded = Lower(l, ShardingState{}, *mesh);
  if (!unsharded.ok()) return unsharded.status();
  absl::StatusOr<CostReport> cost = Estimate(*sm, *mesh, *spec, cfg.search.cost);
  if (!cost.ok()) return cost.status();
  absl::StatusOr<CostReport> baseline =
      Estimate(*unsharded, *mesh, *spec, cfg.search.cost);
  if (!baseline.ok()) return baseline.status();
  absl::StatusOr<Score> score =
      ScoreOf(*cost, *baseline, *spec, cfg.search.penalty_constant);
  if (!score.ok()) return score.status();
  RunReport report;
  report.module = l.module.name();
  report.mesh = mesh->ToString();
  report.state = *state;
  report.score = *score;
  report.cost = *cost;
  report.baseline = *baseline;
  return Finish(cfg, l, *mesh, *sm, report, out);
}

absl::Status RunSimulate(const RunConfig& cfg, const Loaded& l,
                         std::ostream& out) {
  absl::StatusOr<Mesh> mesh = LoadMesh(cfg);
  if (!mesh.ok()) return mesh.status();
  absl::StatusOr<ShardingState> state = LoadState(cfg);
  if (!state.ok()) return state.status();
  absl::StatusOr<ShardedModule> sm = Lower(l, *state, *mesh);
  if (!sm.ok()) return sm.status();
  TensorMap inputs;
  if (cfg.inputs.empty()) {
    inputs = SeededInputs(l.module, cfg.search.seed);
  } else {
    absl::StatusOr<std::string> text = ReadFile(cfg.inputs);
    if (!text.ok()) return text.status();
    absl::StatusOr<TensorMap> parsed = TensorsFromJson(*text);
    if (!parsed.ok()) return Annotate(parsed.status(), cfg.inputs);
    inputs = *std::move(parsed);
  }
  absl::StatusOr<double> err = CheckEquivalence(l.module, *sm, *mesh, inputs);
  if (!err.ok()) return err.status();
  const bool same = *err <= kEquivalenceTolerance;
  out << "max relative error " << *err << "\n"
      << "equivalent " << (same ? "yes" : "no") << "\n";
  if (!same) {
    return absl::InternalError("sharded and unsharded results differ");
  }
  return absl::OkStatus();
}

}  // namespace

absl::Status Run(const RunConfig& cfg, std::ostream& out) {
  absl::StatusOr<Loaded> loaded = Load(cfg);
  if (!loaded.ok()) return loaded.status();
  if (absl::Status s = WriteDumps(cfg, *loaded); !s.ok()) return s;
  switch (cfg.subcommand) {
    case Subcommand::kAnalyze:
      return RunAnalyze(*loaded, out);
    case Subcommand::kPartition:
      return RunPartition(cfg, *loaded, out);
    case Subcommand::kApply:
      return RunApply(cfg, *loaded, out);
    case Subcommand::kSimulate:
      return RunSimulate(cfg, *loaded, out);
  }
  return absl::InvalidArgumentError("unknown subcommand");
}

}  // namespace autoshard
