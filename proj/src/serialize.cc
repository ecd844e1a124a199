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

#include "autoshard/serialize.h"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "nlohmann/json.hpp"

namespace autoshard {
namespace {

using Json = nlohmann::ordered_json;

absl::StatusOr<Json> ParseJson(absl::string_view text, absl::string_view what) {
  Json j = Json::parse(text.begin(), text.end(), nullptr,
                       /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    return absl::InvalidArgumentError(absl::StrCat(what, ": malformed JSON"));
  }
  if (!j.is_object()) {
    return absl::InvalidArgumentError(
        absl::StrCat(what, ": expected a JSON object"));
  }
  return j;
}

std::string Dump(const Json& j) { return j.dump(2) + "\n"; }

Json CostToJson(const CostReport& r) {
  Json breakdown = Json::array();
  for (const OpCost& op : r.breakdown) {
    Json e;
    e["var"] = op.var;
    e["kind"] = op.kind;
    e["flops"] = op.flops;
    e["payload_bytes"] = op.payload_bytes;
    e["secs"] = op.secs;
    breakdown.push_back(std::move(e));
  }
  Json j;
  j["compute_secs"] = r.compute_secs;
  j["comm_secs"] = r.comm_secs;
  j["runtime_secs"] = r.runtime_secs;
  j["peak_bytes"] = r.peak_bytes;
  j["breakdown"] = std::move(breakdown);
  return j;
}

Json StateJson(const ShardingState& state) {
  Json colors = Json::object();
  for (const auto& [color, axes] : state.axes_of) {
    colors[absl::StrCat(color)] = axes;
  }
  Json resolutions = Json::object();
  for (const auto& [group, bit] : state.resolution_bits) {
    resolutions[absl::StrCat(group)] = bit;
  }
  Json j;
  j["colors"] = std::move(colors);
  j["resolutions"] = std::move(resolutions);
  return j;
}

absl::StatusOr<int32_t> IdKey(const std::string& key, absl::string_view what) {
  int32_t id;
  if (!absl::SimpleAtoi(key, &id) || id < 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("sharding state: bad ", what, " id '", key, "'"));
  }
  return id;
}

Json ColorsJson(const ColorAssignment& assignment) {
  Json colors = Json::array();
  for (const std::vector<DimId>& members : assignment.colors) {
    colors.push_back(members);
  }
  return colors;
}

absl::string_view SiteKindName(SiteKind kind) {
  switch (kind) {
    case SiteKind::kParamDef:
      return "param";
    case SiteKind::kBindingResult:
      return "result";
    case SiteKind::kOperandUse:
      return "operand";
    case SiteKind::kReturnUse:
      return "return";
  }
  return "?";
}

}  // namespace

absl::StatusOr<MachineSpec> MachineSpecFromJson(absl::string_view text) {
  absl::StatusOr<Json> j = ParseJson(text, "machine spec");
  if (!j.ok()) return j.status();
  MachineSpec spec;
  spec.bytes_per_sec.clear();
  try {
    spec.flops_per_sec = j->at("flops_per_sec").get<double>();
    for (const auto& [axis, bw] : j->at("bandwidth").items()) {
      spec.bytes_per_sec[axis] = bw.get<double>();
    }
    spec.device_memory_bytes = j->at("device_memory_bytes").get<int64_t>();
    if (j->contains("hbm_bytes_per_sec")) {
      spec.hbm_bytes_per_sec = j->at("hbm_bytes_per_sec").get<double>();
    }
  } catch (const Json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("machine spec: ", e.what()));
  }
  if (absl::Status s = spec.Validate(); !s.ok()) return s;
  return spec;
}

std::string MachineSpecToJson(const MachineSpec& spec) {
  Json j;
  j["flops_per_sec"] = spec.flops_per_sec;
  j["bandwidth"] = Json(spec.bytes_per_sec);
  j["device_memory_bytes"] = spec.device_memory_bytes;
  j["hbm_bytes_per_sec"] = spec.hbm_bytes_per_sec;
  return Dump(j);
}

absl::StatusOr<ShardingState> StateFromJson(absl::string_view text) {
  absl::StatusOr<Json> j = ParseJson(text, "sharding state");
  if (!j.ok()) return j.status();
  ShardingState state;
  try {
    if (j->contains("colors")) {
      for (const auto& [key, axes] : j->at("colors").items()) {
        absl::StatusOr<int32_t> id = IdKey(key, "color");
        if (!id.ok()) return id.status();
        state.axes_of[*id] = axes.get<std::vector<std::string>>();
      }
    }
    if (j->contains("resolutions")) {
      for (const auto& [key, bit] : j->at("resolutions").items()) {
        absl::StatusOr<int32_t> id = IdKey(key, "group");
        if (!id.ok()) return id.status();
        state.resolution_bits[*id] = bit.get<int>();
      }
    }
  } catch (const Json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("sharding state: ", e.what()));
  }
  return state;
}

std::string StateToJson(const ShardingState& state) {
  return Dump(StateJson(state));
}

absl::StatusOr<std::vector<std::vector<std::string>>> ArgGroupHintsFromJson(
    absl::string_view text) {
  absl::StatusOr<Json> j = ParseJson(text, "argument groups");
  if (!j.ok()) return j.status();
  try {
    return j->at("groups").get<std::vector<std::vector<std::string>>>();
  } catch (const Json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("argument groups: ", e.what()));
  }
}

absl::StatusOr<TensorMap> TensorsFromJson(absl::string_view text) {
  absl::StatusOr<Json> j = ParseJson(text, "inputs");
  if (!j.ok()) return j.status();
  TensorMap out;
  try {
    for (const auto& [name, t] : j->items()) {
      std::vector<int64_t> dims = t.at("dims").get<std::vector<int64_t>>();
      std::vector<double> data = t.at("data").get<std::vector<double>>();
      int64_t n = 1;
      for (int64_t d : dims) n *= d;
      if (n != static_cast<int64_t>(data.size())) {
        return absl::InvalidArgumentError(absl::StrCat(
            "inputs: '", name, "' has ", data.size(), " values, expected ", n));
      }
      out.emplace(name, Tensor(std::move(dims), std::move(data)));
    }
  } catch (const Json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("inputs: ", e.what()));
  }
  return out;
}

std::string NdaToJson(const Module& module, const ProgramAnalysis& analysis) {
  const NdaRaw& raw = analysis.raw;
  Json sites = Json::array();
  for (SiteId s = 0; s < static_cast<SiteId>(raw.sites.size()); ++s) {
    Json site;
    site["id"] = s;
    site["name"] = raw.SiteName(module, s);
    site["kind"] = SiteKindName(raw.sites[s].kind);
    site["names"] = raw.names[s];
    sites.push_back(std::move(site));
  }
  Json names = Json::array();
  for (DimId d = 0; d < raw.num_names(); ++d) {
    Json n;
    n["id"] = d;
    n["label"] = raw.DimName(module, d);
    n["extent"] = raw.extent[d];
    names.push_back(std::move(n));
  }
  Json m_edges = Json::array();
  for (const auto& [a, b] : raw.m_edges) m_edges.push_back({a, b});
  Json identities = Json::array();
  for (const auto& [a, b] : raw.identities) identities.push_back({a, b});
  Json quotients;
  quotients[std::string(QuotientModeName(analysis.io.mode))] =
      ColorsJson(analysis.io);
  quotients[std::string(QuotientModeName(analysis.full.mode))] =
      ColorsJson(analysis.full);
  Json j;
  j["module"] = module.name();
  j["sites"] = std::move(sites);
  j["names"] = std::move(names);
  j["m_edges"] = std::move(m_edges);
  j["identities"] = std::move(identities);
  j["quotients"] = std::move(quotients);
  return Dump(j);
}

std::string ConflictsToJson(const Module& module,
                            const ProgramAnalysis& analysis) {
  const NdaRaw& raw = analysis.raw;
  const std::vector<ConflictEdge>& conflicts = analysis.graph.conflicts;
  auto endpoint = [&](const ConflictEdge& c, NodeId node) {
    return absl::StrCat(raw.SiteName(module, c.site), "#",
                        node == c.a ? c.dim_a : c.dim_b);
  };
  Json cs = Json::array();
  for (size_t i = 0; i < conflicts.size(); ++i) {
    const ConflictEdge& c = conflicts[i];
    Json e;
    e["id"] = i;
    e["site"] = raw.SiteName(module, c.site);
    e["dims"] = {c.dim_a, c.dim_b};
    e["nodes"] = {c.a, c.b};
    e["color"] = analysis.graph.component[c.a];
    cs.push_back(std::move(e));
  }
  Json sets = Json::array();
  for (size_t i = 0; i < analysis.sets.size(); ++i) {
    const CompatSet& set = analysis.sets[i];
    Json e;
    e["id"] = i;
    e["members"] = set.members;
    e["parity"] = set.parity;
    e["flip"] = set.flip;
    e["group"] = analysis.group_of_set[i];
    sets.push_back(std::move(e));
  }
  Json groups = Json::array();
  Json resolutions = Json::array();
  for (size_t g = 0; g < analysis.groups.size(); ++g) {
    const SetGroup& group = analysis.groups[g];
    Json e;
    e["id"] = g;
    e["sets"] = group.sets;
    e["signature"] = group.signature;
    groups.push_back(std::move(e));
    Json options = Json::array();
    for (int bit = 0; bit < 2; ++bit) {
      Json sharded = Json::array();
      for (int32_t s : group.sets) {
        const CompatSet& set = analysis.sets[s];
        for (size_t k = 0; k < set.members.size(); ++k) {
          sharded.push_back(endpoint(conflicts[set.members[k]],
                                     set.Winner(conflicts, k, bit)));
        }
      }
      Json o;
      o["bit"] = bit;
      o["sharded"] = std::move(sharded);
      options.push_back(std::move(o));
    }
    Json r;
    r["group"] = g;
    r["options"] = std::move(options);
    resolutions.push_back(std::move(r));
  }
  Json j;
  j["module"] = module.name();
  j["conflicts"] = std::move(cs);
  j["sets"] = std::move(sets);
  j["groups"] = std::move(groups);
  j["num_resolutions"] = int64_t{1} << analysis.groups.size();
  j["resolutions"] = std::move(resolutions);
  j["warnings"] = analysis.warnings;
  return Dump(j);
}

std::string ReportToJson(const RunReport& report,
                         const ProgramAnalysis& analysis) {
  Json score;
  score["rt"] = report.score.rt;
  score["mp"] = report.score.mp;
  score["c"] = report.score.c;
  score["device_memory_bytes"] = report.score.dm;
  score["penalty_constant"] = report.score.penalty_constant;
  Json j;
  j["module"] = report.module;
  j["mesh"] = report.mesh;
  j["state"] = StateJson(report.state);
  Json units = Json::object();
  for (const auto& [color, axes] : report.state.axes_of) {
    units[absl::StrCat(color)] = analysis.unit_of_color[color];
  }
  j["unit_of_color"] = std::move(units);
  j["score"] = std::move(score);
  j["cost"] = CostToJson(report.cost);
  j["baseline"] = CostToJson(report.baseline);
  if (report.search != nullptr) {
    const SearchResult& r = *report.search;
    Json actions = Json::array();
    for (const Action& a : r.actions_taken) actions.push_back(a.ToString());
    Json search;
    if (report.search_config != nullptr) {
      const SearchConfig& cfg = *report.search_config;
      Json c;
      c["budget"] = cfg.budget;
      c["max_depth"] = cfg.max_depth;
      c["min_unique_dims"] = cfg.min_unique_dims;
      c["exploration"] = cfg.exploration;
      c["seed"] = cfg.seed;
      c["workers"] = cfg.workers;
      c["rounds"] = cfg.rounds;
      c["early_stop_rounds"] = cfg.early_stop_rounds;
      search["config"] = std::move(c);
    }
    search["actions"] = std::move(actions);
    search["round_best_c"] = r.round_best;
    search["simulations"] = r.simulations;
    search["visited_states"] = r.visited_states;
    search["stopped_early"] = r.stopped_early;
    j["search"] = std::move(search);
  }
  Json verify;
  verify["checked"] = report.verified;
  if (report.verified) verify["max_relative_error"] = report.max_relative_error;
  j["verify"] = std::move(verify);
  return Dump(j);
}

}  // namespace autoshard
