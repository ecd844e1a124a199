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

// The dimension graph and sharding conflicts.
//
// Nodes are the classes of the I-only quotient; a directed edge u -> v exists
// when some name of u flows to some name of v through M. Weakly connected
// components of this graph coincide with the colors of the I-and-M quotient.
//
// A conflict is a pair of distinct nodes that annotate the same site and lie
// in the same component: sharding that component must pick one of the two.
// Conflicts forming a "box" (parallel edges with no path across) are
// compatible and can be resolved together; compatibility classes carry a
// single resolution bit. Isomorphic classes across repeated layers are
// grouped so that one bit governs all of them.

#ifndef AUTOSHARD_DIMGRAPH_H_
#define AUTOSHARD_DIMGRAPH_H_

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "autoshard/ir.h"
#include "autoshard/nda.h"

namespace autoshard {

using NodeId = int32_t;

struct ConflictEdge {
  NodeId a = -1;  // node at the lower dimension index of `site`
  NodeId b = -1;
  SiteId site = -1;
  int32_t dim_a = -1;
  int32_t dim_b = -1;

  friend bool operator==(const ConflictEdge&, const ConflictEdge&) = default;
};

struct DimGraph {
  int32_t num_nodes = 0;
  // Sorted, deduplicated, no self loops.
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::vector<std::vector<NodeId>> succ;
  std::vector<std::vector<NodeId>> pred;
  // Weakly connected component per node; ids follow the smallest node, so
  // they equal the I-and-M color ids.
  std::vector<int32_t> component;
  // Node of every dimension name (the I-only color).
  std::vector<NodeId> node_of;
  std::vector<ConflictEdge> conflicts;

  bool HasEdge(NodeId from, NodeId to) const;
  // Directed reachability that ignores the listed edges.
  bool Reaches(NodeId from, NodeId to,
               const std::vector<std::pair<NodeId, NodeId>>& excluded) const;
};

// Nodes and edges only; `conflicts` is left empty.
DimGraph BuildDimensionGraph(const NdaRaw& raw, const ColorAssignment& io);

// Per-site node pairs within one component, deduplicated by unordered node
// pair (the first site wins), in site order then dimension order. The return
// site is skipped.
std::vector<ConflictEdge> FindConflicts(const DimGraph& graph,
                                        const NdaRaw& raw);

// True iff c1 and c2 form a box. On success `*parity` is 0 when a maps to a
// (and b to b) and 1 when the endpoints cross.
bool Compatible(const ConflictEdge& c1, const ConflictEdge& c2,
                const DimGraph& graph, int* parity = nullptr);

// A class of the compatibility closure. Bit `bit` selects, for member k, the
// endpoint Winner(k, bit); the other endpoint is left unsharded.
struct CompatSet {
  std::vector<int32_t> members;  // conflict indices, ascending
  std::vector<int32_t> parity;   // relative to members[0]
  int32_t flip = 0;

  NodeId Winner(const std::vector<ConflictEdge>& conflicts, size_t k,
                int bit) const;
  NodeId Loser(const std::vector<ConflictEdge>& conflicts, size_t k,
               int bit) const;
};

struct CompatResult {
  std::vector<CompatSet> sets;
  std::vector<std::string> warnings;
};

// Closure of pairwise compatibility with parity propagation. A compatible
// pair whose parity contradicts the closure built so far is not merged; the
// conflict stays in the set it already belongs to and a warning is recorded.
CompatResult CompatibilitySets(const DimGraph& graph);

struct SetGroup {
  std::vector<int32_t> sets;  // indices into the set list, ascending
  std::string signature;
};

struct GroupResult {
  std::vector<SetGroup> groups;
  std::vector<std::string> warnings;
};

// Merges sets whose induced subgraphs hash equal under Weisfeiler-Lehman
// refinement, and orients every set (its `flip`) so that bit 0 means the same
// choice in all members of a group. `sets` is updated in place.
GroupResult GroupIsomorphicSets(std::vector<CompatSet>& sets,
                                const DimGraph& graph, const NdaRaw& raw,
                                const Module& module);

struct ArgGroups {
  std::vector<std::vector<int32_t>> groups;  // param indices
  std::vector<std::string> key;              // per param
};

ArgGroups GroupArguments(const Module& module, const NdaRaw& raw);

// Groups given by name; every param not mentioned forms its own group.
absl::StatusOr<ArgGroups> ArgGroupsFromNames(
    const Module& module, const std::vector<std::vector<std::string>>& names);

std::string ExportDot(const DimGraph& graph, const NdaRaw& raw,
                      const Module& module);

// Everything the search and the lowering need about one module.
struct ProgramAnalysis {
  NdaRaw raw;
  ColorAssignment io;
  ColorAssignment full;
  DimGraph graph;
  std::vector<CompatSet> sets;
  std::vector<SetGroup> groups;
  std::vector<int32_t> group_of_set;
  ArgGroups args;
  // Colors sharded together because argument grouping mirrors them.
  std::vector<std::vector<int32_t>> units;
  std::vector<int32_t> unit_of_color;
  std::vector<std::string> warnings;

  // Groups whose conflicts lie in `color`, ascending.
  std::vector<int32_t> GroupsOfColor(int32_t color) const;
  std::vector<int32_t> GroupsOfUnit(int32_t unit) const;
  int32_t GroupOfConflict(int32_t conflict) const;
  // Set index and member position of every conflict.
  std::vector<std::pair<int32_t, int32_t>> conflict_slot;
};

struct AnalysisOptions {
  bool group_sets = true;
  bool group_args = true;
  // Overrides the automatic argument grouping when non-empty.
  std::vector<std::vector<std::string>> arg_group_names;
};

absl::StatusOr<ProgramAnalysis> AnalyzeProgram(
    const Module& module, const AnalysisOptions& options = {});

}  // namespace autoshard

#endif  // AUTOSHARD_DIMGRAPH_H_
