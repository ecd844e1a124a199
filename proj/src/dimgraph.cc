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

#include "autoshard/dimgraph.h"

#include <algorithm>
#include <deque>
#include <set>
#include <tuple>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "autoshard/ir_text.h"
#include "autoshard/union_find.h"

namespace autoshard {

bool DimGraph::HasEdge(NodeId from, NodeId to) const {
  return std::binary_search(edges.begin(), edges.end(),
                            std::make_pair(from, to));
}

bool DimGraph::Reaches(
    NodeId from, NodeId to,
    const std::vector<std::pair<NodeId, NodeId>>& excluded) const {
  if (from == to) return true;
  std::vector<bool> seen(num_nodes, false);
  std::deque<NodeId> queue = {from};
  seen[from] = true;
  while (!queue.empty()) {
    NodeId u = queue.front();
    queue.pop_front();
    for (NodeId v : succ[u]) {
      if (seen[v]) continue;
      if (std::find(excluded.begin(), excluded.end(), std::make_pair(u, v)) !=
          excluded.end()) {
        continue;
      }
      if (v == to) return true;
      seen[v] = true;
      queue.push_back(v);
    }
  }
  return false;
}

DimGraph BuildDimensionGraph(const NdaRaw& raw, const ColorAssignment& io) {
  DimGraph g;
  g.num_nodes = io.num_colors();
  g.node_of = io.color_of;
  for (const auto& [from, to] : raw.m_edges) {
    NodeId u = io.color_of[from];
    NodeId v = io.color_of[to];
    if (u != v) g.edges.emplace_back(u, v);
  }
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
  g.succ.assign(g.num_nodes, {});
  g.pred.assign(g.num_nodes, {});
  UnionFind uf(g.num_nodes);
  for (const auto& [u, v] : g.edges) {
    g.succ[u].push_back(v);
    g.pred[v].push_back(u);
    uf.Union(u, v);
  }
  std::vector<int32_t> id_of_root(g.num_nodes, -1);
  int32_t next = 0;
  g.component.resize(g.num_nodes);
  for (NodeId n = 0; n < g.num_nodes; ++n) {
    int32_t root = uf.Find(n);
    if (id_of_root[root] < 0) id_of_root[root] = next++;
    g.component[n] = id_of_root[root];
  }
  return g;
}

std::vector<ConflictEdge> FindConflicts(const DimGraph& graph,
                                        const NdaRaw& raw) {
  std::vector<ConflictEdge> out;
  std::set<std::pair<NodeId, NodeId>> seen;
  for (SiteId s = 0; s < static_cast<SiteId>(raw.sites.size()); ++s) {
    // The returned tensor is the result's definition; it adds no conflicts.
    if (raw.sites[s].kind == SiteKind::kReturnUse) continue;
    const std::vector<DimId>& names = raw.names[s];
    for (size_t i = 0; i < names.size(); ++i) {
      for (size_t j = i + 1; j < names.size(); ++j) {
        NodeId a = graph.node_of[names[i]];
        NodeId b = graph.node_of[names[j]];
        if (a == b || graph.component[a] != graph.component[b]) continue;
        if (!seen.insert(std::minmax(a, b)).second) continue;
        out.push_back(ConflictEdge{a, b, s, static_cast<int32_t>(i),
                                   static_cast<int32_t>(j)});
      }
    }
  }
  return out;
}

bool Compatible(const ConflictEdge& c1, const ConflictEdge& c2,
                const DimGraph& graph, int* parity) {
  if (c1 == c2) {
    if (parity != nullptr) *parity = 0;
    return true;
  }
  // (source conflict, target conflict) in both directions; each endpoint
  // labeling of the target.
  const ConflictEdge* order[2][2] = {{&c1, &c2}, {&c2, &c1}};
  for (const auto& [src, dst] : order) {
    for (int crossed = 0; crossed < 2; ++crossed) {
      NodeId n = src->a, o = src->b;
      NodeId l = crossed ? dst->b : dst->a;
      NodeId r = crossed ? dst->a : dst->b;
      if (!graph.HasEdge(n, l) || !graph.HasEdge(o, r)) continue;
      std::vector<std::pair<NodeId, NodeId>> box = {{n, l}, {o, r}};
      if (graph.Reaches(n, r, box) || graph.Reaches(o, l, box)) continue;
      if (parity != nullptr) *parity = crossed;
      return true;
    }
  }
  return false;
}

NodeId CompatSet::Winner(const std::vector<ConflictEdge>& conflicts, size_t k,
                         int bit) const {
  const ConflictEdge& c = conflicts[members[k]];
  return ((bit ^ flip ^ parity[k]) == 0) ? c.a : c.b;
}

NodeId CompatSet::Loser(const std::vector<ConflictEdge>& conflicts, size_t k,
                        int bit) const {
  const ConflictEdge& c = conflicts[members[k]];
  return ((bit ^ flip ^ parity[k]) == 0) ? c.b : c.a;
}

namespace {

// Union-find that also tracks the parity of every element relative to its
// root.
class ParityUnionFind {
 public:
  explicit ParityUnionFind(int32_t n) : parent_(n), parity_(n, 0) {
    for (int32_t i = 0; i < n; ++i) parent_[i] = i;
  }

  std::pair<int32_t, int> Find(int32_t x) {
    int p = 0;
    int32_t root = x;
    while (parent_[root] != root) {
      p ^= parity_[root];
      root = parent_[root];
    }
    // Compress, recomputing parities along the way.
    int acc = p;
    while (parent_[x] != root) {
      int32_t next = parent_[x];
      int own = parity_[x];
      parent_[x] = root;
      parity_[x] = acc;
      acc ^= own;
      x = next;
    }
    return {root, p};
  }

  // Returns false (and changes nothing) when the relation contradicts.
  bool Union(int32_t a, int32_t b, int rel, bool* merged) {
    auto [ra, pa] = Find(a);
    auto [rb, pb] = Find(b);
    *merged = false;
    if (ra == rb) return (pa ^ pb) == rel;
    if (rb < ra) std::swap(ra, rb);
    parent_[rb] = ra;
    parity_[rb] = pa ^ pb ^ rel;
    *merged = true;
    return true;
  }

 private:
  std::vector<int32_t> parent_;
  std::vector<int> parity_;
};

}  // namespace

CompatResult CompatibilitySets(const DimGraph& graph) {
  const std::vector<ConflictEdge>& cs = graph.conflicts;
  const int32_t n = static_cast<int32_t>(cs.size());
  CompatResult result;
  ParityUnionFind uf(n);
  for (int32_t i = 0; i < n; ++i) {
    for (int32_t j = i + 1; j < n; ++j) {
      int rel = 0;
      if (!Compatible(cs[i], cs[j], graph, &rel)) continue;
      bool merged = false;
      if (!uf.Union(i, j, rel, &merged)) {
        result.warnings.push_back(absl::StrCat(
            "inconsistent resolution between conflicts ", i, " and ", j,
            "; pair left unmerged"));
      }
    }
  }
  std::map<int32_t, int32_t> set_of_root;
  for (int32_t i = 0; i < n; ++i) {
    auto [root, p] = uf.Find(i);
    auto [it, inserted] =
        set_of_root.emplace(root, static_cast<int32_t>(result.sets.size()));
    if (inserted) result.sets.emplace_back();
    result.sets[it->second].members.push_back(i);
    result.sets[it->second].parity.push_back(p);
  }
  // Parities are relative to the class root, which is the smallest member.
  return result;
}

namespace {

std::string SiteOpLabel(const NdaRaw& raw, const Module& module, SiteId s) {
  const Site& site = raw.sites[s];
  switch (site.kind) {
    case SiteKind::kParamDef:
      return "param";
    case SiteKind::kReturnUse:
      return "return";
    case SiteKind::kBindingResult:
    case SiteKind::kOperandUse:
      return PrintOp(module.bindings()[site.index].op);
  }
  return "?";
}

class WlHasher {
 public:
  WlHasher(const DimGraph& graph, const NdaRaw& raw, const Module& module)
      : graph_(graph), raw_(raw), module_(module) {
    members_.assign(graph.num_nodes, {});
    for (DimId d = 0; d < raw.num_names(); ++d) {
      members_[graph.node_of[d]].push_back(d);
    }
  }

  // Final labels of the nodes of every set after `rounds` refinements.
  std::vector<std::map<NodeId, int32_t>> Label(
      const std::vector<CompatSet>& sets, int rounds) {
    std::vector<std::map<NodeId, int32_t>> labels(sets.size());
    for (size_t s = 0; s < sets.size(); ++s) {
      std::map<NodeId, int32_t> incidence;
      for (int32_t m : sets[s].members) {
        ++incidence[graph_.conflicts[m].a];
        ++incidence[graph_.conflicts[m].b];
      }
      for (const auto& [node, count] : incidence) {
        labels[s][node] = Intern(absl::StrCat(InitialLabel(node), "#", count));
      }
    }
    for (int r = 0; r < rounds; ++r) {
      for (size_t s = 0; s < sets.size(); ++s) {
        std::map<NodeId, int32_t> next;
        for (const auto& [node, label] : labels[s]) {
          std::vector<std::string> nb;
          for (NodeId v : graph_.succ[node]) {
            auto it = labels[s].find(v);
            if (it != labels[s].end()) nb.push_back(absl::StrCat("o", it->second));
          }
          for (NodeId v : graph_.pred[node]) {
            auto it = labels[s].find(v);
            if (it != labels[s].end()) nb.push_back(absl::StrCat("i", it->second));
          }
          for (int32_t m : sets[s].members) {
            const ConflictEdge& c = graph_.conflicts[m];
            if (c.a == node) nb.push_back(absl::StrCat("c", labels[s].at(c.b)));
            if (c.b == node) nb.push_back(absl::StrCat("c", labels[s].at(c.a)));
          }
          std::sort(nb.begin(), nb.end());
          next[node] =
              Intern(absl::StrCat(label, "(", absl::StrJoin(nb, ","), ")"));
        }
        labels[s] = std::move(next);
      }
    }
    return labels;
  }

 private:
  std::string InitialLabel(NodeId node) const {
    std::vector<std::string> parts;
    for (DimId d : members_[node]) {
      const DimRef& ref = raw_.origin[d];
      const Site& site = raw_.sites[ref.site];
      parts.push_back(absl::StrCat(static_cast<int>(site.kind), ":",
                                   SiteOpLabel(raw_, module_, ref.site), ":",
                                   site.operand, ":", ref.index, ":",
                                   raw_.extent[d]));
    }
    std::sort(parts.begin(), parts.end());
    return absl::StrJoin(parts, ";");
  }

  int32_t Intern(const std::string& key) {
    auto [it, inserted] =
        dictionary_.emplace(key, static_cast<int32_t>(dictionary_.size()));
    return it->second;
  }

  const DimGraph& graph_;
  const NdaRaw& raw_;
  const Module& module_;
  std::vector<std::vector<DimId>> members_;
  std::map<std::string, int32_t> dictionary_;
};

}  // namespace

GroupResult GroupIsomorphicSets(std::vector<CompatSet>& sets,
                                const DimGraph& graph, const NdaRaw& raw,
                                const Module& module) {
  GroupResult result;
  if (sets.empty()) return result;
  int rounds = 1;
  for (const CompatSet& s : sets) {
    rounds = std::max(rounds, static_cast<int>(2 * s.members.size()));
  }
  WlHasher hasher(graph, raw, module);
  std::vector<std::map<NodeId, int32_t>> labels = hasher.Label(sets, rounds);

  std::vector<std::string> signature(sets.size());
  std::vector<std::string> transfer(sets.size());
  for (size_t s = 0; s < sets.size(); ++s) {
    const std::map<NodeId, int32_t>& lab = labels[s];
    CompatSet& set = sets[s];

    // Orientation: bit 0 makes the lower-labeled endpoint of the anchor win.
    size_t anchor = 0;
    std::pair<int32_t, int32_t> best = {INT32_MAX, INT32_MAX};
    for (size_t k = 0; k < set.members.size(); ++k) {
      const ConflictEdge& c = graph.conflicts[set.members[k]];
      std::pair<int32_t, int32_t> key = std::minmax(lab.at(c.a), lab.at(c.b));
      if (key < best) {
        best = key;
        anchor = k;
      }
    }
    const ConflictEdge& ac = graph.conflicts[set.members[anchor]];
    set.flip = set.parity[anchor] ^ (lab.at(ac.a) <= lab.at(ac.b) ? 0 : 1);

    std::vector<int32_t> node_labels;
    for (const auto& [node, label] : lab) node_labels.push_back(label);
    std::sort(node_labels.begin(), node_labels.end());
    std::vector<std::string> edge_labels;
    for (const auto& [u, lu] : lab) {
      for (NodeId v : graph.succ[u]) {
        auto it = lab.find(v);
        if (it != lab.end()) edge_labels.push_back(absl::StrCat("m", lu, ">", it->second));
      }
    }
    std::vector<std::string> choices;
    for (size_t k = 0; k < set.members.size(); ++k) {
      const ConflictEdge& c = graph.conflicts[set.members[k]];
      auto [lo, hi] = std::minmax(lab.at(c.a), lab.at(c.b));
      edge_labels.push_back(absl::StrCat("c", lo, "-", hi));
      choices.push_back(absl::StrCat(lab.at(set.Winner(graph.conflicts, k, 0)),
                                     ">",
                                     lab.at(set.Loser(graph.conflicts, k, 0))));
    }
    std::sort(edge_labels.begin(), edge_labels.end());
    std::sort(choices.begin(), choices.end());
    signature[s] = absl::StrCat(absl::StrJoin(node_labels, ","), "|",
                                absl::StrJoin(edge_labels, ","));
    transfer[s] = absl::StrJoin(choices, ",");
  }

  std::map<std::string, int32_t> group_of_signature;
  for (size_t s = 0; s < sets.size(); ++s) {
    auto [it, inserted] = group_of_signature.emplace(
        signature[s], static_cast<int32_t>(result.groups.size()));
    if (inserted) result.groups.push_back(SetGroup{{}, signature[s]});
    result.groups[it->second].sets.push_back(static_cast<int32_t>(s));
  }

  // A hash collision shows up as resolutions that do not transfer.
  std::vector<SetGroup> validated;
  for (SetGroup& group : result.groups) {
    std::map<std::string, int32_t> by_transfer;
    std::vector<SetGroup> parts;
    for (int32_t s : group.sets) {
      auto [it, inserted] =
          by_transfer.emplace(transfer[s], static_cast<int32_t>(parts.size()));
      if (inserted) {
        parts.push_back(SetGroup{{}, absl::StrCat(group.signature, "/",
                                                  parts.size())});
      }
      parts[it->second].sets.push_back(s);
    }
    if (parts.size() > 1) {
      result.warnings.push_back(absl::StrCat(
          "isomorphic sets {", absl::StrJoin(group.sets, ","),
          "} do not share resolutions; split into ", parts.size(), " groups"));
    } else {
      parts[0].signature = group.signature;
    }
    for (SetGroup& p : parts) validated.push_back(std::move(p));
  }
  std::sort(validated.begin(), validated.end(),
            [](const SetGroup& x, const SetGroup& y) {
              return x.sets.front() < y.sets.front();
            });
  result.groups = std::move(validated);
  return result;
}

namespace {

std::string UseRole(const Module& module, const NdaRaw& raw, SiteId s,
                    int32_t dim) {
  const Site& site = raw.sites[s];
  if (site.kind == SiteKind::kReturnUse) return "map";
  const OpKind& op = module.bindings()[site.index].op;
  if (std::holds_alternative<MatmulOp>(op)) {
    return (site.operand == 0) == (dim == 1) ? "contract" : "map";
  }
  if (const auto* r = std::get_if<ReduceOp>(&op)) {
    if (r->dim == dim) return "reduced";
  }
  return "map";
}

ArgGroups PartitionByKey(std::vector<std::string> key) {
  ArgGroups out;
  std::map<std::string, int32_t> index;
  for (size_t p = 0; p < key.size(); ++p) {
    auto [it, inserted] =
        index.emplace(key[p], static_cast<int32_t>(out.groups.size()));
    if (inserted) out.groups.emplace_back();
    out.groups[it->second].push_back(static_cast<int32_t>(p));
  }
  out.key = std::move(key);
  return out;
}

}  // namespace

ArgGroups GroupArguments(const Module& module, const NdaRaw& raw) {
  std::vector<std::string> keys;
  for (size_t p = 0; p < module.params().size(); ++p) {
    ValueId v = static_cast<ValueId>(p);
    const Shape& shape = module.ValueShape(v);
    std::string key = absl::StrCat("r", shape.rank());
    for (int32_t i = 0; i < shape.rank(); ++i) {
      std::vector<std::string> uses;
      for (SiteId s : raw.uses[v]) {
        const Site& site = raw.sites[s];
        std::string op = site.kind == SiteKind::kReturnUse
                             ? "return"
                             : OpMnemonic(module.bindings()[site.index].op);
        uses.push_back(absl::StrCat("(", op, ",", std::max(site.operand, 0),
                                    ",", i, ",", UseRole(module, raw, s, i),
                                    ")"));
      }
      std::sort(uses.begin(), uses.end());
      absl::StrAppend(&key, " [", shape.dims[i], ":", absl::StrJoin(uses, ""),
                      "]");
    }
    keys.push_back(std::move(key));
  }
  return PartitionByKey(std::move(keys));
}

absl::StatusOr<ArgGroups> ArgGroupsFromNames(
    const Module& module, const std::vector<std::vector<std::string>>& names) {
  std::vector<std::string> keys(module.params().size());
  for (size_t p = 0; p < keys.size(); ++p) keys[p] = absl::StrCat("solo", p);
  for (size_t g = 0; g < names.size(); ++g) {
    std::optional<int64_t> rank;
    for (const std::string& name : names[g]) {
      std::optional<ValueId> v = module.Lookup(name);
      if (!v.has_value() || !module.IsParam(*v)) {
        return absl::InvalidArgumentError(
            absl::StrCat("group ", g, ": ", name, " is not a parameter"));
      }
      int64_t r = module.ValueShape(*v).rank();
      if (rank.has_value() && *rank != r) {
        return absl::InvalidArgumentError(
            absl::StrCat("group ", g, ": parameters differ in rank"));
      }
      rank = r;
      keys[*v] = absl::StrCat("hint", g);
    }
  }
  return PartitionByKey(std::move(keys));
}

std::string ExportDot(const DimGraph& graph, const NdaRaw& raw,
                      const Module& module) {
  std::vector<DimId> first(graph.num_nodes, -1);
  for (DimId d = raw.num_names() - 1; d >= 0; --d) first[graph.node_of[d]] = d;
  std::string out = "digraph dims {\n";
  for (NodeId n = 0; n < graph.num_nodes; ++n) {
    absl::StrAppend(&out, "  n", n, " [label=\"", raw.DimName(module, first[n]),
                    "\"];\n");
  }
  for (const auto& [u, v] : graph.edges) {
    absl::StrAppend(&out, "  n", u, " -> n", v, ";\n");
  }
  for (const ConflictEdge& c : graph.conflicts) {
    absl::StrAppend(&out, "  n", c.a, " -> n", c.b,
                    " [dir=none, color=red];\n");
  }
  out += "}\n";
  return out;
}

std::vector<int32_t> ProgramAnalysis::GroupsOfColor(int32_t color) const {
  std::set<int32_t> out;
  for (size_t c = 0; c < graph.conflicts.size(); ++c) {
    if (graph.component[graph.conflicts[c].a] == color) {
      out.insert(GroupOfConflict(static_cast<int32_t>(c)));
    }
  }
  return {out.begin(), out.end()};
}

std::vector<int32_t> ProgramAnalysis::GroupsOfUnit(int32_t unit) const {
  std::set<int32_t> out;
  for (int32_t color : units[unit]) {
    for (int32_t g : GroupsOfColor(color)) out.insert(g);
  }
  return {out.begin(), out.end()};
}

int32_t ProgramAnalysis::GroupOfConflict(int32_t conflict) const {
  return group_of_set[conflict_slot[conflict].first];
}

namespace {

// Mirrors the dimensions of grouped arguments. A merged unit that would put
// two of its colors on one tensor is dissolved again.
void BuildUnits(ProgramAnalysis& a, const Module& module) {
  const int32_t n = a.full.num_colors();
  UnionFind uf(n);
  for (const std::vector<int32_t>& group : a.args.groups) {
    const std::vector<DimId>& lead = a.raw.names[a.raw.def_site[group[0]]];
    for (size_t k = 1; k < group.size(); ++k) {
      const std::vector<DimId>& other = a.raw.names[a.raw.def_site[group[k]]];
      for (size_t i = 0; i < lead.size(); ++i) {
        uf.Union(a.full.color_of[lead[i]], a.full.color_of[other[i]]);
      }
    }
  }
  std::vector<bool> dissolve(n, false);
  for (const std::vector<DimId>& names : a.raw.names) {
    for (size_t i = 0; i < names.size(); ++i) {
      for (size_t j = i + 1; j < names.size(); ++j) {
        int32_t ci = a.full.color_of[names[i]];
        int32_t cj = a.full.color_of[names[j]];
        if (ci != cj && uf.Find(ci) == uf.Find(cj)) dissolve[uf.Find(ci)] = true;
      }
    }
  }
  std::vector<int32_t> unit_of_root(n, -1);
  a.unit_of_color.assign(n, -1);
  for (int32_t c = 0; c < n; ++c) {
    int32_t root = uf.Find(c);
    if (dissolve[root]) {
      a.unit_of_color[c] = static_cast<int32_t>(a.units.size());
      a.units.push_back({c});
      continue;
    }
    if (unit_of_root[root] < 0) {
      unit_of_root[root] = static_cast<int32_t>(a.units.size());
      a.units.emplace_back();
    }
    a.unit_of_color[c] = unit_of_root[root];
    a.units[unit_of_root[root]].push_back(c);
  }
  for (int32_t c = 0; c < n; ++c) {
    int32_t root = uf.Find(c);
    if (dissolve[root] && c == root) {
      a.warnings.push_back(absl::StrCat(
          "mirrored colors of color ", c,
          " share a tensor; argument mirroring dropped for them"));
    }
  }
  (void)module;
}

}  // namespace

absl::StatusOr<ProgramAnalysis> AnalyzeProgram(const Module& module,
                                               const AnalysisOptions& options) {
  ProgramAnalysis a;
  a.raw = Analyze(module);
  a.io = Quotient(a.raw, QuotientMode::kIOnly);
  a.full = Quotient(a.raw, QuotientMode::kIAndM);
  a.graph = BuildDimensionGraph(a.raw, a.io);
  a.graph.conflicts = FindConflicts(a.graph, a.raw);

  CompatResult compat = CompatibilitySets(a.graph);
  a.sets = std::move(compat.sets);
  for (std::string& w : compat.warnings) a.warnings.push_back(std::move(w));

  GroupResult grouped = GroupIsomorphicSets(a.sets, a.graph, a.raw, module);
  for (std::string& w : grouped.warnings) a.warnings.push_back(std::move(w));
  if (options.group_sets) {
    a.groups = std::move(grouped.groups);
  } else {
    for (size_t s = 0; s < a.sets.size(); ++s) {
      a.groups.push_back(SetGroup{{static_cast<int32_t>(s)}, ""});
    }
  }
  a.group_of_set.assign(a.sets.size(), -1);
  for (size_t g = 0; g < a.groups.size(); ++g) {
    for (int32_t s : a.groups[g].sets) a.group_of_set[s] = static_cast<int32_t>(g);
  }
  a.conflict_slot.assign(a.graph.conflicts.size(), {-1, -1});
  for (size_t s = 0; s < a.sets.size(); ++s) {
    for (size_t k = 0; k < a.sets[s].members.size(); ++k) {
      a.conflict_slot[a.sets[s].members[k]] = {static_cast<int32_t>(s),
                                               static_cast<int32_t>(k)};
    }
  }

  if (!options.arg_group_names.empty()) {
    absl::StatusOr<ArgGroups> hinted =
        ArgGroupsFromNames(module, options.arg_group_names);
    if (!hinted.ok()) return hinted.status();
    a.args = *std::move(hinted);
  } else if (options.group_args) {
    a.args = GroupArguments(module, a.raw);
  } else {
    std::vector<std::string> keys;
    for (size_t p = 0; p < module.params().size(); ++p) {
      keys.push_back(absl::StrCat(p));
    }
    a.args = PartitionByKey(std::move(keys));
  }
  BuildUnits(a, module);
  return a;
}

}  // namespace autoshard
