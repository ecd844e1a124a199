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

#include "autoshard/lowering.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "autoshard/ir_text.h"

namespace autoshard {

absl::string_view CollectiveName(CollectiveKind kind) {
  switch (kind) {
    case CollectiveKind::kAllGather:
      return "all_gather";
    case CollectiveKind::kAllReduce:
      return "all_reduce";
    case CollectiveKind::kReduceScatter:
      return "reduce_scatter";
    case CollectiveKind::kAllToAll:
      return "all_to_all";
  }
  return "?";
}

Layout EmptyLayout(int64_t rank) { return Layout(rank); }

std::string LayoutToString(const Shape& shape, const Layout& layout) {
  std::vector<std::string> dims;
  for (int64_t i = 0; i < shape.rank(); ++i) {
    std::string d = absl::StrCat(shape.dims[i]);
    if (i < static_cast<int64_t>(layout.size()) && !layout[i].empty()) {
      absl::StrAppend(&d, "{", absl::StrJoin(layout[i], ","), "}");
    }
    dims.push_back(std::move(d));
  }
  return absl::StrCat("[", absl::StrJoin(dims, ","), "]");
}

std::vector<const LoweredOp*> ShardedModule::Collectives() const {
  std::vector<const LoweredOp*> out;
  for (const LoweredOp& op : program) {
    if (op.is_collective) out.push_back(&op);
  }
  return out;
}

int ShardedModule::CountCollectives(CollectiveKind kind) const {
  int n = 0;
  for (const LoweredOp& op : program) {
    if (op.is_collective && op.kind == kind) ++n;
  }
  return n;
}

namespace {

int64_t AxesProduct(const std::vector<std::string>& axes, const Mesh& mesh) {
  int64_t p = 1;
  for (const std::string& a : axes) p *= mesh.AxisSize(a).value_or(1);
  return p;
}

}  // namespace

Shape LocalShape(const Shape& global, const Layout& layout, const Mesh& mesh) {
  Shape local = global;
  for (int64_t i = 0; i < global.rank(); ++i) {
    if (i < static_cast<int64_t>(layout.size())) {
      local.dims[i] /= AxesProduct(layout[i], mesh);
    }
  }
  return local;
}

absl::Status ValidateState(const ShardingState& state,
                           const ProgramAnalysis& analysis, const Mesh& mesh) {
  std::map<std::string, int32_t> color_of_axis;
  for (const auto& [color, axes] : state.axes_of) {
    if (color < 0 || color >= analysis.full.num_colors()) {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown color ", color));
    }
    if (axes.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("color ", color, " has an empty axis list"));
    }
    std::set<std::string> seen;
    for (const std::string& axis : axes) {
      if (!mesh.AxisSize(axis).has_value()) {
        return absl::InvalidArgumentError(
            absl::StrCat("axis ", axis, " is not in mesh ", mesh.ToString()));
      }
      if (!seen.insert(axis).second) {
        return absl::InvalidArgumentError(
            absl::StrCat("axis ", axis, " repeated on color ", color));
      }
      auto [it, inserted] = color_of_axis.emplace(axis, color);
      if (!inserted && analysis.unit_of_color[it->second] !=
                           analysis.unit_of_color[color]) {
        return absl::InvalidArgumentError(
            absl::StrCat("axis ", axis, " shards both color ", it->second,
                         " and color ", color));
      }
    }
    int64_t p = AxesProduct(axes, mesh);
    for (DimId d : analysis.full.colors[color]) {
      if (analysis.raw.extent[d] % p != 0) {
        return absl::InvalidArgumentError(absl::StrCat(
            "color ", color, ": extent ", analysis.raw.extent[d],
            " is not divisible by ", p));
      }
    }
  }
  for (const auto& [group, bit] : state.resolution_bits) {
    if (group < 0 || group >= static_cast<int32_t>(analysis.groups.size())) {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown resolution group ", group));
    }
    if (bit != 0 && bit != 1) {
      return absl::InvalidArgumentError(
          absl::StrCat("resolution bit of group ", group, " must be 0 or 1"));
    }
  }
  return absl::OkStatus();
}

namespace {

class Lowerer {
 public:
  Lowerer(const Module& module, const ProgramAnalysis& analysis,
          const ShardingState& state, const Mesh& mesh)
      : module_(module),
        a_(analysis),
        state_(state),
        mesh_(mesh),
        sm_(module) {}

  absl::StatusOr<ShardedModule> Run() && {
    if (absl::Status s = ValidateState(state_, a_, mesh_); !s.ok()) return s;
    if (absl::Status s = ComputeLosers(); !s.ok()) return s;
    ComputeDesired();
    ComputeIntended();
    for (const Param& p : module_.params()) used_.insert(p.name);
    for (const Binding& b : module_.bindings()) used_.insert(b.var);

    const NdaRaw& raw = a_.raw;
    sm_.site_layouts.assign(raw.sites.size(), {});
    value_var_.assign(module_.num_values(), "");
    value_layout_.assign(module_.num_values(), {});
    for (size_t p = 0; p < module_.params().size(); ++p) {
      SiteId s = raw.def_site[p];
      Define(static_cast<ValueId>(p), module_.params()[p].name, desired_[s]);
      sm_.param_layouts.push_back(desired_[s]);
      sm_.site_layouts[s] = desired_[s];
    }
    for (size_t b = 0; b < module_.bindings().size(); ++b) {
      if (absl::Status s = LowerBinding(static_cast<int32_t>(b)); !s.ok()) {
        return s;
      }
    }
    // The result is handed back in the layout it was computed in.
    ValueId result = module_.result_value();
    sm_.result = value_var_[result];
    sm_.result_layout = value_layout_[result];
    sm_.site_layouts[raw.return_site] = sm_.result_layout;
    return std::move(sm_);
  }

 private:
  const std::vector<std::string>& AxesOfNode(NodeId n) const {
    static const std::vector<std::string> kNone;
    auto it = state_.axes_of.find(a_.graph.component[n]);
    return it == state_.axes_of.end() ? kNone : it->second;
  }

  NodeId NodeAt(SiteId s, size_t i) const {
    return a_.graph.node_of[a_.raw.names[s][i]];
  }

  absl::Status ComputeLosers() {
    const std::vector<ConflictEdge>& cs = a_.graph.conflicts;
    loser_.assign(cs.size(), -1);
    for (size_t c = 0; c < cs.size(); ++c) {
      conflict_of_pair_[std::minmax(cs[c].a, cs[c].b)] = static_cast<int32_t>(c);
      if (AxesOfNode(cs[c].a).empty()) continue;
      auto [set, k] = a_.conflict_slot[c];
      int32_t group = a_.group_of_set[set];
      auto it = state_.resolution_bits.find(group);
      if (it == state_.resolution_bits.end()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "missing resolution bit for group ", group, " (color ",
            a_.graph.component[cs[c].a], " is sharded)"));
      }
      loser_[c] = a_.sets[set].Loser(cs, k, it->second);
    }
    return absl::OkStatus();
  }

  // Layout every site would have if nothing forced a deviation.
  void ComputeDesired() {
    const NdaRaw& raw = a_.raw;
    desired_.assign(raw.sites.size(), {});
    for (SiteId s = 0; s < static_cast<SiteId>(raw.sites.size()); ++s) {
      const size_t rank = raw.names[s].size();
      desired_[s].assign(rank, {});
      for (size_t i = 0; i < rank; ++i) {
        NodeId n = NodeAt(s, i);
        if (AxesOfNode(n).empty()) continue;
        bool keep = true;
        for (size_t j = 0; j < rank && keep; ++j) {
          if (j == i) continue;
          NodeId m = NodeAt(s, j);
          if (m == n) {
            keep = false;
          } else if (a_.graph.component[m] == a_.graph.component[n]) {
            auto it = conflict_of_pair_.find(std::minmax(n, m));
            if (it != conflict_of_pair_.end() && loser_[it->second] == n) {
              keep = false;
            }
          }
        }
        if (keep) desired_[s][i] = AxesOfNode(n);
      }
    }
  }

  // A node is intended to be sharded within a binding when every one of its
  // occurrences at the binding's sites is.
  void ComputeIntended() {
    const NdaRaw& raw = a_.raw;
    intended_.assign(module_.bindings().size(), {});
    for (size_t b = 0; b < module_.bindings().size(); ++b) {
      std::map<NodeId, bool>& in = intended_[b];
      for (SiteId s : raw.SitesOfBinding(static_cast<int32_t>(b))) {
        for (size_t i = 0; i < raw.names[s].size(); ++i) {
          NodeId n = NodeAt(s, i);
          bool want = !desired_[s][i].empty();
          auto [it, inserted] = in.emplace(n, want);
          if (!inserted) it->second = it->second && want;
        }
      }
    }
  }

  // Whether some use of `v` intends to consume `axes` on dimension `dim`.
  bool UseIntends(ValueId v, size_t dim,
                  const std::vector<std::string>& axes) const {
    for (SiteId u : a_.raw.uses[v]) {
      const Site& site = a_.raw.sites[u];
      if (site.kind == SiteKind::kReturnUse) {
        if (desired_[u][dim] == axes) return true;
        continue;
      }
      NodeId n = NodeAt(u, dim);
      if (intended_[site.index].at(n) && AxesOfNode(n) == axes) return true;
    }
    return false;
  }

  // True when the current layout of `v` holds `axes` on some dimension, so a
  // use can obtain them without slicing locally.
  bool Available(ValueId v, const std::vector<std::string>& axes) const {
    for (const std::vector<std::string>& d : value_layout_[v]) {
      if (d == axes) return true;
    }
    return false;
  }

  std::string Fresh(const std::string& base) {
    std::string name = absl::StrCat(base, "_");
    for (int k = 1; used_.count(name) > 0; ++k) {
      name = absl::StrCat(base, "_", k);
    }
    used_.insert(name);
    return name;
  }

  void Define(ValueId v, const std::string& var, const Layout& layout) {
    value_var_[v] = var;
    value_layout_[v] = layout;
    converted_[{v, layout}] = var;
  }

  void Emit(LoweredOp op) { sm_.program.push_back(std::move(op)); }

  // Brings value `v` into `target` layout, reusing earlier conversions.
  absl::StatusOr<std::string> Convert(ValueId v, const Layout& target) {
    auto hit = converted_.find({v, target});
    if (hit != converted_.end()) return hit->second;

    const Shape& shape = module_.ValueShape(v);
    const std::string& name = module_.ValueName(v);
    std::string var = value_var_[v];
    Layout cur = value_layout_[v];
    const size_t rank = cur.size();

    std::vector<std::vector<std::string>> gather(rank);
    std::map<std::pair<int32_t, int32_t>, std::vector<std::string>> moves;
    for (size_t i = 0; i < rank; ++i) {
      for (const std::string& axis : cur[i]) {
        if (std::find(target[i].begin(), target[i].end(), axis) !=
            target[i].end()) {
          continue;
        }
        int32_t dst = -1;
        for (size_t j = 0; j < rank; ++j) {
          if (std::find(target[j].begin(), target[j].end(), axis) !=
              target[j].end()) {
            dst = static_cast<int32_t>(j);
          }
        }
        if (dst < 0) {
          gather[i].push_back(axis);
        } else {
          moves[{static_cast<int32_t>(i), dst}].push_back(axis);
        }
      }
    }
    auto remove = [](std::vector<std::string>& from,
                     const std::vector<std::string>& axes) {
      std::erase_if(from, [&](const std::string& x) {
        return std::find(axes.begin(), axes.end(), x) != axes.end();
      });
    };
    for (size_t i = 0; i < rank; ++i) {
      if (gather[i].empty()) continue;
      LoweredOp op;
      op.var = Fresh(name);
      op.shape = shape;
      remove(cur[i], gather[i]);
      op.layout = cur;
      op.is_collective = true;
      op.kind = CollectiveKind::kAllGather;
      op.axes = gather[i];
      op.subject = var;
      op.src_dim = static_cast<int32_t>(i);
      var = op.var;
      Emit(std::move(op));
    }
    for (const auto& [dims, axes] : moves) {
      LoweredOp op;
      op.var = Fresh(name);
      op.shape = shape;
      remove(cur[dims.first], axes);
      for (const std::string& x : axes) cur[dims.second].push_back(x);
      op.layout = cur;
      op.is_collective = true;
      op.kind = CollectiveKind::kAllToAll;
      op.axes = axes;
      op.subject = var;
      op.src_dim = dims.first;
      op.dst_dim = dims.second;
      var = op.var;
      Emit(std::move(op));
    }
    if (cur != target) {
      return absl::InternalError(absl::StrCat(
          "cannot bring ", name, " from ",
          LayoutToString(shape, value_layout_[v]), " to ",
          LayoutToString(shape, target)));
    }
    converted_[{v, target}] = var;
    return var;
  }

  absl::Status LowerBinding(int32_t b) {
    const NdaRaw& raw = a_.raw;
    const Binding& binding = module_.bindings()[b];
    const std::vector<SiteId>& operand_sites = raw.operand_sites[b];
    const SiteId result_site = raw.result_site[b];

    std::map<NodeId, bool> active = intended_[b];
    for (size_t k = 0; k < operand_sites.size(); ++k) {
      SiteId s = operand_sites[k];
      ValueId v = raw.sites[s].value;
      for (size_t i = 0; i < raw.names[s].size(); ++i) {
        NodeId n = NodeAt(s, i);
        if (active[n] && !Available(v, AxesOfNode(n))) active[n] = false;
      }
    }
    auto layout_at = [&](SiteId s) {
      Layout l(raw.names[s].size());
      for (size_t i = 0; i < l.size(); ++i) {
        NodeId n = NodeAt(s, i);
        if (active[n]) l[i] = AxesOfNode(n);
      }
      return l;
    };

    LoweredOp op;
    op.binding = b;
    op.shape = binding.result_shape;
    for (size_t k = 0; k < operand_sites.size(); ++k) {
      SiteId s = operand_sites[k];
      Layout want = layout_at(s);
      absl::StatusOr<std::string> var = Convert(raw.sites[s].value, want);
      if (!var.ok()) return var.status();
      op.operands.push_back(*var);
      sm_.site_layouts[s] = std::move(want);
    }
    op.layout = layout_at(result_site);

    ReduceCombiner combiner = ReduceCombiner::kAdd;
    NodeId contracted = -1;
    if (std::holds_alternative<MatmulOp>(binding.op)) {
      contracted = NodeAt(operand_sites[0], 1);
    } else if (const auto* r = std::get_if<ReduceOp>(&binding.op)) {
      contracted = NodeAt(operand_sites[0], r->dim);
      combiner = r->combiner;
    }
    if (contracted >= 0 && active[contracted]) {
      op.partial_axes = AxesOfNode(contracted);
    }

    ValueId self = module_.ValueOfBinding(b);
    if (op.partial_axes.empty()) {
      op.var = binding.var;
      Layout final_layout = op.layout;
      Emit(std::move(op));
      Define(self, binding.var, final_layout);
      sm_.site_layouts[result_site] = final_layout;
      return absl::OkStatus();
    }

    std::vector<std::string> partial = op.partial_axes;
    Layout computed = op.layout;
    op.var = Fresh(binding.var);
    std::string partial_var = op.var;
    Emit(std::move(op));

    LoweredOp coll;
    coll.var = binding.var;
    coll.shape = binding.result_shape;
    coll.is_collective = true;
    coll.axes = partial;
    coll.subject = partial_var;
    coll.combiner = combiner;
    coll.kind = CollectiveKind::kAllReduce;
    coll.layout = computed;
    for (size_t i = 0; i < computed.size(); ++i) {
      if (desired_[result_site][i] == partial && computed[i].empty() &&
          UseIntends(self, i, partial)) {
        coll.kind = CollectiveKind::kReduceScatter;
        coll.dst_dim = static_cast<int32_t>(i);
        coll.layout[i] = partial;
        break;
      }
    }
    Layout final_layout = coll.layout;
    Emit(std::move(coll));
    Define(self, binding.var, final_layout);
    sm_.site_layouts[result_site] = final_layout;
    return absl::OkStatus();
  }

  const Module& module_;
  const ProgramAnalysis& a_;
  const ShardingState& state_;
  const Mesh& mesh_;
  ShardedModule sm_;

  std::map<std::pair<NodeId, NodeId>, int32_t> conflict_of_pair_;
  std::vector<NodeId> loser_;
  std::vector<Layout> desired_;
  std::vector<std::map<NodeId, bool>> intended_;
  std::set<std::string> used_;
  std::vector<std::string> value_var_;
  std::vector<Layout> value_layout_;
  std::map<std::pair<ValueId, Layout>, std::string> converted_;
};

}  // namespace

absl::StatusOr<ShardedModule> Apply(const Module& module,
                                    const ProgramAnalysis& analysis,
                                    const ShardingState& state,
                                    const Mesh& mesh) {
  return Lowerer(module, analysis, state, mesh).Run();
}

namespace {

void CheckTensor(const std::string& var, const Shape& shape,
                 const Layout& layout, const Mesh& mesh,
                 std::vector<std::string>& errors) {
  if (static_cast<int64_t>(layout.size()) != shape.rank()) {
    errors.push_back(absl::StrCat(var, ": layout rank ", layout.size(),
                                  " differs from tensor rank ", shape.rank()));
    return;
  }
  std::map<std::string, int64_t> dim_of_axis;
  for (int64_t i = 0; i < shape.rank(); ++i) {
    for (const std::string& axis : layout[i]) {
      if (!mesh.AxisSize(axis).has_value()) {
        errors.push_back(absl::StrCat(var, ": axis ", axis, " on dim ", i,
                                      " is not in the mesh"));
        continue;
      }
      auto [it, inserted] = dim_of_axis.emplace(axis, i);
      if (!inserted) {
        errors.push_back(absl::StrCat(var, ": axis ", axis, " shards dims ",
                                      it->second, " and ", i));
      }
    }
    int64_t p = AxesProduct(layout[i], mesh);
    if (shape.dims[i] % p != 0) {
      errors.push_back(absl::StrCat(var, ": dim ", i, " of extent ",
                                    shape.dims[i], " is not divisible by ", p));
    }
  }
}

}  // namespace

std::vector<std::string> Validate(const ShardedModule& sm, const Mesh& mesh) {
  std::vector<std::string> errors;
  const Module& m = sm.base;
  if (sm.param_layouts.size() != m.params().size()) {
    errors.push_back("parameter layouts do not match the parameter list");
    return errors;
  }
  for (size_t p = 0; p < m.params().size(); ++p) {
    CheckTensor(m.params()[p].name, m.params()[p].shape, sm.param_layouts[p],
                mesh, errors);
  }
  for (const LoweredOp& op : sm.program) {
    CheckTensor(op.var, op.shape, op.layout, mesh, errors);
    if (op.is_collective && op.axes.empty()) {
      errors.push_back(absl::StrCat(op.var, ": ", CollectiveName(op.kind),
                                    " over an empty axis set"));
    }
  }
  return errors;
}

namespace {

struct Region {
  std::vector<int64_t> offset;
  std::vector<int64_t> length;
};

class DeviceSim {
 public:
  explicit DeviceSim(const Mesh& mesh) : mesh_(mesh) {
    const auto& axes = mesh.axes();
    int64_t n = mesh.num_devices();
    coords_.assign(n, std::vector<int64_t>(axes.size(), 0));
    for (int64_t d = 0; d < n; ++d) {
      int64_t rest = d;
      for (int64_t k = static_cast<int64_t>(axes.size()) - 1; k >= 0; --k) {
        coords_[d][k] = rest % axes[k].size;
        rest /= axes[k].size;
      }
    }
  }

  int64_t num_devices() const { return static_cast<int64_t>(coords_.size()); }

  Region RegionOf(const Shape& shape, const Layout& layout, int64_t d) const {
    Region r;
    for (int64_t i = 0; i < shape.rank(); ++i) {
      int64_t index = 0, parts = 1;
      for (const std::string& axis : layout[i]) {
        int k = *mesh_.AxisIndex(axis);
        index = index * mesh_.axes()[k].size + coords_[d][k];
        parts *= mesh_.axes()[k].size;
      }
      int64_t len = shape.dims[i] / parts;
      r.offset.push_back(index * len);
      r.length.push_back(len);
    }
    return r;
  }

  // Devices that differ from `d` only along `axes`, ascending.
  std::vector<int64_t> Group(int64_t d,
                             const std::vector<std::string>& axes) const {
    std::vector<int> free;
    for (const std::string& a : axes) free.push_back(*mesh_.AxisIndex(a));
    std::vector<int64_t> out;
    for (int64_t e = 0; e < num_devices(); ++e) {
      bool same = true;
      for (size_t k = 0; k < coords_[d].size() && same; ++k) {
        if (std::find(free.begin(), free.end(), static_cast<int>(k)) !=
            free.end()) {
          continue;
        }
        same = coords_[d][k] == coords_[e][k];
      }
      if (same) out.push_back(e);
    }
    return out;
  }

 private:
  const Mesh& mesh_;
  std::vector<std::vector<int64_t>> coords_;
};

void ForEachIndex(const std::vector<int64_t>& lengths,
                  const std::function<void(const std::vector<int64_t>&)>& fn) {
  for (int64_t l : lengths) {
    if (l <= 0) return;
  }
  std::vector<int64_t> idx(lengths.size(), 0);
  while (true) {
    fn(idx);
    int64_t k = static_cast<int64_t>(idx.size()) - 1;
    while (k >= 0 && ++idx[k] == lengths[k]) {
      idx[k] = 0;
      --k;
    }
    if (k < 0) return;
  }
}

// Copies the overlap of `src` (holding region `rs`) into `dst` (holding
// region `rd`), marking covered elements in `covered`.
void CopyOverlap(const Tensor& src, const Region& rs, Tensor& dst,
                 const Region& rd, std::vector<bool>& covered) {
  const size_t rank = rs.offset.size();
  std::vector<int64_t> lo(rank), len(rank);
  for (size_t i = 0; i < rank; ++i) {
    lo[i] = std::max(rs.offset[i], rd.offset[i]);
    int64_t hi = std::min(rs.offset[i] + rs.length[i],
                          rd.offset[i] + rd.length[i]);
    len[i] = hi - lo[i];
  }
  std::vector<int64_t> si(rank), di(rank);
  ForEachIndex(len, [&](const std::vector<int64_t>& k) {
    int64_t flat = 0;
    for (size_t i = 0; i < rank; ++i) {
      si[i] = lo[i] + k[i] - rs.offset[i];
      di[i] = lo[i] + k[i] - rd.offset[i];
      flat = flat * rd.length[i] + di[i];
    }
    dst.at(di) = src.at(si);
    covered[flat] = true;
  });
}

Tensor Extract(const Tensor& src, const Region& rs, const Region& rd) {
  Tensor out(rd.length);
  std::vector<bool> covered(out.size(), false);
  CopyOverlap(src, rs, out, rd, covered);
  return out;
}

}  // namespace

absl::StatusOr<Tensor> InterpretSharded(const ShardedModule& sm,
                                        const Mesh& mesh,
                                        const TensorMap& inputs) {
  std::vector<std::string> errors = Validate(sm, mesh);
  if (!errors.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("invalid sharded module: ", absl::StrJoin(errors, "; ")));
  }
  const Module& m = sm.base;
  DeviceSim sim(mesh);
  const int64_t n = sim.num_devices();
  struct Value {
    Shape shape;
    Layout layout;
    std::vector<Tensor> local;
  };
  std::map<std::string, Value> env;

  for (size_t p = 0; p < m.params().size(); ++p) {
    const Param& param = m.params()[p];
    auto it = inputs.find(param.name);
    if (it == inputs.end()) {
      return absl::InvalidArgumentError(
          absl::StrCat("missing input for parameter ", param.name));
    }
    if (it->second.dims() != param.shape.dims) {
      return absl::InvalidArgumentError(absl::StrCat(
          "input ", param.name, " has shape [",
          absl::StrJoin(it->second.dims(), ","), "], expected ",
          param.shape.ToString()));
    }
    Value v{param.shape, sm.param_layouts[p], {}};
    Region whole{std::vector<int64_t>(param.shape.rank(), 0), param.shape.dims};
    for (int64_t d = 0; d < n; ++d) {
      v.local.push_back(
          Extract(it->second, whole, sim.RegionOf(v.shape, v.layout, d)));
    }
    env.emplace(param.name, std::move(v));
  }

  for (const LoweredOp& op : sm.program) {
    Value out{op.shape, op.layout, {}};
    const Shape local_shape = LocalShape(op.shape, op.layout, mesh);
    if (!op.is_collective) {
      const Binding& binding = m.bindings()[op.binding];
      int64_t extent = -1;
      if (const auto* bc = std::get_if<BroadcastOp>(&binding.op)) {
        extent = local_shape.dims[bc->dim];
      }
      for (int64_t d = 0; d < n; ++d) {
        std::vector<const Tensor*> args;
        for (const std::string& o : op.operands) {
          args.push_back(&env.at(o).local[d]);
        }
        out.local.push_back(EvaluateOp(binding.op, args, extent));
      }
    } else {
      const Value& in = env.at(op.subject);
      for (int64_t d = 0; d < n; ++d) {
        std::vector<int64_t> group = sim.Group(d, op.axes);
        Region rd = sim.RegionOf(op.shape, op.layout, d);
        if (op.kind == CollectiveKind::kAllReduce ||
            op.kind == CollectiveKind::kReduceScatter) {
          Tensor acc = in.local[group[0]];
          for (size_t g = 1; g < group.size(); ++g) {
            acc = kernels::Combine(op.combiner, acc, in.local[group[g]]);
          }
          out.local.push_back(
              Extract(acc, sim.RegionOf(in.shape, in.layout, d), rd));
        } else {
          Tensor t(rd.length);
          std::vector<bool> covered(t.size(), false);
          for (int64_t e : group) {
            CopyOverlap(in.local[e], sim.RegionOf(in.shape, in.layout, e), t,
                        rd, covered);
          }
          if (std::find(covered.begin(), covered.end(), false) !=
              covered.end()) {
            return absl::InternalError(absl::StrCat(
                CollectiveName(op.kind), " defining ", op.var,
                " does not cover its output region"));
          }
          out.local.push_back(std::move(t));
        }
      }
    }
    for (int64_t d = 0; d < n; ++d) {
      if (out.local[d].dims() != local_shape.dims) {
        return absl::InternalError(absl::StrCat(
            "shape divergence at ", op.var, ": device ", d, " computed [",
            absl::StrJoin(out.local[d].dims(), ","), "], expected ",
            local_shape.ToString()));
      }
    }
    env.insert_or_assign(op.var, std::move(out));
  }

  const Value& result = env.at(sm.result);
  Region whole{std::vector<int64_t>(result.shape.rank(), 0),
               result.shape.dims};
  Tensor global(result.shape.dims);
  std::vector<bool> covered(global.size(), false);
  for (int64_t d = 0; d < n; ++d) {
    Region r = sim.RegionOf(result.shape, result.layout, d);
    // Replicas must agree with what is already assembled.
    Tensor seen = Extract(global, whole, r);
    std::vector<bool> had(seen.size(), false);
    {
      Tensor mask_src(result.shape.dims);
      for (int64_t k = 0; k < mask_src.size(); ++k) {
        mask_src.data()[k] = covered[k] ? 1.0 : 0.0;
      }
      Tensor mask = Extract(mask_src, whole, r);
      for (int64_t k = 0; k < mask.size(); ++k) had[k] = mask.data()[k] != 0;
    }
    for (int64_t k = 0; k < seen.size(); ++k) {
      if (!had[k]) continue;
      double x = seen.data()[k], y = result.local[d].data()[k];
      if (std::abs(x - y) > 1e-9 * std::max(1.0, std::abs(x))) {
        return absl::InternalError(absl::StrCat(
            "replicas of ", sm.result, " disagree on device ", d));
      }
    }
    CopyOverlap(result.local[d], r, global, whole, covered);
  }
  return global;
}

std::string PrintShardedModule(const ShardedModule& sm) {
  const Module& m = sm.base;
  std::vector<std::string> params;
  for (size_t p = 0; p < m.params().size(); ++p) {
    const Param& param = m.params()[p];
    params.push_back(absl::StrCat(param.name, ": ", DtypeName(m.elem_bytes()),
                                  LayoutToString(param.shape,
                                                 sm.param_layouts[p])));
  }
  std::string out = absl::StrCat("def ", m.name(), "(",
                                 absl::StrJoin(params, ", "), ") {\n");
  for (const LoweredOp& op : sm.program) {
    absl::StrAppend(&out, "  ", op.var, ": ", DtypeName(m.elem_bytes()),
                    LayoutToString(op.shape, op.layout), " = ");
    if (op.is_collective) {
      absl::StrAppend(&out, CollectiveName(op.kind));
      if (op.combiner != ReduceCombiner::kAdd) {
        absl::StrAppend(&out, "[", CombinerName(op.combiner), "]");
      }
      absl::StrAppend(&out, " {", absl::StrJoin(op.axes, ","), "} ",
                      op.subject, "\n");
    } else {
      absl::StrAppend(&out, PrintOp(m.bindings()[op.binding].op), "(",
                      absl::StrJoin(op.operands, ", "), ")\n");
    }
  }
  absl::StrAppend(&out, "  return ", sm.result, "\n}\n");
  return out;
}

}  // namespace autoshard
