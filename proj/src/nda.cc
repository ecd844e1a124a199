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

#include "autoshard/nda.h"

#include "absl/strings/str_cat.h"
#include "autoshard/union_find.h"

namespace autoshard {
namespace {

class Analyzer {
 public:
  explicit Analyzer(const Module& module) : module_(module) {
    raw_.def_site.assign(module.num_values(), -1);
    raw_.uses.assign(module.num_values(), {});
  }

  NdaRaw Run() && {
    for (size_t p = 0; p < module_.params().size(); ++p) {
      ValueId v = static_cast<ValueId>(p);
      raw_.def_site[v] =
          NewSite(Site{SiteKind::kParamDef, static_cast<int32_t>(p), -1, v});
    }
    for (size_t b = 0; b < module_.bindings().size(); ++b) {
      AnalyzeBinding(static_cast<int32_t>(b));
    }
    raw_.return_site = Use(Site{SiteKind::kReturnUse, -1, -1,
                                module_.result_value()});
    return std::move(raw_);
  }

 private:
  // Allocates fresh names for every dimension of the tensor at `site`.
  SiteId NewSite(Site site) {
    SiteId id = static_cast<SiteId>(raw_.sites.size());
    const Shape& shape = module_.ValueShape(site.value);
    std::vector<DimId> names;
    for (int32_t i = 0; i < shape.rank(); ++i) {
      DimId d = raw_.num_names();
      raw_.origin.push_back(DimRef{id, i});
      raw_.extent.push_back(shape.dims[i]);
      names.push_back(d);
    }
    raw_.sites.push_back(site);
    raw_.names.push_back(std::move(names));
    return id;
  }

  // The (variable use) rule: fresh names plus M edges from the definition.
  SiteId Use(Site site) {
    SiteId id = NewSite(site);
    const std::vector<DimId>& def = raw_.names[raw_.def_site[site.value]];
    const std::vector<DimId>& use = raw_.names[id];
    for (size_t i = 0; i < def.size(); ++i) {
      raw_.m_edges.emplace_back(def[i], use[i]);
    }
    raw_.uses[site.value].push_back(id);
    return id;
  }

  void Identify(DimId a, DimId b) { raw_.identities.emplace_back(a, b); }

  void AnalyzeBinding(int32_t b) {
    const Binding& binding = module_.bindings()[b];
    std::vector<SiteId> operands;
    for (size_t i = 0; i < binding.operands.size(); ++i) {
      ValueId v = *module_.Lookup(binding.operands[i]);
      operands.push_back(
          Use(Site{SiteKind::kOperandUse, b, static_cast<int32_t>(i), v}));
    }
    ValueId self = module_.ValueOfBinding(b);
    SiteId result = NewSite(Site{SiteKind::kBindingResult, b, -1, self});
    raw_.def_site[self] = result;
    raw_.operand_sites.push_back(operands);
    raw_.result_site.push_back(result);

    const std::vector<DimId>& a = raw_.names[result];
    const std::vector<DimId>& d = raw_.names[operands[0]];
    const OpKind& op = binding.op;

    if (std::holds_alternative<MatmulOp>(op)) {
      const std::vector<DimId>& c = raw_.names[operands[1]];
      Identify(a[0], d[0]);
      Identify(a[1], c[1]);
      Identify(d[1], c[0]);
    } else if (const auto* t = std::get_if<TransposeOp>(&op)) {
      for (size_t i = 0; i < a.size(); ++i) {
        size_t src = i;
        if (static_cast<int64_t>(i) == t->lhs) src = t->rhs;
        else if (static_cast<int64_t>(i) == t->rhs) src = t->lhs;
        Identify(a[i], d[src]);
      }
    } else if (const auto* r = std::get_if<ReduceOp>(&op)) {
      // The reduced name joins no identity.
      for (size_t i = 0; i < a.size(); ++i) {
        Identify(a[i], d[static_cast<int64_t>(i) < r->dim ? i : i + 1]);
      }
    } else if (const auto* bc = std::get_if<BroadcastOp>(&op)) {
      // The inserted name is unconstrained.
      for (size_t i = 0; i < a.size(); ++i) {
        if (static_cast<int64_t>(i) == bc->dim) continue;
        Identify(a[i], d[static_cast<int64_t>(i) < bc->dim ? i : i - 1]);
      }
    } else if (std::holds_alternative<BinaryOp>(op)) {
      const std::vector<DimId>& c = raw_.names[operands[1]];
      for (size_t i = 0; i < a.size(); ++i) {
        Identify(a[i], d[i]);
        Identify(a[i], c[i]);
      }
    } else {
      for (size_t i = 0; i < a.size(); ++i) Identify(a[i], d[i]);
    }
  }

  const Module& module_;
  NdaRaw raw_;
};

}  // namespace

std::vector<SiteId> NdaRaw::SitesOfBinding(int32_t b) const {
  std::vector<SiteId> out = operand_sites[b];
  out.push_back(result_site[b]);
  return out;
}

std::string NdaRaw::SiteName(const Module& module, SiteId s) const {
  const Site& site = sites[s];
  switch (site.kind) {
    case SiteKind::kParamDef:
    case SiteKind::kBindingResult:
      return module.ValueName(site.value);
    case SiteKind::kOperandUse:
      return absl::StrCat(module.bindings()[site.index].var, ".in",
                          site.operand);
    case SiteKind::kReturnUse:
      return "return";
  }
  return "?";
}

std::string NdaRaw::DimName(const Module& module, DimId d) const {
  return absl::StrCat(SiteName(module, origin[d].site), "#", origin[d].index);
}

NdaRaw Analyze(const Module& module) { return Analyzer(module).Run(); }

ColorAssignment Quotient(const NdaRaw& raw, QuotientMode mode) {
  UnionFind uf(raw.num_names());
  for (const auto& [a, b] : raw.identities) uf.Union(a, b);
  if (mode == QuotientMode::kIAndM) {
    for (const auto& [a, b] : raw.m_edges) uf.Union(a, b);
  }
  ColorAssignment out;
  out.mode = mode;
  out.color_of.assign(raw.num_names(), -1);
  std::vector<int32_t> color_of_rep(raw.num_names(), -1);
  for (DimId d = 0; d < raw.num_names(); ++d) {
    int32_t rep = uf.Find(d);
    if (color_of_rep[rep] < 0) {
      color_of_rep[rep] = out.num_colors();
      out.colors.emplace_back();
    }
    out.color_of[d] = color_of_rep[rep];
    out.colors[color_of_rep[rep]].push_back(d);
  }
  return out;
}

absl::string_view QuotientModeName(QuotientMode mode) {
  return mode == QuotientMode::kIOnly ? "i_only" : "i_and_m";
}

}  // namespace autoshard
