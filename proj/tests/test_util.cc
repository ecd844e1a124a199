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

#include "tests/test_util.h"

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <map>
#include <set>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "autoshard/ir_text.h"

namespace autoshard::testing {

std::string MlpText() {
  return R"(def mlp(x: f32[256,32], w1: f32[32,64], w2: f32[64,16]) {
  y = matmul(x, w1)
  z = relu(y)
  w = matmul(z, w2)
  return w
}
)";
}

namespace {

std::string AttnBody(const std::string& in, const std::string& sfx,
                     int64_t seq) {
  return absl::StrCat(
      "  k", sfx, " = matmul(", in, ", wk", sfx, ")\n",
      "  v", sfx, " = matmul(", in, ", wv", sfx, ")\n",
      "  q", sfx, " = matmul(", in, ", wq", sfx, ")\n",
      "  qt", sfx, " = transpose[0, 1](q", sfx, ")\n",
      "  a", sfx, " = matmul(k", sfx, ", qt", sfx, ")\n",
      "  b", sfx, " = reduce[0, add](a", sfx, ")\n",
      "  c", sfx, " = broadcast[0, ", seq, "](b", sfx, ")\n",
      "  d", sfx, " = div(a", sfx, ", c", sfx, ")\n",
      "  z", sfx, " = matmul(d", sfx, ", v", sfx, ")\n");
}

}  // namespace

std::string AttnText(int64_t seq, int64_t d, int64_t h1) {
  return absl::StrCat("def attn(x: f32[", seq, ",", d, "], wq: f32[", d, ",",
                      h1, "], wk: f32[", d, ",", h1, "], wv: f32[", d, ",", d,
                      "]) {\n", AttnBody("x", "", seq), "  return z\n}\n");
}

std::string StackedAttnText(int layers, int64_t seq, int64_t d, int64_t h1) {
  std::vector<std::string> params = {absl::StrCat("x: f32[", seq, ",", d, "]")};
  std::string body;
  std::string in = "x";
  for (int l = 0; l < layers; ++l) {
    std::string sfx = absl::StrCat(l);
    params.push_back(absl::StrCat("wq", sfx, ": f32[", d, ",", h1, "]"));
    params.push_back(absl::StrCat("wk", sfx, ": f32[", d, ",", h1, "]"));
    params.push_back(absl::StrCat("wv", sfx, ": f32[", d, ",", d, "]"));
    body += AttnBody(in, sfx, seq);
    in = "z" + sfx;
  }
  return absl::StrCat("def stacked(", absl::StrJoin(params, ", "), ") {\n",
                      body, "  return ", in, "\n}\n");
}

std::string TwoLayerMlpText() {
  return R"(def mlp2(x: f32[256,32], w1a: f32[32,64], w2a: f32[64,32],
         w1b: f32[32,64], w2b: f32[64,32]) {
  ya = matmul(x, w1a)
  za = relu(ya)
  wa = matmul(za, w2a)
  yb = matmul(wa, w1b)
  zb = relu(yb)
  wb = matmul(zb, w2b)
  return wb
}
)";
}

std::string SelfTransposeText() {
  return R"(def f(x: f32[32,16]) {
  y = transpose[0, 1](x)
  z = matmul(x, y)
  return z
}
)";
}

Module ParseOrDie(const std::string& text) {
  absl::StatusOr<Module> m = ParseModule(text);
  if (!m.ok()) {
    std::cerr << "parse failed: " << m.status() << "\n" << text;
    std::abort();
  }
  return *std::move(m);
}

ProgramAnalysis AnalyzeOrDie(const Module& module,
                             const AnalysisOptions& options) {
  absl::StatusOr<ProgramAnalysis> a = AnalyzeProgram(module, options);
  if (!a.ok()) {
    std::cerr << "analysis failed: " << a.status() << "\n";
    std::abort();
  }
  return *std::move(a);
}

namespace {

DimId DefName(const ProgramAnalysis& a, const Module& m,
              const std::string& var, int dim) {
  std::optional<ValueId> v = m.Lookup(var);
  if (!v.has_value()) {
    std::cerr << "no variable " << var << "\n";
    std::abort();
  }
  return a.raw.names[a.raw.def_site[*v]][dim];
}

}  // namespace

int32_t ColorOf(const ProgramAnalysis& a, const Module& m,
                const std::string& var, int dim) {
  return a.full.color_of[DefName(a, m, var, dim)];
}

NodeId NodeOf(const ProgramAnalysis& a, const Module& m,
              const std::string& var, int dim) {
  return a.graph.node_of[DefName(a, m, var, dim)];
}

TensorMap RandomIntInputs(const Module& m, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dist(-3, 3);
  TensorMap out;
  for (const Param& p : m.params()) {
    Tensor t(p.shape.dims);
    for (double& x : t.data()) x = dist(rng);
    out.emplace(p.name, std::move(t));
  }
  return out;
}

TensorMap RandomRealInputs(const Module& m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(0.5, 1.5);
  TensorMap out;
  for (const Param& p : m.params()) {
    Tensor t(p.shape.dims);
    for (double& x : t.data()) x = dist(rng);
    out.emplace(p.name, std::move(t));
  }
  return out;
}

namespace {

using Dims = std::vector<int64_t>;

std::string TypeText(const Dims& dims) {
  return absl::StrCat("f32[", absl::StrJoin(dims, ","), "]");
}

class Generator {
 public:
  Generator(std::mt19937_64& rng, const GenOptions& opt, bool linear)
      : rng_(rng), opt_(opt), linear_(linear) {}

  std::string Run() {
    const int n = Uniform(opt_.min_bindings, opt_.max_bindings);
    current_ = NewParam({Extent(), Extent()});
    for (int i = 0; i < n; ++i) Emit();
    std::vector<std::string> params;
    for (const auto& [name, dims] : params_) {
      params.push_back(absl::StrCat(name, ": ", TypeText(dims)));
    }
    return absl::StrCat("def gen(", absl::StrJoin(params, ", "), ") {\n", body_,
                        "  return ", current_, "\n}\n");
  }

 private:
  int Uniform(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng_);
  }
  int64_t Extent() {
    return opt_.extents[Uniform(0, static_cast<int>(opt_.extents.size()) - 1)];
  }

  std::string NewParam(Dims dims) {
    std::string name = absl::StrCat("p", params_.size());
    params_.push_back({name, dims});
    dims_[name] = std::move(dims);
    values_.push_back(name);
    return name;
  }

  // An operand with the given dims: an existing value when allowed, else a
  // fresh parameter.
  std::string Partner(const Dims& dims) {
    if (!linear_ && Uniform(0, 1) == 0) {
      std::vector<std::string> fits;
      for (const std::string& v : values_) {
        if (dims_[v] == dims) fits.push_back(v);
      }
      if (!fits.empty()) return fits[Uniform(0, fits.size() - 1)];
    }
    return NewParam(dims);
  }

  // The value the next op consumes.
  std::string Subject() {
    if (linear_ || Uniform(0, 2) != 0) return current_;
    return values_[Uniform(0, values_.size() - 1)];
  }

  void Emit() {
    std::string x = Subject();
    Dims xd = dims_[x];
    const int64_t r = static_cast<int64_t>(xd.size());
    std::string var = absl::StrCat("v", counter_++);
    std::string rhs;
    Dims out;
    std::vector<int> choices = {0, 1, 4, 5};
    if (r == 2) choices.push_back(2);
    if (r >= 2) choices.push_back(3);
    if (r <= 2) choices.push_back(6);
    if (r == 2) choices.push_back(0), choices.push_back(0);
    switch (choices[Uniform(0, choices.size() - 1)]) {
      case 0: {
        if (r != 2) {
          // Fall back to an elementwise op.
          rhs = absl::StrCat("neg(", x, ")");
          out = xd;
          break;
        }
        Dims yd = {xd[1], Extent()};
        std::string y = Partner(yd);
        rhs = absl::StrCat("matmul(", x, ", ", y, ")");
        out = {xd[0], yd[1]};
        break;
      }
      case 1: {
        static constexpr const char* kOps[] = {"add", "sub", "mul"};
        std::string y = Partner(xd);
        rhs = absl::StrCat(kOps[Uniform(0, 2)], "(", x, ", ", y, ")");
        out = xd;
        break;
      }
      case 2: {
        rhs = absl::StrCat("transpose[0, 1](", x, ")");
        out = {xd[1], xd[0]};
        break;
      }
      case 3: {
        int64_t d = Uniform(0, r - 1);
        const char* comb = Uniform(0, 1) == 0 ? "add" : "max";
        rhs = absl::StrCat("reduce[", d, ", ", comb, "](", x, ")");
        out = xd;
        out.erase(out.begin() + d);
        break;
      }
      case 4:
      case 5: {
        const char* op = opt_.allow_exp && Uniform(0, 3) == 0 ? "exp"
                         : Uniform(0, 1) == 0               ? "relu"
                                                            : "neg";
        rhs = absl::StrCat(op, "(", x, ")");
        out = xd;
        break;
      }
      case 6: {
        int64_t d = Uniform(0, r);
        int64_t e = Extent();
        rhs = absl::StrCat("broadcast[", d, ", ", e, "](", x, ")");
        out = xd;
        out.insert(out.begin() + d, e);
        break;
      }
    }
    absl::StrAppend(&body_, "  ", var, " = ", rhs, "\n");
    dims_[var] = out;
    values_.push_back(var);
    current_ = var;
  }

  std::mt19937_64& rng_;
  const GenOptions& opt_;
  const bool linear_;
  std::vector<std::pair<std::string, Dims>> params_;
  std::map<std::string, Dims> dims_;
  std::vector<std::string> values_;
  std::string current_;
  std::string body_;
  int counter_ = 0;
};

}  // namespace

std::string RandomModuleText(std::mt19937_64& rng, const GenOptions& opt) {
  return Generator(rng, opt, /*linear=*/false).Run();
}

std::string RandomLinearModuleText(std::mt19937_64& rng,
                                   const GenOptions& opt) {
  return Generator(rng, opt, /*linear=*/true).Run();
}

namespace {

bool Divides(const ProgramAnalysis& a, int32_t color, int64_t p) {
  for (DimId d : a.full.colors[color]) {
    if (a.raw.extent[d] % p != 0) return false;
  }
  return true;
}

int64_t AxesProduct(const Mesh& mesh, const std::vector<std::string>& axes) {
  int64_t p = 1;
  for (const std::string& x : axes) p *= *mesh.AxisSize(x);
  return p;
}

}  // namespace

ShardingState RandomState(const ProgramAnalysis& a, const Mesh& mesh,
                          std::mt19937_64& rng) {
  ShardingState s;
  const int num_units = static_cast<int>(a.units.size());
  std::uniform_int_distribution<int> pick(-1, num_units - 1);
  for (const MeshAxis& axis : mesh.axes()) {
    if (num_units == 0) break;
    int u = pick(rng);
    if (u < 0) continue;
    bool ok = true;
    for (int32_t c : a.units[u]) {
      std::vector<std::string> axes = s.axes_of[c];
      axes.push_back(axis.name);
      if (!Divides(a, c, AxesProduct(mesh, axes))) ok = false;
    }
    if (!ok) {
      for (int32_t c : a.units[u]) {
        if (s.axes_of[c].empty()) s.axes_of.erase(c);
      }
      continue;
    }
    for (int32_t c : a.units[u]) s.axes_of[c].push_back(axis.name);
  }
  std::uniform_int_distribution<int> bit(0, 1);
  for (size_t g = 0; g < a.groups.size(); ++g) {
    s.resolution_bits[static_cast<int32_t>(g)] = bit(rng);
  }
  return s;
}

namespace {

std::string OracleKey(const ShardingState& s) {
  std::string key;
  for (const auto& [c, axes] : s.axes_of) {
    absl::StrAppend(&key, c, ":", absl::StrJoin(axes, ","), ";");
  }
  absl::StrAppend(&key, "|");
  for (const auto& [g, b] : s.resolution_bits) absl::StrAppend(&key, g, b);
  return key;
}

void Enumerate(const ProgramAnalysis& a, const Mesh& mesh,
               const std::vector<int>& eligible, ShardingState& s,
               std::set<std::string>& seen, std::vector<ShardingState>& out) {
  // Record every assignment of bits to the groups of sharded units.
  std::set<int32_t> groups;
  for (int u : eligible) {
    if (s.axes_of.count(a.units[u][0]) == 0) continue;
    for (int32_t g : a.GroupsOfUnit(u)) groups.insert(g);
  }
  std::vector<int32_t> gl(groups.begin(), groups.end());
  for (uint32_t bits = 0; bits < (uint32_t{1} << gl.size()); ++bits) {
    ShardingState t = s;
    for (size_t k = 0; k < gl.size(); ++k) {
      t.resolution_bits[gl[k]] = (bits >> k) & 1;
    }
    if (seen.insert(OracleKey(t)).second) out.push_back(t);
  }
  for (const MeshAxis& axis : mesh.axes()) {
    bool used = false;
    for (const auto& [c, axes] : s.axes_of) {
      used |= std::count(axes.begin(), axes.end(), axis.name) > 0;
    }
    if (used) continue;
    for (int u : eligible) {
      bool ok = true;
      for (int32_t c : a.units[u]) {
        std::vector<std::string> axes;
        if (auto it = s.axes_of.find(c); it != s.axes_of.end()) {
          axes = it->second;
        }
        axes.push_back(axis.name);
        ok &= Divides(a, c, AxesProduct(mesh, axes));
      }
      if (!ok) continue;
      ShardingState saved = s;
      for (int32_t c : a.units[u]) s.axes_of[c].push_back(axis.name);
      Enumerate(a, mesh, eligible, s, seen, out);
      s = std::move(saved);
    }
  }
}

}  // namespace

std::vector<ShardingState> EnumerateStates(const ProgramAnalysis& a,
                                           const Mesh& mesh,
                                           int min_unique_dims) {
  std::vector<int> eligible;
  for (int u = 0; u < static_cast<int>(a.units.size()); ++u) {
    int count = 0;
    for (size_t s = 0; s < a.raw.sites.size(); ++s) {
      if (!a.raw.sites[s].is_def()) continue;
      for (DimId d : a.raw.names[s]) {
        for (int32_t c : a.units[u]) count += a.full.color_of[d] == c;
      }
    }
    if (count >= min_unique_dims) eligible.push_back(u);
  }
  ShardingState s;
  std::set<std::string> seen;
  std::vector<ShardingState> out;
  Enumerate(a, mesh, eligible, s, seen, out);
  return out;
}

int64_t BruteForcePeakBytes(const ShardedModule& sm, const Mesh& mesh) {
  const Module& m = sm.base;
  const int64_t end = static_cast<int64_t>(sm.program.size());
  struct Value {
    int64_t bytes;
    int64_t def;
  };
  std::map<std::string, Value> values;
  for (size_t p = 0; p < m.params().size(); ++p) {
    values[m.params()[p].name] = {
        LocalShape(m.params()[p].shape, sm.param_layouts[p], mesh).byte_size(),
        -1};
  }
  for (int64_t t = 0; t < end; ++t) {
    const LoweredOp& op = sm.program[t];
    values[op.var] = {LocalShape(op.shape, op.layout, mesh).byte_size(), t};
  }
  auto read_at_or_after = [&](const std::string& var, int64_t t) {
    if (var == sm.result) return true;
    for (int64_t u = std::max<int64_t>(t, 0); u < end; ++u) {
      const LoweredOp& op = sm.program[u];
      if (op.is_collective ? op.subject == var
                           : std::count(op.operands.begin(),
                                        op.operands.end(), var) > 0) {
        return true;
      }
    }
    return false;
  };
  int64_t peak = 0;
  for (int64_t t = -1; t <= end; ++t) {
    int64_t live = 0;
    for (const auto& [var, v] : values) {
      if (v.def > t) continue;
      if (v.def == t || read_at_or_after(var, t)) live += v.bytes;
    }
    peak = std::max(peak, live);
  }
  return peak;
}

}  // namespace autoshard::testing
