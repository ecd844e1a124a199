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

#include "autoshard/ir.h"

#include <set>

#include "absl/status/status.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"

namespace autoshard {

int64_t Shape::num_elements() const {
  int64_t n = 1;
  for (int64_t d : dims) n *= d;
  return n;
}

std::string Shape::ToString() const {
  return absl::StrCat("[", absl::StrJoin(dims, ","), "]");
}

absl::string_view CombinerName(ReduceCombiner c) {
  switch (c) {
    case ReduceCombiner::kAdd:
      return "add";
    case ReduceCombiner::kMul:
      return "mul";
    case ReduceCombiner::kMax:
      return "max";
  }
  return "?";
}

absl::string_view BinaryName(BinaryKind k) {
  switch (k) {
    case BinaryKind::kAdd:
      return "add";
    case BinaryKind::kMul:
      return "mul";
    case BinaryKind::kSub:
      return "sub";
    case BinaryKind::kDiv:
      return "div";
  }
  return "?";
}

absl::string_view UnaryName(UnaryKind k) {
  switch (k) {
    case UnaryKind::kRelu:
      return "relu";
    case UnaryKind::kNeg:
      return "neg";
    case UnaryKind::kExp:
      return "exp";
    case UnaryKind::kRecip:
      return "recip";
  }
  return "?";
}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string OpMnemonic(const OpKind& op) {
  return std::visit(
      Overloaded{
          [](const MatmulOp&) { return std::string("matmul"); },
          [](const TransposeOp&) { return std::string("transpose"); },
          [](const ReduceOp&) { return std::string("reduce"); },
          [](const BroadcastOp&) { return std::string("broadcast"); },
          [](const BinaryOp& b) { return std::string(BinaryName(b.kind)); },
          [](const UnaryOp& u) { return std::string(UnaryName(u.kind)); },
      },
      op);
}

int64_t OpArity(const OpKind& op) {
  if (std::holds_alternative<MatmulOp>(op) ||
      std::holds_alternative<BinaryOp>(op)) {
    return 2;
  }
  return 1;
}

absl::StatusOr<Shape> InferShape(const OpKind& op,
                                 std::span<const Shape> operands) {
  if (static_cast<int64_t>(operands.size()) != OpArity(op)) {
    return absl::InvalidArgumentError(
        absl::StrCat(OpMnemonic(op), " expects ", OpArity(op),
                     " operands, got ", operands.size()));
  }
  const Shape& x = operands[0];
  Shape out;
  out.elem_bytes = x.elem_bytes;

  if (std::holds_alternative<MatmulOp>(op)) {
    const Shape& y = operands[1];
    if (x.rank() != 2 || y.rank() != 2) {
      return absl::InvalidArgumentError(
          absl::StrCat("matmul operands must be rank 2, got ", x.ToString(),
                       " and ", y.ToString()));
    }
    if (x.dims[1] != y.dims[0]) {
      return absl::InvalidArgumentError(
          absl::StrCat("matmul contraction extents differ: ", x.ToString(),
                       " x ", y.ToString()));
    }
    out.dims = {x.dims[0], y.dims[1]};
  } else if (const auto* t = std::get_if<TransposeOp>(&op)) {
    if (t->lhs < 0 || t->rhs < 0 || t->lhs >= x.rank() ||
        t->rhs >= x.rank() || t->lhs == t->rhs) {
      return absl::InvalidArgumentError(
          absl::StrCat("transpose[", t->lhs, ",", t->rhs,
                       "] invalid for operand ", x.ToString()));
    }
    out.dims = x.dims;
    std::swap(out.dims[t->lhs], out.dims[t->rhs]);
  } else if (const auto* r = std::get_if<ReduceOp>(&op)) {
    if (r->dim < 0 || r->dim >= x.rank()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "reduce dimension ", r->dim, " out of range for ", x.ToString()));
    }
    out.dims = x.dims;
    out.dims.erase(out.dims.begin() + r->dim);
  } else if (const auto* b = std::get_if<BroadcastOp>(&op)) {
    if (b->dim < 0 || b->dim > x.rank()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "broadcast position ", b->dim, " out of range for ", x.ToString()));
    }
    if (b->extent < 1) {
      return absl::InvalidArgumentError(
          absl::StrCat("broadcast extent must be positive, got ", b->extent));
    }
    out.dims = x.dims;
    out.dims.insert(out.dims.begin() + b->dim, b->extent);
  } else if (std::holds_alternative<BinaryOp>(op)) {
    const Shape& y = operands[1];
    if (x.dims != y.dims) {
      return absl::InvalidArgumentError(
          absl::StrCat(OpMnemonic(op), " operand shapes differ: ",
                       x.ToString(), " vs ", y.ToString(),
                       " (insert an explicit broadcast)"));
    }
    out.dims = x.dims;
  } else {
    out.dims = x.dims;
  }
  return out;
}

std::optional<ValueId> Module::Lookup(absl::string_view var) const {
  auto it = index_.find(var);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& Module::ValueName(ValueId v) const {
  if (IsParam(v)) return params_[v].name;
  return bindings_[BindingOf(v)].var;
}

const Shape& Module::ValueShape(ValueId v) const {
  if (IsParam(v)) return params_[v].shape;
  return bindings_[BindingOf(v)].result_shape;
}

ModuleBuilder::ModuleBuilder(std::string name, int64_t elem_bytes) {
  module_.name_ = std::move(name);
  module_.elem_bytes_ = elem_bytes;
}

bool ModuleBuilder::Defines(absl::string_view var) const {
  return module_.index_.contains(var);
}

absl::StatusOr<Shape> ModuleBuilder::ShapeOf(absl::string_view var) const {
  auto v = module_.Lookup(var);
  if (!v) return absl::NotFoundError(absl::StrCat("undefined variable ", var));
  return module_.ValueShape(*v);
}

absl::Status ModuleBuilder::AddParam(std::string name,
                                     std::vector<int64_t> dims) {
  if (!module_.bindings_.empty()) {
    return absl::FailedPreconditionError("params must precede bindings");
  }
  if (Defines(name)) {
    return absl::InvalidArgumentError(
        absl::StrCat("duplicate definition of ", name));
  }
  for (int64_t d : dims) {
    if (d < 1) {
      return absl::InvalidArgumentError(
          absl::StrCat("param ", name, " has non-positive extent ", d));
    }
  }
  ValueId id = module_.num_values();
  module_.index_.emplace(name, id);
  module_.params_.push_back(
      Param{std::move(name), Shape{std::move(dims), module_.elem_bytes_}});
  return absl::OkStatus();
}

absl::Status ModuleBuilder::AddBinding(
    std::string var, OpKind op, std::vector<std::string> operands,
    std::optional<std::vector<int64_t>> declared) {
  if (Defines(var)) {
    return absl::InvalidArgumentError(
        absl::StrCat("duplicate binding of ", var));
  }
  std::vector<Shape> shapes;
  for (const std::string& o : operands) {
    auto s = ShapeOf(o);
    if (!s.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat("binding ", var, ": use of ", o, " before definition"));
    }
    shapes.push_back(*std::move(s));
  }
  auto inferred = InferShape(op, shapes);
  if (!inferred.ok()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "binding ", var, ": shape mismatch: ", inferred.status().message()));
  }
  if (declared && *declared != inferred->dims) {
    return absl::InvalidArgumentError(absl::StrCat(
        "binding ", var, ": declared shape ",
        Shape{*declared, 0}.ToString(), " but inferred ",
        inferred->ToString()));
  }
  ValueId id = module_.num_values();
  module_.index_.emplace(var, id);
  module_.bindings_.push_back(Binding{std::move(var), std::move(op),
                                      std::move(operands),
                                      *std::move(inferred)});
  return absl::OkStatus();
}

absl::StatusOr<Module> ModuleBuilder::Build(std::string result) && {
  if (!Defines(result)) {
    return absl::InvalidArgumentError(
        absl::StrCat("result ", result, " is not defined"));
  }
  module_.result_ = std::move(result);
  return std::move(module_);
}

absl::StatusOr<Mesh> Mesh::Create(std::vector<MeshAxis> axes) {
  std::set<std::string> seen;
  for (const MeshAxis& a : axes) {
    if (a.name.empty()) {
      return absl::InvalidArgumentError("mesh axis with empty name");
    }
    if (!seen.insert(a.name).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate mesh axis ", a.name));
    }
    if (a.size < 2) {
      return absl::InvalidArgumentError(absl::StrCat(
          "mesh axis ", a.name, " must have size >= 2, got ", a.size));
    }
  }
  Mesh mesh;
  mesh.axes_ = std::move(axes);
  return mesh;
}

absl::StatusOr<Mesh> Mesh::Parse(absl::string_view spec) {
  std::vector<MeshAxis> axes;
  for (absl::string_view item :
       absl::StrSplit(spec, ',', absl::SkipWhitespace())) {
    std::vector<absl::string_view> kv = absl::StrSplit(item, '=');
    int64_t size = 0;
    if (kv.size() != 2 ||
        !absl::SimpleAtoi(absl::StripAsciiWhitespace(kv[1]), &size)) {
      return absl::InvalidArgumentError(
          absl::StrCat("malformed mesh axis '", item, "', expected name=size"));
    }
    axes.push_back(
        MeshAxis{std::string(absl::StripAsciiWhitespace(kv[0])), size});
  }
  return Create(std::move(axes));
}

std::optional<int64_t> Mesh::AxisSize(absl::string_view name) const {
  for (const MeshAxis& a : axes_) {
    if (a.name == name) return a.size;
  }
  return std::nullopt;
}

std::optional<int> Mesh::AxisIndex(absl::string_view name) const {
  for (size_t i = 0; i < axes_.size(); ++i) {
    if (axes_[i].name == name) return static_cast<int>(i);
  }
  return std::nullopt;
}

int64_t Mesh::num_devices() const {
  int64_t n = 1;
  for (const MeshAxis& a : axes_) n *= a.size;
  return n;
}

std::string Mesh::ToString() const {
  return absl::StrJoin(axes_, ",", [](std::string* out, const MeshAxis& a) {
    absl::StrAppend(out, a.name, "=", a.size);
  });
}

MachineSpec MachineSpec::Uniform(const Mesh& mesh, double flops_per_sec,
                                 double bytes_per_sec,
                                 int64_t device_memory_bytes) {
  MachineSpec spec;
  spec.flops_per_sec = flops_per_sec;
  spec.device_memory_bytes = device_memory_bytes;
  for (const MeshAxis& a : mesh.axes()) spec.bytes_per_sec[a.name] = bytes_per_sec;
  return spec;
}

absl::Status MachineSpec::Validate() const {
  if (!(flops_per_sec > 0)) {
    return absl::InvalidArgumentError("flops_per_sec must be positive");
  }
  if (!(hbm_bytes_per_sec > 0)) {
    return absl::InvalidArgumentError("hbm_bytes_per_sec must be positive");
  }
  if (device_memory_bytes <= 0) {
    return absl::InvalidArgumentError("device_memory_bytes must be positive");
  }
  for (const auto& [axis, bw] : bytes_per_sec) {
    if (!(bw > 0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("bandwidth of axis ", axis, " must be positive"));
    }
  }
  return absl::OkStatus();
}

}  // namespace autoshard
