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

// Straight-line tensor programs in A-normal form.
//
// A Module is a list of parameters, a list of single-assignment bindings and
// a result variable. Every binding applies one operation to previously
// defined variables; shapes are static and checked on construction.

#ifndef AUTOSHARD_IR_H_
#define AUTOSHARD_IR_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "absl/strings/string_view.h"
#include "absl/status/statusor.h"

namespace autoshard {

struct Shape {
  std::vector<int64_t> dims;
  int64_t elem_bytes = 4;

  int64_t rank() const { return static_cast<int64_t>(dims.size()); }
  int64_t num_elements() const;
  int64_t byte_size() const { return elem_bytes * num_elements(); }

  // "[256,32]"
  std::string ToString() const;

  friend bool operator==(const Shape&, const Shape&) = default;
};

enum class ReduceCombiner { kAdd, kMul, kMax };
enum class BinaryKind { kAdd, kMul, kSub, kDiv };
enum class UnaryKind { kRelu, kNeg, kExp, kRecip };

absl::string_view CombinerName(ReduceCombiner c);
absl::string_view BinaryName(BinaryKind k);
absl::string_view UnaryName(UnaryKind k);

struct MatmulOp {
  friend bool operator==(const MatmulOp&, const MatmulOp&) = default;
};
// Swaps dimensions `lhs` and `rhs`.
struct TransposeOp {
  int64_t lhs = 0;
  int64_t rhs = 1;
  friend bool operator==(const TransposeOp&, const TransposeOp&) = default;
};
// Folds `combiner` over dimension `dim`, which is removed from the result.
struct ReduceOp {
  int64_t dim = 0;
  ReduceCombiner combiner = ReduceCombiner::kAdd;
  friend bool operator==(const ReduceOp&, const ReduceOp&) = default;
};
// Inserts a new dimension of size `extent` at position `dim`.
struct BroadcastOp {
  int64_t dim = 0;
  int64_t extent = 1;
  friend bool operator==(const BroadcastOp&, const BroadcastOp&) = default;
};
struct BinaryOp {
  BinaryKind kind = BinaryKind::kAdd;
  friend bool operator==(const BinaryOp&, const BinaryOp&) = default;
};
struct UnaryOp {
  UnaryKind kind = UnaryKind::kRelu;
  friend bool operator==(const UnaryOp&, const UnaryOp&) = default;
};

using OpKind = std::variant<MatmulOp, TransposeOp, ReduceOp, BroadcastOp,
                            BinaryOp, UnaryOp>;

// Short mnemonic used in diagnostics and signatures ("matmul", "add", ...).
std::string OpMnemonic(const OpKind& op);
int64_t OpArity(const OpKind& op);

// Result shape of `op` applied to `operands`, or an error describing the
// mismatch.
absl::StatusOr<Shape> InferShape(const OpKind& op,
                                 std::span<const Shape> operands);

struct Binding {
  std::string var;
  OpKind op;
  std::vector<std::string> operands;
  Shape result_shape;

  friend bool operator==(const Binding&, const Binding&) = default;
};

struct Param {
  std::string name;
  Shape shape;

  friend bool operator==(const Param&, const Param&) = default;
};

// Values are numbered params first, then bindings in program order.
using ValueId = int32_t;

class Module {
 public:
  const std::string& name() const { return name_; }
  const std::vector<Param>& params() const { return params_; }
  const std::vector<Binding>& bindings() const { return bindings_; }
  const std::string& result() const { return result_; }
  int64_t elem_bytes() const { return elem_bytes_; }

  int32_t num_values() const {
    return static_cast<int32_t>(params_.size() + bindings_.size());
  }
  std::optional<ValueId> Lookup(absl::string_view var) const;
  ValueId result_value() const { return *Lookup(result_); }
  const std::string& ValueName(ValueId v) const;
  const Shape& ValueShape(ValueId v) const;
  bool IsParam(ValueId v) const {
    return v < static_cast<ValueId>(params_.size());
  }
  // Binding index of a non-param value.
  int32_t BindingOf(ValueId v) const {
    return v - static_cast<int32_t>(params_.size());
  }
  ValueId ValueOfBinding(int32_t b) const {
    return b + static_cast<int32_t>(params_.size());
  }

  friend bool operator==(const Module& a, const Module& b) {
    return a.name_ == b.name_ && a.params_ == b.params_ &&
           a.bindings_ == b.bindings_ && a.result_ == b.result_ &&
           a.elem_bytes_ == b.elem_bytes_;
  }

 private:
  friend class ModuleBuilder;
  Module() = default;

  std::string name_;
  std::vector<Param> params_;
  std::vector<Binding> bindings_;
  std::string result_;
  int64_t elem_bytes_ = 4;
  std::map<std::string, ValueId, std::less<>> index_;
};

// Incrementally assembles a Module. Each Add* call shape-checks the new
// binding immediately; errors name the offending variable.
class ModuleBuilder {
 public:
  explicit ModuleBuilder(std::string name, int64_t elem_bytes = 4);

  absl::Status AddParam(std::string name, std::vector<int64_t> dims);
  // `declared` is checked against the inferred shape when present.
  absl::Status AddBinding(std::string var, OpKind op,
                          std::vector<std::string> operands,
                          std::optional<std::vector<int64_t>> declared = {});
  absl::StatusOr<Module> Build(std::string result) &&;

  bool Defines(absl::string_view var) const;
  absl::StatusOr<Shape> ShapeOf(absl::string_view var) const;

 private:
  Module module_;
};

// A logical device mesh: ordered, uniquely named axes of size >= 2.
struct MeshAxis {
  std::string name;
  int64_t size = 2;
  friend bool operator==(const MeshAxis&, const MeshAxis&) = default;
};

class Mesh {
 public:
  Mesh() = default;
  static absl::StatusOr<Mesh> Create(std::vector<MeshAxis> axes);
  // Parses "b=2,m=4".
  static absl::StatusOr<Mesh> Parse(absl::string_view spec);

  const std::vector<MeshAxis>& axes() const { return axes_; }
  std::optional<int64_t> AxisSize(absl::string_view name) const;
  std::optional<int> AxisIndex(absl::string_view name) const;
  int64_t num_devices() const;
  std::string ToString() const;

 private:
  std::vector<MeshAxis> axes_;
};

struct MachineSpec {
  double flops_per_sec = 1e12;
  std::map<std::string, double> bytes_per_sec;
  int64_t device_memory_bytes = int64_t{16} << 30;
  // Only consulted when the cost model's elementwise roofline term is on.
  double hbm_bytes_per_sec = 1e12;

  // Uniform bandwidth on every axis of `mesh`.
  static MachineSpec Uniform(const Mesh& mesh, double flops_per_sec,
                             double bytes_per_sec,
                             int64_t device_memory_bytes);
  absl::Status Validate() const;
};

}  // namespace autoshard

#endif  // AUTOSHARD_IR_H_
