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

#include "autoshard/interpreter.h"

#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"

namespace autoshard {

Tensor EvaluateOp(const OpKind& op, std::span<const Tensor* const> operands,
                  int64_t broadcast_extent) {
  const Tensor& x = *operands[0];
  if (std::holds_alternative<MatmulOp>(op)) {
    return kernels::Matmul(x, *operands[1]);
  }
  if (const auto* t = std::get_if<TransposeOp>(&op)) {
    return kernels::Transpose(x, t->lhs, t->rhs);
  }
  if (const auto* r = std::get_if<ReduceOp>(&op)) {
    return kernels::Reduce(x, r->dim, r->combiner);
  }
  if (const auto* b = std::get_if<BroadcastOp>(&op)) {
    return kernels::Broadcast(
        x, b->dim, broadcast_extent > 0 ? broadcast_extent : b->extent);
  }
  if (const auto* b = std::get_if<BinaryOp>(&op)) {
    return kernels::Binary(b->kind, x, *operands[1]);
  }
  return kernels::Unary(std::get<UnaryOp>(op).kind, x);
}

absl::StatusOr<Tensor> Interpret(const Module& module,
                                 const TensorMap& inputs) {
  std::vector<Tensor> values(module.num_values());
  for (size_t i = 0; i < module.params().size(); ++i) {
    const Param& p = module.params()[i];
    auto it = inputs.find(p.name);
    if (it == inputs.end()) {
      return absl::InvalidArgumentError(
          absl::StrCat("missing input for parameter ", p.name));
    }
    if (it->second.dims() != p.shape.dims) {
      return absl::InvalidArgumentError(absl::StrCat(
          "input ", p.name, " has shape [",
          absl::StrJoin(it->second.dims(), ","), "], expected ",
          p.shape.ToString()));
    }
    values[i] = it->second;
  }
  for (size_t b = 0; b < module.bindings().size(); ++b) {
    const Binding& binding = module.bindings()[b];
    std::vector<const Tensor*> operands;
    for (const std::string& o : binding.operands) {
      operands.push_back(&values[*module.Lookup(o)]);
    }
    Tensor out = EvaluateOp(binding.op, operands);
    if (out.dims() != binding.result_shape.dims) {
      return absl::InternalError(absl::StrCat(
          "binding ", binding.var, " produced [", absl::StrJoin(out.dims(), ","),
          "], declared ", binding.result_shape.ToString()));
    }
    values[module.ValueOfBinding(static_cast<int32_t>(b))] = std::move(out);
  }
  return values[module.result_value()];
}

}  // namespace autoshard
