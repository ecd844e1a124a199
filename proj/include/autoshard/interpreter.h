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

#ifndef AUTOSHARD_INTERPRETER_H_
#define AUTOSHARD_INTERPRETER_H_

#include <map>
#include <span>
#include <string>

#include "absl/status/statusor.h"
#include "autoshard/ir.h"
#include "autoshard/tensor.h"

namespace autoshard {

using TensorMap = std::map<std::string, Tensor, std::less<>>;

// Applies `op` to already evaluated operands. `broadcast_extent`, when
// positive, overrides the extent of a broadcast (device-local execution).
Tensor EvaluateOp(const OpKind& op, std::span<const Tensor* const> operands,
                  int64_t broadcast_extent = -1);

// Dense reference semantics of `module`.
absl::StatusOr<Tensor> Interpret(const Module& module, const TensorMap& inputs);

}  // namespace autoshard

#endif  // AUTOSHARD_INTERPRETER_H_
