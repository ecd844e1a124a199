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

// Textual form of the IR:
//
//   def mlp(x: f32[256,32], w1: f32[32,64], w2: f32[64,16]) {
//     y = matmul(x, w1)
//     z = relu(y)
//     w = matmul(z, w2)
//     return w
//   }
//
// Bindings may carry an optional declared shape (`y: f32[256,64] = ...`),
// which is checked against the inferred one. `#` starts a comment.

#ifndef AUTOSHARD_IR_TEXT_H_
#define AUTOSHARD_IR_TEXT_H_

#include <string>
#include <string_view>

#include "absl/strings/string_view.h"
#include "absl/status/statusor.h"
#include "autoshard/ir.h"

namespace autoshard {

// Errors carry a "line:col: " prefix.
absl::StatusOr<Module> ParseModule(absl::string_view text);

std::string PrintModule(const Module& module);

// Dtype spelling for an element width ("f32" for 4 bytes).
absl::string_view DtypeName(int64_t elem_bytes);

// Operation text without operands, e.g. "reduce[1, add]".
std::string PrintOp(const OpKind& op);

}  // namespace autoshard

#endif  // AUTOSHARD_IR_TEXT_H_
