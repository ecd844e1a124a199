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

// Lowering of a sharding decision to a device-local program.
//
// A ShardingState maps colors to mesh axes and fixes one resolution bit per
// group of compatibility sets. Apply() turns it into a ShardedModule: every
// tensor dimension is annotated with the axes it is split over, and
// collectives are inserted wherever a definition and a use disagree or a
// contraction leaves partial sums behind.

#ifndef AUTOSHARD_LOWERING_H_
#define AUTOSHARD_LOWERING_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "autoshard/dimgraph.h"
#include "autoshard/interpreter.h"
#include "autoshard/ir.h"
#include "autoshard/tensor.h"

namespace autoshard {

struct ShardingState {
  // Color id (I-and-M quotient) -> axes, outermost first.
  std::map<int32_t, std::vector<std::string>> axes_of;
  // SetGroup id -> resolution bit.
  std::map<int32_t, int> resolution_bits;
  QuotientMode mode = QuotientMode::kIAndM;

  bool empty() const { return axes_of.empty() && resolution_bits.empty(); }
  friend bool operator==(const ShardingState&, const ShardingState&) = default;
};

// Checks axis existence and exclusivity, divisibility of every member extent
// and the range of the resolution bits.
absl::Status ValidateState(const ShardingState& state,
                           const ProgramAnalysis& analysis, const Mesh& mesh);

// Axes per tensor dimension.
using Layout = std::vector<std::vector<std::string>>;

std::string LayoutToString(const Shape& shape, const Layout& layout);
Layout EmptyLayout(int64_t rank);

enum class CollectiveKind { kAllGather, kAllReduce, kReduceScatter, kAllToAll };
absl::string_view CollectiveName(CollectiveKind kind);

struct LoweredOp {
  std::string var;
  Shape shape;  // global
  Layout layout;
  bool is_collective = false;

  // Compute ops.
  int32_t binding = -1;
  std::vector<std::string> operands;
  // Axes over which the computed value still holds partial sums.
  std::vector<std::string> partial_axes;

  // Collectives.
  CollectiveKind kind = CollectiveKind::kAllGather;
  std::vector<std::string> axes;
  std::string subject;
  int32_t src_dim = -1;  // gathered dim, or all_to_all source
  int32_t dst_dim = -1;  // scattered dim, or all_to_all destination
  ReduceCombiner combiner = ReduceCombiner::kAdd;
};

struct ShardedModule {
  explicit ShardedModule(Module m) : base(std::move(m)) {}

  Module base;
  std::vector<Layout> param_layouts;
  std::vector<LoweredOp> program;
  std::string result;
  Layout result_layout;
  // Layout of every site of the analysis: the value's layout at definition
  // sites and the layout each use consumes at use sites.
  std::vector<Layout> site_layouts;

  std::vector<const LoweredOp*> Collectives() const;
  int CountCollectives(CollectiveKind kind) const;
};

absl::StatusOr<ShardedModule> Apply(const Module& module,
                                    const ProgramAnalysis& analysis,
                                    const ShardingState& state,
                                    const Mesh& mesh);

// Invariant violations, one message per offending tensor; empty when valid.
std::vector<std::string> Validate(const ShardedModule& sm, const Mesh& mesh);

// Device-local shape of a tensor with the given layout.
Shape LocalShape(const Shape& global, const Layout& layout, const Mesh& mesh);

// Simulates every device of `mesh` in turn, realizing collectives with their
// MPI semantics, and reassembles the global result.
absl::StatusOr<Tensor> InterpretSharded(const ShardedModule& sm,
                                        const Mesh& mesh,
                                        const TensorMap& inputs);

// Module text with `[256{b},32]` annotations and collective lines.
std::string PrintShardedModule(const ShardedModule& sm);

}  // namespace autoshard

#endif  // AUTOSHARD_LOWERING_H_
