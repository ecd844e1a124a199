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

// Shared fixtures, random program generators and independent oracles.

#ifndef AUTOSHARD_TESTS_TEST_UTIL_H_
#define AUTOSHARD_TESTS_TEST_UTIL_H_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "autoshard/cost.h"
#include "autoshard/dimgraph.h"
#include "autoshard/interpreter.h"
#include "autoshard/ir.h"
#include "autoshard/lowering.h"

namespace autoshard::testing {

// Two linear layers with a relu in between.
std::string MlpText();
// Self-attention with softmax mocked up as averaging.
std::string AttnText(int64_t seq = 8, int64_t d = 4, int64_t h1 = 4);
// `layers` attention blocks, each feeding the next. Requires h2 == d.
std::string StackedAttnText(int layers, int64_t seq = 8, int64_t d = 4,
                            int64_t h1 = 4);
// Two structurally identical MLP blocks.
std::string TwoLayerMlpText();
// matmul(x, transpose(x)).
std::string SelfTransposeText();

Module ParseOrDie(const std::string& text);
ProgramAnalysis AnalyzeOrDie(const Module& module,
                             const AnalysisOptions& options = {});

// Color of dimension `dim` of the definition of `var`.
int32_t ColorOf(const ProgramAnalysis& a, const Module& m,
                const std::string& var, int dim);
// I-only node of dimension `dim` of the definition of `var`.
NodeId NodeOf(const ProgramAnalysis& a, const Module& m,
              const std::string& var, int dim);

// Integer-valued tensors in [-3, 3] (exact in double arithmetic).
TensorMap RandomIntInputs(const Module& m, std::mt19937_64& rng);
TensorMap RandomRealInputs(const Module& m, std::mt19937_64& rng);

struct GenOptions {
  int min_bindings = 2;
  int max_bindings = 8;
  // Every extent is drawn from this list.
  std::vector<int64_t> extents = {4, 8};
  bool allow_exp = false;
};

// Random well-formed program; values may be used many times.
std::string RandomModuleText(std::mt19937_64& rng, const GenOptions& opt = {});
// Random program in which every parameter and binding is used exactly once.
std::string RandomLinearModuleText(std::mt19937_64& rng,
                                   const GenOptions& opt = {});

// Random valid sharding state: a random subset of colors, each on a random
// set of axes that divides all member extents, with random resolution bits.
ShardingState RandomState(const ProgramAnalysis& a, const Mesh& mesh,
                          std::mt19937_64& rng);

// Every state reachable by the search's actions (unit-mirrored colors,
// per-unit resolution bits, exclusive axes, divisibility), deduplicated.
std::vector<ShardingState> EnumerateStates(const ProgramAnalysis& a,
                                           const Mesh& mesh,
                                           int min_unique_dims = 1);

// Peak of live device-local bytes, recomputed by brute force: at every
// program point, sum the sizes of values defined at or before it that are
// still read at or after it.
int64_t BruteForcePeakBytes(const ShardedModule& sm, const Mesh& mesh);

}  // namespace autoshard::testing

#endif  // AUTOSHARD_TESTS_TEST_UTIL_H_
