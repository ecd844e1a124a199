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

// JSON documents read and written by the command line driver. Every writer
// produces keys in a fixed order and no timing information, so equal inputs
// give byte-identical output.

#ifndef AUTOSHARD_SERIALIZE_H_
#define AUTOSHARD_SERIALIZE_H_

#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "autoshard/cost.h"
#include "autoshard/dimgraph.h"
#include "autoshard/interpreter.h"
#include "autoshard/ir.h"
#include "autoshard/lowering.h"
#include "autoshard/search.h"

namespace autoshard {

// {"flops_per_sec": 1e12, "bandwidth": {"b": 1e11}, "device_memory_bytes": n,
//  "hbm_bytes_per_sec": 1e12}. The last key is optional.
absl::StatusOr<MachineSpec> MachineSpecFromJson(absl::string_view text);
std::string MachineSpecToJson(const MachineSpec& spec);

// {"colors": {"<color>": ["b", "m"]}, "resolutions": {"<group>": 0}}.
absl::StatusOr<ShardingState> StateFromJson(absl::string_view text);
std::string StateToJson(const ShardingState& state);

// {"groups": [["wq0", "wq1"], ["wk0", "wk1"]]}.
absl::StatusOr<std::vector<std::vector<std::string>>> ArgGroupHintsFromJson(
    absl::string_view text);

// {"x": {"dims": [2, 3], "data": [...]}} in row-major order.
absl::StatusOr<TensorMap> TensorsFromJson(absl::string_view text);

// Sites with their name vectors, M edges, I pairs and both quotients.
std::string NdaToJson(const Module& module, const ProgramAnalysis& analysis);

// Conflicts, compatibility sets, groups and the endpoints each resolution
// bit shards.
std::string ConflictsToJson(const Module& module,
                            const ProgramAnalysis& analysis);

struct RunReport {
  std::string module;
  std::string mesh;
  ShardingState state;
  Score score;
  CostReport cost;
  CostReport baseline;
  // Present for `partition` only.
  const SearchResult* search = nullptr;
  const SearchConfig* search_config = nullptr;
  bool verified = false;
  double max_relative_error = 0;
};

std::string ReportToJson(const RunReport& report,
                         const ProgramAnalysis& analysis);

}  // namespace autoshard

#endif  // AUTOSHARD_SERIALIZE_H_
