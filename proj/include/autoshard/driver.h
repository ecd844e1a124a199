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

// End-to-end driver: parse, group arguments, analyze, search, lower, cost.

#ifndef AUTOSHARD_DRIVER_H_
#define AUTOSHARD_DRIVER_H_

#include <cstdint>
#include <ostream>
#include <string>

#include "absl/status/status.h"
#include "autoshard/search.h"

namespace autoshard {

enum class Subcommand { kAnalyze, kPartition, kApply, kSimulate };

struct RunConfig {
  Subcommand subcommand = Subcommand::kAnalyze;
  std::string input;
  std::string mesh;
  // Empty means a uniform default machine over the mesh.
  std::string machine;
  std::string groups;
  bool group_args = true;
  bool group_sets = true;
  SearchConfig search;

  // Sharded module; printed to the output stream when empty.
  std::string emit_sharded;
  std::string report;
  std::string dump_nda;
  std::string dump_graph;
  std::string dump_conflicts;

  // Explicit sharding state for `apply` and `simulate`.
  std::string state;
  // Input tensors for `simulate`; seeded random integers when empty.
  std::string inputs;
  bool verify = true;
};

inline constexpr double kDefaultFlopsPerSec = 1e12;
inline constexpr double kDefaultBytesPerSec = 1e11;
inline constexpr int64_t kDefaultDeviceMemory = int64_t{16} << 30;
// `verify` and `simulate` accept sharded results within this relative error.
inline constexpr double kEquivalenceTolerance = 1e-5;

// Runs one subcommand, writing artifacts to the configured paths and a
// summary (or the sharded module) to `out`.
absl::Status Run(const RunConfig& cfg, std::ostream& out);

}  // namespace autoshard

#endif  // AUTOSHARD_DRIVER_H_
