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

// Analytical cost model for sharded modules.
//
// Runtime is the straight-line sum of per-op times: matmuls cost their
// device-local flops, collectives follow a ring model over the slowest link
// of their axis group. Memory is the peak of live device-local bytes.

#ifndef AUTOSHARD_COST_H_
#define AUTOSHARD_COST_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "autoshard/ir.h"
#include "autoshard/lowering.h"

namespace autoshard {

struct OpCost {
  std::string var;
  std::string kind;  // op mnemonic or collective name
  int64_t flops = 0;
  int64_t payload_bytes = 0;  // collectives only
  double secs = 0;
};

struct CostReport {
  double compute_secs = 0;
  double comm_secs = 0;
  double runtime_secs = 0;
  int64_t peak_bytes = 0;
  std::vector<OpCost> breakdown;
};

struct CostOptions {
  // Collective cost formulas; only "ring" is defined.
  std::string strategy = "ring";
  // Adds a bandwidth-bound term for non-matmul ops.
  bool elementwise_roofline = false;
};

absl::StatusOr<CostReport> Estimate(const ShardedModule& sm, const Mesh& mesh,
                                    const MachineSpec& spec,
                                    const CostOptions& options = {});

// Maximum over program points of the live device-local bytes. Parameters are
// live from entry, the result until the end.
int64_t PeakBytes(const ShardedModule& sm, const Mesh& mesh);

inline constexpr double kDefaultPenaltyConstant = 100.0;

struct Score {
  double rt = 0;
  double mp = 0;
  double c = 0;
  int64_t dm = 0;
  double penalty_constant = kDefaultPenaltyConstant;
};

// rt = runtime / baseline runtime; mp = C * (peak - DM) / baseline peak when
// the peak exceeds DM, else 0.
absl::StatusOr<Score> ComputeScore(const CostReport& report,
                                   const CostReport& baseline,
                                   const MachineSpec& spec,
                                   double penalty_constant =
                                       kDefaultPenaltyConstant);

}  // namespace autoshard

#endif  // AUTOSHARD_COST_H_
