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

// Monte Carlo Tree Search over sharding decisions.
//
// An action shards one unit of colors (a color plus the colors mirrored to it
// by argument grouping) over one mesh axis, fixing the resolution bits of the
// set groups in that unit. States are compared by a canonical key, so action
// order never creates duplicates.

#ifndef AUTOSHARD_SEARCH_H_
#define AUTOSHARD_SEARCH_H_

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "autoshard/cost.h"
#include "autoshard/dimgraph.h"
#include "autoshard/ir.h"
#include "autoshard/lowering.h"

namespace autoshard {

struct Action {
  bool stop = false;
  int32_t unit = -1;
  // Bit k is the resolution of groups[k].
  uint32_t bits = 0;
  std::vector<int32_t> groups;
  std::string axis;
  int axis_index = -1;

  std::string ToString() const;
  friend bool operator==(const Action&, const Action&) = default;
};

struct SearchConfig {
  int64_t budget = 500;
  int max_depth = 30;
  int min_unique_dims = 10;
  double exploration = std::sqrt(2.0);
  uint64_t seed = 0;
  int workers = 1;
  double penalty_constant = kDefaultPenaltyConstant;
  int early_stop_rounds = 3;
  // The budget is split evenly into this many rounds.
  int rounds = 8;
  CostOptions cost;
};

struct SearchResult {
  ShardingState best_state;
  Score best_score;
  CostReport best_report;
  CostReport baseline;
  // Best c after each completed round.
  std::vector<double> round_best;
  // Shard actions leading to the best state, in the order taken.
  std::vector<Action> actions_taken;
  int64_t simulations = 0;
  int64_t visited_states = 0;
  bool stopped_early = false;
};

// Number of definition-site dimensions whose color belongs to `unit`.
int UniqueDims(const ProgramAnalysis& analysis, int32_t unit);

// Shard actions valid from the empty state for every unit with at least
// `cfg.min_unique_dims` dimensions, in canonical order, followed by Stop.
std::vector<Action> BuildActionSpace(const ProgramAnalysis& analysis,
                                     const Mesh& mesh, const SearchConfig& cfg);

// Canonical, order-independent key. The empty state maps to "<empty>".
std::string StateKey(const ShardingState& state);

// Whether `action` can still be taken from `state`: its axis is unused, its
// bits agree with the recorded ones and every extent stays divisible.
bool ActionValid(const ShardingState& state, const Action& action,
                 const ProgramAnalysis& analysis, const Mesh& mesh);

ShardingState ApplyAction(const ShardingState& state, const Action& action,
                          const ProgramAnalysis& analysis);

struct StepResult {
  ShardingState state;
  std::vector<Action> remaining;
  bool terminal = false;
};

absl::StatusOr<StepResult> Step(const ShardingState& state,
                                const Action& action,
                                const std::vector<Action>& remaining,
                                const ProgramAnalysis& analysis,
                                const Mesh& mesh);

// Lowers and scores `state` against the unsharded baseline.
struct Evaluation {
  Score score;
  CostReport report;
};
absl::StatusOr<Evaluation> EvaluateState(const Module& module,
                                         const ProgramAnalysis& analysis,
                                         const ShardingState& state,
                                         const Mesh& mesh,
                                         const MachineSpec& spec,
                                         const CostReport& baseline,
                                         const SearchConfig& cfg);

absl::StatusOr<SearchResult> MctsSearch(const Module& module,
                                        const ProgramAnalysis& analysis,
                                        const Mesh& mesh,
                                        const MachineSpec& spec,
                                        const SearchConfig& cfg);

}  // namespace autoshard

#endif  // AUTOSHARD_SEARCH_H_
