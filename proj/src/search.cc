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

#include "autoshard/search.h"

#include <algorithm>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <thread>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"

namespace autoshard {

std::string Action::ToString() const {
  if (stop) return "stop";
  std::vector<std::string> parts;
  for (size_t k = 0; k < groups.size(); ++k) {
    parts.push_back(absl::StrCat("g", groups[k], "=", (bits >> k) & 1));
  }
  return absl::StrCat("shard(unit ", unit, ", {", absl::StrJoin(parts, ","),
                      "}, ", axis, ")");
}

int UniqueDims(const ProgramAnalysis& analysis, int32_t unit) {
  int n = 0;
  for (SiteId s = 0; s < static_cast<SiteId>(analysis.raw.sites.size()); ++s) {
    if (!analysis.raw.sites[s].is_def()) continue;
    for (DimId d : analysis.raw.names[s]) {
      if (analysis.unit_of_color[analysis.full.color_of[d]] == unit) ++n;
    }
  }
  return n;
}

bool ActionValid(const ShardingState& state, const Action& action,
                 const ProgramAnalysis& analysis, const Mesh& mesh) {
  if (action.stop) return true;
  for (const auto& [color, axes] : state.axes_of) {
    if (std::find(axes.begin(), axes.end(), action.axis) != axes.end()) {
      return false;
    }
  }
  for (size_t k = 0; k < action.groups.size(); ++k) {
    auto it = state.resolution_bits.find(action.groups[k]);
    if (it != state.resolution_bits.end() &&
        it->second != static_cast<int>((action.bits >> k) & 1)) {
      return false;
    }
  }
  const int64_t size = mesh.AxisSize(action.axis).value_or(0);
  if (size <= 0) return false;
  for (int32_t color : analysis.units[action.unit]) {
    int64_t p = size;
    auto it = state.axes_of.find(color);
    if (it != state.axes_of.end()) {
      for (const std::string& a : it->second) p *= *mesh.AxisSize(a);
    }
    for (DimId d : analysis.full.colors[color]) {
      if (analysis.raw.extent[d] % p != 0) return false;
    }
  }
  return true;
}

std::vector<Action> BuildActionSpace(const ProgramAnalysis& analysis,
                                     const Mesh& mesh,
                                     const SearchConfig& cfg) {
  std::vector<Action> out;
  const ShardingState empty;
  for (int32_t u = 0; u < static_cast<int32_t>(analysis.units.size()); ++u) {
    if (UniqueDims(analysis, u) < cfg.min_unique_dims) continue;
    std::vector<int32_t> groups = analysis.GroupsOfUnit(u);
    const uint32_t combos = uint32_t{1} << groups.size();
    for (uint32_t bits = 0; bits < combos; ++bits) {
      for (size_t k = 0; k < mesh.axes().size(); ++k) {
        Action a;
        a.unit = u;
        a.bits = bits;
        a.groups = groups;
        a.axis = mesh.axes()[k].name;
        a.axis_index = static_cast<int>(k);
        if (ActionValid(empty, a, analysis, mesh)) out.push_back(std::move(a));
      }
    }
  }
  Action stop;
  stop.stop = true;
  out.push_back(stop);
  return out;
}

std::string StateKey(const ShardingState& state) {
  if (state.axes_of.empty() && state.resolution_bits.empty()) return "<empty>";
  std::vector<std::string> parts;
  for (const auto& [color, axes] : state.axes_of) {
    parts.push_back(absl::StrCat("c", color, ":", absl::StrJoin(axes, ",")));
  }
  std::vector<std::string> bits;
  for (const auto& [group, bit] : state.resolution_bits) {
    bits.push_back(absl::StrCat("g", group, "=", bit));
  }
  return absl::StrCat(absl::StrJoin(parts, ";"), "|", absl::StrJoin(bits, ";"));
}

ShardingState ApplyAction(const ShardingState& state, const Action& action,
                          const ProgramAnalysis& analysis) {
  ShardingState next = state;
  if (action.stop) return next;
  for (int32_t color : analysis.units[action.unit]) {
    next.axes_of[color].push_back(action.axis);
  }
  for (size_t k = 0; k < action.groups.size(); ++k) {
    next.resolution_bits[action.groups[k]] =
        static_cast<int>((action.bits >> k) & 1);
  }
  return next;
}

namespace {

std::vector<Action> Remaining(const ShardingState& state,
                              const std::vector<Action>& actions,
                              const ProgramAnalysis& analysis,
                              const Mesh& mesh) {
  std::vector<Action> out;
  for (const Action& a : actions) {
    if (ActionValid(state, a, analysis, mesh)) out.push_back(a);
  }
  return out;
}

}  // namespace

absl::StatusOr<StepResult> Step(const ShardingState& state,
                                const Action& action,
                                const std::vector<Action>& remaining,
                                const ProgramAnalysis& analysis,
                                const Mesh& mesh) {
  if (std::find(remaining.begin(), remaining.end(), action) ==
      remaining.end()) {
    return absl::InvalidArgumentError(
        absl::StrCat("action ", action.ToString(), " is not available"));
  }
  StepResult r;
  if (action.stop) {
    r.state = state;
    r.terminal = true;
    return r;
  }
  if (!ActionValid(state, action, analysis, mesh)) {
    return absl::InvalidArgumentError(
        absl::StrCat("action ", action.ToString(), " is invalid in state ",
                     StateKey(state)));
  }
  r.state = ApplyAction(state, action, analysis);
  for (const Action& a : remaining) {
    if (a == action) continue;
    if (ActionValid(r.state, a, analysis, mesh)) r.remaining.push_back(a);
  }
  return r;
}

absl::StatusOr<Evaluation> EvaluateState(const Module& module,
                                         const ProgramAnalysis& analysis,
                                         const ShardingState& state,
                                         const Mesh& mesh,
                                         const MachineSpec& spec,
                                         const CostReport& baseline,
                                         const SearchConfig& cfg) {
  absl::StatusOr<ShardedModule> sm = Apply(module, analysis, state, mesh);
  if (!sm.ok()) return sm.status();
  absl::StatusOr<CostReport> report = Estimate(*sm, mesh, spec, cfg.cost);
  if (!report.ok()) return report.status();
  absl::StatusOr<Score> score =
      ComputeScore(*report, baseline, spec, cfg.penalty_constant);
  if (!score.ok()) return score.status();
  return Evaluation{*score, *std::move(report)};
}

namespace {

struct Node {
  ShardingState state;
  int depth = 0;
  bool terminal = false;
  Action via;
  int parent = -1;
  std::vector<Action> remaining;
  size_t next_untried = 0;
  std::vector<int> children;
  int64_t visits = 0;
  double total = 0;
};

class Mcts {
 public:
  Mcts(const Module& module, const ProgramAnalysis& analysis, const Mesh& mesh,
       const MachineSpec& spec, const SearchConfig& cfg)
      : module_(module),
        analysis_(analysis),
        mesh_(mesh),
        spec_(spec),
        cfg_(cfg) {}

  absl::StatusOr<SearchResult> Run() {
    absl::StatusOr<ShardedModule> unsharded =
        Apply(module_, analysis_, ShardingState{}, mesh_);
    if (!unsharded.ok()) return unsharded.status();
    absl::StatusOr<CostReport> baseline =
        Estimate(*unsharded, mesh_, spec_, cfg_.cost);
    if (!baseline.ok()) return baseline.status();
    result_.baseline = *baseline;
    if (baseline->runtime_secs <= 0) {
      // Nothing to speed up; the unsharded program is the answer.
      result_.best_report = *baseline;
      result_.best_score.rt = 1;
      result_.best_score.dm = spec_.device_memory_bytes;
      result_.best_score.penalty_constant = cfg_.penalty_constant;
      if (baseline->peak_bytes > spec_.device_memory_bytes) {
        result_.best_score.mp =
            cfg_.penalty_constant *
            static_cast<double>(baseline->peak_bytes -
                                spec_.device_memory_bytes) /
            static_cast<double>(baseline->peak_bytes);
      }
      result_.best_score.c = result_.best_score.rt + result_.best_score.mp;
      return result_;
    }

    actions_ = BuildActionSpace(analysis_, mesh_, cfg_);
    Node root;
    root.remaining = actions_;
    nodes_.push_back(std::move(root));

    absl::StatusOr<Evaluation> empty = Evaluate(ShardingState{});
    if (!empty.ok()) return empty.status();
    best_c_ = empty->score.c;
    result_.best_score = empty->score;
    result_.best_report = empty->report;

    const int rounds = std::max(1, cfg_.rounds);
    const int64_t budget = std::max<int64_t>(1, cfg_.budget);
    const int64_t per_round = std::max<int64_t>(1, budget / rounds);
    int stale = 0;
    int64_t done = 0;
    while (done < budget) {
      const int64_t todo = std::min(per_round, budget - done);
      const double before = best_c_;
      absl::Status s = RunRound(todo);
      if (!s.ok()) return s;
      done += todo;
      result_.round_best.push_back(best_c_);
      stale = best_c_ < before ? 0 : stale + 1;
      if (stale >= cfg_.early_stop_rounds && done < budget) {
        result_.stopped_early = true;
        break;
      }
    }
    result_.simulations = done;
    result_.visited_states = static_cast<int64_t>(cache_.size());
    return result_;
  }

 private:
  absl::Status RunRound(int64_t sims) {
    const int workers = std::max(1, cfg_.workers);
    if (workers == 1) {
      std::mt19937_64& rng = Rng(0);
      for (int64_t i = 0; i < sims; ++i) {
        if (absl::Status s = Simulate(rng); !s.ok()) return s;
      }
      return absl::OkStatus();
    }
    int64_t next = 0;
    absl::Status first_error;
    std::mutex counter;
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w) {
      std::mt19937_64& rng = Rng(w);
      threads.emplace_back([&, w, rngp = &rng] {
        (void)w;
        while (true) {
          {
            std::lock_guard<std::mutex> lock(counter);
            if (next >= sims || !first_error.ok()) return;
            ++next;
          }
          absl::Status s = Simulate(*rngp);
          if (!s.ok()) {
            std::lock_guard<std::mutex> lock(counter);
            if (first_error.ok()) first_error = s;
          }
        }
      });
    }
    for (std::thread& t : threads) t.join();
    return first_error;
  }

  std::mt19937_64& Rng(int worker) {
    while (static_cast<int>(rngs_.size()) <= worker) {
      uint64_t k = rngs_.size();
      rngs_.push_back(std::make_unique<std::mt19937_64>(
          cfg_.seed + k * 0x9E3779B97F4A7C15ull));
    }
    return *rngs_[worker];
  }

  int AddChild(int parent, const Action& action) {
    Node child;
    const Node& p = nodes_[parent];
    child.parent = parent;
    child.via = action;
    if (action.stop) {
      child.state = p.state;
      child.depth = p.depth;
      child.terminal = true;
    } else {
      child.state = ApplyAction(p.state, action, analysis_);
      child.depth = p.depth + 1;
      child.terminal = child.depth >= cfg_.max_depth;
      if (!child.terminal) {
        child.remaining = Remaining(child.state, actions_, analysis_, mesh_);
      }
    }
    nodes_.push_back(std::move(child));
    int id = static_cast<int>(nodes_.size()) - 1;
    nodes_[parent].children.push_back(id);
    return id;
  }

  int SelectChild(int id) const {
    const Node& n = nodes_[id];
    int best = -1;
    double best_value = -std::numeric_limits<double>::infinity();
    for (int c : n.children) {
      const Node& child = nodes_[c];
      double value;
      if (child.visits == 0) {
        value = std::numeric_limits<double>::infinity();
      } else {
        value = child.total / static_cast<double>(child.visits) +
                cfg_.exploration *
                    std::sqrt(std::log(static_cast<double>(n.visits)) /
                              static_cast<double>(child.visits));
      }
      if (value > best_value) {
        best_value = value;
        best = c;
      }
    }
    return best;
  }

  absl::Status Simulate(std::mt19937_64& rng) {
    std::vector<int> path;
    ShardingState state;
    int depth = 0;
    bool terminal = false;
    std::vector<Action> remaining;
    {
      std::lock_guard<std::mutex> lock(tree_mu_);
      int id = 0;
      path.push_back(id);
      while (!nodes_[id].terminal) {
        Node& n = nodes_[id];
        if (n.next_untried < n.remaining.size()) {
          Action a = n.remaining[n.next_untried++];
          id = AddChild(id, a);
          path.push_back(id);
          break;
        }
        if (n.children.empty()) break;
        id = SelectChild(id);
        path.push_back(id);
      }
      const Node& leaf = nodes_[id];
      state = leaf.state;
      depth = leaf.depth;
      terminal = leaf.terminal;
      remaining = leaf.remaining;
    }

    std::vector<Action> taken;
    for (size_t k = 1; k < path.size(); ++k) {
      std::lock_guard<std::mutex> lock(tree_mu_);
      if (!nodes_[path[k]].via.stop) taken.push_back(nodes_[path[k]].via);
    }
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    while (!terminal && depth < cfg_.max_depth && !remaining.empty()) {
      double p_stop =
          static_cast<double>(depth) / static_cast<double>(cfg_.max_depth);
      if (coin(rng) < p_stop) break;
      std::uniform_int_distribution<size_t> pick(0, remaining.size() - 1);
      const Action a = remaining[pick(rng)];
      if (a.stop) break;
      state = ApplyAction(state, a, analysis_);
      taken.push_back(a);
      ++depth;
      remaining = Remaining(state, remaining, analysis_, mesh_);
    }

    absl::StatusOr<Evaluation> eval = Evaluate(state);
    if (!eval.ok()) return eval.status();
    const double reward = -eval->score.c;

    std::lock_guard<std::mutex> lock(tree_mu_);
    for (int id : path) {
      nodes_[id].visits += 1;
      nodes_[id].total += reward;
    }
    if (eval->score.c < best_c_) {
      best_c_ = eval->score.c;
      result_.best_state = state;
      result_.best_score = eval->score;
      result_.best_report = eval->report;
      result_.actions_taken = taken;
    }
    return absl::OkStatus();
  }

  absl::StatusOr<Evaluation> Evaluate(const ShardingState& state) {
    const std::string key = StateKey(state);
    {
      std::lock_guard<std::mutex> lock(cache_mu_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }
    absl::StatusOr<Evaluation> eval = EvaluateState(
        module_, analysis_, state, mesh_, spec_, result_.baseline, cfg_);
    if (!eval.ok()) return eval.status();
    std::lock_guard<std::mutex> lock(cache_mu_);
    cache_.emplace(key, *eval);
    return eval;
  }

  const Module& module_;
  const ProgramAnalysis& analysis_;
  const Mesh& mesh_;
  const MachineSpec& spec_;
  const SearchConfig& cfg_;

  std::vector<Action> actions_;
  std::vector<Node> nodes_;
  std::mutex tree_mu_;
  std::mutex cache_mu_;
  std::map<std::string, Evaluation> cache_;
  std::vector<std::unique_ptr<std::mt19937_64>> rngs_;
  double best_c_ = std::numeric_limits<double>::infinity();
  SearchResult result_;
};

}  // namespace

absl::StatusOr<SearchResult> MctsSearch(const Module& module,
                                        const ProgramAnalysis& analysis,
                                        const Mesh& mesh,
                                        const MachineSpec& spec,
                                        const SearchConfig& cfg) {
  if (cfg.budget < 1) {
    return absl::InvalidArgumentError("budget must be at least 1");
  }
  if (cfg.max_depth < 1) {
    return absl::InvalidArgumentError("max_depth must be at least 1");
  }
  return Mcts(module, analysis, mesh, spec, cfg).Run();
}

}  // namespace autoshard
