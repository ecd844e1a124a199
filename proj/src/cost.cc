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

#include "autoshard/cost.h"

#include <algorithm>
#include <limits>
#include <map>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace autoshard {
namespace {

int64_t LocalBytes(const Shape& global, const Layout& layout,
                   const Mesh& mesh) {
  return LocalShape(global, layout, mesh).byte_size();
}

}  // namespace

absl::StatusOr<CostReport> Estimate(const ShardedModule& sm, const Mesh& mesh,
                                    const MachineSpec& spec,
                                    const CostOptions& options) {
  if (options.strategy != "ring") {
    return absl::InvalidArgumentError(
        absl::StrCat("unknown collective strategy ", options.strategy));
  }
  if (absl::Status s = spec.Validate(); !s.ok()) return s;
  const Module& m = sm.base;

  std::map<std::string, std::pair<Shape, Layout>> tensors;
  for (size_t p = 0; p < m.params().size(); ++p) {
    tensors[m.params()[p].name] = {m.params()[p].shape, sm.param_layouts[p]};
  }

  CostReport report;
  for (const LoweredOp& op : sm.program) {
    OpCost cost;
    cost.var = op.var;
    if (!op.is_collective) {
      const Binding& binding = m.bindings()[op.binding];
      cost.kind = OpMnemonic(binding.op);
      if (std::holds_alternative<MatmulOp>(binding.op)) {
        const auto& [xs, xl] = tensors.at(op.operands[0]);
        const auto& [ys, yl] = tensors.at(op.operands[1]);
        Shape x = LocalShape(xs, xl, mesh);
        Shape y = LocalShape(ys, yl, mesh);
        cost.flops = 2 * x.dims[0] * x.dims[1] * y.dims[1];
        cost.secs = static_cast<double>(cost.flops) / spec.flops_per_sec;
      } else if (options.elementwise_roofline) {
        int64_t bytes = LocalBytes(op.shape, op.layout, mesh);
        for (const std::string& o : op.operands) {
          const auto& [s, l] = tensors.at(o);
          bytes += LocalBytes(s, l, mesh);
        }
        cost.secs = static_cast<double>(bytes) / spec.hbm_bytes_per_sec;
      }
      report.compute_secs += cost.secs;
    } else {
      cost.kind = std::string(CollectiveName(op.kind));
      int64_t n = 1;
      double bw = std::numeric_limits<double>::infinity();
      for (const std::string& axis : op.axes) {
        n *= mesh.AxisSize(axis).value_or(1);
        auto it = spec.bytes_per_sec.find(axis);
        if (it == spec.bytes_per_sec.end()) {
          return absl::InvalidArgumentError(
              absl::StrCat("no bandwidth for axis ", axis));
        }
        bw = std::min(bw, it->second);
      }
      const auto& [in_shape, in_layout] = tensors.at(op.subject);
      const int64_t in_bytes = LocalBytes(in_shape, in_layout, mesh);
      const int64_t out_bytes = LocalBytes(op.shape, op.layout, mesh);
      const double ring = static_cast<double>(n - 1) / static_cast<double>(n);
      switch (op.kind) {
        case CollectiveKind::kAllGather:
          cost.payload_bytes = in_bytes;
          cost.secs = ring * static_cast<double>(in_bytes * n) / bw;
          break;
        case CollectiveKind::kReduceScatter:
          cost.payload_bytes = out_bytes;
          cost.secs = ring * static_cast<double>(out_bytes * n) / bw;
          break;
        case CollectiveKind::kAllReduce:
          cost.payload_bytes = in_bytes;
          cost.secs = 2 * ring * static_cast<double>(in_bytes * n) / bw;
          break;
        case CollectiveKind::kAllToAll:
          cost.payload_bytes = in_bytes;
          cost.secs = ring * static_cast<double>(in_bytes) / bw;
          break;
      }
      report.comm_secs += cost.secs;
    }
    report.runtime_secs += cost.secs;
    tensors[op.var] = {op.shape, op.layout};
    report.breakdown.push_back(std::move(cost));
  }
  report.peak_bytes = PeakBytes(sm, mesh);
  return report;
}

int64_t PeakBytes(const ShardedModule& sm, const Mesh& mesh) {
  const Module& m = sm.base;
  const int64_t end = static_cast<int64_t>(sm.program.size());
  struct Live {
    int64_t bytes;
    int64_t first;
    int64_t last;
  };
  std::map<std::string, Live> live;
  for (size_t p = 0; p < m.params().size(); ++p) {
    live[m.params()[p].name] = {
        LocalBytes(m.params()[p].shape, sm.param_layouts[p], mesh), -1, -1};
  }
  for (int64_t t = 0; t < end; ++t) {
    const LoweredOp& op = sm.program[t];
    if (op.is_collective) {
      live.at(op.subject).last = t;
    } else {
      for (const std::string& o : op.operands) live.at(o).last = t;
    }
    live[op.var] = {LocalBytes(op.shape, op.layout, mesh), t, t};
  }
  live.at(sm.result).last = end;

  // Sweep over events: +bytes at first, -bytes after last.
  std::vector<int64_t> delta(end + 3, 0);
  for (const auto& [var, l] : live) {
    delta[l.first + 1] += l.bytes;
    delta[std::max(l.first, l.last) + 2] -= l.bytes;
  }
  int64_t peak = 0, cur = 0;
  for (int64_t t = 0; t < end + 3; ++t) {
    cur += delta[t];
    peak = std::max(peak, cur);
  }
  return peak;
}

absl::StatusOr<Score> ComputeScore(const CostReport& report,
                                   const CostReport& baseline,
                                   const MachineSpec& spec,
                                   double penalty_constant) {
  if (baseline.runtime_secs <= 0) {
    return absl::InvalidArgumentError("baseline runtime is zero");
  }
  Score s;
  s.dm = spec.device_memory_bytes;
  s.penalty_constant = penalty_constant;
  s.rt = report.runtime_secs / baseline.runtime_secs;
  if (report.peak_bytes > spec.device_memory_bytes) {
    s.mp = penalty_constant *
           static_cast<double>(report.peak_bytes - spec.device_memory_bytes) /
           static_cast<double>(baseline.peak_bytes);
  }
  s.c = s.rt + s.mp;
  return s;
}

}  // namespace autoshard
