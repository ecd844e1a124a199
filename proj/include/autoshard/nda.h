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

// Named dimension analysis.
//
// Every definition and every use of a tensor gets fresh dimension names.
// Two relations are collected while walking the program once, in order:
//
//   M  def->use edges: the i-th name of a definition flows to the i-th name
//      of each of its uses;
//   I  per-operation identities: names that must be sharded together for
//      the operation to be computable on shards (e.g. the contracting
//      dimensions of a matmul, or matching dimensions of an add).
//
// Quotienting the names by I alone yields one class per way of partitioning
// a single operation; quotienting by I and M yields the sets of dimensions
// that can be sharded together across the whole program ("colors").

#ifndef AUTOSHARD_NDA_H_
#define AUTOSHARD_NDA_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "absl/strings/string_view.h"
#include "autoshard/ir.h"

namespace autoshard {

using DimId = int32_t;
using SiteId = int32_t;

enum class SiteKind { kParamDef, kBindingResult, kOperandUse, kReturnUse };

// A program location that carries a tensor: a definition (param or binding
// result), an operand position of a binding, or the final `return`.
struct Site {
  SiteKind kind;
  // Param index for kParamDef, binding index for kBindingResult and
  // kOperandUse, unused otherwise.
  int32_t index = -1;
  // Operand position for kOperandUse.
  int32_t operand = -1;
  // The value defined or used at this site.
  ValueId value = -1;

  bool is_def() const {
    return kind == SiteKind::kParamDef || kind == SiteKind::kBindingResult;
  }
};

struct DimRef {
  SiteId site;
  int32_t index;
};

struct NdaRaw {
  std::vector<Site> sites;
  // names[s][i] is the dimension name of dimension i at site s.
  std::vector<std::vector<DimId>> names;
  // origin[d] locates name d.
  std::vector<DimRef> origin;
  // Extent of the dimension each name annotates.
  std::vector<int64_t> extent;
  // def name -> use name.
  std::vector<std::pair<DimId, DimId>> m_edges;
  std::vector<std::pair<DimId, DimId>> identities;

  std::vector<SiteId> def_site;                    // per value
  std::vector<std::vector<SiteId>> uses;           // per value, program order
  std::vector<std::vector<SiteId>> operand_sites;  // per binding
  std::vector<SiteId> result_site;                 // per binding
  SiteId return_site = -1;

  int32_t num_names() const { return static_cast<int32_t>(origin.size()); }
  // Sites touched by binding `b`: its operand uses followed by its result.
  std::vector<SiteId> SitesOfBinding(int32_t b) const;
  // "x", "y", "y.in0", "return".
  std::string SiteName(const Module& module, SiteId s) const;
  // "y.in0#1".
  std::string DimName(const Module& module, DimId d) const;
};

NdaRaw Analyze(const Module& module);

enum class QuotientMode { kIOnly, kIAndM };

struct ColorAssignment {
  QuotientMode mode = QuotientMode::kIAndM;
  std::vector<int32_t> color_of;            // per DimId
  std::vector<std::vector<DimId>> colors;   // members in ascending id order

  int32_t num_colors() const { return static_cast<int32_t>(colors.size()); }
};

// Union-find closure of I (kIOnly) or I and M (kIAndM). Color ids follow the
// order of each class's smallest name.
ColorAssignment Quotient(const NdaRaw& raw, QuotientMode mode);

absl::string_view QuotientModeName(QuotientMode mode);

}  // namespace autoshard

#endif  // AUTOSHARD_NDA_H_
