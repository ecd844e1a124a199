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

// Dense row-major tensors and the reference kernels used by both the dense
// and the per-device interpreters.

#ifndef AUTOSHARD_TENSOR_H_
#define AUTOSHARD_TENSOR_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "autoshard/ir.h"

namespace autoshard {

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int64_t> dims, double fill = 0.0);
  Tensor(std::vector<int64_t> dims, std::vector<double> data);

  const std::vector<int64_t>& dims() const { return dims_; }
  int64_t rank() const { return static_cast<int64_t>(dims_.size()); }
  int64_t size() const { return static_cast<int64_t>(data_.size()); }
  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  double& at(std::span<const int64_t> index);
  double at(std::span<const int64_t> index) const;

  std::string DebugString() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  int64_t Offset(std::span<const int64_t> index) const;

  std::vector<int64_t> dims_;
  std::vector<double> data_;
};

namespace kernels {

Tensor Matmul(const Tensor& x, const Tensor& y);
Tensor Transpose(const Tensor& x, int64_t lhs, int64_t rhs);
Tensor Reduce(const Tensor& x, int64_t dim, ReduceCombiner combiner);
Tensor Broadcast(const Tensor& x, int64_t dim, int64_t extent);
Tensor Binary(BinaryKind kind, const Tensor& x, const Tensor& y);
Tensor Unary(UnaryKind kind, const Tensor& x);

// Elementwise combination of equally shaped tensors.
Tensor Combine(ReduceCombiner combiner, const Tensor& x, const Tensor& y);
Tensor Slice(const Tensor& x, int64_t dim, int64_t start, int64_t length);
Tensor Concat(std::span<const Tensor> parts, int64_t dim);

}  // namespace kernels

// Largest |a-b| / max(1, |b|) over all elements; +inf on shape mismatch.
double MaxRelativeError(const Tensor& actual, const Tensor& expected);

}  // namespace autoshard

#endif  // AUTOSHARD_TENSOR_H_
