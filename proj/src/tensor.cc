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

#include "autoshard/tensor.h"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"

namespace autoshard {
namespace {

int64_t Product(const std::vector<int64_t>& dims) {
  int64_t n = 1;
  for (int64_t d : dims) n *= d;
  return n;
}

// Views a tensor as [outer, extent(dim), inner].
struct Split3 {
  int64_t outer = 1;
  int64_t mid = 1;
  int64_t inner = 1;
};

Split3 SplitAround(const std::vector<int64_t>& dims, int64_t dim) {
  Split3 s;
  for (int64_t i = 0; i < dim; ++i) s.outer *= dims[i];
  s.mid = dims[dim];
  for (size_t i = dim + 1; i < dims.size(); ++i) s.inner *= dims[i];
  return s;
}

double ApplyCombiner(ReduceCombiner c, double a, double b) {
  switch (c) {
    case ReduceCombiner::kAdd:
      return a + b;
    case ReduceCombiner::kMul:
      return a * b;
    case ReduceCombiner::kMax:
      return std::max(a, b);
  }
  return a;
}

double Identity(ReduceCombiner c) {
  switch (c) {
    case ReduceCombiner::kAdd:
      return 0.0;
    case ReduceCombiner::kMul:
      return 1.0;
    case ReduceCombiner::kMax:
      return -std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

}  // namespace

Tensor::Tensor(std::vector<int64_t> dims, double fill)
    : dims_(std::move(dims)), data_(Product(dims_), fill) {}

Tensor::Tensor(std::vector<int64_t> dims, std::vector<double> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  assert(static_cast<int64_t>(data_.size()) == Product(dims_));
}

int64_t Tensor::Offset(std::span<const int64_t> index) const {
  int64_t off = 0;
  for (size_t i = 0; i < dims_.size(); ++i) off = off * dims_[i] + index[i];
  return off;
}

double& Tensor::at(std::span<const int64_t> index) {
  return data_[Offset(index)];
}

double Tensor::at(std::span<const int64_t> index) const {
  return data_[Offset(index)];
}

std::string Tensor::DebugString() const {
  return absl::StrCat("[", absl::StrJoin(dims_, ","), "]{",
                      absl::StrJoin(data_, ","), "}");
}

namespace kernels {

Tensor Matmul(const Tensor& x, const Tensor& y) {
  const int64_t m = x.dims()[0], k = x.dims()[1], n = y.dims()[1];
  assert(y.dims()[0] == k);
  Tensor out({m, n});
  auto xd = x.data();
  auto yd = y.data();
  auto od = out.data();
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int64_t p = 0; p < k; ++p) acc += xd[i * k + p] * yd[p * n + j];
      od[i * n + j] = acc;
    }
  }
  return out;
}

Tensor Transpose(const Tensor& x, int64_t lhs, int64_t rhs) {
  std::vector<int64_t> dims = x.dims();
  std::swap(dims[lhs], dims[rhs]);
  Tensor out(dims);
  std::vector<int64_t> idx(x.rank(), 0);
  for (int64_t flat = 0; flat < x.size(); ++flat) {
    int64_t rem = flat;
    for (int64_t d = x.rank() - 1; d >= 0; --d) {
      idx[d] = rem % x.dims()[d];
      rem /= x.dims()[d];
    }
    std::vector<int64_t> oidx = idx;
    std::swap(oidx[lhs], oidx[rhs]);
    out.at(oidx) = x.data()[flat];
  }
  return out;
}

Tensor Reduce(const Tensor& x, int64_t dim, ReduceCombiner combiner) {
  Split3 s = SplitAround(x.dims(), dim);
  std::vector<int64_t> dims = x.dims();
  dims.erase(dims.begin() + dim);
  Tensor out(dims, Identity(combiner));
  auto xd = x.data();
  auto od = out.data();
  for (int64_t o = 0; o < s.outer; ++o) {
    for (int64_t m = 0; m < s.mid; ++m) {
      for (int64_t i = 0; i < s.inner; ++i) {
        double& acc = od[o * s.inner + i];
        acc = ApplyCombiner(combiner, acc, xd[(o * s.mid + m) * s.inner + i]);
      }
    }
  }
  return out;
}

Tensor Broadcast(const Tensor& x, int64_t dim, int64_t extent) {
  std::vector<int64_t> dims = x.dims();
  dims.insert(dims.begin() + dim, extent);
  Split3 s = SplitAround(dims, dim);
  Tensor out(dims);
  auto xd = x.data();
  auto od = out.data();
  for (int64_t o = 0; o < s.outer; ++o) {
    for (int64_t m = 0; m < s.mid; ++m) {
      for (int64_t i = 0; i < s.inner; ++i) {
        od[(o * s.mid + m) * s.inner + i] = xd[o * s.inner + i];
      }
    }
  }
  return out;
}

Tensor Binary(BinaryKind kind, const Tensor& x, const Tensor& y) {
  Tensor out(x.dims());
  auto xd = x.data();
  auto yd = y.data();
  auto od = out.data();
  for (int64_t i = 0; i < x.size(); ++i) {
    switch (kind) {
      case BinaryKind::kAdd:
        od[i] = xd[i] + yd[i];
        break;
      case BinaryKind::kMul:
        od[i] = xd[i] * yd[i];
        break;
      case BinaryKind::kSub:
        od[i] = xd[i] - yd[i];
        break;
      case BinaryKind::kDiv:
        od[i] = xd[i] / yd[i];
        break;
    }
  }
  return out;
}

Tensor Unary(UnaryKind kind, const Tensor& x) {
  Tensor out(x.dims());
  auto xd = x.data();
  auto od = out.data();
  for (int64_t i = 0; i < x.size(); ++i) {
    switch (kind) {
      case UnaryKind::kRelu:
        od[i] = xd[i] > 0.0 ? xd[i] : 0.0;
        break;
      case UnaryKind::kNeg:
        od[i] = -xd[i];
        break;
      case UnaryKind::kExp:
        od[i] = std::exp(xd[i]);
        break;
      case UnaryKind::kRecip:
        od[i] = 1.0 / xd[i];
        break;
    }
  }
  return out;
}

Tensor Combine(ReduceCombiner combiner, const Tensor& x, const Tensor& y) {
  Tensor out(x.dims());
  auto xd = x.data();
  auto yd = y.data();
  auto od = out.data();
  for (int64_t i = 0; i < x.size(); ++i) {
    od[i] = ApplyCombiner(combiner, xd[i], yd[i]);
  }
  return out;
}

Tensor Slice(const Tensor& x, int64_t dim, int64_t start, int64_t length) {
  Split3 s = SplitAround(x.dims(), dim);
  std::vector<int64_t> dims = x.dims();
  dims[dim] = length;
  Tensor out(dims);
  auto xd = x.data();
  auto od = out.data();
  for (int64_t o = 0; o < s.outer; ++o) {
    for (int64_t m = 0; m < length; ++m) {
      std::copy_n(xd.begin() + ((o * s.mid + start + m) * s.inner), s.inner,
                  od.begin() + ((o * length + m) * s.inner));
    }
  }
  return out;
}

Tensor Concat(std::span<const Tensor> parts, int64_t dim) {
  std::vector<int64_t> dims = parts.front().dims();
  int64_t total = 0;
  for (const Tensor& p : parts) total += p.dims()[dim];
  dims[dim] = total;
  Tensor out(dims);
  Split3 so = SplitAround(dims, dim);
  auto od = out.data();
  int64_t base = 0;
  for (const Tensor& p : parts) {
    Split3 sp = SplitAround(p.dims(), dim);
    auto pd = p.data();
    for (int64_t o = 0; o < sp.outer; ++o) {
      for (int64_t m = 0; m < sp.mid; ++m) {
        std::copy_n(pd.begin() + ((o * sp.mid + m) * sp.inner), sp.inner,
                    od.begin() + ((o * so.mid + base + m) * so.inner));
      }
    }
    base += sp.mid;
  }
  return out;
}

}  // namespace kernels

double MaxRelativeError(const Tensor& actual, const Tensor& expected) {
  if (actual.dims() != expected.dims()) {
    return std::numeric_limits<double>::infinity();
  }
  double worst = 0.0;
  for (int64_t i = 0; i < actual.size(); ++i) {
    double a = actual.data()[i], e = expected.data()[i];
    if (std::isnan(a) != std::isnan(e)) {
      return std::numeric_limits<double>::infinity();
    }
    if (std::isnan(a) || a == e) continue;
    worst = std::max(worst, std::abs(a - e) / std::max(1.0, std::abs(e)));
  }
  return worst;
}

}  // namespace autoshard
