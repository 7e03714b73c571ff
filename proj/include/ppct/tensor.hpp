// Copyright (c) 2026 The ppct Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "ppct/error.hpp"

namespace ppct {

// Dense row-major tensor. Weights are float at file boundaries; the trainer
// instantiates the double variant.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> dims) : dims_(std::move(dims)) {
    std::size_t n = 1;
    for (int d : dims_) {
      if (d < 0) throw ShapeError("negative tensor dimension");
      n *= static_cast<std::size_t>(d);
    }
    data_.assign(n, T{});
  }
  Tensor(std::vector<int> dims, std::vector<T> data)
      : dims_(std::move(dims)), data_(std::move(data)) {
    std::size_t n = 1;
    for (int d : dims_) n *= static_cast<std::size_t>(d);
    if (n != data_.size()) throw ShapeError("tensor data/dims size mismatch");
  }

  int rank() const { return static_cast<int>(dims_.size()); }
  const std::vector<int>& dims() const { return dims_; }
  int dim(int i) const { return dims_[static_cast<std::size_t>(i)]; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& values() { return data_; }
  const std::vector<T>& values() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  // 4-d accessors for [filters, channels, kh, kw] weight layouts.
  T& at4(int a, int b, int c, int d) { return data_[idx4(a, b, c, d)]; }
  const T& at4(int a, int b, int c, int d) const {
    return data_[idx4(a, b, c, d)];
  }
  std::size_t idx4(int a, int b, int c, int d) const {
    return ((static_cast<std::size_t>(a) * dims_[1] + b) * dims_[2] + c) *
               dims_[3] +
           d;
  }

  // 3-d accessors for [channels, h, w] activation layouts.
  T& at3(int a, int b, int c) { return data_[idx3(a, b, c)]; }
  const T& at3(int a, int b, int c) const { return data_[idx3(a, b, c)]; }
  std::size_t idx3(int a, int b, int c) const {
    return (static_cast<std::size_t>(a) * dims_[1] + b) * dims_[2] + c;
  }

  bool operator==(const Tensor& other) const {
    return dims_ == other.dims_ && data_ == other.data_;
  }

 private:
  std::vector<int> dims_;
  std::vector<T> data_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

template <typename T>
double max_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.dims() != b.dims()) throw DimMismatchError("tensor dims differ");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    if (d < 0) d = -d;
    if (d > m) m = d;
  }
  return m;
}

}  // namespace ppct
