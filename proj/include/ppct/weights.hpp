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

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>

#include "ppct/tensor.hpp"

namespace ppct::ir {

// Named f32 tensors, serialized to the .cpie container:
//   magic "CPIE", version u32=1, tensor count u32, then per tensor
//   { name_len u16, name bytes, rank u8, dims u32 x rank, payload f32 LE }.
// Iteration order is name-sorted, so save o load o save is byte-stable.
class WeightStore {
 public:
  void set(const std::string& name, TensorF tensor);
  const TensorF* find(const std::string& name) const;
  const TensorF& at(const std::string& name) const;  // IoError when missing
  bool contains(const std::string& name) const;
  std::size_t size() const { return tensors_.size(); }
  const std::map<std::string, TensorF>& tensors() const { return tensors_; }

 private:
  std::map<std::string, TensorF> tensors_;
};

// Returns the number of bytes written. Throws IoError on sink failure.
std::size_t save_weights(const WeightStore& store, std::ostream& sink);

// Inverse of save_weights. Throws FormatError (with byte offset) on bad
// magic/version/truncation.
WeightStore load_weights(std::istream& source);

void save_weights_file(const WeightStore& store, const std::string& path);
WeightStore load_weights_file(const std::string& path);

}  // namespace ppct::ir
