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

#include <string>
#include <vector>

#include "ppct/error.hpp"
#include "ppct/tensor.hpp"

namespace ppct::ir {

enum class LayerKind { kInput, kConvolution, kRelu, kPool, kFullyConnected };

const char* layer_kind_name(LayerKind k);

struct ConvParam {
  int num_output = 0;
  int channels = 0;  // inferred from the producing layer
  int kernel_h = 0;
  int kernel_w = 0;
  int stride = 1;
  int pad = 0;
};

struct PoolParam {
  int kernel = 2;
  int stride = 2;
};

struct FcParam {
  int num_output = 0;
  int inputs = 0;  // inferred: flattened producer shape
};

struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::kInput;
  std::string bottom;  // empty for input layers
  std::string top;
  ConvParam conv;
  PoolParam pool;
  FcParam fc;
  // Inferred activation shape of `top`.
  int out_channels = 0;
  int out_h = 0;
  int out_w = 0;
};

// Contiguous range of layer indices, inclusive on both ends.
struct ModuleSpec {
  std::string name;
  int from = 0;
  int to = 0;
};

struct ModelSpec {
  std::string name;
  std::vector<LayerSpec> layers;
  std::vector<ModuleSpec> modules;
  int input_c = 0;
  int input_h = 0;
  int input_w = 0;

  int layer_index(const std::string& name) const;  // -1 when absent
  const LayerSpec* find_layer(const std::string& name) const;
  std::vector<int> conv_layer_indices() const;
  // Conv layers inside module m, in layer order.
  std::vector<int> module_conv_layers(int m) const;
};

// Canonical text form; parse_prototxt(print_model(m)) reproduces m.
std::string print_model(const ModelSpec& model);

struct Violation {
  std::string layer;
  std::string message;
};

// Empty result iff every conv/FC layer has a weight tensor with matching
// dims, all values are finite, and the model invariants hold.
class WeightStore;
std::vector<Violation> validate_model(const ModelSpec& model,
                                      const WeightStore& store);

}  // namespace ppct::ir
