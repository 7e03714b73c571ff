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

#include "ppct/model.hpp"

#include <cmath>
#include <sstream>

#include "ppct/weights.hpp"

namespace ppct::ir {

const char* layer_kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::kInput:
      return "Input";
    case LayerKind::kConvolution:
      return "Convolution";
    case LayerKind::kRelu:
      return "ReLU";
    case LayerKind::kPool:
      return "Pooling";
    case LayerKind::kFullyConnected:
      return "InnerProduct";
  }
  return "?";
}

int ModelSpec::layer_index(const std::string& layer_name) const {
  for (std::size_t i = 0; i < layers.size(); ++i)
    if (layers[i].name == layer_name) return static_cast<int>(i);
  return -1;
}

const LayerSpec* ModelSpec::find_layer(const std::string& layer_name) const {
  int i = layer_index(layer_name);
  return i < 0 ? nullptr : &layers[static_cast<std::size_t>(i)];
}

std::vector<int> ModelSpec::conv_layer_indices() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < layers.size(); ++i)
    if (layers[i].kind == LayerKind::kConvolution)
      out.push_back(static_cast<int>(i));
  return out;
}

std::vector<int> ModelSpec::module_conv_layers(int m) const {
  std::vector<int> out;
  const ModuleSpec& mod = modules[static_cast<std::size_t>(m)];
  for (int i = mod.from; i <= mod.to; ++i)
    if (layers[static_cast<std::size_t>(i)].kind == LayerKind::kConvolution)
      out.push_back(i);
  return out;
}

std::string print_model(const ModelSpec& model) {
  std::ostringstream os;
  os << "name: \"" << model.name << "\"\n";
  for (const LayerSpec& l : model.layers) {
    os << "layer {\n";
    os << "  name: \"" << l.name << "\"\n";
    os << "  type: \"" << layer_kind_name(l.kind) << "\"\n";
    if (!l.bottom.empty()) os << "  bottom: \"" << l.bottom << "\"\n";
    os << "  top: \"" << l.top << "\"\n";
    switch (l.kind) {
      case LayerKind::kInput:
        os << "  input_param { dim: " << l.out_channels << " dim: " << l.out_h
           << " dim: " << l.out_w << " }\n";
        break;
      case LayerKind::kConvolution:
        os << "  convolution_param { num_output: " << l.conv.num_output
           << " kernel_h: " << l.conv.kernel_h
           << " kernel_w: " << l.conv.kernel_w << " stride: " << l.conv.stride
           << " pad: " << l.conv.pad << " }\n";
        break;
      case LayerKind::kPool:
        os << "  pooling_param { kernel_size: " << l.pool.kernel
           << " stride: " << l.pool.stride << " }\n";
        break;
      case LayerKind::kFullyConnected:
        os << "  inner_product_param { num_output: " << l.fc.num_output
           << " }\n";
        break;
      case LayerKind::kRelu:
        break;
    }
    os << "}\n";
  }
  for (const ModuleSpec& m : model.modules) {
    os << "module { name: \"" << m.name << "\" from: \""
       << model.layers[static_cast<std::size_t>(m.from)].name << "\" to: \""
       << model.layers[static_cast<std::size_t>(m.to)].name << "\" }\n";
  }
  return os.str();
}

namespace {

std::string dims_string(const std::vector<int>& dims) {
  std::string s = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(dims[i]);
  }
  return s + "]";
}

}  // namespace

std::vector<Violation> validate_model(const ModelSpec& model,
                                      const WeightStore& store) {
  std::vector<Violation> out;
  for (const LayerSpec& l : model.layers) {
    if (l.kind == LayerKind::kConvolution) {
      const TensorF* t = store.find(l.name);
      if (!t) {
        out.push_back({l.name, "missing weights"});
        continue;
      }
      std::vector<int> want = {l.conv.num_output, l.conv.channels,
                               l.conv.kernel_h, l.conv.kernel_w};
      if (t->dims() != want) {
        out.push_back({l.name, "dim mismatch: expected " + dims_string(want) +
                                   " got " + dims_string(t->dims())});
        continue;
      }
      for (float v : t->values())
        if (!std::isfinite(v)) {
          out.push_back({l.name, "non-finite weight value"});
          break;
        }
    } else if (l.kind == LayerKind::kFullyConnected) {
      const TensorF* t = store.find(l.name);
      if (!t) {
        out.push_back({l.name, "missing weights"});
        continue;
      }
      std::vector<int> want = {l.fc.num_output, l.fc.inputs};
      if (t->dims() != want) {
        out.push_back({l.name, "dim mismatch: expected " + dims_string(want) +
                                   " got " + dims_string(t->dims())});
        continue;
      }
      for (float v : t->values())
        if (!std::isfinite(v)) {
          out.push_back({l.name, "non-finite weight value"});
          break;
        }
    }
  }
  return out;
}

}  // namespace ppct::ir
