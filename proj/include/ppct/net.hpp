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

#include "ppct/model.hpp"
#include "ppct/tensor.hpp"
#include "ppct/weights.hpp"

namespace ppct::train {

// Double-precision toy CNN instantiated from a ModelSpec. Gradients are
// exact analytic derivatives; weight files stay f32 at the boundary.
class ToyNet {
 public:
  struct ConvLayer {
    int filters = 0, channels = 0, kh = 0, kw = 0, stride = 1, pad = 0;
    std::vector<double> w;  // [F,C,kh,kw]
    std::vector<double> b;  // [F]
    std::vector<std::uint8_t> mask;  // keep flags per weight; empty = dense
  };
  struct PoolLayer {
    int kernel = 2, stride = 2;
  };
  struct FcLayer {
    int out = 0, in = 0;
    std::vector<double> w;  // [out, in]
    std::vector<double> b;  // [out]
    std::vector<std::uint8_t> mask;
  };
  struct Layer {
    ir::LayerKind kind = ir::LayerKind::kRelu;
    std::string name;
    ConvLayer conv;
    PoolLayer pool;
    FcLayer fc;
  };

  int input_c = 0, input_h = 0, input_w = 0;
  std::vector<Layer> layers;

  // Instantiates from a parsed model; conv/fc weights come from the store
  // (biases from "<name>.bias" when present, zero otherwise).
  static ToyNet from_model(const ir::ModelSpec& model,
                           const ir::WeightStore& store);

  ir::WeightStore to_weights() const;
  long parameter_count() const;  // unmasked weights + biases
  void zero_masked();            // re-applies masks to the weights
  int layer_index(const std::string& name) const;

  // Raw parameter bytes, for immutability checks.
  std::vector<double> flatten_params() const;
};

enum class LossKind { kCrossEntropy, kMse };

struct Activations {
  // values[0] is the input batch; values[i + 1] is layer i's output.
  std::vector<TensorD> values;
};

struct ForwardResult {
  Activations acts;
  double loss = 0.0;
};

// Forward through layers [lo, hi) from `input` ([N, C, H, W]).
Activations forward_range(const ToyNet& net, const TensorD& input, int lo,
                          int hi);

// Whole-net forward with softmax cross-entropy against labels.
ForwardResult forward(const ToyNet& net, const TensorD& batch,
                      const std::vector<int>& labels);

double mse_loss(const TensorD& out, const TensorD& target);

struct LayerGrads {
  std::vector<double> w;
  std::vector<double> b;
};

struct NetGradients {
  std::vector<LayerGrads> layers;
};

// Analytic gradients of the cross-entropy loss.
NetGradients gradients(const ToyNet& net, const TensorD& batch,
                       const std::vector<int>& labels);

// Analytic gradients of the MSE reconstruction loss over layers [lo, hi).
NetGradients gradients_range(const ToyNet& net, const TensorD& input,
                             const TensorD& target, int lo, int hi);

}  // namespace ppct::train
