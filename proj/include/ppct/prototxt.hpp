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

#include "ppct/model.hpp"

namespace ppct::ir {

// Parses the supported Prototxt subset:
//   name: "net"
//   layer {
//     name: "..." type: "Input|Convolution|ReLU|Pooling|InnerProduct"
//     bottom: "..." top: "..."
//     input_param { dim: C dim: H dim: W }            (Input)
//     convolution_param { num_output kernel_size|kernel_h/kernel_w
//                         stride pad }                (Convolution)
//     pooling_param { kernel_size stride }            (Pooling)
//     inner_product_param { num_output }              (InnerProduct)
//   }
//   module { name: "..." from: "layer" to: "layer" }
//
// Anything outside the subset raises SyntaxError(line, col). Dangling
// bottom references, duplicate names, and overlapping modules raise
// SemanticError.
ModelSpec parse_prototxt(const std::string& text);

ModelSpec parse_prototxt_file(const std::string& path);

}  // namespace ppct::ir
