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

#include <optional>
#include <vector>

#include "ppct/model.hpp"
#include "ppct/pattern.hpp"
#include "ppct/plan.hpp"

namespace ppct::ir {

// Fine-grained per-layer record the compilation pipeline hangs pattern and
// tuning metadata on.
struct LayerwiseRep {
  int layer_index = -1;
  std::optional<prune::PatternAssignment> patterns;
  std::optional<std::vector<std::uint8_t>> connectivity;  // F*C keep flags
  std::optional<engine::TuneConfig> tune;
};

struct ModelRep {
  std::vector<LayerwiseRep> layers;
};

// Pattern metadata is only legal on convolution layers and must match the
// layer's (num_output x channels) kernel grid.
std::vector<Violation> validate_lr(const ModelSpec& model,
                                   const LayerwiseRep& rep);

}  // namespace ppct::ir
