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

#include "ppct/lr.hpp"

namespace ppct::ir {

std::vector<Violation> validate_lr(const ModelSpec& model,
                                   const LayerwiseRep& rep) {
  std::vector<Violation> out;
  if (rep.layer_index < 0 ||
      rep.layer_index >= static_cast<int>(model.layers.size())) {
    out.push_back({"?", "layer index out of range"});
    return out;
  }
  const LayerSpec& l =
      model.layers[static_cast<std::size_t>(rep.layer_index)];
  bool is_conv = l.kind == LayerKind::kConvolution;
  if (rep.patterns && !is_conv)
    out.push_back({l.name, "pattern metadata on a non-convolution layer"});
  if (rep.connectivity && !is_conv)
    out.push_back({l.name, "connectivity mask on a non-convolution layer"});
  if (is_conv) {
    std::size_t grid = static_cast<std::size_t>(l.conv.num_output) *
                       static_cast<std::size_t>(l.conv.channels);
    if (rep.patterns &&
        (rep.patterns->filters != l.conv.num_output ||
         rep.patterns->channels != l.conv.channels))
      out.push_back({l.name, "pattern assignment dims do not match layer"});
    if (rep.connectivity && rep.connectivity->size() != grid)
      out.push_back({l.name, "connectivity mask dims do not match layer"});
  }
  return out;
}

}  // namespace ppct::ir
