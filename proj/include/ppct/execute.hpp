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

#include "ppct/fkw.hpp"
#include "ppct/plan.hpp"
#include "ppct/tensor.hpp"

namespace ppct::engine {

struct ExecuteResult {
  TensorF output;  // [filters, out_h, out_w]
  PlanStats stats;
};

// Interprets the plan over a [C, H, W] input. Filters run in the permuted
// group order; each output channel is written at its original filter index.
// Per-element accumulation order depends only on the tune config, so the
// result is bitwise identical for any thread count. threads <= 0 uses the
// OpenMP default.
ExecuteResult execute_plan(const ExecutionPlan& plan, const TensorF& weights,
                           const TensorF& input, int threads = 1);

// Serial dense direct convolution over the plain 7-loop nest. Reference
// path for benchmarks and the dense plan in comparisons.
TensorF direct_conv(const LayerGeometry& geometry, const TensorF& weights,
                    const TensorF& input);

// CSR-driven execution of the same convolution.
ExecuteResult execute_csr(const LayerGeometry& geometry,
                          const fkw::CsrLayer& csr, const TensorF& input);

}  // namespace ppct::engine
