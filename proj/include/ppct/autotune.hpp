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

#include "ppct/execute.hpp"
#include "ppct/plan.hpp"

namespace ppct::engine {

struct TuneTraceRow {
  TuneConfig config;
  double median_ms = 0.0;
  std::uint64_t loads = 0;
  std::uint64_t macs = 0;
};

struct TuneResult {
  TuneConfig best;
  std::vector<TuneTraceRow> trace;
};

// Enumerates the declared grid in deterministic order (capped at `budget`
// configs), measures the median wall time of `repeats` executions each, and
// returns the argmin. Exact median ties keep the earlier grid config.
// Measurements run sequentially to keep the timer quiet.
TuneResult auto_tune(const LayerGeometry& geometry,
                     const prune::PatternAssignment& assignment,
                     const prune::PatternLibrary& library,
                     const TensorF& weights, const TensorF& input, int budget,
                     int repeats = 5);

std::string tune_trace_csv(const TuneResult& result);

struct BenchRow {
  std::string plan;
  double time_ms_median = 0.0;
  std::uint64_t loads = 0;
  std::uint64_t macs = 0;
  std::uint64_t group_switches = 0;
};

// Runs the pattern plan, the CSR plan, and the dense full-loop plan over
// the same pruned weights and input; all three compute the same function.
// Verifies the outputs agree within 1e-5 (ConsistencyError otherwise).
// Timings are reported, never asserted.
std::vector<BenchRow> bench_compare(const LayerGeometry& geometry,
                                    const TensorF& pruned_weights,
                                    const prune::PatternAssignment& assignment,
                                    const prune::PatternLibrary& library,
                                    const TensorF& input, int repeats = 5);

std::string bench_csv(const std::vector<BenchRow>& rows);

}  // namespace ppct::engine
