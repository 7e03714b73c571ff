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
#include <string>
#include <vector>

#include "ppct/pattern.hpp"
#include "ppct/tensor.hpp"

namespace ppct::engine {

struct LayerGeometry {
  int channels = 0;
  int in_h = 0;
  int in_w = 0;
  int kernel_h = 0;
  int kernel_w = 0;
  int stride = 1;
  int pad = 0;
  int filters = 0;

  int out_h() const { return (in_h + 2 * pad - kernel_h) / stride + 1; }
  int out_w() const { return (in_w + 2 * pad - kernel_w) / stride + 1; }
  void validate() const;  // ShapeError on degenerate shapes
};

// Filters regrouped so that equal (kept-kernel count, pattern signature)
// keys are contiguous; sorted by descending kept count, then signature.
struct ReorderPlan {
  std::vector<int> perm;      // perm[new_pos] = original filter
  std::vector<int> inv_perm;  // inv_perm[original] = new_pos
  struct Group {
    int begin = 0;  // permuted positions [begin, end)
    int end = 0;
    int kept = 0;
    std::vector<int> signature;  // sorted pattern ids of kept kernels
  };
  std::vector<Group> groups;
};

ReorderPlan filter_kernel_reorder(const prune::PatternAssignment& assignment);

enum class LoopOrder {
  kChannelRowCol,  // c outermost, then output rows, then cols
  kRowChannelCol,
  kRowColChannel,
  kColRowChannel,
};

const char* loop_order_name(LoopOrder o);

struct TuneConfig {
  int tile_h = 1;
  int tile_w = 1;
  LoopOrder order = LoopOrder::kChannelRowCol;
  int unroll = 1;

  bool operator==(const TuneConfig& o) const {
    return tile_h == o.tile_h && tile_w == o.tile_w && order == o.order &&
           unroll == o.unroll;
  }
  std::string to_string() const;
};

// The declared search space, enumerated in deterministic grid order.
std::vector<TuneConfig> tune_search_space();

struct PlanStats {
  std::uint64_t loads = 0;  // scalar input loads
  std::uint64_t macs = 0;
  std::uint64_t group_switches = 0;
  double time_ms = 0.0;  // bench mode only
};

// Interpretable description of one pruned layer's computation.
struct ExecutionPlan {
  LayerGeometry geometry;
  ReorderPlan reorder;
  TuneConfig tune;
  bool lre_enabled = true;
  prune::PatternLibrary library;
  prune::PatternAssignment assignment;

  // One input window shared by `kernel_count` kernels of a group: the
  // distinct kernel-row column offsets they touch in one output-row sweep.
  struct Window {
    int channel = 0;
    int row = 0;                // kernel row
    std::vector<int> columns;   // sorted kernel-column offsets
    int kernel_count = 0;       // kernels of the group sharing this window
  };
  // load_schedule[g] lists group g's windows (channel-major, row-minor).
  std::vector<std::vector<Window>> load_schedule;
};

ExecutionPlan build_execution_plan(const LayerGeometry& geometry,
                                   const prune::PatternAssignment& assignment,
                                   const prune::PatternLibrary& library,
                                   const ReorderPlan& reorder,
                                   const TuneConfig& tune,
                                   bool lre_enabled = true);

// Analytic stats; no execution. With lre_enabled the per-window loads are
// the distinct input columns touched over an output-row sweep; without it
// they follow the naive one-load-per-MAC formula.
PlanStats count_loads(const ExecutionPlan& plan);

// Distinct input columns touched by `columns` over an output-row sweep.
std::uint64_t sweep_distinct_columns(const std::vector<int>& columns,
                                     int out_w, int stride);

std::string dump_plan(const ExecutionPlan& plan);

}  // namespace ppct::engine
