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

#include "ppct/plan.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

namespace ppct::engine {

void LayerGeometry::validate() const {
  if (channels < 1 || in_h < 1 || in_w < 1 || kernel_h < 1 || kernel_w < 1 ||
      filters < 1)
    throw ShapeError("layer geometry has empty dimensions");
  if (stride < 1) throw ShapeError("stride must be >= 1");
  if (pad < 0) throw ShapeError("pad must be >= 0");
  if (out_h() < 1 || out_w() < 1)
    throw ShapeError("layer geometry yields an empty output");
}

ReorderPlan filter_kernel_reorder(const prune::PatternAssignment& assignment) {
  int filters = assignment.filters;
  struct Key {
    int kept;
    std::vector<int> signature;
  };
  std::vector<Key> keys(static_cast<std::size_t>(filters));
  for (int f = 0; f < filters; ++f) {
    keys[static_cast<std::size_t>(f)].signature = assignment.filter_signature(f);
    keys[static_cast<std::size_t>(f)].kept =
        static_cast<int>(keys[static_cast<std::size_t>(f)].signature.size());
  }

  ReorderPlan plan;
  plan.perm.resize(static_cast<std::size_t>(filters));
  std::iota(plan.perm.begin(), plan.perm.end(), 0);
  std::stable_sort(plan.perm.begin(), plan.perm.end(), [&](int a, int b) {
    const Key& ka = keys[static_cast<std::size_t>(a)];
    const Key& kb = keys[static_cast<std::size_t>(b)];
    if (ka.kept != kb.kept) return ka.kept > kb.kept;
    return ka.signature < kb.signature;
  });
  plan.inv_perm.resize(static_cast<std::size_t>(filters));
  for (int pos = 0; pos < filters; ++pos)
    plan.inv_perm[static_cast<std::size_t>(
        plan.perm[static_cast<std::size_t>(pos)])] = pos;

  int pos = 0;
  while (pos < filters) {
    const Key& k = keys[static_cast<std::size_t>(
        plan.perm[static_cast<std::size_t>(pos)])];
    int end = pos + 1;
    while (end < filters) {
      const Key& k2 = keys[static_cast<std::size_t>(
          plan.perm[static_cast<std::size_t>(end)])];
      if (k2.kept != k.kept || k2.signature != k.signature) break;
      ++end;
    }
    plan.groups.push_back({pos, end, k.kept, k.signature});
    pos = end;
  }
  return plan;
}

const char* loop_order_name(LoopOrder o) {
  switch (o) {
    case LoopOrder::kChannelRowCol:
      return "crw";
    case LoopOrder::kRowChannelCol:
      return "rcw";
    case LoopOrder::kRowColChannel:
      return "rwc";
    case LoopOrder::kColRowChannel:
      return "wrc";
  }
  return "?";
}

std::string TuneConfig::to_string() const {
  std::ostringstream os;
  os << "tile_h=" << tile_h << " tile_w=" << tile_w
     << " order=" << loop_order_name(order) << " unroll=" << unroll;
  return os.str();
}

std::vector<TuneConfig> tune_search_space() {
  static const int kTiles[] = {1, 2, 4, 8};
  static const LoopOrder kOrders[] = {
      LoopOrder::kChannelRowCol, LoopOrder::kRowChannelCol,
      LoopOrder::kRowColChannel, LoopOrder::kColRowChannel};
  static const int kUnrolls[] = {1, 2, 4};
  std::vector<TuneConfig> out;
  for (int th : kTiles)
    for (int tw : kTiles)
      for (LoopOrder o : kOrders)
        for (int u : kUnrolls) out.push_back({th, tw, o, u});
  return out;
}

ExecutionPlan build_execution_plan(const LayerGeometry& geometry,
                                   const prune::PatternAssignment& assignment,
                                   const prune::PatternLibrary& library,
                                   const ReorderPlan& reorder,
                                   const TuneConfig& tune, bool lre_enabled) {
  geometry.validate();
  if (assignment.filters != geometry.filters ||
      assignment.channels != geometry.channels)
    throw DimMismatchError("assignment dims do not match layer geometry");
  if (library.kernel_h != geometry.kernel_h ||
      library.kernel_w != geometry.kernel_w)
    throw DimMismatchError("library kernel dims do not match layer geometry");

  ExecutionPlan plan;
  plan.geometry = geometry;
  plan.reorder = reorder;
  plan.tune = tune;
  plan.lre_enabled = lre_enabled;
  plan.library = library;
  plan.assignment = assignment;

  // Per-kernel-row column lists for each pattern, precomputed once.
  std::vector<std::vector<std::vector<int>>> rows_of(
      static_cast<std::size_t>(library.size()));
  for (int p = 0; p < library.size(); ++p) {
    rows_of[static_cast<std::size_t>(p)].resize(
        static_cast<std::size_t>(geometry.kernel_h));
    for (const auto& [r, col] :
         library.patterns[static_cast<std::size_t>(p)].entries)
      rows_of[static_cast<std::size_t>(p)][static_cast<std::size_t>(r)]
          .push_back(col);
  }

  // Distinct windows per (group, channel, kernel row): kernels with the same
  // column list share one window; differing patterns keep their own.
  plan.load_schedule.resize(reorder.groups.size());
  for (std::size_t g = 0; g < reorder.groups.size(); ++g) {
    const ReorderPlan::Group& grp = reorder.groups[g];
    for (int c = 0; c < geometry.channels; ++c) {
      for (int r = 0; r < geometry.kernel_h; ++r) {
        std::map<std::vector<int>, int> windows;
        for (int pos = grp.begin; pos < grp.end; ++pos) {
          int f = reorder.perm[static_cast<std::size_t>(pos)];
          int idx = assignment.at(f, c);
          if (idx == prune::PatternAssignment::kRemoved) continue;
          const std::vector<int>& cols =
              rows_of[static_cast<std::size_t>(idx)][static_cast<std::size_t>(r)];
          if (cols.empty()) continue;
          ++windows[cols];
        }
        for (const auto& [cols, count] : windows)
          plan.load_schedule[g].push_back({c, r, cols, count});
      }
    }
  }
  return plan;
}

std::uint64_t sweep_distinct_columns(const std::vector<int>& columns,
                                     int out_w, int stride) {
  if (columns.empty() || out_w <= 0) return 0;
  int lo = *std::min_element(columns.begin(), columns.end());
  int hi = *std::max_element(columns.begin(), columns.end()) +
           (out_w - 1) * stride;
  std::vector<bool> touched(static_cast<std::size_t>(hi - lo + 1), false);
  for (int col : columns)
    for (int ow = 0; ow < out_w; ++ow)
      touched[static_cast<std::size_t>(col + ow * stride - lo)] = true;
  return static_cast<std::uint64_t>(
      std::count(touched.begin(), touched.end(), true));
}

PlanStats count_loads(const ExecutionPlan& plan) {
  const LayerGeometry& g = plan.geometry;
  PlanStats stats;
  std::uint64_t out_area =
      static_cast<std::uint64_t>(g.out_h()) * static_cast<std::uint64_t>(g.out_w());
  stats.macs = static_cast<std::uint64_t>(plan.assignment.kept_count()) *
               static_cast<std::uint64_t>(plan.library.arity) * out_area;

  for (const auto& group_windows : plan.load_schedule) {
    for (const ExecutionPlan::Window& w : group_windows) {
      if (plan.lre_enabled) {
        stats.loads += sweep_distinct_columns(w.columns, g.out_w(), g.stride) *
                       static_cast<std::uint64_t>(g.out_h());
      } else {
        stats.loads += static_cast<std::uint64_t>(w.kernel_count) *
                       static_cast<std::uint64_t>(w.columns.size()) *
                       static_cast<std::uint64_t>(g.out_w()) *
                       static_cast<std::uint64_t>(g.out_h());
      }
    }
  }

  std::uint64_t tiles_h = static_cast<std::uint64_t>(
      (g.out_h() + plan.tune.tile_h - 1) / plan.tune.tile_h);
  std::uint64_t tiles_w = static_cast<std::uint64_t>(
      (g.out_w() + plan.tune.tile_w - 1) / plan.tune.tile_w);
  stats.group_switches =
      static_cast<std::uint64_t>(plan.reorder.groups.size()) * tiles_h *
      tiles_w;
  return stats;
}

std::string dump_plan(const ExecutionPlan& plan) {
  std::ostringstream os;
  const LayerGeometry& g = plan.geometry;
  os << "geometry: filters=" << g.filters << " channels=" << g.channels
     << " in=" << g.in_h << "x" << g.in_w << " kernel=" << g.kernel_h << "x"
     << g.kernel_w << " stride=" << g.stride << " pad=" << g.pad
     << " out=" << g.out_h() << "x" << g.out_w() << "\n";
  os << "tune: " << plan.tune.to_string() << "\n";
  os << "lre: " << (plan.lre_enabled ? "on" : "off") << "\n";
  os << "perm:";
  for (int f : plan.reorder.perm) os << " " << f;
  os << "\n";
  for (std::size_t i = 0; i < plan.reorder.groups.size(); ++i) {
    const ReorderPlan::Group& grp = plan.reorder.groups[i];
    os << "group " << i << ": pos=[" << grp.begin << "," << grp.end
       << ") kept=" << grp.kept << " signature=";
    for (std::size_t j = 0; j < grp.signature.size(); ++j) {
      if (j) os << ",";
      os << grp.signature[j];
    }
    os << " windows=" << plan.load_schedule[i].size() << "\n";
  }
  PlanStats s = count_loads(plan);
  os << "static: loads=" << s.loads << " macs=" << s.macs
     << " group_switches=" << s.group_switches << "\n";
  return os.str();
}

}  // namespace ppct::engine
