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

#include "ppct/autotune.hpp"

#include <algorithm>
#include <chrono>
#include <sstream>

namespace ppct::engine {

namespace {

double median_of(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace

TuneResult auto_tune(const LayerGeometry& geometry,
                     const prune::PatternAssignment& assignment,
                     const prune::PatternLibrary& library,
                     const TensorF& weights, const TensorF& input, int budget,
                     int repeats) {
  if (budget < 1) throw DomainError("auto_tune budget must be >= 1");
  if (repeats < 1) throw DomainError("auto_tune repeats must be >= 1");
  ReorderPlan reorder = filter_kernel_reorder(assignment);
  std::vector<TuneConfig> grid = tune_search_space();
  if (static_cast<int>(grid.size()) > budget)
    grid.resize(static_cast<std::size_t>(budget));

  TuneResult result;
  int best = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    ExecutionPlan plan = build_execution_plan(geometry, assignment, library,
                                              reorder, grid[i]);
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(repeats));
    for (int rep = 0; rep < repeats; ++rep)
      times.push_back(execute_plan(plan, weights, input).stats.time_ms);
    PlanStats stats = count_loads(plan);
    result.trace.push_back(
        {grid[i], median_of(std::move(times)), stats.loads, stats.macs});
    if (result.trace[i].median_ms < result.trace[static_cast<std::size_t>(best)]
                                        .median_ms)
      best = static_cast<int>(i);
  }
  result.best = grid[static_cast<std::size_t>(best)];
  return result;
}

std::string tune_trace_csv(const TuneResult& result) {
  std::ostringstream os;
  os << "tile_h,tile_w,order,unroll,median_ms,loads,macs\n";
  for (const TuneTraceRow& row : result.trace) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", row.median_ms);
    os << row.config.tile_h << "," << row.config.tile_w << ","
       << loop_order_name(row.config.order) << "," << row.config.unroll << ","
       << buf << "," << row.loads << "," << row.macs << "\n";
  }
  return os.str();
}

std::vector<BenchRow> bench_compare(const LayerGeometry& geometry,
                                    const TensorF& pruned_weights,
                                    const prune::PatternAssignment& assignment,
                                    const prune::PatternLibrary& library,
                                    const TensorF& input, int repeats) {
  if (repeats < 1) throw DomainError("bench repeats must be >= 1");
  ReorderPlan reorder = filter_kernel_reorder(assignment);
  ExecutionPlan plan = build_execution_plan(geometry, assignment, library,
                                            reorder, TuneConfig{});
  fkw::CsrLayer csr = fkw::encode_csr(pruned_weights);

  std::vector<double> pattern_times, csr_times, dense_times;
  TensorF pattern_out, csr_out, dense_out;
  PlanStats pattern_stats, csr_stats;
  for (int rep = 0; rep < repeats; ++rep) {
    ExecuteResult r1 = execute_plan(plan, pruned_weights, input);
    pattern_times.push_back(r1.stats.time_ms);
    pattern_out = std::move(r1.output);
    pattern_stats = r1.stats;

    ExecuteResult r2 = execute_csr(geometry, csr, input);
    csr_times.push_back(r2.stats.time_ms);
    csr_out = std::move(r2.output);
    csr_stats = r2.stats;

    auto t0 = std::chrono::steady_clock::now();
    dense_out = direct_conv(geometry, pruned_weights, input);
    auto t1 = std::chrono::steady_clock::now();
    dense_times.push_back(
        std::chrono::duration<double, std::milli>(t1 - t0).count());
  }

  if (max_abs_diff(pattern_out, csr_out) > 1e-5)
    throw ConsistencyError("pattern plan and CSR plan outputs disagree");
  if (max_abs_diff(pattern_out, dense_out) > 1e-5)
    throw ConsistencyError("pattern plan and dense plan outputs disagree");

  std::uint64_t out_area = static_cast<std::uint64_t>(geometry.out_h()) *
                           static_cast<std::uint64_t>(geometry.out_w());
  std::uint64_t dense_macs = static_cast<std::uint64_t>(geometry.filters) *
                             geometry.channels * geometry.kernel_h *
                             geometry.kernel_w * out_area;

  std::vector<BenchRow> rows;
  rows.push_back({"pattern", median_of(pattern_times), pattern_stats.loads,
                  pattern_stats.macs, pattern_stats.group_switches});
  rows.push_back({"csr", median_of(csr_times), csr_stats.loads,
                  csr_stats.macs, 0});
  rows.push_back({"dense", median_of(dense_times), dense_macs, dense_macs, 0});
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os << "plan,time_ms_median,loads,macs,group_switches\n";
  for (const BenchRow& row : rows) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", row.time_ms_median);
    os << row.plan << "," << buf << "," << row.loads << "," << row.macs << ","
       << row.group_switches << "\n";
  }
  return os.str();
}

}  // namespace ppct::engine
