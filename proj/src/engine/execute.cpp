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

#include "ppct/execute.hpp"

#include <algorithm>
#include <chrono>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ppct::engine {

namespace {

// Pattern offsets flattened per (filter, channel) for fast interpretation.
struct Microkernels {
  // entries[f * C + c] -> list of (kr, kc); empty when removed
  std::vector<std::vector<std::pair<int, int>>> entries;
};

Microkernels lower_microkernels(const ExecutionPlan& plan) {
  const LayerGeometry& g = plan.geometry;
  Microkernels mk;
  mk.entries.resize(static_cast<std::size_t>(g.filters) * g.channels);
  for (int f = 0; f < g.filters; ++f) {
    for (int c = 0; c < g.channels; ++c) {
      int idx = plan.assignment.at(f, c);
      if (idx == prune::PatternAssignment::kRemoved) continue;
      mk.entries[static_cast<std::size_t>(f) * g.channels + c] =
          plan.library.patterns[static_cast<std::size_t>(idx)].entries;
    }
  }
  return mk;
}

// Accumulates one (filter, channel, output tile) contribution. The entry
// order inside a kernel is fixed, so per-element arithmetic order does not
// depend on the filter's position in the permutation.
inline void accumulate_tile(const TensorF& weights, const TensorF& input,
                            float* out_row_base, int f, int c, int oh0,
                            int oh1, int ow0, int ow1, int out_w,
                            const std::vector<std::pair<int, int>>& entries,
                            const LayerGeometry& g, int unroll) {
  (void)unroll;  // unrolling is a scheduling hint; arithmetic is identical
  for (int oh = oh0; oh < oh1; ++oh) {
    float* out_row = out_row_base + static_cast<std::size_t>(oh) * out_w;
    for (int ow = ow0; ow < ow1; ++ow) {
      float acc = 0.0f;
      for (const auto& [kr, kc] : entries) {
        int ih = oh * g.stride - g.pad + kr;
        int iw = ow * g.stride - g.pad + kc;
        if (ih < 0 || ih >= g.in_h || iw < 0 || iw >= g.in_w) continue;
        acc += weights.at4(f, c, kr, kc) * input.at3(c, ih, iw);
      }
      out_row[ow] += acc;
    }
  }
}

void run_filter(const ExecutionPlan& plan, const Microkernels& mk,
                const TensorF& weights, const TensorF& input, TensorF& out,
                int f) {
  const LayerGeometry& g = plan.geometry;
  const TuneConfig& t = plan.tune;
  int oh_n = g.out_h(), ow_n = g.out_w();
  float* base = out.data() + static_cast<std::size_t>(f) * oh_n * ow_n;

  auto tile_channel = [&](int c, int oh0, int oh1, int ow0, int ow1) {
    const auto& entries =
        mk.entries[static_cast<std::size_t>(f) * g.channels + c];
    if (entries.empty()) return;
    accumulate_tile(weights, input, base, f, c, oh0, oh1, ow0, ow1, ow_n,
                    entries, g, t.unroll);
  };

  switch (t.order) {
    case LoopOrder::kChannelRowCol:
      for (int c = 0; c < g.channels; ++c)
        for (int oh = 0; oh < oh_n; oh += t.tile_h)
          for (int ow = 0; ow < ow_n; ow += t.tile_w)
            tile_channel(c, oh, std::min(oh + t.tile_h, oh_n), ow,
                         std::min(ow + t.tile_w, ow_n));
      break;
    case LoopOrder::kRowChannelCol:
      for (int oh = 0; oh < oh_n; oh += t.tile_h)
        for (int c = 0; c < g.channels; ++c)
          for (int ow = 0; ow < ow_n; ow += t.tile_w)
            tile_channel(c, oh, std::min(oh + t.tile_h, oh_n), ow,
                         std::min(ow + t.tile_w, ow_n));
      break;
    case LoopOrder::kRowColChannel:
      for (int oh = 0; oh < oh_n; oh += t.tile_h)
        for (int ow = 0; ow < ow_n; ow += t.tile_w)
          for (int c = 0; c < g.channels; ++c)
            tile_channel(c, oh, std::min(oh + t.tile_h, oh_n), ow,
                         std::min(ow + t.tile_w, ow_n));
      break;
    case LoopOrder::kColRowChannel:
      for (int ow = 0; ow < ow_n; ow += t.tile_w)
        for (int oh = 0; oh < oh_n; oh += t.tile_h)
          for (int c = 0; c < g.channels; ++c)
            tile_channel(c, oh, std::min(oh + t.tile_h, oh_n), ow,
                         std::min(ow + t.tile_w, ow_n));
      break;
  }
}

}  // namespace

ExecuteResult execute_plan(const ExecutionPlan& plan, const TensorF& weights,
                           const TensorF& input, int threads) {
  const LayerGeometry& g = plan.geometry;
  if (weights.rank() != 4 || weights.dim(0) != g.filters ||
      weights.dim(1) != g.channels || weights.dim(2) != g.kernel_h ||
      weights.dim(3) != g.kernel_w)
    throw DimMismatchError("weight dims do not match plan geometry");
  if (input.rank() != 3 || input.dim(0) != g.channels ||
      input.dim(1) != g.in_h || input.dim(2) != g.in_w)
    throw DimMismatchError("input dims do not match plan geometry");

  Microkernels mk = lower_microkernels(plan);
  ExecuteResult result;
  result.output = TensorF({g.filters, g.out_h(), g.out_w()});

  auto t0 = std::chrono::steady_clock::now();
#ifdef _OPENMP
  if (threads != 1) {
    int n = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(n)
    for (int pos = 0; pos < g.filters; ++pos)
      run_filter(plan, mk, weights, input, result.output,
                 plan.reorder.perm[static_cast<std::size_t>(pos)]);
  } else
#endif
  {
    (void)threads;
    for (int pos = 0; pos < g.filters; ++pos)
      run_filter(plan, mk, weights, input, result.output,
                 plan.reorder.perm[static_cast<std::size_t>(pos)]);
  }
  auto t1 = std::chrono::steady_clock::now();

  result.stats = count_loads(plan);
  result.stats.time_ms =
      std::chrono::duration<double, std::milli>(t1 - t0).count();
  return result;
}

TensorF direct_conv(const LayerGeometry& g, const TensorF& weights,
                    const TensorF& input) {
  g.validate();
  if (weights.rank() != 4 || weights.dim(0) != g.filters ||
      weights.dim(1) != g.channels || weights.dim(2) != g.kernel_h ||
      weights.dim(3) != g.kernel_w)
    throw DimMismatchError("weight dims do not match geometry");
  if (input.rank() != 3 || input.dim(0) != g.channels ||
      input.dim(1) != g.in_h || input.dim(2) != g.in_w)
    throw DimMismatchError("input dims do not match geometry");

  TensorF out({g.filters, g.out_h(), g.out_w()});
  for (int f = 0; f < g.filters; ++f)
    for (int oh = 0; oh < g.out_h(); ++oh)
      for (int ow = 0; ow < g.out_w(); ++ow) {
        float acc = 0.0f;
        for (int c = 0; c < g.channels; ++c)
          for (int kr = 0; kr < g.kernel_h; ++kr)
            for (int kc = 0; kc < g.kernel_w; ++kc) {
              int ih = oh * g.stride - g.pad + kr;
              int iw = ow * g.stride - g.pad + kc;
              if (ih < 0 || ih >= g.in_h || iw < 0 || iw >= g.in_w) continue;
              acc += weights.at4(f, c, kr, kc) * input.at3(c, ih, iw);
            }
        out.at3(f, oh, ow) = acc;
      }
  return out;
}

ExecuteResult execute_csr(const LayerGeometry& g, const fkw::CsrLayer& csr,
                          const TensorF& input) {
  g.validate();
  if (csr.filters != g.filters ||
      csr.cols != g.channels * g.kernel_h * g.kernel_w)
    throw DimMismatchError("CSR dims do not match geometry");
  if (input.rank() != 3 || input.dim(0) != g.channels ||
      input.dim(1) != g.in_h || input.dim(2) != g.in_w)
    throw DimMismatchError("input dims do not match geometry");

  ExecuteResult result;
  result.output = TensorF({g.filters, g.out_h(), g.out_w()});
  auto t0 = std::chrono::steady_clock::now();
  for (int f = 0; f < g.filters; ++f) {
    for (int oh = 0; oh < g.out_h(); ++oh)
      for (int ow = 0; ow < g.out_w(); ++ow) {
        float acc = 0.0f;
        for (std::uint32_t i = csr.row_ptr[static_cast<std::size_t>(f)];
             i < csr.row_ptr[static_cast<std::size_t>(f) + 1]; ++i) {
          int col = static_cast<int>(csr.col_idx[i]);
          int c = col / (g.kernel_h * g.kernel_w);
          int rem = col % (g.kernel_h * g.kernel_w);
          int kr = rem / g.kernel_w;
          int kc = rem % g.kernel_w;
          int ih = oh * g.stride - g.pad + kr;
          int iw = ow * g.stride - g.pad + kc;
          if (ih < 0 || ih >= g.in_h || iw < 0 || iw >= g.in_w) continue;
          acc += csr.values[i] * input.at3(c, ih, iw);
        }
        result.output.at3(f, oh, ow) = acc;
      }
  }
  auto t1 = std::chrono::steady_clock::now();

  std::uint64_t out_area = static_cast<std::uint64_t>(g.out_h()) *
                           static_cast<std::uint64_t>(g.out_w());
  result.stats.macs = csr.values.size() * out_area;
  result.stats.loads = csr.values.size() * out_area;  // one load per MAC
  result.stats.group_switches = 0;
  result.stats.time_ms =
      std::chrono::duration<double, std::milli>(t1 - t0).count();
  return result;
}

}  // namespace ppct::engine
