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

// Compares the serial dense reference against the pattern-plan interpreter
// at one and all hardware threads, plus the CSR executor. Wall times here
// are informational; output equivalence is the only hard claim.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ppct/autotune.hpp"
#include "ppct/execute.hpp"
#include "ppct/pattern.hpp"

using namespace ppct;

namespace {

TensorF random_tensor(const std::vector<int>& dims, std::uint64_t seed) {
  TensorF t(dims);
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> dist(0.0f, 1.0f);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
  return t;
}

double time_ms(const std::function<void()>& fn, int repeats) {
  std::vector<double> times;
  for (int i = 0; i < repeats; ++i) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    auto t1 = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

}  // namespace

int main(int argc, char** argv) {
  int filters = 64, channels = 32, size = 32;
  int repeats = 5;
  if (argc > 1) size = std::atoi(argv[1]);
  if (argc > 2) filters = std::atoi(argv[2]);
  if (argc > 3) channels = std::atoi(argv[3]);
  if (argc > 4) repeats = std::atoi(argv[4]);

  engine::LayerGeometry g;
  g.channels = channels;
  g.in_h = g.in_w = size;
  g.kernel_h = g.kernel_w = 3;
  g.stride = 1;
  g.pad = 1;
  g.filters = filters;

  TensorF weights = random_tensor({filters, channels, 3, 3}, 7);
  TensorF input = random_tensor({channels, size, size}, 11);

  prune::PatternLibrary lib = prune::design_pattern_library(weights, 4, 8);
  prune::PatternAssignment assignment =
      prune::assign_kernel_patterns(weights, lib);
  prune::apply_connectivity(assignment,
                            prune::connectivity_prune(weights, 0.25));
  auto [pruned, summary] = prune::apply_pruning(weights, assignment, lib);

  engine::ReorderPlan reorder = engine::filter_kernel_reorder(assignment);
  engine::TuneConfig tune;
  tune.tile_h = 4;
  tune.tile_w = 4;
  engine::ExecutionPlan plan =
      engine::build_execution_plan(g, assignment, lib, reorder, tune);
  fkw::CsrLayer csr = fkw::encode_csr(pruned);

  TensorF ref = engine::direct_conv(g, pruned, input);
  engine::ExecuteResult serial = engine::execute_plan(plan, pruned, input, 1);
  engine::ExecuteResult parallel =
      engine::execute_plan(plan, pruned, input, 0);
  engine::ExecuteResult sparse = engine::execute_csr(g, csr, input);

  double err_serial = max_abs_diff(ref, serial.output);
  double err_parallel = max_abs_diff(ref, parallel.output);
  double err_csr = max_abs_diff(ref, sparse.output);
  if (err_serial > 1e-5 || err_parallel > 1e-5 || err_csr > 1e-5) {
    std::fprintf(stderr, "output mismatch: serial=%g parallel=%g csr=%g\n",
                 err_serial, err_parallel, err_csr);
    return 1;
  }

  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif
  double t_dense = time_ms([&] { engine::direct_conv(g, pruned, input); },
                           repeats);
  double t_serial =
      time_ms([&] { engine::execute_plan(plan, pruned, input, 1); }, repeats);
  double t_parallel =
      time_ms([&] { engine::execute_plan(plan, pruned, input, 0); }, repeats);
  double t_csr =
      time_ms([&] { engine::execute_csr(g, csr, input); }, repeats);

  std::printf("layer: %dx%dx3x3, input %dx%dx%d, nonzeros %ld/%ld\n", filters,
              channels, channels, size, size, summary.nonzeros,
              summary.total);
  std::printf("kernel,threads,time_ms_median\n");
  std::printf("dense_serial,1,%.3f\n", t_dense);
  std::printf("pattern_plan,1,%.3f\n", t_serial);
  std::printf("pattern_plan,%d,%.3f\n", threads, t_parallel);
  std::printf("csr,1,%.3f\n", t_csr);
  std::printf("parallel_match: exact=%s\n",
              serial.output == parallel.output ? "yes" : "no");
  return 0;
}
