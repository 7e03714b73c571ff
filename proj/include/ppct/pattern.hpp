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
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ppct/tensor.hpp"

namespace ppct::prune {

// A k-entry mask inside a kernel window; entries are sorted (row, col)
// offsets.
struct Pattern {
  std::vector<std::pair<int, int>> entries;

  int arity() const { return static_cast<int>(entries.size()); }
  bool operator==(const Pattern& o) const { return entries == o.entries; }
  bool operator<(const Pattern& o) const { return entries < o.entries; }
  std::string to_string() const;
};

struct PatternLibrary {
  int kernel_h = 0;
  int kernel_w = 0;
  int arity = 0;
  std::vector<Pattern> patterns;

  int size() const { return static_cast<int>(patterns.size()); }
};

// Per (filter, channel) choice: an index into the library, or kRemoved for
// connectivity-pruned kernels.
struct PatternAssignment {
  static constexpr int kRemoved = -1;

  int filters = 0;
  int channels = 0;
  std::vector<int> index;  // filters * channels entries

  PatternAssignment() = default;
  PatternAssignment(int f, int c)
      : filters(f), channels(c),
        index(static_cast<std::size_t>(f) * static_cast<std::size_t>(c), 0) {}

  int at(int f, int c) const {
    return index[static_cast<std::size_t>(f) * channels + c];
  }
  void set(int f, int c, int v) {
    index[static_cast<std::size_t>(f) * channels + c] = v;
  }
  bool removed(int f, int c) const { return at(f, c) == kRemoved; }
  int kept_count() const;
  int removed_count() const;
  // Kept kernels of filter f, in channel order.
  std::vector<int> filter_signature(int f) const;
};

struct PruneConfig {
  int arity = 4;
  int library_size = 8;
  double connectivity_rate = 0.0;
  std::vector<double> gamma = {0.3, 0.5, 0.7};
};

// Greedy magnitude-driven library design: repeatedly add the mask with the
// largest marginal retained-L1 gain over all kernels; ties go to the
// lexicographically smallest entry list. Throws ArityError when k exceeds
// the kernel area, DomainError when library_size exceeds the number of
// distinct masks.
PatternLibrary design_pattern_library(const TensorF& weights, int arity,
                                      int library_size);

// Per-kernel argmax of retained L1 mass; ties resolved to the lowest
// pattern index. Throws DimMismatchError when dims disagree.
PatternAssignment assign_kernel_patterns(const TensorF& weights,
                                         const PatternLibrary& lib);

// Removes the floor(rate*F*C) kernels of smallest L1 norm (ties by (f,c)
// order), skipping any removal that would empty a filter or an input
// channel.
std::set<std::pair<int, int>> connectivity_prune(const TensorF& weights,
                                                 double rate);

void apply_connectivity(PatternAssignment& assignment,
                        const std::set<std::pair<int, int>>& removed);

struct PruneSummary {
  long total = 0;
  long nonzeros = 0;  // arity x kept kernels (structural count)
  double rate = 0.0;
  std::vector<long> pattern_histogram;
};

// Zeros off-pattern weights and removed kernels.
std::pair<TensorF, PruneSummary> apply_pruning(
    const TensorF& weights, const PatternAssignment& assignment,
    const PatternLibrary& lib);

double kernel_l1(const TensorF& weights, int f, int c);
double retained_mass(const TensorF& weights, int f, int c, const Pattern& p);

std::string prune_report(const std::string& layer_name,
                         const PatternLibrary& lib,
                         const PatternAssignment& assignment,
                         const PruneSummary& summary);

}  // namespace ppct::prune
