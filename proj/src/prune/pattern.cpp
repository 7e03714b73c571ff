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

#include "ppct/pattern.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ppct::prune {

namespace {

void require_conv4(const TensorF& w) {
  if (w.rank() != 4)
    throw DimMismatchError("expected a rank-4 [F,C,kh,kw] weight tensor");
}

// All k-subsets of the kernel cells, in lexicographic linear-offset order.
std::vector<Pattern> enumerate_masks(int kh, int kw, int k) {
  int cells = kh * kw;
  std::vector<Pattern> out;
  std::vector<int> pick(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) pick[static_cast<std::size_t>(i)] = i;
  while (true) {
    Pattern p;
    for (int off : pick) p.entries.emplace_back(off / kw, off % kw);
    out.push_back(std::move(p));
    int i = k - 1;
    while (i >= 0 && pick[static_cast<std::size_t>(i)] == cells - k + i) --i;
    if (i < 0) break;
    ++pick[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j)
      pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

}  // namespace

std::string Pattern::to_string() const {
  std::ostringstream os;
  for (const auto& [r, c] : entries) os << "(" << r << "," << c << ")";
  return os.str();
}

int PatternAssignment::kept_count() const {
  int n = 0;
  for (int v : index)
    if (v != kRemoved) ++n;
  return n;
}

int PatternAssignment::removed_count() const {
  return static_cast<int>(index.size()) - kept_count();
}

std::vector<int> PatternAssignment::filter_signature(int f) const {
  std::vector<int> sig;
  for (int c = 0; c < channels; ++c)
    if (!removed(f, c)) sig.push_back(at(f, c));
  std::sort(sig.begin(), sig.end());
  return sig;
}

double kernel_l1(const TensorF& w, int f, int c) {
  double s = 0.0;
  for (int r = 0; r < w.dim(2); ++r)
    for (int col = 0; col < w.dim(3); ++col)
      s += std::abs(static_cast<double>(w.at4(f, c, r, col)));
  return s;
}

double retained_mass(const TensorF& w, int f, int c, const Pattern& p) {
  double s = 0.0;
  for (const auto& [r, col] : p.entries)
    s += std::abs(static_cast<double>(w.at4(f, c, r, col)));
  return s;
}

PatternLibrary design_pattern_library(const TensorF& weights, int arity,
                                      int library_size) {
  require_conv4(weights);
  int kh = weights.dim(2), kw = weights.dim(3);
  if (arity < 1 || arity > kh * kw)
    throw ArityError("pattern arity " + std::to_string(arity) +
                     " out of range for " + std::to_string(kh) + "x" +
                     std::to_string(kw) + " kernels");
  std::vector<Pattern> masks = enumerate_masks(kh, kw, arity);
  if (library_size < 1 || library_size > static_cast<int>(masks.size()))
    throw DomainError("library size " + std::to_string(library_size) +
                      " out of range (max " + std::to_string(masks.size()) +
                      ")");

  int filters = weights.dim(0), channels = weights.dim(1);
  std::size_t kernels =
      static_cast<std::size_t>(filters) * static_cast<std::size_t>(channels);

  // mass[m][kern]: retained L1 of kernel under mask m.
  std::vector<std::vector<double>> mass(masks.size());
  for (std::size_t m = 0; m < masks.size(); ++m) {
    mass[m].resize(kernels);
    std::size_t kern = 0;
    for (int f = 0; f < filters; ++f)
      for (int c = 0; c < channels; ++c)
        mass[m][kern++] = retained_mass(weights, f, c, masks[m]);
  }

  PatternLibrary lib;
  lib.kernel_h = kh;
  lib.kernel_w = kw;
  lib.arity = arity;
  std::vector<double> best(kernels, 0.0);  // best retained mass so far
  std::vector<bool> chosen(masks.size(), false);
  for (int step = 0; step < library_size; ++step) {
    int pick = -1;
    double pick_gain = -1.0;
    for (std::size_t m = 0; m < masks.size(); ++m) {
      if (chosen[m]) continue;
      double gain = 0.0;
      for (std::size_t kern = 0; kern < kernels; ++kern)
        if (mass[m][kern] > best[kern]) gain += mass[m][kern] - best[kern];
      if (gain > pick_gain) {  // strict: earlier (lex-smaller) mask wins ties
        pick_gain = gain;
        pick = static_cast<int>(m);
      }
    }
    chosen[static_cast<std::size_t>(pick)] = true;
    for (std::size_t kern = 0; kern < kernels; ++kern)
      best[kern] = std::max(best[kern],
                            mass[static_cast<std::size_t>(pick)][kern]);
    lib.patterns.push_back(masks[static_cast<std::size_t>(pick)]);
  }
  return lib;
}

PatternAssignment assign_kernel_patterns(const TensorF& weights,
                                         const PatternLibrary& lib) {
  require_conv4(weights);
  if (weights.dim(2) != lib.kernel_h || weights.dim(3) != lib.kernel_w)
    throw DimMismatchError("kernel dims do not match the pattern library");
  if (lib.patterns.empty()) throw DomainError("empty pattern library");

  int filters = weights.dim(0), channels = weights.dim(1);
  PatternAssignment a(filters, channels);
  for (int f = 0; f < filters; ++f) {
    for (int c = 0; c < channels; ++c) {
      int best = 0;
      double best_mass = retained_mass(weights, f, c, lib.patterns[0]);
      for (int p = 1; p < lib.size(); ++p) {
        double m = retained_mass(weights, f, c,
                                 lib.patterns[static_cast<std::size_t>(p)]);
        if (m > best_mass) {
          best_mass = m;
          best = p;
        }
      }
      a.set(f, c, best);
    }
  }
  return a;
}

std::set<std::pair<int, int>> connectivity_prune(const TensorF& weights,
                                                 double rate) {
  require_conv4(weights);
  if (rate < 0.0 || rate >= 1.0)
    throw DomainError("connectivity rate must be in [0,1)");
  int filters = weights.dim(0), channels = weights.dim(1);

  struct Cand {
    double norm;
    int f, c;
  };
  std::vector<Cand> cands;
  cands.reserve(static_cast<std::size_t>(filters) * channels);
  for (int f = 0; f < filters; ++f)
    for (int c = 0; c < channels; ++c)
      cands.push_back({kernel_l1(weights, f, c), f, c});
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.norm != b.norm) return a.norm < b.norm;
    if (a.f != b.f) return a.f < b.f;
    return a.c < b.c;
  });

  long target = static_cast<long>(
      std::floor(rate * static_cast<double>(filters) * channels));
  std::set<std::pair<int, int>> removed;
  std::vector<int> filter_kept(static_cast<std::size_t>(filters), channels);
  std::vector<int> channel_kept(static_cast<std::size_t>(channels), filters);
  for (const Cand& cand : cands) {
    if (static_cast<long>(removed.size()) >= target) break;
    // Skip rather than empty a filter row or an input-channel column.
    if (filter_kept[static_cast<std::size_t>(cand.f)] <= 1) continue;
    if (channel_kept[static_cast<std::size_t>(cand.c)] <= 1) continue;
    removed.insert({cand.f, cand.c});
    --filter_kept[static_cast<std::size_t>(cand.f)];
    --channel_kept[static_cast<std::size_t>(cand.c)];
  }
  return removed;
}

void apply_connectivity(PatternAssignment& assignment,
                        const std::set<std::pair<int, int>>& removed) {
  for (const auto& [f, c] : removed)
    assignment.set(f, c, PatternAssignment::kRemoved);
}

std::pair<TensorF, PruneSummary> apply_pruning(
    const TensorF& weights, const PatternAssignment& assignment,
    const PatternLibrary& lib) {
  require_conv4(weights);
  if (assignment.filters != weights.dim(0) ||
      assignment.channels != weights.dim(1))
    throw DimMismatchError("assignment dims do not match the weight tensor");

  TensorF pruned(weights.dims());
  PruneSummary s;
  s.total = static_cast<long>(weights.size());
  s.pattern_histogram.assign(static_cast<std::size_t>(lib.size()), 0);
  for (int f = 0; f < weights.dim(0); ++f) {
    for (int c = 0; c < weights.dim(1); ++c) {
      int idx = assignment.at(f, c);
      if (idx == PatternAssignment::kRemoved) continue;
      if (idx < 0 || idx >= lib.size())
        throw DomainError("assignment index out of library range");
      const Pattern& p = lib.patterns[static_cast<std::size_t>(idx)];
      for (const auto& [r, col] : p.entries)
        pruned.at4(f, c, r, col) = weights.at4(f, c, r, col);
      ++s.pattern_histogram[static_cast<std::size_t>(idx)];
    }
  }
  s.nonzeros = static_cast<long>(lib.arity) * assignment.kept_count();
  s.rate = s.total == 0
               ? 0.0
               : 1.0 - static_cast<double>(s.nonzeros) /
                           static_cast<double>(s.total);
  return {std::move(pruned), std::move(s)};
}

std::string prune_report(const std::string& layer_name,
                         const PatternLibrary& lib,
                         const PatternAssignment& assignment,
                         const PruneSummary& summary) {
  std::ostringstream os;
  os << "layer " << layer_name << ": filters=" << assignment.filters
     << " channels=" << assignment.channels << " kernel=" << lib.kernel_h
     << "x" << lib.kernel_w << "\n";
  os << "  kernels removed: " << assignment.removed_count() << "/"
     << assignment.filters * assignment.channels << "\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", summary.rate);
  os << "  nonzeros: " << summary.nonzeros << "/" << summary.total
     << " (pruning rate " << buf << ")\n";
  os << "  library (k=" << lib.arity << ", P=" << lib.size() << "):\n";
  for (int p = 0; p < lib.size(); ++p)
    os << "    p" << p << ": "
       << lib.patterns[static_cast<std::size_t>(p)].to_string() << "\n";
  os << "  pattern usage:";
  for (std::size_t p = 0; p < summary.pattern_histogram.size(); ++p)
    os << " p" << p << ":" << summary.pattern_histogram[p];
  os << "\n";
  return os.str();
}

}  // namespace ppct::prune
