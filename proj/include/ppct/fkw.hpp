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

namespace ppct::fkw {

// Pattern-aware compressed layer container (.fkw), little-endian:
//   header  : magic "FKW1", version u32=1, F u32, C u32,
//             kh u8, kw u8, k u8, reserved u8, P u16, flags u16   (24 bytes)
//   library : P x k linear cell offsets, u8 each
//   perm    : F x u16, perm[new_pos] = original filter
//   directory: per (f, c) in permuted filter order, bit-packed MSB-first:
//             present bit, then ceil(log2 P) pattern-id bits
//   values  : f32 x k per present kernel, permuted order, entry order
struct CompressedLayer {
  int filters = 0;
  int channels = 0;
  int kernel_h = 0;
  int kernel_w = 0;
  int arity = 0;
  prune::PatternLibrary library;
  std::vector<int> permutation;  // perm[new_pos] = original filter
  prune::PatternAssignment assignment;
  std::vector<std::uint8_t> bytes;  // the encoded container

  std::size_t byte_size() const { return bytes.size(); }
};

// Bits needed for a pattern id; 0 when the library has a single pattern.
int pattern_id_bits(int library_size);

// Encodes a pruned tensor. Throws ConsistencyError if any kernel carries a
// nonzero weight outside its assigned pattern (or inside a removed kernel).
CompressedLayer compress_fkw(const TensorF& pruned,
                             const prune::PatternAssignment& assignment,
                             const prune::PatternLibrary& library,
                             const std::vector<int>& permutation);

struct DecodedLayer {
  TensorF tensor;  // dense pruned weights, original filter order
  prune::PatternAssignment assignment;
  prune::PatternLibrary library;
  std::vector<int> permutation;
};

// Exact inverse of compress_fkw, including the permutation undo. Throws
// FormatError (with offset) on corruption.
DecodedLayer decompress_fkw(const std::vector<std::uint8_t>& bytes);

void save_fkw_file(const CompressedLayer& layer, const std::string& path);
DecodedLayer load_fkw_file(const std::string& path);

// Conventional CSR baseline over the [F, C*kh*kw] flattening.
struct CsrLayer {
  int filters = 0;
  int cols = 0;
  std::vector<std::uint32_t> row_ptr;  // F+1
  std::vector<std::uint32_t> col_idx;
  std::vector<float> values;

  std::size_t byte_size() const {
    return 4 * row_ptr.size() + 4 * col_idx.size() + 4 * values.size();
  }
};

CsrLayer encode_csr(const TensorF& pruned);
TensorF decode_csr(const CsrLayer& csr, const std::vector<int>& dims);

struct SizeComparison {
  std::size_t fkw_bytes = 0;
  std::size_t csr_bytes = 0;
  double ratio = 1.0;  // csr / fkw; 1.0 by convention for empty layers
};

SizeComparison compare_sizes(const TensorF& pruned,
                             const prune::PatternAssignment& assignment,
                             const prune::PatternLibrary& library);

std::string size_report_csv(
    const std::vector<std::pair<std::string, SizeComparison>>& rows);

}  // namespace ppct::fkw
