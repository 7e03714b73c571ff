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

#include "ppct/fkw.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "ppct/binio.hpp"

namespace ppct::fkw {

namespace {
constexpr char kMagic[4] = {'F', 'K', 'W', '1'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

int pattern_id_bits(int library_size) {
  int bits = 0;
  while ((1 << bits) < library_size) ++bits;
  return bits;
}

CompressedLayer compress_fkw(const TensorF& pruned,
                             const prune::PatternAssignment& assignment,
                             const prune::PatternLibrary& library,
                             const std::vector<int>& permutation) {
  if (pruned.rank() != 4)
    throw DimMismatchError("expected a rank-4 weight tensor");
  int filters = pruned.dim(0), channels = pruned.dim(1);
  int kh = pruned.dim(2), kw = pruned.dim(3);
  if (assignment.filters != filters || assignment.channels != channels)
    throw DimMismatchError("assignment dims do not match tensor");
  if (library.kernel_h != kh || library.kernel_w != kw)
    throw DimMismatchError("library kernel dims do not match tensor");
  if (static_cast<int>(permutation.size()) != filters)
    throw DimMismatchError("permutation length does not match filter count");
  if (library.size() > 256)
    throw DomainError("library size exceeds 256 patterns");

  // The container only stores on-pattern values; anything else is data loss.
  for (int f = 0; f < filters; ++f) {
    for (int c = 0; c < channels; ++c) {
      int idx = assignment.at(f, c);
      std::vector<bool> on(static_cast<std::size_t>(kh * kw), false);
      if (idx != prune::PatternAssignment::kRemoved) {
        const prune::Pattern& p =
            library.patterns[static_cast<std::size_t>(idx)];
        for (const auto& [r, col] : p.entries)
          on[static_cast<std::size_t>(r * kw + col)] = true;
      }
      for (int r = 0; r < kh; ++r)
        for (int col = 0; col < kw; ++col)
          if (!on[static_cast<std::size_t>(r * kw + col)] &&
              pruned.at4(f, c, r, col) != 0.0f)
            throw ConsistencyError(
                "nonzero weight off-pattern at filter " + std::to_string(f) +
                " channel " + std::to_string(c));
    }
  }

  CompressedLayer out;
  out.filters = filters;
  out.channels = channels;
  out.kernel_h = kh;
  out.kernel_w = kw;
  out.arity = library.arity;
  out.library = library;
  out.permutation = permutation;
  out.assignment = assignment;

  std::vector<std::uint8_t>& buf = out.bytes;
  buf.insert(buf.end(), kMagic, kMagic + 4);
  put_u32(buf, kVersion);
  put_u32(buf, static_cast<std::uint32_t>(filters));
  put_u32(buf, static_cast<std::uint32_t>(channels));
  buf.push_back(static_cast<std::uint8_t>(kh));
  buf.push_back(static_cast<std::uint8_t>(kw));
  buf.push_back(static_cast<std::uint8_t>(library.arity));
  buf.push_back(0);  // reserved
  put_u16(buf, static_cast<std::uint16_t>(library.size()));
  put_u16(buf, 0);  // flags

  for (const prune::Pattern& p : library.patterns)
    for (const auto& [r, col] : p.entries)
      buf.push_back(static_cast<std::uint8_t>(r * kw + col));

  for (int f : permutation) put_u16(buf, static_cast<std::uint16_t>(f));

  int id_bits = pattern_id_bits(library.size());
  BitWriter dir;
  for (int pos = 0; pos < filters; ++pos) {
    int f = permutation[static_cast<std::size_t>(pos)];
    for (int c = 0; c < channels; ++c) {
      int idx = assignment.at(f, c);
      if (idx == prune::PatternAssignment::kRemoved) {
        dir.put(0, 1);
        dir.put(0, id_bits);
      } else {
        dir.put(1, 1);
        dir.put(static_cast<std::uint32_t>(idx), id_bits);
      }
    }
  }
  buf.insert(buf.end(), dir.bytes().begin(), dir.bytes().end());

  for (int pos = 0; pos < filters; ++pos) {
    int f = permutation[static_cast<std::size_t>(pos)];
    for (int c = 0; c < channels; ++c) {
      int idx = assignment.at(f, c);
      if (idx == prune::PatternAssignment::kRemoved) continue;
      const prune::Pattern& p =
          library.patterns[static_cast<std::size_t>(idx)];
      for (const auto& [r, col] : p.entries)
        put_f32(buf, pruned.at4(f, c, r, col));
    }
  }
  return out;
}

DecodedLayer decompress_fkw(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes.data(), bytes.size());

  std::size_t magic_at = r.offset();
  std::string magic = r.bytes(4);
  if (magic != std::string(kMagic, 4))
    throw FormatError(magic_at, "bad magic");
  std::size_t version_at = r.offset();
  std::uint32_t version = r.u32();
  if (version != kVersion)
    throw FormatError(version_at,
                      "unsupported version " + std::to_string(version));
  int filters = static_cast<int>(r.u32());
  int channels = static_cast<int>(r.u32());
  int kh = r.u8();
  int kw = r.u8();
  int arity = r.u8();
  r.u8();  // reserved
  int lib_size = r.u16();
  r.u16();  // flags
  if (filters < 0 || channels < 0 || kh < 1 || kw < 1 || arity < 1 ||
      arity > kh * kw || lib_size < 1)
    throw FormatError(8, "invalid header fields");

  DecodedLayer out;
  out.library.kernel_h = kh;
  out.library.kernel_w = kw;
  out.library.arity = arity;
  for (int p = 0; p < lib_size; ++p) {
    prune::Pattern pat;
    for (int e = 0; e < arity; ++e) {
      std::size_t at = r.offset();
      int off = r.u8();
      if (off >= kh * kw)
        throw FormatError(at, "pattern offset out of kernel range");
      pat.entries.emplace_back(off / kw, off % kw);
    }
    out.library.patterns.push_back(std::move(pat));
  }

  std::vector<bool> seen(static_cast<std::size_t>(filters), false);
  for (int pos = 0; pos < filters; ++pos) {
    std::size_t at = r.offset();
    int f = r.u16();
    if (f >= filters || seen[static_cast<std::size_t>(f)])
      throw FormatError(at, "invalid filter permutation");
    seen[static_cast<std::size_t>(f)] = true;
    out.permutation.push_back(f);
  }

  int id_bits = pattern_id_bits(lib_size);
  std::size_t dir_bits =
      static_cast<std::size_t>(filters) * channels * (1 + id_bits);
  std::size_t dir_bytes = (dir_bits + 7) / 8;
  std::size_t dir_base = r.offset();
  std::string dir_raw = r.bytes(dir_bytes);
  BitReader bits(reinterpret_cast<const std::uint8_t*>(dir_raw.data()),
                 dir_raw.size(), dir_base);

  out.assignment = prune::PatternAssignment(filters, channels);
  std::vector<std::pair<int, int>> present;  // permuted traversal order
  for (int pos = 0; pos < filters; ++pos) {
    int f = out.permutation[static_cast<std::size_t>(pos)];
    for (int c = 0; c < channels; ++c) {
      std::uint32_t bit = bits.get(1);
      std::uint32_t idx = bits.get(id_bits);
      if (!bit) {
        out.assignment.set(f, c, prune::PatternAssignment::kRemoved);
        continue;
      }
      if (static_cast<int>(idx) >= lib_size)
        throw FormatError(dir_base, "pattern id " + std::to_string(idx) +
                                        " out of library range");
      out.assignment.set(f, c, static_cast<int>(idx));
      present.emplace_back(f, c);
    }
  }

  out.tensor = TensorF({filters, channels, kh, kw});
  for (const auto& [f, c] : present) {
    const prune::Pattern& p =
        out.library.patterns[static_cast<std::size_t>(out.assignment.at(f, c))];
    for (const auto& [row, col] : p.entries)
      out.tensor.at4(f, c, row, col) = r.f32();
  }
  if (r.remaining() != 0)
    throw FormatError(r.offset(), "trailing bytes after value section");
  return out;
}

void save_fkw_file(const CompressedLayer& layer, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(layer.bytes.data()),
            static_cast<std::streamsize>(layer.bytes.size()));
  if (!out) throw IoError("failed to write '" + path + "'");
}

DecodedLayer load_fkw_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string raw = ss.str();
  std::vector<std::uint8_t> bytes(raw.begin(), raw.end());
  return decompress_fkw(bytes);
}

CsrLayer encode_csr(const TensorF& pruned) {
  if (pruned.rank() != 4)
    throw DimMismatchError("expected a rank-4 weight tensor");
  int filters = pruned.dim(0);
  int cols = pruned.dim(1) * pruned.dim(2) * pruned.dim(3);
  CsrLayer csr;
  csr.filters = filters;
  csr.cols = cols;
  csr.row_ptr.push_back(0);
  for (int f = 0; f < filters; ++f) {
    for (int j = 0; j < cols; ++j) {
      float v = pruned[static_cast<std::size_t>(f) * cols + j];
      if (v != 0.0f) {
        csr.col_idx.push_back(static_cast<std::uint32_t>(j));
        csr.values.push_back(v);
      }
    }
    csr.row_ptr.push_back(static_cast<std::uint32_t>(csr.values.size()));
  }
  return csr;
}

TensorF decode_csr(const CsrLayer& csr, const std::vector<int>& dims) {
  TensorF t(dims);
  int cols = dims[1] * dims[2] * dims[3];
  if (cols != csr.cols || dims[0] != csr.filters)
    throw DimMismatchError("CSR dims do not match requested tensor dims");
  for (int f = 0; f < csr.filters; ++f)
    for (std::uint32_t i = csr.row_ptr[static_cast<std::size_t>(f)];
         i < csr.row_ptr[static_cast<std::size_t>(f) + 1]; ++i)
      t[static_cast<std::size_t>(f) * cols + csr.col_idx[i]] = csr.values[i];
  return t;
}

SizeComparison compare_sizes(const TensorF& pruned,
                             const prune::PatternAssignment& assignment,
                             const prune::PatternLibrary& library) {
  SizeComparison cmp;
  std::vector<int> identity(static_cast<std::size_t>(pruned.dim(0)));
  for (std::size_t i = 0; i < identity.size(); ++i)
    identity[i] = static_cast<int>(i);
  CompressedLayer enc = compress_fkw(pruned, assignment, library, identity);
  CsrLayer csr = encode_csr(pruned);
  cmp.fkw_bytes = enc.byte_size();
  cmp.csr_bytes = csr.byte_size();
  long kernels = static_cast<long>(pruned.dim(0)) * pruned.dim(1);
  cmp.ratio = kernels == 0 ? 1.0
                           : static_cast<double>(cmp.csr_bytes) /
                                 static_cast<double>(cmp.fkw_bytes);
  return cmp;
}

std::string size_report_csv(
    const std::vector<std::pair<std::string, SizeComparison>>& rows) {
  std::ostringstream os;
  os << "layer,fkw_bytes,csr_bytes,ratio\n";
  for (const auto& [name, cmp] : rows) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", cmp.ratio);
    os << name << "," << cmp.fkw_bytes << "," << cmp.csr_bytes << "," << buf
       << "\n";
  }
  return os.str();
}

}  // namespace ppct::fkw
