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

#include "ppct/weights.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "ppct/binio.hpp"

namespace ppct::ir {

namespace {
constexpr char kMagic[4] = {'C', 'P', 'I', 'E'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void WeightStore::set(const std::string& name, TensorF tensor) {
  tensors_[name] = std::move(tensor);
}

const TensorF* WeightStore::find(const std::string& name) const {
  auto it = tensors_.find(name);
  return it == tensors_.end() ? nullptr : &it->second;
}

const TensorF& WeightStore::at(const std::string& name) const {
  const TensorF* t = find(name);
  if (!t) throw IoError("weight store has no tensor '" + name + "'");
  return *t;
}

bool WeightStore::contains(const std::string& name) const {
  return tensors_.count(name) != 0;
}

std::size_t save_weights(const WeightStore& store, std::ostream& sink) {
  std::vector<std::uint8_t> buf;
  buf.insert(buf.end(), kMagic, kMagic + 4);
  put_u32(buf, kVersion);
  put_u32(buf, static_cast<std::uint32_t>(store.size()));
  for (const auto& [name, tensor] : store.tensors()) {
    if (name.size() > 0xffff) throw IoError("tensor name too long");
    put_u16(buf, static_cast<std::uint16_t>(name.size()));
    buf.insert(buf.end(), name.begin(), name.end());
    buf.push_back(static_cast<std::uint8_t>(tensor.rank()));
    for (int d : tensor.dims()) put_u32(buf, static_cast<std::uint32_t>(d));
    for (float v : tensor.values()) put_f32(buf, v);
  }
  sink.write(reinterpret_cast<const char*>(buf.data()),
             static_cast<std::streamsize>(buf.size()));
  if (!sink) throw IoError("failed to write weight stream");
  return buf.size();
}

WeightStore load_weights(std::istream& source) {
  std::ostringstream ss;
  ss << source.rdbuf();
  std::string raw = ss.str();
  ByteReader r(reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size());

  std::size_t magic_at = r.offset();
  std::string magic = r.bytes(4);
  if (magic != std::string(kMagic, 4))
    throw FormatError(magic_at, "bad magic '" + magic + "'");
  std::size_t version_at = r.offset();
  std::uint32_t version = r.u32();
  if (version != kVersion)
    throw FormatError(version_at,
                      "unsupported version " + std::to_string(version));
  std::uint32_t count = r.u32();

  WeightStore store;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::uint16_t name_len = r.u16();
    std::string name = r.bytes(name_len);
    int rank = r.u8();
    std::vector<int> dims;
    std::size_t n = 1;
    for (int d = 0; d < rank; ++d) {
      std::uint32_t v = r.u32();
      dims.push_back(static_cast<int>(v));
      n *= v;
    }
    std::vector<float> values(n);
    for (std::size_t j = 0; j < n; ++j) values[j] = r.f32();
    store.set(name, TensorF(std::move(dims), std::move(values)));
  }
  if (r.remaining() != 0)
    throw FormatError(r.offset(), "trailing bytes after last tensor");
  return store;
}

void save_weights_file(const WeightStore& store, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  save_weights(store, out);
}

WeightStore load_weights_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return load_weights(in);
}

}  // namespace ppct::ir
