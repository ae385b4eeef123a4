/* Copyright 2026 The mixvc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "mixvc/params.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "mixvc/errors.hpp"

namespace mixvc {

namespace {

constexpr char kMagic[8] = {'M', 'V', 'C', 'P', 'A', 'R', 'A', 'M'};
constexpr uint32_t kVersion = 1;

static_assert(sizeof(double) == 8, "container format requires 8-byte double");

void require_little_endian() {
  const uint16_t probe = 0x0102;
  uint8_t first;
  std::memcpy(&first, &probe, 1);
  if (first != 0x02) {
    throw DataError("checkpoint container requires a little-endian host");
  }
}

template <typename T>
void write_pod(std::ofstream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& is, const std::string& path) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw DataError("truncated checkpoint: " + path);
  return v;
}

}  // namespace

const char* param_group_name(ParamGroup g) {
  switch (g) {
    case ParamGroup::frozen: return "frozen";
    case ParamGroup::layer_weights: return "layer_weights";
    case ParamGroup::speaker_extractor: return "speaker_extractor";
    case ParamGroup::decoder: return "decoder";
  }
  return "frozen";
}

ParamGroup param_group_from_name(const std::string& s) {
  if (s == "frozen") return ParamGroup::frozen;
  if (s == "layer_weights") return ParamGroup::layer_weights;
  if (s == "speaker_extractor") return ParamGroup::speaker_extractor;
  if (s == "decoder") return ParamGroup::decoder;
  throw DataError("unknown parameter group '" + s + "'");
}

Tensor& Parameters::add(const std::string& name, Tensor value,
                        ParamGroup group) {
  auto [it, inserted] = items_.emplace(name, ParamEntry{std::move(value), group});
  if (!inserted) throw UsageError("duplicate parameter '" + name + "'");
  return it->second.value;
}

ParamEntry& Parameters::entry(const std::string& name) {
  auto it = items_.find(name);
  if (it == items_.end()) throw UsageError("unknown parameter '" + name + "'");
  return it->second;
}

const ParamEntry& Parameters::entry(const std::string& name) const {
  auto it = items_.find(name);
  if (it == items_.end()) throw UsageError("unknown parameter '" + name + "'");
  return it->second;
}

void Parameters::save(const std::string& path) const {
  require_little_endian();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot open for writing: " + path);
  os.write(kMagic, 8);
  write_pod<uint32_t>(os, kVersion);
  write_pod<uint32_t>(os, static_cast<uint32_t>(items_.size()));
  for (const auto& [name, e] : items_) {
    write_pod<uint32_t>(os, static_cast<uint32_t>(name.size()));
    os.write(name.data(), static_cast<long>(name.size()));
    write_pod<uint8_t>(os, static_cast<uint8_t>(e.group));
    write_pod<uint32_t>(os, static_cast<uint32_t>(e.value.rank()));
    for (size_t d : e.value.shape) write_pod<uint64_t>(os, d);
    os.write(reinterpret_cast<const char*>(e.value.data.data()),
             static_cast<long>(e.value.numel() * sizeof(double)));
  }
  if (!os) throw DataError("write failed: " + path);
  os.close();

  std::ofstream ms(path + ".manifest", std::ios::trunc);
  if (!ms) throw DataError("cannot open for writing: " + path + ".manifest");
  for (const auto& [name, e] : items_) {
    ms << name << '\t';
    for (size_t i = 0; i < e.value.rank(); ++i) {
      if (i) ms << 'x';
      ms << e.value.shape[i];
    }
    if (e.value.rank() == 0) ms << 1;
    ms << '\t' << param_group_name(e.group) << '\n';
  }
}

Parameters Parameters::load(const std::string& path) {
  require_little_endian();
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open checkpoint: " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0) {
    throw DataError("bad checkpoint magic: " + path);
  }
  uint32_t version = read_pod<uint32_t>(is, path);
  if (version != kVersion) {
    throw DataError("unsupported checkpoint version in " + path);
  }
  uint32_t count = read_pod<uint32_t>(is, path);
  Parameters out;
  for (uint32_t i = 0; i < count; ++i) {
    uint32_t name_len = read_pod<uint32_t>(is, path);
    if (name_len > 4096) throw DataError("corrupt checkpoint: " + path);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    if (!is) throw DataError("truncated checkpoint: " + path);
    uint8_t group = read_pod<uint8_t>(is, path);
    if (group > 3) throw DataError("corrupt checkpoint group tag: " + path);
    uint32_t rank = read_pod<uint32_t>(is, path);
    if (rank > 8) throw DataError("corrupt checkpoint rank: " + path);
    std::vector<size_t> shape(rank);
    for (uint32_t r = 0; r < rank; ++r) {
      shape[r] = static_cast<size_t>(read_pod<uint64_t>(is, path));
    }
    Tensor t(shape);
    is.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<long>(t.numel() * sizeof(double)));
    if (!is) throw DataError("truncated checkpoint: " + path);
    out.add(name, std::move(t), static_cast<ParamGroup>(group));
  }
  return out;
}

}  // namespace mixvc
