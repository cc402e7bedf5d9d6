/**
 * Copyright 2026 The mmnet authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <bit>
#include <cstring>
#include <fstream>
#include <set>

#include "mmnet/weights.hpp"

namespace mmnet {

namespace {

constexpr char kMagic[4] = {'M', 'M', 'N', 'W'};
constexpr uint32_t kVersion = 1;
constexpr uint32_t kDtypeF32 = 0;

void write_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v),
                        static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64(std::ostream& os, uint64_t v) {
  write_u32(os, static_cast<uint32_t>(v));
  write_u32(os, static_cast<uint32_t>(v >> 32));
}

void write_f32(std::ostream& os, float f) {
  uint32_t v;
  std::memcpy(&v, &f, 4);
  write_u32(os, v);
}

uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (is.gcount() != 4) throw TruncationError("weight file truncated");
  return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
         static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
}

uint64_t read_u64(std::istream& is) {
  uint64_t lo = read_u32(is);
  uint64_t hi = read_u32(is);
  return lo | hi << 32;
}

}  // namespace

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

void save_weights(const WeightStore<float>& store, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os.write(kMagic, 4);
  write_u32(os, kVersion);
  write_u64(os, store.creation_seed);
  write_u32(os, static_cast<uint32_t>(store.entries.size()));
  for (const auto& [name, tensor] : store.entries) {
    write_u32(os, static_cast<uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32(os, static_cast<uint32_t>(tensor.rank()));
    for (int i = 0; i < tensor.rank(); ++i)
      write_u32(os, static_cast<uint32_t>(tensor.dim(i)));
    write_u32(os, kDtypeF32);
    if constexpr (std::endian::native == std::endian::little) {
      os.write(reinterpret_cast<const char*>(tensor.data()),
               static_cast<std::streamsize>(tensor.size() * 4));
    } else {
      for (Index i = 0; i < tensor.size(); ++i) write_f32(os, tensor[i]);
    }
  }
  if (!os) throw IoError("write to '" + path + "' failed");
}

WeightStore<float> load_weights(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");

  char magic[4];
  is.read(magic, 4);
  if (is.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0)
    throw BadMagicError("'" + path + "' is not a weight container");
  uint32_t version = read_u32(is);
  if (version != kVersion)
    throw VersionError("weight container version " + std::to_string(version) +
                       " unsupported (expected " + std::to_string(kVersion) +
                       ")");

  WeightStore<float> store;
  store.version = version;
  store.creation_seed = read_u64(is);
  const uint32_t count = read_u32(is);

  for (uint32_t e = 0; e < count; ++e) {
    uint32_t name_len = read_u32(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    if (is.gcount() != static_cast<std::streamsize>(name_len))
      throw TruncationError("weight file truncated in entry name");
    uint32_t rank = read_u32(is);
    if (rank < 1 || rank > Shape::kMaxRank)
      throw FormatError("entry '" + name + "' has invalid rank " +
                        std::to_string(rank));
    std::vector<Index> dims(rank);
    for (uint32_t i = 0; i < rank; ++i) dims[i] = read_u32(is);
    uint32_t dtype = read_u32(is);
    if (dtype != kDtypeF32)
      throw FormatError("entry '" + name + "' has unsupported dtype " +
                        std::to_string(dtype));
    Shape shape = rank == 1   ? Shape{dims[0]}
                  : rank == 2 ? Shape{dims[0], dims[1]}
                  : rank == 3 ? Shape{dims[0], dims[1], dims[2]}
                              : Shape{dims[0], dims[1], dims[2], dims[3]};
    Tensor<float> t(shape);
    is.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.size() * 4));
    if (is.gcount() != static_cast<std::streamsize>(t.size() * 4))
      throw TruncationError("weight file truncated in entry '" + name + "'");
    if constexpr (std::endian::native == std::endian::big) {
      for (Index i = 0; i < t.size(); ++i) {
        uint32_t v;
        std::memcpy(&v, t.data() + i, 4);
        v = __builtin_bswap32(v);
        std::memcpy(t.data() + i, &v, 4);
      }
    }
    if (!store.entries.emplace(name, std::move(t)).second)
      throw DuplicateNameError("duplicate weight entry '" + name + "'");
  }
  return store;
}

std::vector<ParamSpec> layer_param_specs(const Layer& layer) {
  std::vector<ParamSpec> out;
  const LayerDesc& d = layer.desc;
  if (const auto* conv = std::get_if<ConvDesc>(&d)) {
    Shape kshape = conv->mode == ConvMode::Depthwise
                       ? Shape{conv->kernel, conv->kernel, conv->in_channels}
                       : Shape{conv->kernel, conv->kernel, conv->in_channels,
                               conv->out_channels};
    out.push_back({layer.name + ".weight", kshape, true});
    if (conv->bias)
      out.push_back({layer.name + ".bias", Shape{conv->out_channels}, true});
  } else if (const auto* bn = std::get_if<BatchNormDesc>(&d)) {
    out.push_back({layer.name + ".gamma", Shape{bn->features}, true});
    out.push_back({layer.name + ".beta", Shape{bn->features}, true});
    out.push_back({layer.name + ".running_mean", Shape{bn->features}, false});
    out.push_back({layer.name + ".running_var", Shape{bn->features}, false});
  } else if (const auto* dense = std::get_if<DenseDesc>(&d)) {
    out.push_back(
        {layer.name + ".weight", Shape{dense->in_dim, dense->out_dim}, true});
    out.push_back({layer.name + ".bias", Shape{dense->out_dim}, true});
  }
  return out;
}

std::vector<ParamSpec> spec_param_specs(const ArchitectureSpec& spec) {
  std::vector<ParamSpec> out;
  for (const auto& layer : spec.layers)
    for (auto& p : layer_param_specs(layer)) out.push_back(std::move(p));
  return out;
}

BindingReport check_binding(const ArchitectureSpec& spec,
                            const WeightStore<float>& store) {
  BindingReport report;
  std::set<std::string> expected;
  for (const auto& p : spec_param_specs(spec)) {
    expected.insert(p.name);
    if (!store.has(p.name)) report.missing.push_back(p.name);
  }
  for (const auto& [name, _] : store.entries)
    if (!expected.count(name)) report.extra.push_back(name);
  return report;
}

}  // namespace mmnet
