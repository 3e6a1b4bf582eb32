// Copyright 2026 The BSVD Stream Authors. All Rights Reserved.
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

#include "bsvd/weight_io.h"

#include <cstring>

#include "bsvd/byte_io.h"
#include "bsvd/errors.h"

namespace bsvd {

namespace {

using Kind = WeightFileError::Kind;

void need(const ByteReader& r, std::size_t n, const std::string& what) {
  if (!r.has(n)) throw WeightFileError(Kind::kTruncated, "weight file truncated while reading " + what);
}

void put_tensor(ByteWriter& w, const std::string& name, const std::vector<std::uint32_t>& dims,
                const std::vector<float>& values) {
  w.u16(static_cast<std::uint16_t>(name.size()));
  w.raw(name);
  w.u8(static_cast<std::uint8_t>(dims.size()));
  for (std::uint32_t d : dims) w.u32(d);
  w.f32s(values);
}

}  // namespace

std::vector<std::uint8_t> encode_weights(const WeightStore& store) {
  ByteWriter w;
  w.raw(std::string_view(kWeightMagic, sizeof(kWeightMagic)));
  w.u32(kWeightVersion);
  w.u32(static_cast<std::uint32_t>(store.entries.size() * 2));
  for (const auto& [name, conv] : store.entries) {
    const auto k = static_cast<std::uint32_t>(conv.kernel_size);
    put_tensor(w, name + ".weight",
               {static_cast<std::uint32_t>(conv.out_channels),
                static_cast<std::uint32_t>(conv.in_channels), k, k},
               conv.kernel);
    put_tensor(w, name + ".bias", {static_cast<std::uint32_t>(conv.out_channels)}, conv.bias);
  }
  return w.take();
}

std::map<std::string, RawTensor> decode_weight_file(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  need(r, sizeof(kWeightMagic), "magic");
  auto magic = r.raw(sizeof(kWeightMagic));
  if (std::memcmp(magic.data(), kWeightMagic, sizeof(kWeightMagic)) != 0) {
    throw WeightFileError(Kind::kBadMagic, "bad magic: not a BSVDWGT1 weight file");
  }
  need(r, 8, "header");
  const std::uint32_t version = r.u32();
  if (version != kWeightVersion) {
    throw WeightFileError(Kind::kVersionMismatch,
                          "weight file version " + std::to_string(version) + ", expected " +
                              std::to_string(kWeightVersion));
  }
  const std::uint32_t count = r.u32();

  std::map<std::string, RawTensor> out;
  for (std::uint32_t t = 0; t < count; ++t) {
    const std::string where = "tensor " + std::to_string(t);
    need(r, 2, where + " name length");
    const std::uint16_t len = r.u16();
    need(r, len, where + " name");
    auto name_bytes = r.raw(len);
    std::string name(name_bytes.begin(), name_bytes.end());
    need(r, 1, name + " rank");
    RawTensor tensor;
    tensor.dims.resize(r.u8());
    need(r, 4 * tensor.dims.size(), name + " dims");
    std::size_t elements = 1;
    for (auto& d : tensor.dims) {
      d = r.u32();
      elements *= d;
    }
    if (elements > r.remaining() / 4) {
      throw WeightFileError(Kind::kTruncated, "weight file truncated in payload of " + name);
    }
    tensor.values.resize(elements);
    for (float& v : tensor.values) v = r.f32();
    out.emplace(std::move(name), std::move(tensor));
  }
  return out;
}

WeightStore bind_weights(const NetDef& net, const std::map<std::string, RawTensor>& tensors) {
  WeightStore store;
  for (const Stage* s : net.conv_stages()) {
    auto wit = tensors.find(s->name + ".weight");
    auto bit = tensors.find(s->name + ".bias");
    if (wit == tensors.end() || bit == tensors.end()) {
      throw WeightFileError(Kind::kIncompleteStore,
                            "incomplete store: missing tensor for stage '" + s->name + "'");
    }
    const auto k = static_cast<std::uint32_t>(s->kernel_size);
    const std::vector<std::uint32_t> want_w = {static_cast<std::uint32_t>(s->out_channels),
                                               static_cast<std::uint32_t>(s->in_channels), k, k};
    const std::vector<std::uint32_t> want_b = {static_cast<std::uint32_t>(s->out_channels)};
    if (wit->second.dims != want_w || bit->second.dims != want_b) {
      throw WeightFileError(Kind::kDimMismatch,
                            "dim mismatch for stage '" + s->name + "' against the network");
    }
    ConvWeights w;
    w.out_channels = s->out_channels;
    w.in_channels = s->in_channels;
    w.kernel_size = s->kernel_size;
    w.stride = s->stride;
    w.padding = s->padding;
    w.kernel = wit->second.values;
    w.bias = bit->second.values;
    store.entries.emplace(s->name, std::move(w));
  }
  return store;
}

void save_weights(const WeightStore& store, const std::filesystem::path& path) {
  const auto bytes = encode_weights(store);
  try {
    write_file_bytes(path, bytes);
  } catch (const FormatError& e) {
    throw WeightFileError(Kind::kIo, e.what());
  }
}

WeightStore load_weights(const std::filesystem::path& path, const NetDef& net) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = read_file_bytes(path);
  } catch (const FormatError& e) {
    throw WeightFileError(Kind::kIo, e.what());
  }
  return bind_weights(net, decode_weight_file(bytes));
}

}  // namespace bsvd
