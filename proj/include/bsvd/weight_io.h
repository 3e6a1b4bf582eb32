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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "bsvd/model.h"

namespace bsvd {

// Weight file layout (all integers little-endian):
//
//   "BSVDWGT1"                      8-byte magic
//   u32 version = 1
//   u32 tensor count
//   per tensor:
//     u16 name length, UTF-8 name
//     u8  rank, u32 dims[rank]
//     raw little-endian float32 payload
//
// Each conv stage contributes "<stage>.weight" (rank 4: out, in, k, k) and
// "<stage>.bias" (rank 1: out). Stride and padding come from the NetDef.
inline constexpr char kWeightMagic[8] = {'B', 'S', 'V', 'D', 'W', 'G', 'T', '1'};
inline constexpr std::uint32_t kWeightVersion = 1;

struct RawTensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> values;
};

std::vector<std::uint8_t> encode_weights(const WeightStore& store);
std::map<std::string, RawTensor> decode_weight_file(const std::vector<std::uint8_t>& bytes);

// Resolves the decoded tensors against `net`; every conv stage must be
// present with matching dims.
WeightStore bind_weights(const NetDef& net, const std::map<std::string, RawTensor>& tensors);

void save_weights(const WeightStore& store, const std::filesystem::path& path);
WeightStore load_weights(const std::filesystem::path& path, const NetDef& net);

}  // namespace bsvd
