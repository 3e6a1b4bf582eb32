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
#include <span>
#include <vector>

#include "bsvd/tensor.h"

namespace bsvd {

// Sequence container (little-endian):
//   "BSVDSEQ1", u32 version = 1, u32 T, u32 C, u32 H, u32 W,
//   then T frames of C*H*W float32 in tensor order.
inline constexpr char kSequenceMagic[8] = {'B', 'S', 'V', 'D', 'S', 'E', 'Q', '1'};
inline constexpr std::uint32_t kSequenceVersion = 1;

std::vector<std::uint8_t> encode_sequence(std::span<const Tensor> frames);
std::vector<Tensor> decode_sequence(std::span<const std::uint8_t> bytes);

void write_sequence(const std::filesystem::path& path, std::span<const Tensor> frames);
std::vector<Tensor> read_sequence(const std::filesystem::path& path);

// 8-bit binary PGM (1 channel) / PPM (3 channels) views. Values are clamped
// to [0, 1] and rounded; this is lossy and only meant for looking at frames.
void write_netpbm(const std::filesystem::path& path, const Tensor& frame);
Tensor read_netpbm(const std::filesystem::path& path);

// Writes frame_0000.ppm (or .pgm), frame_0001..., into `dir`.
void export_netpbm_frames(const std::filesystem::path& dir, std::span<const Tensor> frames);
// Reads every .ppm/.pgm file of `dir` in lexicographic order.
std::vector<Tensor> import_netpbm_frames(const std::filesystem::path& dir);

}  // namespace bsvd
