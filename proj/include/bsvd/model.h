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
#include <string_view>
#include <vector>

#include "bsvd/tensor.h"

namespace bsvd {

enum class FusionMode { kBidirectional, kUnidirectional, kNone };

// kWNet and kUNet follow the encoder/decoder layout of the BSVD backbone;
// kPlain is a single-resolution stack used for small, fast test models.
enum class Topology { kWNet, kUNet, kPlain };

std::string_view to_string(FusionMode mode);
std::string_view to_string(Topology topology);
FusionMode parse_fusion_mode(std::string_view text);
Topology parse_topology(std::string_view text);

struct ModelConfig {
  int base_channels = 64;
  // 3: blind RGB. 4: RGB + noise map. 5: packed raw (4) + noise map.
  int input_channels = 3;
  int output_channels = 3;
  int shift_ratio = 8;
  FusionMode fusion_mode = FusionMode::kBidirectional;
  Topology topology = Topology::kWNet;
  // [fusion, conv, relu6] repeats per encoder/decoder level (2 in the
  // reference backbone). For kPlain: total number of repeats.
  int blocks = 2;

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

// Number of channels exchanged with each temporal neighbour.
inline int shift_channels(int channels, int ratio) { return channels / ratio; }

// Throws ConfigError unless the shift ratio leaves at least one shifted and
// one unshifted channel for a fusion point over `channels` channels.
void check_fusion_width(int channels, int ratio, std::string_view where);

// Flat key=value text. Unknown keys and malformed values are FormatErrors;
// omitted keys keep their defaults.
ModelConfig parse_model_config(std::string_view text);
ModelConfig load_model_config(const std::filesystem::path& path);
std::string format_model_config(const ModelConfig& cfg);

enum class StageKind { kConv, kRelu6, kPixelShuffle, kFusion, kSkipSource, kSkipJoin };

struct Stage {
  StageKind kind = StageKind::kConv;
  std::string name;
  int in_channels = 0;
  int out_channels = 0;
  int scale = 1;  // spatial divisor of the stage output relative to the frame

  // kConv
  int kernel_size = 3;
  int stride = 1;
  int padding = 1;
  // kPixelShuffle
  int factor = 0;
  // kFusion
  FusionMode fusion = FusionMode::kNone;
  int shift = 0;
  // kSkipSource / kSkipJoin
  std::string tag;
};

struct NetDef {
  ModelConfig config;
  std::vector<Stage> stages;

  int input_channels() const { return config.input_channels; }
  int output_channels() const { return config.output_channels; }
  // Spatial size must be divisible by this.
  int spatial_multiple() const;
  int fusion_count() const;
  std::vector<const Stage*> conv_stages() const;
};

NetDef build_net(const ModelConfig& cfg);
// Two U-Nets; the first emits base_channels features, the second the image.
NetDef build_wnet(ModelConfig cfg);

struct WeightStore {
  std::map<std::string, ConvWeights> entries;

  const ConvWeights& at(const std::string& name) const;
};

bool bitwise_equal(const WeightStore& a, const WeightStore& b);

// Every conv stage of `net` resolves to exactly one entry of matching
// geometry. Throws WeightFileError (kIncompleteStore / kDimMismatch).
void check_store(const NetDef& net, const WeightStore& store);

enum class InitMode {
  kHeUniform,    // U(-sqrt(6/fan_in), +sqrt(6/fan_in))
  kZeroKernels,  // all kernels zero; only biases reach the output
};

struct InitOptions {
  InitMode mode = InitMode::kHeUniform;
  // Biases are U(-bias_range, +bias_range); 0 gives zero biases.
  float bias_range = 0.0f;
};

// Values are drawn from Rng(seed) in stage order: each conv's kernel in
// [out][in][ky][kx] order, then its biases when bias_range > 0.
WeightStore init_weights(const NetDef& net, std::uint64_t seed, InitOptions options = {});

// Constant 1 x H x W plane of sigma / 255 (sigma on the 0-255 scale).
Tensor make_noise_map(double sigma, int height, int width);

// Channels the caller supplies per frame: input_channels minus the noise map
// for non-blind configs.
int frame_channels(const ModelConfig& cfg);
bool uses_noise_map(const ModelConfig& cfg);

// Builds the network input for one frame: appends the noise map for
// non-blind configs, passes blind frames through unchanged.
Tensor prepare_input(const Tensor& frame, const ModelConfig& cfg, double sigma);

}  // namespace bsvd
