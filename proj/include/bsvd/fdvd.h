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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bsvd/model.h"
#include "bsvd/stream.h"

namespace bsvd {

// Two-stage cascade in the style of FastDVDnet: each stage is a frame-level
// U-Net fed with three stacked frames (plus one noise map). Temporal edges
// use replicate padding.
struct FdvdConfig {
  int base_channels = 32;
  int frame_channels = 3;
  bool noise_map = true;
  int blocks = 2;
};

struct FdvdModel {
  FdvdConfig config;
  NetDef stage1;
  NetDef stage2;
  WeightStore weights1;
  WeightStore weights2;
  double sigma = 0.0;
};

NetDef build_fdvd_stage(const FdvdConfig& cfg);
FdvdModel make_fdvd_model(const FdvdConfig& cfg, std::uint64_t seed, double sigma,
                          InitOptions init = {});

// Streaming state of one cascade stage. Unlike a bidirectional buffer block
// both buffers hold whole frames.
struct FdvdStage {
  const NetDef* net = nullptr;
  const WeightStore* store = nullptr;
  double sigma = 0.0;
  bool noise_map = false;

  std::optional<Tensor> past;
  std::optional<Tensor> current;
  std::int64_t current_t = -1;
  bool ended = false;
  std::int64_t evals = 0;

  std::size_t bytes() const;
};

// Evaluates the stage denoiser on (past, current, next [, noise map]).
Tensor fdvd_stage_eval(FdvdStage& stage, const Tensor& past, const Tensor& current,
                       const Tensor& next);

// One streaming step:
//  * first input: past <- current <- input (replicate warm-up), no output
//  * frame: output for current_t, then past <- current, current <- input
//  * end marker: the next frame is replaced by current (replicate), after
//    which the stage only forwards end markers
std::optional<StreamItem> fdvd_stage_step(FdvdStage& stage, const StreamItem& input);

struct OpCountReport {
  std::string mode;
  std::int64_t frames = 0;
  std::int64_t stage1_evals = 0;
  std::int64_t stage2_evals = 0;

  double per_frame() const {
    return frames == 0 ? 0.0 : static_cast<double>(stage1_evals + stage2_evals) / frames;
  }
  std::string to_json() const;
};

class FdvdPipeline {
 public:
  explicit FdvdPipeline(const FdvdModel& model);

  std::optional<FeatureMap> push(const Tensor& frame);
  std::vector<FeatureMap> flush();

  static constexpr int kLatency = 2;
  OpCountReport report() const;

 private:
  std::optional<FeatureMap> run(StreamItem item);

  FdvdStage stage1_;
  FdvdStage stage2_;
  std::int64_t steps_ = 0;
  std::int64_t frames_ = 0;
  bool flushed_ = false;
};

std::vector<Tensor> fdvd_run_pipeline(const FdvdModel& model, std::span<const Tensor> frames,
                                      OpCountReport* report = nullptr);

// Reference: for frame i, stage 1 runs on the three windows centred at
// i-1, i and i+1 (centres and neighbours clamped to the sequence), then
// stage 2 runs once on those three results. Nothing is cached.
std::vector<Tensor> fdvd_sliding_oracle(const FdvdModel& model, std::span<const Tensor> frames,
                                        OpCountReport* report = nullptr);

}  // namespace bsvd
