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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bsvd/model.h"
#include "bsvd/tensor.h"

namespace bsvd {

// A feature tensor tagged with the temporal index of the frame it belongs to
// and the number of buffer blocks it has passed through.
struct FeatureMap {
  Tensor tensor;
  std::int64_t t = 0;
  int layer = 0;
};

struct ForwardStats {
  std::int64_t conv_evals = 0;
  // Peak of live activation bytes (weights excluded) during a clip forward.
  std::size_t peak_activation_bytes = 0;
};

// Temporal shift over one time step:
//   [0, f)      <- past      (zeros when absent)
//   [f, C - f)  <- cur
//   [C - f, C)  <- future    (zeros when absent)
// Requires 1 <= f and 2f < C.
Tensor tsm_fuse(const Tensor* past, const Tensor& cur, const Tensor* future, int f);
// Same, checking that the neighbours are at t - 1 and t + 1.
FeatureMap tsm_fuse(const FeatureMap* past, const FeatureMap& cur, const FeatureMap* future, int f);

// One-sided shift used by the causal variant:
//   [0, 2f) <- past[0, 2f) (zeros when absent), [2f, C) <- cur
Tensor causal_fuse(const Tensor* past, const Tensor& cur, int f);

// Runs the whole sequence as one clip. Every fusion point sees its true
// temporal neighbours, with zero features beyond both ends of the sequence.
std::vector<Tensor> forward_full_sequence(const NetDef& net, const WeightStore& store,
                                          std::span<const Tensor> frames,
                                          ForwardStats* stats = nullptr);

enum class ClipEdge { kZeroPad };

struct ClipConfig {
  int t_clip = 8;
  ClipEdge edge = ClipEdge::kZeroPad;
};

// Splits the sequence into consecutive non-overlapping clips of t_clip
// frames (the last one may be shorter) and runs each independently.
// stats->peak_activation_bytes is the largest single-clip peak.
std::vector<Tensor> forward_clipped_mimo(const NetDef& net, const WeightStore& store,
                                         std::span<const Tensor> frames, const ClipConfig& clip,
                                         ForwardStats* stats = nullptr);

// True when frame t lies within `blocks` frames of a clip edge that is not
// also a sequence edge. Only those outputs of forward_clipped_mimo can
// differ from forward_full_sequence.
bool near_interior_clip_edge(std::int64_t t, std::int64_t total, int t_clip, int blocks);

}  // namespace bsvd
