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

#include "bsvd/offline.h"

#include <algorithm>
#include <map>

#include "bsvd/errors.h"

namespace bsvd {

Tensor tsm_fuse(const Tensor* past, const Tensor& cur, const Tensor* future, int f) {
  const int c = cur.channels();
  if (f < 1 || 2 * f >= c) {
    throw ConfigError("tsm_fuse: shift " + std::to_string(f) + " invalid for " + std::to_string(c) +
                      " channels");
  }
  if ((past && past->shape() != cur.shape()) || (future && future->shape() != cur.shape())) {
    throw ConfigError("tsm_fuse: neighbour shape mismatch");
  }
  const Tensor head = past ? slice_channels(*past, 0, f) : Tensor({f, cur.height(), cur.width()});
  const Tensor body = slice_channels(cur, f, c - f);
  const Tensor tail =
      future ? slice_channels(*future, c - f, c) : Tensor({f, cur.height(), cur.width()});
  return concat_channels({&head, &body, &tail});
}

FeatureMap tsm_fuse(const FeatureMap* past, const FeatureMap& cur, const FeatureMap* future,
                    int f) {
  if ((past && past->t != cur.t - 1) || (future && future->t != cur.t + 1)) {
    throw ConfigError("tsm_fuse: neighbours are not adjacent in time");
  }
  return {tsm_fuse(past ? &past->tensor : nullptr, cur.tensor, future ? &future->tensor : nullptr, f),
          cur.t, cur.layer};
}

Tensor causal_fuse(const Tensor* past, const Tensor& cur, int f) {
  const int c = cur.channels();
  if (f < 1 || 2 * f >= c) {
    throw ConfigError("causal_fuse: shift " + std::to_string(f) + " invalid for " +
                      std::to_string(c) + " channels");
  }
  if (past && past->shape() != cur.shape()) throw ConfigError("causal_fuse: shape mismatch");
  const Tensor head =
      past ? slice_channels(*past, 0, 2 * f) : Tensor({2 * f, cur.height(), cur.width()});
  const Tensor body = slice_channels(cur, 2 * f, c);
  return concat_channels({&head, &body});
}

namespace {

std::size_t clip_bytes(const std::vector<Tensor>& clip) {
  std::size_t n = 0;
  for (const Tensor& t : clip) n += t.bytes();
  return n;
}

void check_frames(const NetDef& net, std::span<const Tensor> frames) {
  if (frames.empty()) throw ConfigError("forward: empty frame list");
  const Shape s = frames.front().shape();
  if (s.channels != net.input_channels()) {
    throw ConfigError("forward: frames have " + std::to_string(s.channels) +
                      " channels, network expects " + std::to_string(net.input_channels()));
  }
  const int m = net.spatial_multiple();
  if (s.height < 1 || s.width < 1 || s.height % m != 0 || s.width % m != 0) {
    throw ConfigError("forward: frame size " + to_string(s) + " must be a positive multiple of " +
                      std::to_string(m));
  }
  for (const Tensor& f : frames) {
    if (f.shape() != s) throw ConfigError("forward: frames differ in shape");
  }
}

}  // namespace

std::vector<Tensor> forward_full_sequence(const NetDef& net, const WeightStore& store,
                                          std::span<const Tensor> frames, ForwardStats* stats) {
  check_frames(net, frames);
  const std::size_t n = frames.size();
  std::vector<Tensor> cur(frames.begin(), frames.end());
  std::map<std::string, std::vector<Tensor>> saved;
  std::size_t saved_bytes = 0;
  std::size_t peak = clip_bytes(cur);
  std::int64_t convs = 0;

  for (const Stage& stage : net.stages) {
    std::vector<Tensor> next;
    next.reserve(n);
    switch (stage.kind) {
      case StageKind::kConv: {
        const ConvWeights& w = store.at(stage.name);
        for (const Tensor& x : cur) next.push_back(conv2d(x, w));
        convs += static_cast<std::int64_t>(n);
        break;
      }
      case StageKind::kRelu6:
        for (const Tensor& x : cur) next.push_back(relu6(x));
        break;
      case StageKind::kPixelShuffle:
        for (const Tensor& x : cur) next.push_back(pixel_shuffle(x, stage.factor));
        break;
      case StageKind::kFusion:
        if (stage.fusion == FusionMode::kNone) continue;
        for (std::size_t t = 0; t < n; ++t) {
          const Tensor* past = t > 0 ? &cur[t - 1] : nullptr;
          if (stage.fusion == FusionMode::kBidirectional) {
            const Tensor* future = t + 1 < n ? &cur[t + 1] : nullptr;
            next.push_back(tsm_fuse(past, cur[t], future, stage.shift));
          } else {
            next.push_back(causal_fuse(past, cur[t], stage.shift));
          }
        }
        break;
      case StageKind::kSkipSource:
        saved_bytes += clip_bytes(cur);
        saved[stage.tag] = cur;
        continue;
      case StageKind::kSkipJoin: {
        auto it = saved.find(stage.tag);
        if (it == saved.end()) throw ConfigError("forward: skip '" + stage.tag + "' has no source");
        for (std::size_t t = 0; t < n; ++t) next.push_back(add(cur[t], it->second[t]));
        peak = std::max(peak, clip_bytes(cur) + clip_bytes(next) + saved_bytes);
        saved_bytes -= clip_bytes(it->second);
        saved.erase(it);
        cur = std::move(next);
        continue;
      }
    }
    peak = std::max(peak, clip_bytes(cur) + clip_bytes(next) + saved_bytes);
    cur = std::move(next);
  }

  if (stats) {
    stats->conv_evals += convs;
    stats->peak_activation_bytes = std::max(stats->peak_activation_bytes, peak);
  }
  return cur;
}

std::vector<Tensor> forward_clipped_mimo(const NetDef& net, const WeightStore& store,
                                         std::span<const Tensor> frames, const ClipConfig& clip,
                                         ForwardStats* stats) {
  if (clip.t_clip < 1) throw ConfigError("forward_clipped_mimo: t_clip must be >= 1");
  check_frames(net, frames);
  std::vector<Tensor> out;
  out.reserve(frames.size());
  for (std::size_t start = 0; start < frames.size(); start += clip.t_clip) {
    const std::size_t len = std::min<std::size_t>(clip.t_clip, frames.size() - start);
    auto part = forward_full_sequence(net, store, frames.subspan(start, len), stats);
    for (Tensor& t : part) out.push_back(std::move(t));
  }
  return out;
}

bool near_interior_clip_edge(std::int64_t t, std::int64_t total, int t_clip, int blocks) {
  const std::int64_t start = (t / t_clip) * t_clip;
  const std::int64_t end = std::min<std::int64_t>(start + t_clip, total) - 1;
  const bool left = start > 0 && t - start < blocks;
  const bool right = end < total - 1 && end - t < blocks;
  return left || right;
}

}  // namespace bsvd
