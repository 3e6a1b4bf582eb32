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

#include "bsvd/stream.h"

#include <map>
#include <ostream>

#include "bsvd/errors.h"

namespace bsvd {

std::int64_t item_time(const StreamItem& item) {
  return std::visit([](const auto& v) { return v.t; }, item);
}

BufferState BufferState::make(int channels, int shift, int height, int width) {
  if (shift < 1 || channels - 2 * shift < 1) {
    throw ConfigError("buffer block: shift " + std::to_string(shift) + " invalid for " +
                      std::to_string(channels) + " channels");
  }
  BufferState s;
  s.channels = channels;
  s.shift = shift;
  s.past = Tensor({shift, height, width});
  return s;
}

std::size_t BufferState::bytes() const {
  return past.bytes() + (current ? current->bytes() : 0);
}

std::optional<StreamItem> bbb_step(BufferState& state, const StreamItem& input,
                                   const ConvWeights& conv, std::int64_t* conv_evals) {
  const int c = state.channels;
  const int f = state.shift;

  if (const auto* end = std::get_if<EndOfStream>(&input)) {
    if (state.ended) return EndOfStream{end->t - 1};
    if (!state.current) throw StateError("buffer block: end of stream before any input");
    if (end->t != state.current_t + 1) throw StateError("buffer block: end marker out of sequence");
    const Tensor body = slice_channels(*state.current, f, c - f);
    const Tensor tail({f, body.height(), body.width()});
    const Tensor fused = concat_channels({&state.past, &body, &tail});
    FeatureMap out{conv2d(fused, conv), state.current_t, 0};
    if (conv_evals) ++*conv_evals;
    state.past = slice_channels(*state.current, 0, f);
    state.current.reset();
    state.ended = true;
    return out;
  }

  const auto& in = std::get<FeatureMap>(input);
  if (state.ended) throw StateError("buffer block: input after end of stream");
  if (in.tensor.channels() != c || in.tensor.height() != state.past.height() ||
      in.tensor.width() != state.past.width()) {
    throw ConfigError("buffer block: input " + to_string(in.tensor.shape()) + " does not match " +
                      std::to_string(c) + " channels at " + std::to_string(state.past.height()) +
                      "x" + std::to_string(state.past.width()));
  }
  if (!state.current) {
    state.current = in.tensor;
    state.current_t = in.t;
    return std::nullopt;
  }
  if (in.t != state.current_t + 1) throw StateError("buffer block: input out of sequence");

  const Tensor body = slice_channels(*state.current, f, c - f);
  const Tensor tail = slice_channels(in.tensor, c - f, c);
  const Tensor fused = concat_channels({&state.past, &body, &tail});
  FeatureMap out{conv2d(fused, conv), state.current_t, in.layer + 1};
  if (conv_evals) ++*conv_evals;
  state.past = slice_channels(*state.current, 0, f);
  state.current = in.tensor;
  state.current_t = in.t;
  return out;
}

CausalBufferState CausalBufferState::make(int channels, int shift, int height, int width) {
  if (shift < 1 || channels - 2 * shift < 1) {
    throw ConfigError("causal block: shift " + std::to_string(shift) + " invalid for " +
                      std::to_string(channels) + " channels");
  }
  CausalBufferState s;
  s.channels = channels;
  s.shift = shift;
  s.past = Tensor({2 * shift, height, width});
  return s;
}

StreamItem uni_step(CausalBufferState& state, const StreamItem& input, const ConvWeights& conv,
                    std::int64_t* conv_evals) {
  if (std::holds_alternative<EndOfStream>(input)) return input;
  const auto& in = std::get<FeatureMap>(input);
  const int c = state.channels;
  const int f2 = 2 * state.shift;
  if (in.tensor.channels() != c || in.tensor.height() != state.past.height() ||
      in.tensor.width() != state.past.width()) {
    throw ConfigError("causal block: input " + to_string(in.tensor.shape()) + " does not match");
  }
  const Tensor body = slice_channels(in.tensor, f2, c);
  const Tensor fused = concat_channels({&state.past, &body});
  FeatureMap out{conv2d(fused, conv), in.t, in.layer + 1};
  if (conv_evals) ++*conv_evals;
  state.past = slice_channels(in.tensor, 0, f2);
  return out;
}

PipelineGraph compile_pipeline(const NetDef& net) {
  PipelineGraph g;
  g.config = net.config;
  g.mode = net.config.fusion_mode;
  g.spatial_multiple = net.spatial_multiple();

  std::map<std::string, int> open_links;
  int offset = 0;
  const auto& stages = net.stages;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const Stage& s = stages[i];
    PipelineNode node;
    node.name = s.name;
    node.channels = s.in_channels;
    node.scale = s.scale;
    switch (s.kind) {
      case StageKind::kConv:
        node.kind = NodeKind::kConv;
        // A conv's input scale is its output scale divided by its stride.
        node.scale = s.scale / s.stride;
        break;
      case StageKind::kRelu6:
        node.kind = NodeKind::kRelu6;
        break;
      case StageKind::kPixelShuffle:
        node.kind = NodeKind::kPixelShuffle;
        node.factor = s.factor;
        node.scale = s.scale * s.factor;
        break;
      case StageKind::kFusion: {
        if (s.fusion == FusionMode::kNone) continue;
        if (i + 1 >= stages.size() || stages[i + 1].kind != StageKind::kConv) {
          throw CompileError("fusion point '" + s.name + "' is not followed by a conv");
        }
        const Stage& conv = stages[i + 1];
        if (conv.stride != 1) throw CompileError("fusion point '" + s.name + "' feeds a strided conv");
        node.kind = s.fusion == FusionMode::kBidirectional ? NodeKind::kBufferBlock
                                                            : NodeKind::kCausalBlock;
        node.name = conv.name;
        node.shift = s.shift;
        ++g.block_count;
        if (s.fusion == FusionMode::kBidirectional) ++offset;
        ++i;  // the conv is part of the block
        break;
      }
      case StageKind::kSkipSource: {
        if (open_links.count(s.tag)) throw CompileError("duplicate skip source '" + s.tag + "'");
        node.kind = NodeKind::kSkipSource;
        SkipLink link;
        link.tag = s.tag;
        link.source_offset = offset;
        link.channels = s.out_channels;
        link.scale = s.scale;
        node.link = static_cast<int>(g.links.size());
        open_links[s.tag] = node.link;
        g.links.push_back(link);
        break;
      }
      case StageKind::kSkipJoin: {
        auto it = open_links.find(s.tag);
        if (it == open_links.end()) throw CompileError("skip join '" + s.tag + "' has no source");
        node.kind = NodeKind::kSkipJoin;
        node.link = it->second;
        SkipLink& link = g.links[node.link];
        if (link.channels != s.in_channels || link.scale != s.scale) {
          throw CompileError("skip join '" + s.tag + "': operand geometry mismatch");
        }
        link.join_offset = offset;
        link.depth = offset - link.source_offset;
        open_links.erase(it);
        break;
      }
    }
    node.offset = offset;
    g.nodes.push_back(std::move(node));
  }
  if (!open_links.empty()) {
    throw CompileError("skip source '" + open_links.begin()->first + "' has no join");
  }
  g.latency = g.mode == FusionMode::kBidirectional ? g.block_count : 0;
  return g;
}

PipelineReport analyze(const PipelineGraph& graph, int height, int width) {
  PipelineReport r;
  r.block_count = graph.block_count;
  r.latency = graph.latency;
  switch (graph.mode) {
    case FusionMode::kBidirectional: r.receptive_field = 2 * graph.block_count + 1; break;
    case FusionMode::kUnidirectional: r.receptive_field = graph.block_count + 1; break;
    case FusionMode::kNone: r.receptive_field = 1; break;
  }
  auto plane = [&](int scale) {
    return static_cast<std::size_t>(height / scale) * static_cast<std::size_t>(width / scale);
  };
  std::size_t elements = 0;
  for (const PipelineNode& n : graph.nodes) {
    if (n.kind == NodeKind::kBufferBlock) {
      elements += static_cast<std::size_t>(n.shift + n.channels) * plane(n.scale);
    } else if (n.kind == NodeKind::kCausalBlock) {
      elements += static_cast<std::size_t>(2 * n.shift) * plane(n.scale);
    }
  }
  for (const SkipLink& l : graph.links) {
    elements += static_cast<std::size_t>(l.depth) * l.channels * plane(l.scale);
  }
  r.state_bytes = elements * sizeof(float);
  return r;
}

StreamPipeline::StreamPipeline(PipelineGraph graph, const WeightStore& store, int height,
                               int width, FlushMode mode)
    : graph_(std::move(graph)), store_(store), mode_(mode) {
  const int m = graph_.spatial_multiple;
  if (height < 1 || width < 1 || height % m != 0 || width % m != 0) {
    throw ConfigError("stream: frame size " + std::to_string(height) + "x" +
                      std::to_string(width) + " must be a positive multiple of " +
                      std::to_string(m));
  }
  input_shape_ = {graph_.config.input_channels, height, width};
  state_index_.assign(graph_.nodes.size(), -1);
  for (std::size_t i = 0; i < graph_.nodes.size(); ++i) {
    const PipelineNode& n = graph_.nodes[i];
    const int h = height / n.scale;
    const int w = width / n.scale;
    if (n.kind == NodeKind::kBufferBlock) {
      state_index_[i] = static_cast<int>(blocks_.size());
      blocks_.push_back(BufferState::make(n.channels, n.shift, h, w));
    } else if (n.kind == NodeKind::kCausalBlock) {
      state_index_[i] = static_cast<int>(causal_.size());
      causal_.push_back(CausalBufferState::make(n.channels, n.shift, h, w));
    }
    if (n.kind == NodeKind::kConv || n.kind == NodeKind::kBufferBlock ||
        n.kind == NodeKind::kCausalBlock) {
      store_.at(n.name);  // fail early on a missing tensor
    }
  }
  queues_.resize(graph_.links.size());
}

void StreamPipeline::set_trace(std::ostream* out) {
  trace_ = out;
  if (trace_) *trace_ << "step,activated_blocks,emitted_index,state_bytes\n";
}

std::optional<FeatureMap> StreamPipeline::push(const Tensor& frame) {
  if (flushed_ || ends_in_ > 0) throw StateError("stream: frame pushed after end of stream");
  if (frame.shape() != input_shape_) {
    throw ConfigError("stream: frame " + to_string(frame.shape()) + ", expected " +
                      to_string(input_shape_));
  }
  FeatureMap item{frame, steps_, 0};
  ++frames_in_;
  return run(std::move(item));
}

std::optional<FeatureMap> StreamPipeline::push_end() {
  if (frames_in_ == 0) throw StateError("stream: end of stream before any frame");
  if (ends_in_ >= graph_.latency) throw StateError("stream: pipeline already drained");
  ++ends_in_;
  if (mode_ == FlushMode::kPaperZeroFrames) {
    return run(FeatureMap{Tensor(input_shape_), steps_, 0});
  }
  return run(EndOfStream{steps_});
}

std::vector<FeatureMap> StreamPipeline::flush() {
  if (flushed_) throw StateError("stream: already flushed");
  if (frames_in_ == 0) throw StateError("stream: flush before any frame");
  std::vector<FeatureMap> out;
  while (ends_in_ < graph_.latency) {
    if (auto y = push_end()) out.push_back(std::move(*y));
  }
  flushed_ = true;
  return out;
}

std::size_t StreamPipeline::state_bytes() const {
  std::size_t n = 0;
  for (const BufferState& b : blocks_) n += b.bytes();
  for (const CausalBufferState& b : causal_) n += b.bytes();
  for (const auto& q : queues_) {
    for (const StreamItem& item : q) {
      if (const auto* fm = std::get_if<FeatureMap>(&item)) n += fm->tensor.bytes();
    }
  }
  return n;
}

int StreamPipeline::activated_blocks() const {
  int n = 0;
  for (const BufferState& b : blocks_) n += b.activated();
  return n;
}

std::optional<FeatureMap> StreamPipeline::run(StreamItem item) {
  const std::int64_t step = steps_++;
  std::optional<FeatureMap> emitted;
  bool stalled = false;

  for (std::size_t i = 0; i < graph_.nodes.size() && !stalled; ++i) {
    const PipelineNode& node = graph_.nodes[i];
    auto* fm = std::get_if<FeatureMap>(&item);
    switch (node.kind) {
      case NodeKind::kConv:
        if (fm) {
          fm->tensor = conv2d(fm->tensor, store_.at(node.name));
          ++conv_evals_;
        }
        break;
      case NodeKind::kRelu6:
        if (fm) fm->tensor = relu6(fm->tensor);
        break;
      case NodeKind::kPixelShuffle:
        if (fm) fm->tensor = pixel_shuffle(fm->tensor, node.factor);
        break;
      case NodeKind::kBufferBlock: {
        auto out = bbb_step(blocks_[state_index_[i]], item, store_.at(node.name), &conv_evals_);
        if (!out) {
          stalled = true;
        } else {
          item = std::move(*out);
        }
        break;
      }
      case NodeKind::kCausalBlock:
        item = uni_step(causal_[state_index_[i]], item, store_.at(node.name), &conv_evals_);
        break;
      case NodeKind::kSkipSource:
        queues_[node.link].push_back(item);
        break;
      case NodeKind::kSkipJoin: {
        auto& q = queues_[node.link];
        if (q.empty()) throw StateError("skip join '" + graph_.links[node.link].tag + "': queue empty");
        StreamItem skipped = std::move(q.front());
        q.pop_front();
        if (item_time(skipped) != item_time(item) ||
            skipped.index() != item.index()) {
          throw StateError("skip join '" + graph_.links[node.link].tag +
                           "': operands at t=" + std::to_string(item_time(item)) + " and t=" +
                           std::to_string(item_time(skipped)));
        }
        if (fm) fm->tensor = add(fm->tensor, std::get<FeatureMap>(skipped).tensor);
        break;
      }
    }
  }

  if (!stalled) {
    if (auto* fm = std::get_if<FeatureMap>(&item)) emitted = std::move(*fm);
  }
  if (trace_) {
    *trace_ << step << ',' << activated_blocks() << ',' << (emitted ? emitted->t : -1) << ','
            << state_bytes() << '\n';
  }
  return emitted;
}

std::vector<Tensor> run_stream(const PipelineGraph& graph, const WeightStore& store,
                               std::span<const Tensor> frames, FlushMode mode,
                               StreamRunStats* stats, std::ostream* trace) {
  if (frames.empty()) throw ConfigError("run_stream: empty frame list");
  StreamPipeline pipe(graph, store, frames.front().height(), frames.front().width(), mode);
  pipe.set_trace(trace);
  std::vector<Tensor> out;
  out.reserve(frames.size());
  auto take = [&](std::optional<FeatureMap> y) {
    if (!y) return;
    if (stats && stats->first_output_step < 0) stats->first_output_step = pipe.steps() - 1;
    if (y->t != static_cast<std::int64_t>(out.size())) {
      throw StateError("run_stream: output for frame " + std::to_string(y->t) + ", expected " +
                       std::to_string(out.size()));
    }
    out.push_back(std::move(y->tensor));
  };
  for (const Tensor& f : frames) {
    take(pipe.push(f));
    if (stats) stats->state_bytes.push_back(pipe.state_bytes());
  }
  while (pipe.frames_in() + graph.latency > pipe.steps()) {
    take(pipe.push_end());
    if (stats) stats->state_bytes.push_back(pipe.state_bytes());
  }
  pipe.flush();
  if (out.size() != frames.size()) throw StateError("run_stream: missing outputs after flush");
  if (stats) stats->conv_evals = pipe.conv_evals();
  return out;
}

}  // namespace bsvd
