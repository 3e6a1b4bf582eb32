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
#include <deque>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "bsvd/model.h"
#include "bsvd/offline.h"
#include "bsvd/tensor.h"

namespace bsvd {

// End-of-stream marker travelling through the pipeline in place of the
// feature for (phantom) frame t.
struct EndOfStream {
  std::int64_t t = 0;
};

using StreamItem = std::variant<FeatureMap, EndOfStream>;

std::int64_t item_time(const StreamItem& item);

// State of one bidirectional buffer block: the full feature of the previous
// frame and the first f channels of the frame before it.
struct BufferState {
  int channels = 0;  // C_f
  int shift = 0;     // f
  Tensor past;       // f channels; all-zero until the block has fired once
  std::optional<Tensor> current;
  std::int64_t current_t = -1;
  // Set once an end marker has been absorbed: `current` is then a phantom
  // frame past the end of the stream.
  bool ended = false;

  static BufferState make(int channels, int shift, int height, int width);
  bool activated() const { return current.has_value() || ended; }
  std::size_t bytes() const;
};

// One step of a bidirectional buffer block.
//
//  * First input: stored as `current`, nothing is returned.
//  * Afterwards: conv(past ++ current[f, C-f) ++ input[C-f, C)) is returned
//    for time current_t, then past <- current[0, f) and current <- input.
//  * End marker: as above with the future slice zero-filled; `current`
//    becomes a phantom and later markers pass through as markers for t - 1.
std::optional<StreamItem> bbb_step(BufferState& state, const StreamItem& input,
                                   const ConvWeights& conv, std::int64_t* conv_evals = nullptr);

// Causal stream buffer: 2f channels of the previous frame.
struct CausalBufferState {
  int channels = 0;
  int shift = 0;
  Tensor past;  // 2f channels, zero-initialised

  static CausalBufferState make(int channels, int shift, int height, int width);
  std::size_t bytes() const { return past.bytes(); }
};

// conv(past ++ input[2f, C)) for the input's own time step; past <- input[0, 2f).
// End markers pass through unchanged.
StreamItem uni_step(CausalBufferState& state, const StreamItem& input, const ConvWeights& conv,
                    std::int64_t* conv_evals = nullptr);

enum class NodeKind {
  kConv,
  kRelu6,
  kPixelShuffle,
  kBufferBlock,  // bidirectional fusion + the conv that follows it
  kCausalBlock,  // unidirectional fusion + conv
  kSkipSource,
  kSkipJoin,
};

struct PipelineNode {
  NodeKind kind = NodeKind::kConv;
  std::string name;  // conv weight key for kConv and block nodes
  int channels = 0;  // input channels
  int scale = 1;     // spatial divisor of the node input
  int shift = 0;
  int factor = 0;
  int link = -1;    // index into PipelineGraph::links for skip nodes
  int offset = 0;   // buffer blocks between the input and this node's output
};

// Delay queue for a skip connection; depth = join offset - source offset.
struct SkipLink {
  std::string tag;
  int source_offset = 0;
  int join_offset = 0;
  int depth = 0;
  int channels = 0;
  int scale = 1;
};

struct PipelineGraph {
  ModelConfig config;
  FusionMode mode = FusionMode::kNone;
  std::vector<PipelineNode> nodes;
  std::vector<SkipLink> links;
  int block_count = 0;  // N
  int latency = 0;      // N for bidirectional fusion, 0 otherwise
  int spatial_multiple = 1;
};

// Folds each fusion point into the conv that consumes it, assigns temporal
// offsets, and sizes every skip queue from the offset difference of its
// endpoints. Throws CompileError on unmatched skip tags or a fusion point
// that is not followed by a conv.
PipelineGraph compile_pipeline(const NetDef& net);

struct PipelineReport {
  int block_count = 0;
  int latency = 0;
  int receptive_field = 0;   // frames that can influence one output
  std::size_t state_bytes = 0;  // buffer blocks + skip queues, steady state
};

PipelineReport analyze(const PipelineGraph& graph, int height, int width);

enum class FlushMode {
  kExactEos,        // end markers; zero-fills only the future shift channels
  kPaperZeroFrames, // feeds all-zero input frames
};

// Streaming executor. One instance owns the state of one stream; calls must
// be serialised. `store` must outlive the pipeline.
class StreamPipeline {
 public:
  StreamPipeline(PipelineGraph graph, const WeightStore& store, int height, int width,
                 FlushMode mode = FlushMode::kExactEos);

  // Feeds input frame i (the model input, noise map included). Returns the
  // output for frame i - latency once the pipeline is warm.
  std::optional<FeatureMap> push(const Tensor& frame);
  // One flush step: an end marker, or a zero frame in kPaperZeroFrames mode.
  std::optional<FeatureMap> push_end();
  // Drains the remaining `latency` outputs.
  std::vector<FeatureMap> flush();

  std::size_t state_bytes() const;
  int activated_blocks() const;
  std::int64_t steps() const { return steps_; }
  std::int64_t frames_in() const { return frames_in_; }
  std::int64_t conv_evals() const { return conv_evals_; }
  const PipelineGraph& graph() const { return graph_; }
  FlushMode flush_mode() const { return mode_; }

  // CSV trace, one line per step: step,activated_blocks,emitted_index,state_bytes
  void set_trace(std::ostream* out);

 private:
  std::optional<FeatureMap> run(StreamItem item);

  PipelineGraph graph_;
  const WeightStore& store_;
  Shape input_shape_;
  FlushMode mode_;
  std::vector<BufferState> blocks_;
  std::vector<CausalBufferState> causal_;
  std::vector<int> state_index_;  // node -> index into blocks_ / causal_
  std::vector<std::deque<StreamItem>> queues_;
  std::int64_t steps_ = 0;
  std::int64_t frames_in_ = 0;
  int ends_in_ = 0;
  bool flushed_ = false;
  std::int64_t conv_evals_ = 0;
  std::ostream* trace_ = nullptr;
};

struct StreamRunStats {
  std::int64_t conv_evals = 0;
  std::int64_t first_output_step = -1;
  std::vector<std::size_t> state_bytes;  // after each step
};

// Pushes every frame, flushes, and returns the outputs in frame order.
std::vector<Tensor> run_stream(const PipelineGraph& graph, const WeightStore& store,
                               std::span<const Tensor> frames,
                               FlushMode mode = FlushMode::kExactEos,
                               StreamRunStats* stats = nullptr, std::ostream* trace = nullptr);

}  // namespace bsvd
