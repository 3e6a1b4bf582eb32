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

#include "bsvd/fdvd.h"

#include <algorithm>

#include "bsvd/errors.h"
#include "bsvd/offline.h"

#include "json.hpp"

namespace bsvd {

NetDef build_fdvd_stage(const FdvdConfig& cfg) {
  ModelConfig m;
  m.base_channels = cfg.base_channels;
  m.input_channels = 3 * cfg.frame_channels + (cfg.noise_map ? 1 : 0);
  m.output_channels = cfg.frame_channels;
  m.fusion_mode = FusionMode::kNone;
  m.topology = Topology::kUNet;
  m.blocks = cfg.blocks;
  return build_net(m);
}

FdvdModel make_fdvd_model(const FdvdConfig& cfg, std::uint64_t seed, double sigma,
                          InitOptions init) {
  FdvdModel model;
  model.config = cfg;
  model.stage1 = build_fdvd_stage(cfg);
  model.stage2 = build_fdvd_stage(cfg);
  model.weights1 = init_weights(model.stage1, seed, init);
  model.weights2 = init_weights(model.stage2, seed + 1, init);
  model.sigma = sigma;
  return model;
}

std::size_t FdvdStage::bytes() const {
  return (past ? past->bytes() : 0) + (current ? current->bytes() : 0);
}

Tensor fdvd_stage_eval(FdvdStage& stage, const Tensor& past, const Tensor& current,
                       const Tensor& next) {
  Tensor input;
  if (stage.noise_map) {
    const Tensor map = make_noise_map(stage.sigma, current.height(), current.width());
    input = concat_channels({&past, &current, &next, &map});
  } else {
    input = concat_channels({&past, &current, &next});
  }
  ++stage.evals;
  const Tensor frames[] = {std::move(input)};
  return std::move(forward_full_sequence(*stage.net, *stage.store, frames).front());
}

std::optional<StreamItem> fdvd_stage_step(FdvdStage& stage, const StreamItem& input) {
  if (const auto* end = std::get_if<EndOfStream>(&input)) {
    if (stage.ended) return EndOfStream{end->t - 1};
    if (!stage.current) throw StateError("fdvd stage: end of stream before any input");
    FeatureMap out{fdvd_stage_eval(stage, *stage.past, *stage.current, *stage.current),
                   stage.current_t, 0};
    stage.past = std::move(stage.current);
    stage.current.reset();
    stage.ended = true;
    return out;
  }
  const auto& in = std::get<FeatureMap>(input);
  if (stage.ended) throw StateError("fdvd stage: input after end of stream");
  if (!stage.current) {
    stage.past = in.tensor;
    stage.current = in.tensor;
    stage.current_t = in.t;
    return std::nullopt;
  }
  if (in.tensor.shape() != stage.current->shape()) throw ConfigError("fdvd stage: frame shape changed");
  if (in.t != stage.current_t + 1) throw StateError("fdvd stage: input out of sequence");
  FeatureMap out{fdvd_stage_eval(stage, *stage.past, *stage.current, in.tensor), stage.current_t,
                 in.layer + 1};
  stage.past = std::move(stage.current);
  stage.current = in.tensor;
  stage.current_t = in.t;
  return out;
}

std::string OpCountReport::to_json() const {
  nlohmann::json j = {{"mode", mode},
                      {"frames", frames},
                      {"stage1_evals", stage1_evals},
                      {"stage2_evals", stage2_evals},
                      {"per_frame", per_frame()}};
  return j.dump();
}

FdvdPipeline::FdvdPipeline(const FdvdModel& model) {
  for (auto* s : {&stage1_, &stage2_}) {
    s->sigma = model.sigma;
    s->noise_map = model.config.noise_map;
  }
  stage1_.net = &model.stage1;
  stage1_.store = &model.weights1;
  stage2_.net = &model.stage2;
  stage2_.store = &model.weights2;
}

std::optional<FeatureMap> FdvdPipeline::run(StreamItem item) {
  ++steps_;
  auto mid = fdvd_stage_step(stage1_, item);
  if (!mid) return std::nullopt;
  auto out = fdvd_stage_step(stage2_, *mid);
  if (!out) return std::nullopt;
  if (auto* fm = std::get_if<FeatureMap>(&*out)) return std::move(*fm);
  return std::nullopt;
}

std::optional<FeatureMap> FdvdPipeline::push(const Tensor& frame) {
  if (flushed_) throw StateError("fdvd pipeline: frame pushed after flush");
  if (frame.channels() != stage1_.net->input_channels() / 3) {
    throw ConfigError("fdvd pipeline: frame has " + std::to_string(frame.channels()) + " channels");
  }
  ++frames_;
  return run(FeatureMap{frame, steps_, 0});
}

std::vector<FeatureMap> FdvdPipeline::flush() {
  if (flushed_) throw StateError("fdvd pipeline: already flushed");
  if (frames_ == 0) throw StateError("fdvd pipeline: flush before any frame");
  flushed_ = true;
  std::vector<FeatureMap> out;
  for (int k = 0; k < kLatency; ++k) {
    if (auto y = run(EndOfStream{steps_})) out.push_back(std::move(*y));
  }
  return out;
}

OpCountReport FdvdPipeline::report() const {
  return {"pipeline", frames_, stage1_.evals, stage2_.evals};
}

std::vector<Tensor> fdvd_run_pipeline(const FdvdModel& model, std::span<const Tensor> frames,
                                      OpCountReport* report) {
  FdvdPipeline pipe(model);
  std::vector<Tensor> out;
  auto take = [&](FeatureMap y) {
    if (y.t != static_cast<std::int64_t>(out.size())) {
      throw StateError("fdvd pipeline: output out of order");
    }
    out.push_back(std::move(y.tensor));
  };
  for (const Tensor& f : frames) {
    if (auto y = pipe.push(f)) take(std::move(*y));
  }
  for (FeatureMap& y : pipe.flush()) take(std::move(y));
  if (report) *report = pipe.report();
  return out;
}

std::vector<Tensor> fdvd_sliding_oracle(const FdvdModel& model, std::span<const Tensor> frames,
                                        OpCountReport* report) {
  if (frames.empty()) throw ConfigError("fdvd oracle: empty frame list");
  FdvdStage s1;
  s1.net = &model.stage1;
  s1.store = &model.weights1;
  FdvdStage s2;
  s2.net = &model.stage2;
  s2.store = &model.weights2;
  for (auto* s : {&s1, &s2}) {
    s->sigma = model.sigma;
    s->noise_map = model.config.noise_map;
  }
  const auto last = static_cast<std::int64_t>(frames.size()) - 1;
  auto clamp = [&](std::int64_t i) { return std::clamp<std::int64_t>(i, 0, last); };

  std::vector<Tensor> out;
  out.reserve(frames.size());
  for (std::int64_t i = 0; i <= last; ++i) {
    std::vector<Tensor> mid;
    for (std::int64_t c : {clamp(i - 1), i, clamp(i + 1)}) {
      mid.push_back(fdvd_stage_eval(s1, frames[clamp(c - 1)], frames[c], frames[clamp(c + 1)]));
    }
    out.push_back(fdvd_stage_eval(s2, mid[0], mid[1], mid[2]));
  }
  if (report) *report = {"sliding", last + 1, s1.evals, s2.evals};
  return out;
}

}  // namespace bsvd
