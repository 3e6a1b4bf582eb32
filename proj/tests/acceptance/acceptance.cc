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

// Acceptance gate: prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "bsvd/byte_io.h"
#include "bsvd/commands.h"
#include "bsvd/errors.h"
#include "bsvd/fdvd.h"
#include "bsvd/model.h"
#include "bsvd/noise.h"
#include "bsvd/offline.h"
#include "bsvd/stream.h"
#include "bsvd/weight_io.h"
#include "oracles/oracles.h"

using namespace bsvd;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = "failed: " + what;
    pass = pass && ok;
  }
};

WeightStore seeded(const NetDef& net, std::uint64_t seed) {
  InitOptions opt;
  opt.bias_range = 0.1f;
  return init_weights(net, seed, opt);
}

std::set<int> changed_outputs(const std::vector<Tensor>& a, const std::vector<Tensor>& b) {
  std::set<int> out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!bitwise_equal(a[i], b[i])) out.insert(static_cast<int>(i));
  }
  return out;
}

std::set<int> range_set(int lo, int hi, int total) {
  std::set<int> s;
  for (int i = std::max(lo, 0); i <= std::min(hi, total - 1); ++i) s.insert(i);
  return s;
}

Outcome streaming_equivalence() {
  Outcome r;
  const auto start = Clock::now();
  int runs = 0;
  for (int base : {8, 16}) {
    for (int n : {2, 4, 16}) {
      const ModelConfig cfg = oracle::tiny_config(n, base, 4);
      const NetDef net = build_net(cfg);
      const WeightStore store = seeded(net, 100 + base + n);
      const PipelineGraph g = compile_pipeline(net);
      r.require(g.latency == n, "graph latency for N=" + std::to_string(n));
      for (int t_len : {n, n + 1, 3 * n, 100}) {
        const auto frames = oracle::random_frames(t_len, {4, 16, 16}, 7 * t_len + base);
        const auto want = forward_full_sequence(net, store, frames);
        const auto got = run_stream(g, store, frames, FlushMode::kExactEos);
        double worst = 0.0;
        for (int t = 0; t < t_len; ++t) worst = std::max(worst, max_abs_diff(got[t], want[t]));
        r.require(got.size() == want.size() && worst == 0.0,
                  "base " + std::to_string(base) + " N=" + std::to_string(n) + " T=" +
                      std::to_string(t_len));
        ++runs;
      }
    }
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  r.require(secs < 60.0, "runtime budget");
  if (r.pass) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%d runs, max abs diff 0, %.2f s", runs, secs);
    r.detail = buf;
  }
  return r;
}

Outcome clip_edges() {
  Outcome r;
  const int n = 4, t_len = 64, clip = 8;
  const NetDef net = build_net(oracle::tiny_config(n, 8, 4));
  const WeightStore store = seeded(net, 2);
  const auto frames = oracle::random_frames(t_len, {4, 16, 16}, 3);
  const auto full = forward_full_sequence(net, store, frames);
  std::size_t differing = 0, identical_mid_clip = 0;
  // T_clip = 8 is the required setting; at N = 4 almost every frame is near
  // an edge, so 16 is run as well to exercise frames in the middle of a clip.
  for (int c : {clip, 2 * clip}) {
    const auto mimo = forward_clipped_mimo(net, store, frames, ClipConfig{c});
    std::set<int> near;
    for (int t = 0; t < t_len; ++t) {
      if (near_interior_clip_edge(t, t_len, c, n)) near.insert(t);
    }
    const std::set<int> diff = changed_outputs(full, mimo);
    const std::string tag = " (T_clip=" + std::to_string(c) + ")";
    r.require(std::includes(near.begin(), near.end(), diff.begin(), diff.end()),
              "a frame away from the clip edges differs" + tag);
    r.require(diff == near, "a frame near an interior clip edge is unchanged" + tag);
    if (c == clip) {
      differing = diff.size();
    } else {
      identical_mid_clip = t_len - diff.size();
    }
  }
  if (r.pass) {
    r.detail = "T_clip=8: " + std::to_string(differing) + " frames differ, all within N of the " +
               std::to_string(t_len / clip - 1) + " interior edges, the rest bit-identical; " +
               "T_clip=16: " + std::to_string(identical_mid_clip) + " bit-identical";
  }
  return r;
}

Outcome latency_schedule() {
  Outcome r;
  for (int n : {2, 4, 16}) {
    const NetDef net = build_net(oracle::tiny_config(n, 8, 4));
    const WeightStore store = seeded(net, 5);
    StreamPipeline pipe(compile_pipeline(net), store, 16, 16);
    const auto frames = oracle::random_frames(n + 6, {4, 16, 16}, 6);
    std::int64_t first = -1;
    for (int i = 0; i < static_cast<int>(frames.size()); ++i) {
      const auto y = pipe.push(frames[i]);
      if (y && first < 0) first = i;
      r.require(y.has_value() == (i >= n), "output presence at step " + std::to_string(i));
      if (y) r.require(y->t == i - n, "index tag at step " + std::to_string(i));
    }
    r.require(first == n, "first output step for N=" + std::to_string(n));
    const auto tail = pipe.flush();
    r.require(static_cast<int>(tail.size()) == n, "flush count");
    for (int k = 0; k < static_cast<int>(tail.size()); ++k) {
      r.require(tail[k].t == 6 + k, "flush index tag");
    }
  }
  if (r.pass) r.detail = "first output at step N and tag i-N for N in {2,4,16}";
  return r;
}

Outcome receptive_field() {
  Outcome r;
  for (int n : {1, 2, 4}) {
    const NetDef net = build_net(oracle::tiny_config(n, 8, 4));
    const WeightStore store = seeded(net, 9 + n);
    const PipelineGraph g = compile_pipeline(net);
    const int t_len = 4 * n + 5;
    auto frames = oracle::random_frames(t_len, {4, 16, 16}, 10);
    const auto base = run_stream(g, store, frames);
    int width = 0;
    for (int j : {0, t_len / 2, t_len - 1}) {
      auto moved = frames;
      moved[j] = oracle::random_tensor({4, 16, 16}, 500 + j);
      const auto diff = changed_outputs(base, run_stream(g, store, moved));
      r.require(diff == range_set(j - n, j + n, t_len),
                "sweep N=" + std::to_string(n) + " j=" + std::to_string(j));
      if (j == t_len / 2) width = static_cast<int>(diff.size());
    }
    r.require(width == 2 * n + 1, "interior RF for N=" + std::to_string(n));
    r.require(analyze(g, 16, 16).receptive_field == 2 * n + 1, "analyze RF");
  }
  const int rf16 = analyze(compile_pipeline(build_net(oracle::tiny_config(16, 8))), 16, 16).receptive_field;
  const int rf2 = analyze(compile_pipeline(build_net(oracle::tiny_config(2, 8))), 16, 16).receptive_field;
  const int rf24 = analyze(compile_pipeline(build_net(oracle::tiny_config(24, 8))), 16, 16).receptive_field;
  r.require(rf16 == 33 && rf2 == 5 && rf24 == 49, "analyze table values");
  if (r.pass) {
    r.detail = "sweep RF 3/5/9 for N=1/2/4; analyze N=16:" + std::to_string(rf16) +
               " N=2:" + std::to_string(rf2) + " N=24:" + std::to_string(rf24);
  }
  return r;
}

Outcome constant_memory() {
  Outcome r;
  const NetDef net = build_net(oracle::tiny_config(16, 8, 4));
  const WeightStore store = seeded(net, 12);
  const PipelineGraph g = compile_pipeline(net);
  const std::size_t predicted = analyze(g, 16, 16).state_bytes;
  // Hand count for the base-8 W-Net at 16x16: per U-Net, four levels of two
  // blocks each and two skip queues of depth 8 (input level) and 4 (down1).
  const std::vector<oracle::BlockGeom> unet_blocks = {{16, 2}, {16, 2}, {32, 4}, {32, 4},
                                                      {32, 4}, {32, 4}, {16, 2}, {16, 2}};
  std::vector<oracle::BlockGeom> blocks = unet_blocks;
  blocks.insert(blocks.end(), unet_blocks.begin(), unet_blocks.end());
  const std::size_t hand = oracle::hand_state_bytes(
      blocks, {{8, 8, 1}, {4, 16, 2}, {8, 8, 1}, {4, 16, 2}}, 8, 16, 16);
  r.require(predicted == hand, "analyze prediction vs hand count");
  std::set<std::size_t> seen;
  for (int t_len : {32, 64, 128}) {
    StreamRunStats stats;
    run_stream(g, store, oracle::random_frames(t_len, {4, 16, 16}, t_len), FlushMode::kExactEos,
               &stats);
    for (int i = g.latency; i < t_len; ++i) seen.insert(stats.state_bytes[i]);
  }
  r.require(seen.size() == 1 && *seen.begin() == predicted, "pipeline state bytes vary");

  const NetDef small = build_net(oracle::tiny_config(4, 8, 4));
  const WeightStore sstore = seeded(small, 13);
  const auto frames = oracle::random_frames(64, {4, 16, 16}, 14);
  ForwardStats s8, s16;
  forward_clipped_mimo(small, sstore, frames, ClipConfig{8}, &s8);
  forward_clipped_mimo(small, sstore, frames, ClipConfig{16}, &s16);
  const double ratio = static_cast<double>(s16.peak_activation_bytes) / s8.peak_activation_bytes;
  r.require(ratio >= 1.8 && ratio <= 2.2, "MIMO activation ratio");
  if (r.pass) {
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "state %zu bytes for T=32/64/128 (= prediction); MIMO peak 16/8 ratio %.3f",
                  predicted, ratio);
    r.detail = buf;
  }
  return r;
}

Outcome fdvd_buffering() {
  Outcome r;
  FdvdConfig cfg;
  cfg.base_channels = 8;
  cfg.blocks = 1;
  InitOptions init;
  init.bias_range = 0.1f;
  const FdvdModel model = make_fdvd_model(cfg, 21, 25.0, init);
  double pipe_pf = 0, slide_pf = 0;
  for (int t_len : {1, 2, 3, 5, 20}) {
    const auto frames = oracle::random_frames(t_len, {3, 16, 16}, 30 + t_len);
    OpCountReport pr, sr;
    const auto p = fdvd_run_pipeline(model, frames, &pr);
    const auto s = fdvd_sliding_oracle(model, frames, &sr);
    r.require(p.size() == s.size() && changed_outputs(p, s).empty(),
              "pipeline vs sliding at T=" + std::to_string(t_len));
    r.require(pr.per_frame() == 2.0 && sr.per_frame() == 4.0,
              "evaluation counts at T=" + std::to_string(t_len));
    pipe_pf = pr.per_frame();
    slide_pf = sr.per_frame();
  }
  if (r.pass) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "bit-equal on all frames; evals/frame %.1f vs %.1f, ratio %.1f",
                  pipe_pf, slide_pf, slide_pf / pipe_pf);
    r.detail = buf;
  }
  return r;
}

Outcome unidirectional() {
  Outcome r;
  for (int n : {2, 4}) {
    ModelConfig cfg = oracle::tiny_config(n, 8, 4);
    cfg.fusion_mode = FusionMode::kUnidirectional;
    const NetDef net = build_net(cfg);
    const WeightStore store = seeded(net, 40 + n);
    const PipelineGraph g = compile_pipeline(net);
    r.require(g.latency == 0, "zero latency");
    const int t_len = 3 * n + 6;
    auto frames = oracle::random_frames(t_len, {4, 16, 16}, 41);
    const auto base = run_stream(g, store, frames);
    r.require(changed_outputs(base, forward_full_sequence(net, store, frames)).empty(),
              "stream vs offline causal forward");
    std::map<int, int> past_rf;  // output index -> number of inputs that affect it
    for (int j = 0; j < t_len; ++j) {
      auto moved = frames;
      moved[j] = oracle::random_tensor({4, 16, 16}, 900 + j);
      const auto diff = changed_outputs(base, run_stream(g, store, moved));
      r.require(diff.empty() || *diff.begin() >= j, "output before a perturbed frame changed");
      r.require(diff == range_set(j, j + n, t_len), "sweep j=" + std::to_string(j));
      for (int i : diff) ++past_rf[i];
    }
    r.require(past_rf[t_len - 1] == n + 1, "past RF for N=" + std::to_string(n));
    r.require(analyze(g, 16, 16).receptive_field == n + 1, "analyze causal RF");
  }
  if (r.pass) r.detail = "no output before a perturbed frame changes; past RF N+1 for N in {2,4}";
  return r;
}

Outcome shift_ratio() {
  Outcome r;
  r.require(ModelConfig{}.shift_ratio == 8, "default ratio");
  std::string seen;
  for (int ratio : {4, 6, 8, 16}) {
    ModelConfig cfg = oracle::tiny_config(4, 16, 4);
    cfg.shift_ratio = ratio;
    try {
      const PipelineGraph g = compile_pipeline(build_net(cfg));
      for (const PipelineNode& node : g.nodes) {
        if (node.kind == NodeKind::kBufferBlock) {
          r.require(node.shift == node.channels / ratio, "f = floor(C_f / r)");
        }
      }
      const NetDef net = build_net(cfg);
      const WeightStore store = seeded(net, ratio);
      const auto frames = oracle::random_frames(6, {4, 16, 16}, ratio);
      r.require(changed_outputs(run_stream(g, store, frames),
                                forward_full_sequence(net, store, frames)).empty(),
                "equivalence at r=" + std::to_string(ratio));
      seen += (seen.empty() ? "" : ",") + std::to_string(ratio);
    } catch (const Error& e) {
      r.require(false, "r=" + std::to_string(ratio) + " rejected: " + e.what());
    }
  }
  int rejected = 0;
  for (int ratio : {1, 2}) {
    ModelConfig cfg = oracle::tiny_config(4, 16, 4);
    cfg.shift_ratio = ratio;
    try {
      build_net(cfg);
    } catch (const ConfigError&) {
      ++rejected;
    }
  }
  ModelConfig narrow = oracle::tiny_config(4, 8, 4);  // 16 channels at r=32: f = 0
  narrow.shift_ratio = 32;
  try {
    build_net(narrow);
  } catch (const ConfigError&) {
    ++rejected;
  }
  r.require(rejected == 3, "invalid shift configurations accepted");
  if (r.pass) r.detail = "accepted r=" + seen + "; rejected r=1,2 (C_f-2f<1) and f=0; default 8";
  return r;
}

Outcome kernel_and_files() {
  Outcome r;
  int cases = 0;
  for (std::uint64_t seed = 1; seed <= 128; ++seed) {
    const int cin = 1 + static_cast<int>(seed % 5);
    const int cout = 1 + static_cast<int>((seed / 5) % 4);
    const int stride = seed % 3 == 0 ? 2 : 1;
    const int k = seed % 7 == 0 ? 1 : 3;
    const int pad = k == 3 ? 1 : 0;
    const Tensor in = oracle::random_tensor({cin, 4 + static_cast<int>(seed % 9), 5 + static_cast<int>(seed % 6)},
                                            seed, -1.0f, 1.0f);
    const ConvWeights w = oracle::random_conv(cout, cin, k, stride, pad, seed + 1000);
    r.require(bitwise_equal(conv2d(in, w), oracle::naive_conv(in, w)),
              "conv case " + std::to_string(seed));
    ++cases;
  }

  const fs::path dir = fs::temp_directory_path() / "bsvd_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto at = [&](const std::string& name) { return (dir / name).string(); };

  const NetDef net = build_net(oracle::tiny_config(16, 8, 4));
  const WeightStore store = seeded(net, 77);
  save_weights(store, at("w.bin"));
  r.require(bitwise_equal(load_weights(at("w.bin"), net), store), "weight round trip");
  r.require(encode_weights(load_weights(at("w.bin"), net)) == read_file_bytes(at("w.bin")),
            "weight re-encode");

  std::ostringstream log;
  std::ofstream(at("m.cfg")) << format_model_config(oracle::tiny_config(4, 8, 4));
  cli::GenOptions g;
  g.frames = 12;
  g.height = 16;
  g.width = 16;
  g.seed = 5;
  g.sigma = 25;
  g.out_clean = at("clean.seq");
  g.out_noisy = at("noisy.seq");
  r.require(cli::cmd_gen(g, log) == 0, "gen");
  r.require(cli::cmd_init({at("m.cfg"), 3, 0.1f, at("m.bin")}, log) == 0, "init");
  int manifests = 1;
  for (const std::string mode : {"pipeline", "offline_full", "offline_mimo", "unidirectional"}) {
    for (const std::string flush : {"exact", "paper"}) {
      if (mode != "pipeline" && flush == "paper") continue;
      cli::DenoiseOptions d;
      d.model = at("m.cfg");
      d.weights = at("m.bin");
      d.input = g.out_noisy;
      d.out = at(mode + "_" + flush + ".seq");
      d.mode = mode;
      d.flush = flush;
      d.t_clip = 4;
      d.sigma = 25;
      r.require(cli::cmd_denoise(d, log) == 0, "denoise " + mode);
      ++manifests;
    }
  }
  int replayed = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string p = entry.path().string();
    if (p.size() > 14 && p.substr(p.size() - 14) == ".manifest.json") {
      r.require(cli::cmd_replay(p, at("replay"), log) == 0, "replay " + p);
      ++replayed;
    }
  }
  r.require(replayed == manifests, "every command wrote a manifest");
  r.require(read_file_bytes(at("pipeline_exact.seq")) == read_file_bytes(at("offline_full_exact.seq")),
            "pipeline file equals offline file");
  if (r.pass) {
    r.detail = std::to_string(cases) + " conv cases bit-equal; weights round-trip; " +
               std::to_string(replayed) + " manifests replayed bitwise";
  }
  return r;
}

double noise_variance(const std::vector<Tensor>& noisy, const std::vector<Tensor>& clean,
                      std::size_t* samples) {
  double sum = 0, sq = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < noisy.size(); ++i) {
    for (std::size_t k = 0; k < noisy[i].size(); ++k) {
      const double d = noisy[i].data()[k] - clean[i].data()[k];
      sum += d;
      sq += d * d;
      ++n;
    }
  }
  *samples = n;
  const double mean = sum / n;
  return sq / n - mean * mean;
}

Outcome noise_model() {
  Outcome r;
  const double sigma = 25.0;
  const double b = (sigma / 255) * (sigma / 255);
  const std::vector<Tensor> clean(20, Tensor::filled({3, 128, 132}, 0.5f));
  std::size_t n_het = 0, n_awgn = 0;
  const double v_het = noise_variance(add_noise(clean, NoiseSpec::heteroscedastic(0.0, b, 1)), clean, &n_het);
  const double v_awgn = noise_variance(add_noise(clean, NoiseSpec::awgn(sigma, 2)), clean, &n_awgn);
  const double rel = std::abs(v_het / v_awgn - 1.0);
  r.require(n_het >= 1000000 && n_awgn >= 1000000, "sample count");
  r.require(rel < 0.02, "variance mismatch");
  const auto frames = oracle::random_frames(4, {3, 16, 16}, 3);
  const auto same = add_noise(frames, NoiseSpec::awgn(0.0, 9));
  const auto same_het = add_noise(frames, NoiseSpec::heteroscedastic(0.0, 0.0, 9));
  r.require(changed_outputs(frames, same).empty() && changed_outputs(frames, same_het).empty(),
            "zero noise identity");
  if (r.pass) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "variance rel. diff %.4f over %zu samples; sigma 0 identity", rel,
                  n_het);
    r.detail = buf;
  }
  return r;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"streaming equivalence", streaming_equivalence},
      {"clip-edge property", clip_edges},
      {"latency and schedule", latency_schedule},
      {"receptive field", receptive_field},
      {"constant memory", constant_memory},
      {"frame-buffered cascade", fdvd_buffering},
      {"unidirectional causality", unidirectional},
      {"shift ratio handling", shift_ratio},
      {"kernel oracle and reproducibility", kernel_and_files},
      {"noise model", noise_model},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::printf("criterion %2zu %s: %s (%s)\n", i + 1, o.pass ? "PASS" : "FAIL",
                criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
