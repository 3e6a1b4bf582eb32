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

#include "bsvd/commands.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>

#include "bsvd/byte_io.h"
#include "bsvd/errors.h"
#include "bsvd/fdvd.h"
#include "bsvd/manifest.h"
#include "bsvd/metrics.h"
#include "bsvd/model.h"
#include "bsvd/noise.h"
#include "bsvd/offline.h"
#include "bsvd/random.h"
#include "bsvd/sequence_io.h"
#include "bsvd/stream.h"
#include "bsvd/weight_io.h"
#include "json.hpp"

namespace bsvd::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Wide textured canvas; frame t is the window starting at column T - t, so
// the content moves right by one pixel per frame.
std::vector<Tensor> make_clean_sequence(const GenOptions& opt) {
  if (opt.frames < 1) throw ConfigError("gen: need at least one frame");
  if (opt.height < 4 || opt.width < 4 || opt.height % 4 != 0 || opt.width % 4 != 0) {
    throw ConfigError("gen: height and width must be positive multiples of 4");
  }
  const bool moving = opt.pattern == "translate";
  if (!moving && opt.pattern != "static") throw ConfigError("gen: unknown pattern '" + opt.pattern + "'");

  const int channels = 3;
  const int canvas_w = opt.width + opt.frames;
  Rng rng(opt.seed);
  Tensor canvas({channels, opt.height, canvas_w});
  for (int c = 0; c < channels; ++c) {
    for (int y = 0; y < opt.height; ++y) {
      for (int x = 0; x < canvas_w; ++x) {
        const double gradient = 0.2 + 0.3 * x / canvas_w + 0.2 * y / opt.height + 0.05 * c;
        const double texture = 0.4 * (rng.uniform01() - 0.5);
        canvas.at(c, y, x) = static_cast<float>(std::clamp(gradient + texture, 0.0, 1.0));
      }
    }
  }
  std::vector<Tensor> frames;
  for (int t = 0; t < opt.frames; ++t) {
    const int origin = moving ? opt.frames - t : opt.frames;
    Tensor f({channels, opt.height, opt.width});
    for (int c = 0; c < channels; ++c) {
      for (int y = 0; y < opt.height; ++y) {
        for (int x = 0; x < opt.width; ++x) f.at(c, y, x) = canvas.at(c, y, origin + x);
      }
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

NoiseSpec noise_spec(std::optional<double> a, std::optional<double> b, double sigma,
                     std::uint64_t seed) {
  if (a || b) return NoiseSpec::heteroscedastic(a.value_or(0.0), b.value_or(0.0), seed);
  return NoiseSpec::awgn(sigma, seed);
}

std::string digest_of(const fs::path& path) { return fnv1a_hex(read_file_bytes(path)); }

std::vector<Tensor> read_frames(const std::string& input) {
  if (fs::is_directory(input)) return import_netpbm_frames(input);
  return read_sequence(input);
}

bool trace_requested() {
  const char* v = std::getenv("BSVD_TRACE");
  return v && std::string(v) == "1";
}

template <typename F>
int guarded(std::ostream& log, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    log << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace

int cmd_gen(const GenOptions& opt, std::ostream& log) {
  return guarded(log, [&]() -> int {
    const auto clean = make_clean_sequence(opt);
    const auto noisy = add_noise(clean, noise_spec(opt.het_a, opt.het_b, opt.sigma, opt.seed + 1));
    write_sequence(opt.out_clean, clean);
    write_sequence(opt.out_noisy, noisy);
    if (opt.export_dir) {
      export_netpbm_frames(fs::path(*opt.export_dir) / "clean", clean);
      export_netpbm_frames(fs::path(*opt.export_dir) / "noisy", noisy);
    }
    if (opt.write_manifest) {
      RunManifest m;
      m.command = "gen";
      m.frames = opt.frames;
      m.height = opt.height;
      m.width = opt.width;
      m.pattern = opt.pattern;
      m.seed = opt.seed;
      m.sigma = opt.sigma;
      m.het_a = opt.het_a;
      m.het_b = opt.het_b;
      m.outputs[opt.out_clean] = digest_of(opt.out_clean);
      m.outputs[opt.out_noisy] = digest_of(opt.out_noisy);
      m.save(manifest_path_for(opt.out_noisy));
    }
    log << "gen: wrote " << opt.frames << " frames to " << opt.out_clean << " and " << opt.out_noisy
        << "\n";
    return kExitPass;
  });
}

int cmd_denoise(const DenoiseOptions& opt, std::ostream& log) {
  return guarded(log, [&]() -> int {
    ModelConfig cfg = load_model_config(opt.model);
    if (opt.mode == "unidirectional") {
      cfg.fusion_mode = FusionMode::kUnidirectional;
    } else if (opt.mode != "offline_full" && opt.mode != "offline_mimo" && opt.mode != "pipeline") {
      throw ConfigError("denoise: unknown mode '" + opt.mode + "'");
    }
    FlushMode flush;
    if (opt.flush == "exact") {
      flush = FlushMode::kExactEos;
    } else if (opt.flush == "paper") {
      flush = FlushMode::kPaperZeroFrames;
    } else {
      throw ConfigError("denoise: --flush must be 'exact' or 'paper'");
    }
    const NetDef net = build_net(cfg);
    const WeightStore store = load_weights(opt.weights, net);

    std::vector<Tensor> inputs;
    for (const Tensor& f : read_frames(opt.input)) inputs.push_back(prepare_input(f, cfg, opt.sigma));

    std::vector<Tensor> outputs;
    if (opt.mode == "offline_full") {
      outputs = forward_full_sequence(net, store, inputs);
    } else if (opt.mode == "offline_mimo") {
      outputs = forward_clipped_mimo(net, store, inputs, ClipConfig{opt.t_clip});
    } else {
      std::ostream* trace = opt.trace;
      if (!trace && trace_requested()) trace = &log;
      outputs = run_stream(compile_pipeline(net), store, inputs, flush, nullptr, trace);
    }
    write_sequence(opt.out, outputs);
    if (opt.export_dir) export_netpbm_frames(*opt.export_dir, outputs);

    if (opt.write_manifest) {
      RunManifest m;
      m.command = "denoise";
      m.model = opt.model;
      m.weights = opt.weights;
      m.input = opt.input;
      m.mode = opt.mode;
      m.flush = opt.flush;
      m.t_clip = opt.t_clip;
      m.sigma = opt.sigma;
      m.outputs[opt.out] = digest_of(opt.out);
      m.save(manifest_path_for(opt.out));
    }
    log << "denoise: " << outputs.size() << " frames (" << opt.mode << ") -> " << opt.out << "\n";
    return kExitPass;
  });
}

int cmd_verify(const VerifyOptions& opt, std::ostream& out, std::ostream& log) {
  return guarded(log, [&]() -> int {
    const auto a = read_sequence(opt.a);
    const auto b = read_sequence(opt.b);
    if (a.size() != b.size()) {
      throw FormatError("verify: length mismatch (" + std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()) + " frames)");
    }
    if (a.front().shape() != b.front().shape()) throw FormatError("verify: frame shapes differ");

    double worst = 0.0;
    if (opt.clean) {
      const auto clean = read_sequence(*opt.clean);
      if (clean.size() != a.size() || clean.front().shape() != a.front().shape()) {
        throw FormatError("verify: clean sequence does not match");
      }
      const FidelityReport report = per_frame_report(clean, a, b);
      for (const FrameFidelity& f : report.frames) worst = std::max(worst, *f.maxabs);
      const std::string csv = report.to_csv();
      out << csv << report.summary_json() << "\n";
      if (opt.csv_out) {
        std::ofstream(*opt.csv_out) << csv;
      }
    } else {
      std::string csv = "frame,maxabs\n";
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = max_abs_diff(a[i], b[i]);
        worst = std::max(worst, d);
        csv += std::to_string(i) + "," + std::to_string(d) + "\n";
      }
      out << csv;
      if (opt.csv_out) std::ofstream(*opt.csv_out) << csv;
    }
    const bool pass = worst <= opt.threshold;
    log << "verify: max abs diff " << worst << (pass ? " <= " : " > ") << opt.threshold << "\n";
    return pass ? kExitPass : kExitVerifyFailed;
  });
}

namespace {

std::vector<Tensor> random_inputs(int count, Shape shape, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Tensor> frames;
  for (int i = 0; i < count; ++i) {
    Tensor f(shape);
    for (float& v : f.mutable_data()) v = static_cast<float>(rng.uniform01());
    frames.push_back(std::move(f));
  }
  return frames;
}

}  // namespace

int cmd_profile(const ProfileOptions& opt, std::ostream& out, std::ostream& log) {
  return guarded(log, [&]() -> int {
    const ModelConfig cfg = load_model_config(opt.model);
    const NetDef net = build_net(cfg);
    const WeightStore store = opt.weights ? load_weights(*opt.weights, net) : init_weights(net, opt.seed);
    const PipelineGraph graph = compile_pipeline(net);
    const Shape shape{cfg.input_channels, opt.height, opt.width};
    const bool all = opt.mode == "all";

    json report;
    report["model"] = {{"base_channels", cfg.base_channels},
                       {"input_channels", cfg.input_channels},
                       {"topology", std::string(to_string(cfg.topology))},
                       {"fusion_mode", std::string(to_string(cfg.fusion_mode))},
                       {"blocks", graph.block_count}};
    report["height"] = opt.height;
    report["width"] = opt.width;

    if (all || opt.mode == "pipeline") {
      const PipelineReport predicted = analyze(graph, opt.height, opt.width);
      json rows = json::array();
      for (int t : opt.frames) {
        const auto frames = random_inputs(t, shape, opt.seed + 100 + t);
        StreamRunStats stats;
        run_stream(graph, store, frames, FlushMode::kExactEos, &stats);
        ForwardStats offline;
        forward_full_sequence(net, store, frames, &offline);
        std::set<std::size_t> steady;
        for (int i = graph.latency; i < t; ++i) steady.insert(stats.state_bytes[i]);
        json row = {{"frames", t},
                    {"latency", graph.latency},
                    {"first_output_step", stats.first_output_step},
                    {"state_bytes_predicted", predicted.state_bytes},
                    {"state_bytes_steady", json::array()},
                    {"pipeline_conv_evals_per_frame", static_cast<double>(stats.conv_evals) / t},
                    {"offline_conv_evals_per_frame", static_cast<double>(offline.conv_evals) / t}};
        for (std::size_t v : steady) row["state_bytes_steady"].push_back(v);
        row["constant_memory"] = steady.size() == 1 && *steady.begin() == predicted.state_bytes;
        rows.push_back(row);
      }
      report["pipeline"] = rows;
      report["receptive_field"] = predicted.receptive_field;
    }

    if (all || opt.mode == "mimo") {
      json rows = json::array();
      const int t = *std::max_element(opt.frames.begin(), opt.frames.end());
      const auto frames = random_inputs(t, shape, opt.seed + 7);
      for (int clip : opt.t_clips) {
        ForwardStats stats;
        forward_clipped_mimo(net, store, frames, ClipConfig{clip}, &stats);
        rows.push_back({{"t_clip", clip},
                        {"frames", t},
                        {"peak_activation_bytes", stats.peak_activation_bytes}});
      }
      report["mimo"] = rows;
    }

    if (all || opt.mode == "fdvd") {
      FdvdConfig fc;
      fc.base_channels = cfg.base_channels;
      fc.frame_channels = frame_channels(cfg);
      fc.noise_map = true;
      const FdvdModel model = make_fdvd_model(fc, opt.seed, 25.0);
      const int t = opt.frames.front();
      const auto frames = random_inputs(t, {fc.frame_channels, opt.height, opt.width}, opt.seed + 11);
      OpCountReport pipe, slide;
      fdvd_run_pipeline(model, frames, &pipe);
      fdvd_sliding_oracle(model, frames, &slide);
      report["fdvd"] = {{"pipeline", json::parse(pipe.to_json())},
                        {"sliding", json::parse(slide.to_json())},
                        {"ratio", slide.per_frame() / pipe.per_frame()}};
    }
    out << report.dump(2) << "\n";
    return kExitPass;
  });
}

int cmd_init(const InitOptions& opt, std::ostream& log) {
  return guarded(log, [&]() -> int {
    const NetDef net = build_net(load_model_config(opt.model));
    bsvd::InitOptions init;
    init.bias_range = opt.bias_range;
    save_weights(init_weights(net, opt.seed, init), opt.out);
    log << "init: " << net.conv_stages().size() << " conv stages -> " << opt.out << "\n";
    return kExitPass;
  });
}

int cmd_fdvd(const FdvdOptions& opt, std::ostream& out, std::ostream& log) {
  return guarded(log, [&]() -> int {
    const auto frames = read_frames(opt.input);
    FdvdConfig fc;
    fc.base_channels = opt.base_channels;
    fc.frame_channels = frames.front().channels();
    const FdvdModel model = make_fdvd_model(fc, opt.seed, opt.sigma);
    OpCountReport report;
    std::vector<Tensor> outputs;
    if (opt.mode == "pipeline") {
      outputs = fdvd_run_pipeline(model, frames, &report);
    } else if (opt.mode == "sliding") {
      outputs = fdvd_sliding_oracle(model, frames, &report);
    } else {
      throw ConfigError("fdvd: mode must be 'pipeline' or 'sliding'");
    }
    write_sequence(opt.out, outputs);
    out << report.to_json() << "\n";
    if (opt.report_out) std::ofstream(*opt.report_out) << report.to_json() << "\n";
    return kExitPass;
  });
}

int cmd_analyze(const AnalyzeOptions& opt, std::ostream& out, std::ostream& log) {
  return guarded(log, [&]() -> int {
    const NetDef net = build_net(load_model_config(opt.model));
    const PipelineGraph g = compile_pipeline(net);
    const PipelineReport r = analyze(g, opt.height, opt.width);
    json j = {{"blocks", r.block_count},
              {"latency", r.latency},
              {"receptive_field", r.receptive_field},
              {"state_bytes", r.state_bytes},
              {"fusion_points", net.fusion_count()}};
    json links = json::array();
    for (const SkipLink& l : g.links) {
      links.push_back({{"tag", l.tag}, {"depth", l.depth}, {"channels", l.channels}, {"scale", l.scale}});
    }
    j["skip_queues"] = links;
    out << j.dump(2) << "\n";
    return kExitPass;
  });
}

int cmd_replay(const std::string& manifest, const std::optional<std::string>& out_dir,
               std::ostream& log) {
  return guarded(log, [&]() -> int {
    const RunManifest m = RunManifest::load(manifest);
    auto target = [&](const std::string& original) {
      return out_dir ? (fs::path(*out_dir) / fs::path(original).filename()).string() : original;
    };
    if (out_dir) fs::create_directories(*out_dir);

    int rc = kExitPass;
    if (m.command == "gen") {
      if (m.outputs.size() != 2) throw FormatError("replay: gen manifest must list two outputs");
      GenOptions g;
      g.frames = m.frames.value();
      g.height = m.height.value();
      g.width = m.width.value();
      g.pattern = m.pattern.value_or("translate");
      g.seed = m.seed.value_or(0);
      g.sigma = m.sigma.value_or(0.0);
      g.het_a = m.het_a;
      g.het_b = m.het_b;
      // The manifest sits next to the noisy output.
      const std::string noisy = fs::path(manifest).string().substr(
          0, manifest.size() - std::string(".manifest.json").size());
      for (const auto& [path, digest] : m.outputs) {
        (path == noisy ? g.out_noisy : g.out_clean) = target(path);
      }
      g.write_manifest = false;
      rc = cmd_gen(g, log);
    } else if (m.command == "denoise") {
      DenoiseOptions d;
      d.model = m.model.value();
      d.weights = m.weights.value();
      d.input = m.input.value();
      d.mode = m.mode.value();
      d.flush = m.flush.value_or("exact");
      d.t_clip = m.t_clip.value_or(8);
      d.sigma = m.sigma.value_or(0.0);
      if (m.outputs.size() != 1) throw FormatError("replay: denoise manifest must list one output");
      d.out = target(m.outputs.begin()->first);
      d.write_manifest = false;
      rc = cmd_denoise(d, log);
    } else {
      throw FormatError("replay: unknown command '" + m.command + "'");
    }
    if (rc != kExitPass) return rc;

    bool same = true;
    for (const auto& [path, digest] : m.outputs) {
      const std::string now = digest_of(target(path));
      log << "replay: " << target(path) << " " << now << (now == digest ? " == " : " != ") << digest
          << "\n";
      same = same && now == digest;
    }
    return same ? kExitPass : kExitVerifyFailed;
  });
}

}  // namespace bsvd::cli
