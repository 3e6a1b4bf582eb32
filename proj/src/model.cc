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

#include "bsvd/model.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "bsvd/errors.h"
#include "bsvd/random.h"

namespace bsvd {

std::string_view to_string(FusionMode mode) {
  switch (mode) {
    case FusionMode::kBidirectional: return "bidirectional";
    case FusionMode::kUnidirectional: return "unidirectional";
    case FusionMode::kNone: return "none";
  }
  return "?";
}

std::string_view to_string(Topology topology) {
  switch (topology) {
    case Topology::kWNet: return "wnet";
    case Topology::kUNet: return "unet";
    case Topology::kPlain: return "plain";
  }
  return "?";
}

FusionMode parse_fusion_mode(std::string_view text) {
  if (text == "bidirectional") return FusionMode::kBidirectional;
  if (text == "unidirectional") return FusionMode::kUnidirectional;
  if (text == "none") return FusionMode::kNone;
  throw ConfigError("unknown fusion_mode '" + std::string(text) + "'");
}

Topology parse_topology(std::string_view text) {
  if (text == "wnet") return Topology::kWNet;
  if (text == "unet") return Topology::kUNet;
  if (text == "plain") return Topology::kPlain;
  throw ConfigError("unknown topology '" + std::string(text) + "'");
}

void check_fusion_width(int channels, int ratio, std::string_view where) {
  if (ratio < 1) throw ConfigError("shift_ratio must be >= 1");
  const int f = shift_channels(channels, ratio);
  if (f < 1 || channels - 2 * f < 1) {
    throw ConfigError(std::string(where) + ": shift ratio " + std::to_string(ratio) + " gives f=" +
                      std::to_string(f) + " for " + std::to_string(channels) +
                      " channels (need f >= 1 and C - 2f >= 1)");
  }
}

void ModelConfig::validate() const {
  if (base_channels < 1) throw ConfigError("base_channels must be >= 1");
  if (input_channels < 1) throw ConfigError("input_channels must be >= 1");
  if (output_channels < 1) throw ConfigError("output_channels must be >= 1");
  if (shift_ratio < 1) throw ConfigError("shift_ratio must be >= 1");
  if (blocks < 1) throw ConfigError("blocks must be >= 1");
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

int parse_int(std::string_view key, std::string_view value) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(std::string(value), &used);
    if (used != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw FormatError("model config: '" + std::string(key) + "' expects an integer, got '" +
                      std::string(value) + "'");
  }
}

}  // namespace

ModelConfig parse_model_config(std::string_view text) {
  ModelConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw FormatError("model config line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string_view key = trim(view.substr(0, eq));
    const std::string_view value = trim(view.substr(eq + 1));
    try {
      if (key == "base_channels") {
        cfg.base_channels = parse_int(key, value);
      } else if (key == "input_channels") {
        cfg.input_channels = parse_int(key, value);
      } else if (key == "output_channels") {
        cfg.output_channels = parse_int(key, value);
      } else if (key == "shift_ratio") {
        cfg.shift_ratio = parse_int(key, value);
      } else if (key == "fusion_mode") {
        cfg.fusion_mode = parse_fusion_mode(value);
      } else if (key == "topology") {
        cfg.topology = parse_topology(value);
      } else if (key == "blocks") {
        cfg.blocks = parse_int(key, value);
      } else {
        throw FormatError("model config: unknown key '" + std::string(key) + "'");
      }
    } catch (const ConfigError& e) {
      throw FormatError(std::string("model config: ") + e.what());
    }
  }
  if (cfg.input_channels < 3 || cfg.input_channels > 5) {
    throw FormatError("model config: input_channels must be 3, 4 or 5");
  }
  cfg.validate();
  return cfg;
}

ModelConfig load_model_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open model config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_model_config(buf.str());
}

std::string format_model_config(const ModelConfig& cfg) {
  std::ostringstream os;
  os << "base_channels=" << cfg.base_channels << "\n"
     << "input_channels=" << cfg.input_channels << "\n"
     << "output_channels=" << cfg.output_channels << "\n"
     << "shift_ratio=" << cfg.shift_ratio << "\n"
     << "fusion_mode=" << to_string(cfg.fusion_mode) << "\n"
     << "topology=" << to_string(cfg.topology) << "\n"
     << "blocks=" << cfg.blocks << "\n";
  return os.str();
}

int NetDef::spatial_multiple() const {
  int scale = 1;
  for (const Stage& s : stages) scale = std::max(scale, s.scale);
  return scale;
}

int NetDef::fusion_count() const {
  int n = 0;
  for (const Stage& s : stages) n += s.kind == StageKind::kFusion;
  return n;
}

std::vector<const Stage*> NetDef::conv_stages() const {
  std::vector<const Stage*> out;
  for (const Stage& s : stages) {
    if (s.kind == StageKind::kConv) out.push_back(&s);
  }
  return out;
}

namespace {

class NetBuilder {
 public:
  explicit NetBuilder(const ModelConfig& cfg) : cfg_(cfg), channels_(cfg.input_channels) {}

  void conv(const std::string& name, int out, int stride = 1) {
    Stage s;
    s.kind = StageKind::kConv;
    s.name = name;
    s.in_channels = channels_;
    s.out_channels = out;
    s.stride = stride;
    s.padding = 1;
    s.kernel_size = 3;
    scale_ *= stride;
    s.scale = scale_;
    channels_ = out;
    pending_fusion_ = false;
    stages_.push_back(std::move(s));
  }

  void relu6() { push_simple(StageKind::kRelu6, ""); }

  void pixel_shuffle(int factor) {
    if (channels_ % (factor * factor) != 0 || scale_ % factor != 0) {
      throw ConfigError("pixel_shuffle after " + stages_.back().name + ": invalid geometry");
    }
    Stage s;
    s.kind = StageKind::kPixelShuffle;
    s.in_channels = channels_;
    channels_ /= factor * factor;
    scale_ /= factor;
    s.out_channels = channels_;
    s.scale = scale_;
    s.factor = factor;
    stages_.push_back(std::move(s));
  }

  // A fusion point is always followed by the conv that consumes it.
  void fusion(const std::string& name) {
    if (cfg_.fusion_mode != FusionMode::kNone) check_fusion_width(channels_, cfg_.shift_ratio, name);
    Stage s;
    s.kind = StageKind::kFusion;
    s.name = name;
    s.in_channels = s.out_channels = channels_;
    s.scale = scale_;
    s.fusion = cfg_.fusion_mode;
    s.shift = shift_channels(channels_, cfg_.shift_ratio);
    stages_.push_back(std::move(s));
    pending_fusion_ = true;
  }

  void fused_conv(const std::string& name, int out) {
    fusion(name + ".fuse");
    conv(name, out);
    relu6();
  }

  void skip_source(const std::string& tag) {
    Stage s;
    s.kind = StageKind::kSkipSource;
    s.name = tag + ".src";
    s.tag = tag;
    s.in_channels = s.out_channels = channels_;
    s.scale = scale_;
    sources_[tag] = {channels_, scale_};
    stages_.push_back(std::move(s));
  }

  void skip_join(const std::string& tag) {
    auto it = sources_.find(tag);
    if (it == sources_.end()) throw ConfigError("skip join '" + tag + "' has no source");
    if (it->second.first != channels_ || it->second.second != scale_) {
      throw ConfigError("skip join '" + tag + "': operand geometry mismatch");
    }
    sources_.erase(it);
    Stage s;
    s.kind = StageKind::kSkipJoin;
    s.name = tag + ".join";
    s.tag = tag;
    s.in_channels = s.out_channels = channels_;
    s.scale = scale_;
    stages_.push_back(std::move(s));
  }

  int channels() const { return channels_; }

  NetDef finish() {
    if (pending_fusion_) throw ConfigError("fusion point without a following conv");
    if (!sources_.empty()) throw ConfigError("skip source '" + sources_.begin()->first + "' never joined");
    if (scale_ != 1) throw ConfigError("network does not return to full resolution");
    NetDef net;
    net.config = cfg_;
    net.config.output_channels = channels_;
    net.stages = std::move(stages_);
    return net;
  }

 private:
  void push_simple(StageKind kind, const std::string& name) {
    Stage s;
    s.kind = kind;
    s.name = name;
    s.in_channels = s.out_channels = channels_;
    s.scale = scale_;
    stages_.push_back(std::move(s));
  }

  ModelConfig cfg_;
  int channels_;
  int scale_ = 1;
  bool pending_fusion_ = false;
  std::vector<Stage> stages_;
  std::map<std::string, std::pair<int, int>> sources_;
};

// Encoder/decoder of the backbone at base width `b`:
//   input   [conv b, relu6] x2                          -> skip "in"
//   down1   conv 2b /2, relu6, [fuse, conv 2b, relu6]xB -> skip "down1"
//   down2   conv 4b /2, relu6, [fuse, conv 4b, relu6]xB
//   up1     [fuse, conv 4b, relu6]xB, conv 8b, shuffle x2, + "down1"
//   up2     [fuse, conv 2b, relu6]xB, conv 4b, shuffle x2, + "in"
//   output  conv b, relu6, conv out
void add_unet(NetBuilder& nb, const std::string& p, int b, int out, int blocks) {
  nb.conv(p + "in.conv0", b);
  nb.relu6();
  nb.conv(p + "in.conv1", b);
  nb.relu6();
  nb.skip_source(p + "in");

  nb.conv(p + "down1.conv0", 2 * b, 2);
  nb.relu6();
  for (int k = 0; k < blocks; ++k) nb.fused_conv(p + "down1.conv" + std::to_string(k + 1), 2 * b);
  nb.skip_source(p + "down1");

  nb.conv(p + "down2.conv0", 4 * b, 2);
  nb.relu6();
  for (int k = 0; k < blocks; ++k) nb.fused_conv(p + "down2.conv" + std::to_string(k + 1), 4 * b);

  for (int k = 0; k < blocks; ++k) nb.fused_conv(p + "up1.conv" + std::to_string(k), 4 * b);
  nb.conv(p + "up1.widen", 8 * b);
  nb.pixel_shuffle(2);
  nb.skip_join(p + "down1");

  for (int k = 0; k < blocks; ++k) nb.fused_conv(p + "up2.conv" + std::to_string(k), 2 * b);
  nb.conv(p + "up2.widen", 4 * b);
  nb.pixel_shuffle(2);
  nb.skip_join(p + "in");

  nb.conv(p + "out.conv0", b);
  nb.relu6();
  nb.conv(p + "out.conv1", out);
}

void add_plain(NetBuilder& nb, int b, int out, int blocks) {
  nb.conv("in.conv0", b);
  nb.relu6();
  nb.skip_source("in");
  for (int k = 0; k < blocks; ++k) nb.fused_conv("body.conv" + std::to_string(k + 1), b);
  nb.skip_join("in");
  nb.conv("out.conv0", out);
}

}  // namespace

NetDef build_net(const ModelConfig& cfg) {
  cfg.validate();
  NetBuilder nb(cfg);
  const int b = cfg.base_channels;
  switch (cfg.topology) {
    case Topology::kWNet:
      add_unet(nb, "u1.", b, b, cfg.blocks);
      add_unet(nb, "u2.", b, cfg.output_channels, cfg.blocks);
      break;
    case Topology::kUNet:
      add_unet(nb, "u1.", b, cfg.output_channels, cfg.blocks);
      break;
    case Topology::kPlain:
      add_plain(nb, b, cfg.output_channels, cfg.blocks);
      break;
  }
  return nb.finish();
}

NetDef build_wnet(ModelConfig cfg) {
  cfg.topology = Topology::kWNet;
  return build_net(cfg);
}

const ConvWeights& WeightStore::at(const std::string& name) const {
  auto it = entries.find(name);
  if (it == entries.end()) {
    throw WeightFileError(WeightFileError::Kind::kIncompleteStore,
                          "incomplete store: no weights for stage '" + name + "'");
  }
  return it->second;
}

bool bitwise_equal(const WeightStore& a, const WeightStore& b) {
  if (a.entries.size() != b.entries.size()) return false;
  for (const auto& [name, wa] : a.entries) {
    auto it = b.entries.find(name);
    if (it == b.entries.end()) return false;
    const ConvWeights& wb = it->second;
    if (wa.out_channels != wb.out_channels || wa.in_channels != wb.in_channels ||
        wa.kernel_size != wb.kernel_size || wa.stride != wb.stride || wa.padding != wb.padding) {
      return false;
    }
    if (wa.kernel.size() != wb.kernel.size() || wa.bias.size() != wb.bias.size()) return false;
    if (std::memcmp(wa.kernel.data(), wb.kernel.data(), wa.kernel.size() * sizeof(float)) != 0 ||
        std::memcmp(wa.bias.data(), wb.bias.data(), wa.bias.size() * sizeof(float)) != 0) {
      return false;
    }
  }
  return true;
}

void check_store(const NetDef& net, const WeightStore& store) {
  for (const Stage* s : net.conv_stages()) {
    const ConvWeights& w = store.at(s->name);
    if (w.out_channels != s->out_channels || w.in_channels != s->in_channels ||
        w.kernel_size != s->kernel_size) {
      throw WeightFileError(WeightFileError::Kind::kDimMismatch,
                            "weights for stage '" + s->name + "' have shape " +
                                std::to_string(w.out_channels) + "x" +
                                std::to_string(w.in_channels) + "x" +
                                std::to_string(w.kernel_size) + ", network expects " +
                                std::to_string(s->out_channels) + "x" +
                                std::to_string(s->in_channels) + "x" +
                                std::to_string(s->kernel_size));
    }
  }
}

WeightStore init_weights(const NetDef& net, std::uint64_t seed, InitOptions options) {
  Rng rng(seed);
  WeightStore store;
  for (const Stage* s : net.conv_stages()) {
    ConvWeights w;
    w.out_channels = s->out_channels;
    w.in_channels = s->in_channels;
    w.kernel_size = s->kernel_size;
    w.stride = s->stride;
    w.padding = s->padding;
    const std::size_t n = static_cast<std::size_t>(w.out_channels) * w.in_channels *
                          w.kernel_size * w.kernel_size;
    w.kernel.assign(n, 0.0f);
    if (options.mode == InitMode::kHeUniform) {
      const double fan_in = static_cast<double>(w.in_channels) * w.kernel_size * w.kernel_size;
      const double bound = std::sqrt(6.0 / fan_in);
      for (float& v : w.kernel) v = static_cast<float>(rng.uniform(-bound, bound));
    }
    w.bias.assign(w.out_channels, 0.0f);
    if (options.bias_range > 0.0f) {
      for (float& v : w.bias) v = static_cast<float>(rng.uniform(-options.bias_range, options.bias_range));
    }
    store.entries.emplace(s->name, std::move(w));
  }
  return store;
}

Tensor make_noise_map(double sigma, int height, int width) {
  if (!(sigma >= 0.0)) throw ConfigError("noise map: sigma must be >= 0");
  return Tensor::filled({1, height, width}, static_cast<float>(sigma / 255.0));
}

bool uses_noise_map(const ModelConfig& cfg) {
  return cfg.input_channels == 4 || cfg.input_channels == 5;
}

int frame_channels(const ModelConfig& cfg) {
  return uses_noise_map(cfg) ? cfg.input_channels - 1 : cfg.input_channels;
}

Tensor prepare_input(const Tensor& frame, const ModelConfig& cfg, double sigma) {
  if (frame.channels() != frame_channels(cfg)) {
    throw ConfigError("frame has " + std::to_string(frame.channels()) + " channels, model expects " +
                      std::to_string(frame_channels(cfg)));
  }
  if (!uses_noise_map(cfg)) return frame;
  const Tensor map = make_noise_map(sigma, frame.height(), frame.width());
  return concat_channels({&frame, &map});
}

}  // namespace bsvd
