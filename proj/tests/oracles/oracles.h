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

// Straightforward reference implementations used only by tests. They share
// no code with the library beyond the data types.

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bsvd/model.h"
#include "bsvd/random.h"
#include "bsvd/tensor.h"

namespace oracle {

using bsvd::ConvWeights;
using bsvd::Shape;
using bsvd::Tensor;

// One output pixel at a time, literal summation order.
inline Tensor naive_conv(const Tensor& in, const ConvWeights& w) {
  const int k = w.kernel_size, s = w.stride, p = w.padding;
  const int oh = (in.height() + 2 * p - k) / s + 1;
  const int ow = (in.width() + 2 * p - k) / s + 1;
  Tensor out({w.out_channels, oh, ow});
  for (int o = 0; o < w.out_channels; ++o) {
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        float acc = 0.0f;
        for (int i = 0; i < w.in_channels; ++i) {
          for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
              const int iy = y * s - p + ky;
              const int ix = x * s - p + kx;
              if (iy < 0 || iy >= in.height() || ix < 0 || ix >= in.width()) continue;
              const float prod = in.at(i, iy, ix) * w.weight(o, i, ky, kx);
              acc = acc + prod;
            }
          }
        }
        out.at(o, y, x) = acc + w.bias[o];
      }
    }
  }
  return out;
}

// Channel-by-channel temporal shift; nullptr neighbours read as zero.
inline Tensor naive_shift(const Tensor* past, const Tensor& cur, const Tensor* future, int f) {
  Tensor out(cur.shape());
  const int c_total = cur.channels();
  for (int c = 0; c < c_total; ++c) {
    const Tensor* src = c < f ? past : (c >= c_total - f ? future : &cur);
    if (!src) continue;
    for (int y = 0; y < cur.height(); ++y) {
      for (int x = 0; x < cur.width(); ++x) out.at(c, y, x) = src->at(c, y, x);
    }
  }
  return out;
}

// Causal shift: first 2f channels from the previous frame.
inline Tensor naive_causal_shift(const Tensor* past, const Tensor& cur, int f) {
  Tensor out = cur;
  for (int c = 0; c < 2 * f; ++c) {
    for (int y = 0; y < cur.height(); ++y) {
      for (int x = 0; x < cur.width(); ++x) out.at(c, y, x) = past ? past->at(c, y, x) : 0.0f;
    }
  }
  return out;
}

inline Tensor naive_relu6(Tensor t) {
  for (float& v : t.mutable_data()) v = v < 0.0f ? 0.0f : (v > 6.0f ? 6.0f : v);
  return t;
}

inline Tensor naive_shuffle(const Tensor& in, int r) {
  Tensor out({in.channels() / (r * r), in.height() * r, in.width() * r});
  for (int c = 0; c < out.channels(); ++c) {
    for (int y = 0; y < out.height(); ++y) {
      for (int x = 0; x < out.width(); ++x) {
        out.at(c, y, x) = in.at(c * r * r + (y % r) * r + (x % r), y / r, x / r);
      }
    }
  }
  return out;
}

inline Tensor naive_add(const Tensor& a, const Tensor& b) {
  Tensor out = a;
  auto o = out.mutable_data();
  auto bv = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = o[i] + bv[i];
  return out;
}

// Interprets the stage list directly over the whole sequence, one stage at a
// time for all frames. Fusion sees true neighbours with zeros past both ends.
inline std::vector<Tensor> naive_sequence_forward(const bsvd::NetDef& net,
                                                  const bsvd::WeightStore& store,
                                                  std::vector<Tensor> x) {
  std::map<std::string, std::vector<Tensor>> saved;
  const int t_total = static_cast<int>(x.size());
  for (const bsvd::Stage& st : net.stages) {
    std::vector<Tensor> next;
    for (int t = 0; t < t_total; ++t) {
      switch (st.kind) {
        case bsvd::StageKind::kConv:
          next.push_back(naive_conv(x[t], store.at(st.name)));
          break;
        case bsvd::StageKind::kRelu6:
          next.push_back(naive_relu6(x[t]));
          break;
        case bsvd::StageKind::kPixelShuffle:
          next.push_back(naive_shuffle(x[t], st.factor));
          break;
        case bsvd::StageKind::kFusion: {
          const Tensor* prev = t > 0 ? &x[t - 1] : nullptr;
          const Tensor* fut = t + 1 < t_total ? &x[t + 1] : nullptr;
          if (st.fusion == bsvd::FusionMode::kBidirectional) {
            next.push_back(naive_shift(prev, x[t], fut, st.shift));
          } else if (st.fusion == bsvd::FusionMode::kUnidirectional) {
            next.push_back(naive_causal_shift(prev, x[t], st.shift));
          } else {
            next.push_back(x[t]);
          }
          break;
        }
        case bsvd::StageKind::kSkipSource:
          next.push_back(x[t]);
          break;
        case bsvd::StageKind::kSkipJoin:
          next.push_back(naive_add(x[t], saved.at(st.tag)[t]));
          break;
      }
    }
    if (st.kind == bsvd::StageKind::kSkipSource) saved[st.tag] = x;
    x = std::move(next);
  }
  return x;
}

// SSIM written out from the definition, in double precision.
inline double naive_ssim(const Tensor& a, const Tensor& b) {
  const int win = 11;
  const double sigma = 1.5;
  double g[11][11];
  double gsum = 0.0;
  for (int i = 0; i < win; ++i) {
    for (int j = 0; j < win; ++j) {
      const double dy = i - 5, dx = j - 5;
      g[i][j] = std::exp(-(dy * dy + dx * dx) / (2 * sigma * sigma));
      gsum += g[i][j];
    }
  }
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  double total = 0.0;
  long count = 0;
  for (int c = 0; c < a.channels(); ++c) {
    for (int y = 0; y + win <= a.height(); ++y) {
      for (int x = 0; x + win <= a.width(); ++x) {
        double ma = 0, mb = 0;
        for (int i = 0; i < win; ++i) {
          for (int j = 0; j < win; ++j) {
            const double w = g[i][j] / gsum;
            ma += w * a.at(c, y + i, x + j);
            mb += w * b.at(c, y + i, x + j);
          }
        }
        double va = 0, vb = 0, cov = 0;
        for (int i = 0; i < win; ++i) {
          for (int j = 0; j < win; ++j) {
            const double w = g[i][j] / gsum;
            const double da = a.at(c, y + i, x + j) - ma;
            const double db = b.at(c, y + i, x + j) - mb;
            va += w * da * da;
            vb += w * db * db;
            cov += w * da * db;
          }
        }
        total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        ++count;
      }
    }
  }
  return total / count;
}

inline Tensor random_tensor(Shape shape, std::uint64_t seed, float lo = 0.0f, float hi = 1.0f) {
  bsvd::Rng rng(seed);
  Tensor t(shape);
  for (float& v : t.mutable_data()) v = static_cast<float>(rng.uniform(lo, hi));
  return t;
}

inline std::vector<Tensor> random_frames(int count, Shape shape, std::uint64_t seed) {
  std::vector<Tensor> out;
  for (int i = 0; i < count; ++i) out.push_back(random_tensor(shape, seed * 1000 + i));
  return out;
}

inline ConvWeights random_conv(int out, int in, int k, int stride, int pad, std::uint64_t seed) {
  bsvd::Rng rng(seed);
  ConvWeights w{out, in, k, stride, pad, {}, {}};
  w.kernel.resize(static_cast<std::size_t>(out) * in * k * k);
  for (float& v : w.kernel) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  w.bias.resize(out);
  for (float& v : w.bias) v = static_cast<float>(rng.uniform(-0.5, 0.5));
  return w;
}

// Tiny model configurations with a known number of buffer blocks N.
inline bsvd::ModelConfig tiny_config(int n, int base = 8, int input_channels = 3) {
  bsvd::ModelConfig cfg;
  cfg.base_channels = base;
  cfg.input_channels = input_channels;
  cfg.shift_ratio = 8;
  if (n == 16) {
    cfg.topology = bsvd::Topology::kWNet;
    cfg.blocks = 2;
  } else if (n == 4) {
    cfg.topology = bsvd::Topology::kUNet;
    cfg.blocks = 1;
  } else if (n == 8) {
    cfg.topology = bsvd::Topology::kUNet;
    cfg.blocks = 2;
  } else {
    cfg.topology = bsvd::Topology::kPlain;
    cfg.blocks = n;
  }
  return cfg;
}

// Buffered bytes of a bidirectional stream, counted by hand: each block keeps
// f + C channels of its input plane, each skip queue `depth` feature maps.
struct BlockGeom {
  int channels;
  int scale;
};
struct QueueGeom {
  int depth;
  int channels;
  int scale;
};
inline std::size_t hand_state_bytes(const std::vector<BlockGeom>& blocks,
                                    const std::vector<QueueGeom>& queues, int ratio, int h,
                                    int w) {
  std::size_t elems = 0;
  for (const BlockGeom& b : blocks) {
    const std::size_t plane = static_cast<std::size_t>(h / b.scale) * (w / b.scale);
    elems += (b.channels / ratio + b.channels) * plane;
  }
  for (const QueueGeom& q : queues) {
    elems += static_cast<std::size_t>(q.depth) * q.channels * (h / q.scale) * (w / q.scale);
  }
  return elems * 4;
}

}  // namespace oracle
