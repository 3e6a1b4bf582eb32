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

#include "bsvd/tensor.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "bsvd/errors.h"

namespace bsvd {

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << shape.channels << "x" << shape.height << "x" << shape.width;
  return os.str();
}

Tensor::Tensor(Shape shape) : shape_(shape) {
  if (shape.channels < 0 || shape.height < 0 || shape.width < 0) {
    throw ConfigError("negative tensor dimension " + to_string(shape));
  }
  data_.assign(shape.elements(), 0.0f);
}

Tensor::Tensor(Shape shape, std::vector<float> data) : shape_(shape), data_(std::move(data)) {
  if (shape.channels < 0 || shape.height < 0 || shape.width < 0) {
    throw ConfigError("negative tensor dimension " + to_string(shape));
  }
  if (data_.size() != shape.elements()) {
    throw ConfigError("tensor data length " + std::to_string(data_.size()) +
                      " does not match shape " + to_string(shape));
  }
  for (float v : data_) {
    if (!std::isfinite(v)) throw ConfigError("non-finite tensor entry");
  }
}

Tensor Tensor::filled(Shape shape, float value) {
  Tensor t(shape);
  std::fill(t.data_.begin(), t.data_.end(), value);
  return t;
}

std::span<const float> Tensor::channel(int c) const {
  const std::size_t plane = static_cast<std::size_t>(shape_.height) * shape_.width;
  return std::span<const float>(data_).subspan(c * plane, plane);
}

std::span<float> Tensor::mutable_channel(int c) {
  const std::size_t plane = static_cast<std::size_t>(shape_.height) * shape_.width;
  return std::span<float>(data_).subspan(c * plane, plane);
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() &&
         std::memcmp(a.data().data(), b.data().data(), a.bytes()) == 0;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ConfigError("max_abs_diff: shape " + to_string(a.shape()) + " vs " +
                      to_string(b.shape()));
  }
  double worst = 0.0;
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < x.size(); ++i) {
    worst = std::max(worst, std::abs(static_cast<double>(x[i]) - y[i]));
  }
  return worst;
}

void ConvWeights::validate() const {
  if (out_channels < 1 || in_channels < 1) throw ConfigError("conv: channel counts must be >= 1");
  if (kernel_size != 1 && kernel_size != 3) throw ConfigError("conv: kernel must be 1x1 or 3x3");
  if (stride != 1 && stride != 2) throw ConfigError("conv: stride must be 1 or 2");
  if (padding < 0) throw ConfigError("conv: negative padding");
  const std::size_t expect =
      static_cast<std::size_t>(out_channels) * in_channels * kernel_size * kernel_size;
  if (kernel.size() != expect) {
    throw ConfigError("conv: kernel has " + std::to_string(kernel.size()) + " entries, expected " +
                      std::to_string(expect));
  }
  if (bias.size() != static_cast<std::size_t>(out_channels)) {
    throw ConfigError("conv: bias length does not match out_channels");
  }
}

Shape ConvWeights::output_shape(const Shape& input) const {
  if (input.channels != in_channels) {
    throw ConfigError("conv: input has " + std::to_string(input.channels) +
                      " channels, weights expect " + std::to_string(in_channels));
  }
  if (input.height < 1 || input.width < 1) {
    throw ConfigError("conv: zero-sized spatial input " + to_string(input));
  }
  const int oh = (input.height + 2 * padding - kernel_size) / stride + 1;
  const int ow = (input.width + 2 * padding - kernel_size) / stride + 1;
  if (oh < 1 || ow < 1) throw ConfigError("conv: empty output for input " + to_string(input));
  return {out_channels, oh, ow};
}

Tensor conv2d(const Tensor& input, const ConvWeights& w) {
  w.validate();
  const Shape out_shape = w.output_shape(input.shape());
  const int ih = input.height();
  const int iw = input.width();
  const int oh = out_shape.height;
  const int ow = out_shape.width;
  const int k = w.kernel_size;
  const int s = w.stride;
  const int p = w.padding;

  Tensor out(out_shape);
  std::vector<float> acc(static_cast<std::size_t>(oh) * ow);
  for (int o = 0; o < w.out_channels; ++o) {
    std::fill(acc.begin(), acc.end(), 0.0f);
    // Loop nest is (in, ky, kx, oy, ox): each accumulator still sees its
    // taps in (in, ky, kx) order, which keeps it bit-identical to the
    // per-pixel formulation.
    for (int i = 0; i < w.in_channels; ++i) {
      const float* plane = input.channel(i).data();
      for (int ky = 0; ky < k; ++ky) {
        for (int kx = 0; kx < k; ++kx) {
          const float wv = w.weight(o, i, ky, kx);
          // Valid ox range: 0 <= ox*s - p + kx < iw.
          const int last = iw - 1 + p - kx;
          if (last < 0) continue;
          const int ox_lo = std::max(0, (p - kx + s - 1) / s);
          const int ox_hi = std::min(ow, last / s + 1);
          if (ox_lo >= ox_hi) continue;
          for (int oy = 0; oy < oh; ++oy) {
            const int iy = oy * s - p + ky;
            if (iy < 0 || iy >= ih) continue;
            const float* row = plane + static_cast<std::size_t>(iy) * iw;
            float* dst = acc.data() + static_cast<std::size_t>(oy) * ow;
            if (s == 1) {
              const float* src = row - p + kx;
              for (int ox = ox_lo; ox < ox_hi; ++ox) dst[ox] += wv * src[ox];
            } else {
              for (int ox = ox_lo; ox < ox_hi; ++ox) dst[ox] += wv * row[ox * s - p + kx];
            }
          }
        }
      }
    }
    const float b = w.bias[o];
    auto dst = out.mutable_channel(o);
    for (std::size_t j = 0; j < acc.size(); ++j) dst[j] = acc[j] + b;
  }
  return out;
}

Tensor relu6(const Tensor& input) {
  Tensor out(input.shape());
  auto src = input.data();
  auto dst = out.mutable_data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::clamp(src[i], 0.0f, 6.0f);
  return out;
}

Tensor pixel_shuffle(const Tensor& input, int factor) {
  if (factor < 1) throw ConfigError("pixel_shuffle: factor must be >= 1");
  const int ff = factor * factor;
  if (input.channels() % ff != 0) {
    throw ConfigError("pixel_shuffle: " + std::to_string(input.channels()) +
                      " channels not divisible by " + std::to_string(ff));
  }
  const int oc = input.channels() / ff;
  Tensor out({oc, input.height() * factor, input.width() * factor});
  for (int c = 0; c < oc; ++c) {
    for (int dy = 0; dy < factor; ++dy) {
      for (int dx = 0; dx < factor; ++dx) {
        const int ic = c * ff + dy * factor + dx;
        for (int y = 0; y < input.height(); ++y) {
          for (int x = 0; x < input.width(); ++x) {
            out.at(c, y * factor + dy, x * factor + dx) = input.at(ic, y, x);
          }
        }
      }
    }
  }
  return out;
}

namespace {

Tensor concat_impl(std::span<const Tensor* const> parts) {
  if (parts.empty()) throw ConfigError("concat_channels: empty part list");
  const int h = parts.front()->height();
  const int w = parts.front()->width();
  int channels = 0;
  for (const Tensor* t : parts) {
    if (t->height() != h || t->width() != w) {
      throw ConfigError("concat_channels: spatial mismatch " + to_string(parts.front()->shape()) +
                        " vs " + to_string(t->shape()));
    }
    channels += t->channels();
  }
  Tensor out({channels, h, w});
  float* dst = out.mutable_data().data();
  for (const Tensor* t : parts) {
    std::copy(t->data().begin(), t->data().end(), dst);
    dst += t->size();
  }
  return out;
}

}  // namespace

Tensor concat_channels(std::span<const Tensor> parts) {
  std::vector<const Tensor*> ptrs;
  ptrs.reserve(parts.size());
  for (const Tensor& t : parts) ptrs.push_back(&t);
  return concat_impl(ptrs);
}

Tensor concat_channels(std::initializer_list<const Tensor*> parts) {
  return concat_impl(std::span<const Tensor* const>(parts.begin(), parts.size()));
}

Tensor slice_channels(const Tensor& input, int start, int end) {
  if (start < 0 || end > input.channels() || start >= end) {
    throw ConfigError("slice_channels: range [" + std::to_string(start) + ", " +
                      std::to_string(end) + ") invalid for " + std::to_string(input.channels()) +
                      " channels");
  }
  Tensor out({end - start, input.height(), input.width()});
  const std::size_t plane = static_cast<std::size_t>(input.height()) * input.width();
  auto src = input.data().subspan(start * plane, (end - start) * plane);
  std::copy(src.begin(), src.end(), out.mutable_data().begin());
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ConfigError("add: shape " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  }
  Tensor out(a.shape());
  auto x = a.data();
  auto y = b.data();
  auto dst = out.mutable_data();
  for (std::size_t i = 0; i < x.size(); ++i) dst[i] = x[i] + y[i];
  return out;
}

}  // namespace bsvd
