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

#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace bsvd {

struct Shape {
  int channels = 0;
  int height = 0;
  int width = 0;

  std::size_t elements() const {
    return static_cast<std::size_t>(channels) * height * width;
  }
  auto operator<=>(const Shape&) const = default;
};

std::string to_string(const Shape& shape);

// Dense C x H x W grid of floats, channel-major then row-major.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);  // zero-filled
  // Takes ownership of `data`; throws ConfigError on a length mismatch or a
  // non-finite entry.
  Tensor(Shape shape, std::vector<float> data);

  static Tensor filled(Shape shape, float value);

  const Shape& shape() const { return shape_; }
  int channels() const { return shape_.channels; }
  int height() const { return shape_.height; }
  int width() const { return shape_.width; }
  std::size_t size() const { return data_.size(); }
  std::size_t bytes() const { return data_.size() * sizeof(float); }
  bool empty() const { return data_.empty(); }

  std::span<const float> data() const { return data_; }
  std::span<float> mutable_data() { return data_; }
  std::span<const float> channel(int c) const;
  std::span<float> mutable_channel(int c);

  float at(int c, int y, int x) const { return data_[index(c, y, x)]; }
  float& at(int c, int y, int x) { return data_[index(c, y, x)]; }

 private:
  std::size_t index(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * shape_.height + y) * shape_.width + x;
  }

  Shape shape_;
  std::vector<float> data_;
};

// Same shape and identical bit patterns.
bool bitwise_equal(const Tensor& a, const Tensor& b);
// Largest |a - b| over all entries. Shapes must match.
double max_abs_diff(const Tensor& a, const Tensor& b);

struct ConvWeights {
  int out_channels = 0;
  int in_channels = 0;
  int kernel_size = 3;
  int stride = 1;
  int padding = 1;
  std::vector<float> kernel;  // [out][in][ky][kx]
  std::vector<float> bias;    // [out]

  void validate() const;
  float weight(int o, int i, int ky, int kx) const {
    return kernel[((static_cast<std::size_t>(o) * in_channels + i) * kernel_size + ky) *
                      kernel_size +
                  kx];
  }
  Shape output_shape(const Shape& input) const;
};

// Zero-padded cross-correlation. For every output pixel the sum runs over
// input channels (outer) and kernel rows/cols (inner), starting from 0.0f;
// taps that fall into the padding are skipped, and the bias is added last.
// Any implementation that needs bit-identical results must follow that order.
Tensor conv2d(const Tensor& input, const ConvWeights& w);

Tensor relu6(const Tensor& input);

// out(c, y*f + dy, x*f + dx) = in(c*f*f + dy*f + dx, y, x)
Tensor pixel_shuffle(const Tensor& input, int factor);

Tensor concat_channels(std::span<const Tensor> parts);
Tensor concat_channels(std::initializer_list<const Tensor*> parts);

// Channels [start, end).
Tensor slice_channels(const Tensor& input, int start, int end);

Tensor add(const Tensor& a, const Tensor& b);

}  // namespace bsvd
