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

#include "bsvd/noise.h"

#include <algorithm>
#include <cmath>

#include "bsvd/errors.h"
#include "bsvd/random.h"

namespace bsvd {

void NoiseSpec::validate() const {
  if (kind == Kind::kAwgn) {
    if (!(sigma >= 0.0)) throw ConfigError("noise: sigma must be >= 0");
    return;
  }
  if (!(a >= 0.0) || !(b >= 0.0)) throw ConfigError("noise: a and b must be >= 0");
  if (a + b > 1.0) throw ConfigError("noise: a + b must not exceed 1 (variance at unit intensity)");
}

std::vector<Tensor> add_noise(std::span<const Tensor> frames, const NoiseSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const double awgn_std = spec.sigma / 255.0;
  std::vector<Tensor> out;
  out.reserve(frames.size());
  for (const Tensor& frame : frames) {
    Tensor noisy(frame.shape());
    auto src = frame.data();
    auto dst = noisy.mutable_data();
    for (std::size_t i = 0; i < src.size(); ++i) {
      const double x = src[i];
      if (x < 0.0 || x > 1.0) throw ConfigError("noise: input intensity outside [0, 1]");
      const double std_dev = spec.kind == NoiseSpec::Kind::kAwgn
                                 ? awgn_std
                                 : std::sqrt(spec.a * x + spec.b);
      const double n = rng.normal();
      dst[i] = static_cast<float>(std::clamp(x + std_dev * n, 0.0, 1.0));
    }
    out.push_back(std::move(noisy));
  }
  return out;
}

}  // namespace bsvd
