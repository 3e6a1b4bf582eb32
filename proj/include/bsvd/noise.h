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

#include <cstdint>
#include <span>
#include <vector>

#include "bsvd/tensor.h"

namespace bsvd {

struct NoiseSpec {
  enum class Kind { kAwgn, kHeteroscedastic };

  Kind kind = Kind::kAwgn;
  double sigma = 0.0;  // AWGN std on the 0-255 scale
  double a = 0.0;      // variance a * x + b, x in [0, 1]
  double b = 0.0;
  std::uint64_t seed = 0;

  static NoiseSpec awgn(double sigma, std::uint64_t seed) {
    return {Kind::kAwgn, sigma, 0.0, 0.0, seed};
  }
  static NoiseSpec heteroscedastic(double a, double b, std::uint64_t seed) {
    return {Kind::kHeteroscedastic, 0.0, a, b, seed};
  }

  void validate() const;
};

// Adds zero-mean Gaussian noise and clamps to [0, 1]. Normals come from
// Rng(spec.seed).normal(), one per element, frames in order and elements in
// tensor order.
std::vector<Tensor> add_noise(std::span<const Tensor> frames, const NoiseSpec& spec);

}  // namespace bsvd
