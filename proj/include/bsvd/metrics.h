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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bsvd/tensor.h"

namespace bsvd {

// Peak 1.0. Returns +infinity for identical inputs.
double psnr(const Tensor& ref, const Tensor& test);

// Single-scale SSIM: 11x11 Gaussian window (sigma 1.5) over every valid
// window position, K1 = 0.01, K2 = 0.03, peak 1.0; averaged over positions
// and channels. Frames must be at least 11x11.
double ssim(const Tensor& ref, const Tensor& test);

struct FrameFidelity {
  double psnr_a = 0.0;
  std::optional<double> psnr_b;
  std::optional<double> delta;   // psnr_a - psnr_b
  std::optional<double> maxabs;  // max |a - b|
};

struct FidelityReport {
  std::vector<FrameFidelity> frames;
  double mean_psnr_a = 0.0;
  double mean_ssim_a = 0.0;
  std::optional<double> mean_psnr_b;
  std::optional<double> mean_ssim_b;

  // Header: frame,psnr_a,psnr_b,delta,maxabs (absent fields left empty,
  // infinite PSNR written as "inf").
  std::string to_csv() const;
  std::string summary_json() const;
};

FidelityReport per_frame_report(std::span<const Tensor> ref, std::span<const Tensor> a,
                                std::span<const Tensor> b = {});

}  // namespace bsvd
