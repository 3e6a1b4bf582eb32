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

#include "bsvd/metrics.h"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "bsvd/errors.h"
#include "json.hpp"

namespace bsvd {

double psnr(const Tensor& ref, const Tensor& test) {
  if (ref.shape() != test.shape()) throw ConfigError("psnr: shape mismatch");
  if (ref.size() == 0) throw ConfigError("psnr: empty tensors");
  double sum = 0.0;
  auto x = ref.data();
  auto y = test.data();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = static_cast<double>(x[i]) - y[i];
    sum += d * d;
  }
  const double mse = sum / static_cast<double>(x.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

namespace {

constexpr int kWindow = 11;

std::array<double, kWindow * kWindow> gaussian_window() {
  std::array<double, kWindow * kWindow> w{};
  constexpr double sigma = 1.5;
  double total = 0.0;
  for (int y = 0; y < kWindow; ++y) {
    for (int x = 0; x < kWindow; ++x) {
      const double dy = y - kWindow / 2;
      const double dx = x - kWindow / 2;
      w[y * kWindow + x] = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      total += w[y * kWindow + x];
    }
  }
  for (double& v : w) v /= total;
  return w;
}

}  // namespace

double ssim(const Tensor& ref, const Tensor& test) {
  if (ref.shape() != test.shape()) throw ConfigError("ssim: shape mismatch");
  if (ref.height() < kWindow || ref.width() < kWindow) {
    throw ConfigError("ssim: frames must be at least 11x11");
  }
  static const auto window = gaussian_window();
  constexpr double c1 = (0.01 * 1.0) * (0.01 * 1.0);
  constexpr double c2 = (0.03 * 1.0) * (0.03 * 1.0);
  const int oh = ref.height() - kWindow + 1;
  const int ow = ref.width() - kWindow + 1;

  double total = 0.0;
  for (int c = 0; c < ref.channels(); ++c) {
    for (int y0 = 0; y0 < oh; ++y0) {
      for (int x0 = 0; x0 < ow; ++x0) {
        double mx = 0, my = 0, xx = 0, yy = 0, xy = 0;
        for (int v = 0; v < kWindow; ++v) {
          for (int u = 0; u < kWindow; ++u) {
            const double w = window[v * kWindow + u];
            const double a = ref.at(c, y0 + v, x0 + u);
            const double b = test.at(c, y0 + v, x0 + u);
            mx += w * a;
            my += w * b;
            xx += w * a * a;
            yy += w * b * b;
            xy += w * a * b;
          }
        }
        const double vx = xx - mx * mx;
        const double vy = yy - my * my;
        const double cov = xy - mx * my;
        total += ((2 * mx * my + c1) * (2 * cov + c2)) /
                 ((mx * mx + my * my + c1) * (vx + vy + c2));
      }
    }
  }
  return total / (static_cast<double>(ref.channels()) * oh * ow);
}

namespace {

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(6);
  os << std::fixed << v;
  return os.str();
}

nlohmann::json json_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

}  // namespace

FidelityReport per_frame_report(std::span<const Tensor> ref, std::span<const Tensor> a,
                                std::span<const Tensor> b) {
  if (ref.size() != a.size() || (!b.empty() && b.size() != a.size())) {
    throw ConfigError("per_frame_report: frame counts differ");
  }
  const bool use_ssim = !ref.empty() && ref.front().height() >= kWindow && ref.front().width() >= kWindow;
  FidelityReport r;
  std::vector<double> pa, pb, sa, sb;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    FrameFidelity f;
    f.psnr_a = psnr(ref[i], a[i]);
    pa.push_back(f.psnr_a);
    if (use_ssim) sa.push_back(ssim(ref[i], a[i]));
    if (!b.empty()) {
      f.psnr_b = psnr(ref[i], b[i]);
      pb.push_back(*f.psnr_b);
      if (use_ssim) sb.push_back(ssim(ref[i], b[i]));
      // Both infinite means both exact: no difference.
      f.delta = (std::isinf(f.psnr_a) && std::isinf(*f.psnr_b) && f.psnr_a == *f.psnr_b)
                    ? 0.0
                    : f.psnr_a - *f.psnr_b;
      f.maxabs = max_abs_diff(a[i], b[i]);
    }
    r.frames.push_back(f);
  }
  r.mean_psnr_a = mean(pa);
  r.mean_ssim_a = mean(sa);
  if (!b.empty()) {
    r.mean_psnr_b = mean(pb);
    r.mean_ssim_b = mean(sb);
  }
  return r;
}

std::string FidelityReport::to_csv() const {
  std::ostringstream os;
  os << "frame,psnr_a,psnr_b,delta,maxabs\n";
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const FrameFidelity& f = frames[i];
    os << i << ',' << fmt(f.psnr_a) << ',' << (f.psnr_b ? fmt(*f.psnr_b) : "") << ','
       << (f.delta ? fmt(*f.delta) : "") << ',' << (f.maxabs ? fmt(*f.maxabs) : "") << '\n';
  }
  return os.str();
}

std::string FidelityReport::summary_json() const {
  nlohmann::json j;
  j["frames"] = frames.size();
  j["mean_psnr_a"] = json_number(mean_psnr_a);
  j["mean_ssim_a"] = mean_ssim_a;
  if (mean_psnr_b) j["mean_psnr_b"] = json_number(*mean_psnr_b);
  if (mean_ssim_b) j["mean_ssim_b"] = *mean_ssim_b;
  return j.dump(2);
}

}  // namespace bsvd
