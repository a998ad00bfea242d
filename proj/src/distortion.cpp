// Copyright 2026 The hiertool Authors
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

#include "hiertool/distortion.hpp"

#include <algorithm>
#include <cmath>

#include "hiertool/error.hpp"

namespace hiertool {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_region(const RegionAnnotation& r, const Image& img) {
  const double tol = 1e-6;
  require(r.w > 0 && r.h > 0, "cutout: bounding box has non-positive size");
  require(r.x >= -tol && r.y >= -tol && r.x + r.w <= img.width + tol &&
              r.y + r.h <= img.height + tol,
          "cutout: bounding box exceeds image bounds");
  for (const auto& p : r.parts)
    require(p.x >= r.x - tol && p.x <= r.x + r.w + tol && p.y >= r.y - tol &&
                p.y <= r.y + r.h + tol,
            "cutout: part '" + p.name + "' outside bounding box");
}

}  // namespace

std::vector<std::string> DistortionSpec::types() const {
  std::vector<std::string> out;
  if (has_noise()) out.push_back("noise");
  if (has_blur()) out.push_back("blur");
  if (has_downsample()) out.push_back("downsample");
  if (has_cutout()) out.push_back("cutout");
  return out;
}

Image white_noise(const Image& img, double sigma, RandomStream& rng) {
  require(sigma > 0, "white_noise: sigma must be positive");
  Image out = img;
  for (double& v : out.data)
    v = std::clamp(v + rng.gaussian(0.0, sigma), 0.0, 1.0);
  return out;
}

std::vector<double> motion_blur_kernel(int eta, double angle_deg) {
  require(eta >= 5 && eta <= 14, "motion_blur: eta out of range [5, 14]");
  const double theta = angle_deg * kPi / 180.0;
  const double dx = std::cos(theta);
  const double dy = std::sin(theta);
  const double center = (eta - 1) / 2.0;
  const double stddev = eta / 3.0;

  std::vector<double> kernel(static_cast<std::size_t>(eta) * eta, 0.0);
  auto splat = [&](int y, int x, double w) {
    if (y >= 0 && y < eta && x >= 0 && x < eta && w > 0.0)
      kernel[static_cast<std::size_t>(y) * eta + x] += w;
  };
  for (int i = 0; i < eta; ++i) {
    double t = i - center;
    double w = std::exp(-0.5 * (t / stddev) * (t / stddev));
    double px = center + t * dx;
    double py = center + t * dy;
    int x0 = static_cast<int>(std::floor(px));
    int y0 = static_cast<int>(std::floor(py));
    double fx = px - x0;
    double fy = py - y0;
    splat(y0, x0, w * (1 - fx) * (1 - fy));
    splat(y0, x0 + 1, w * fx * (1 - fy));
    splat(y0 + 1, x0, w * (1 - fx) * fy);
    splat(y0 + 1, x0 + 1, w * fx * fy);
  }
  double sum = 0.0;
  for (double w : kernel) sum += w;
  for (double& w : kernel) w /= sum;
  return kernel;
}

Image motion_blur(const Image& img, int eta, double angle_deg) {
  require(angle_deg >= 0.0 && angle_deg < 180.0,
          "motion_blur: angle out of range [0, 180)");
  std::vector<double> kernel = motion_blur_kernel(eta, angle_deg);
  const int offset = (eta - 1) / 2;
  Image out(img.height, img.width);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double acc[kChannels] = {0.0, 0.0, 0.0};
      for (int ky = 0; ky < eta; ++ky) {
        int sy = std::clamp(y + ky - offset, 0, img.height - 1);
        for (int kx = 0; kx < eta; ++kx) {
          double w = kernel[static_cast<std::size_t>(ky) * eta + kx];
          if (w == 0.0) continue;
          int sx = std::clamp(x + kx - offset, 0, img.width - 1);
          for (int c = 0; c < kChannels; ++c) acc[c] += w * img.at(sy, sx, c);
        }
      }
      for (int c = 0; c < kChannels; ++c)
        out.at(y, x, c) = std::clamp(acc[c], 0.0, 1.0);
    }
  }
  return out;
}

Image downsample(const Image& img, double lambda_rate) {
  require(lambda_rate > 0.0 && lambda_rate <= 1.0,
          "downsample: lambda out of range (0, 1]");
  double scale = std::sqrt(lambda_rate);
  int out_h = static_cast<int>(std::lround(img.height * scale));
  int out_w = static_cast<int>(std::lround(img.width * scale));
  require(out_h > 0 && out_w > 0, "downsample: output dimension would be 0");
  return resize_bilinear(img, out_h, out_w);
}

Image cutout(const Image& img, const RegionAnnotation& region, double delta,
             int count, RandomStream& rng) {
  require(delta > 0, "cutout: delta must be positive");
  require(count >= 1, "cutout: count must be at least 1");
  check_region(region, img);
  require(delta * region.w * region.h >= 1.0,
          "cutout: mask area below one pixel");

  // Candidate anchors: provided part points, else bbox landmarks.
  std::vector<std::pair<double, double>> candidates;
  if (!region.parts.empty()) {
    for (const auto& p : region.parts) candidates.emplace_back(p.x, p.y);
  } else {
    double cx = region.x + region.w / 2.0;
    double cy = region.y + region.h / 2.0;
    candidates = {{cx, cy},
                  {region.x, cy},
                  {region.x + region.w - 1, cy},
                  {cx, region.y},
                  {cx, region.y + region.h - 1}};
  }

  std::vector<std::pair<double, double>> anchors;
  int n = static_cast<int>(candidates.size());
  if (count <= n) {
    // Partial Fisher-Yates: `count` distinct picks.
    std::vector<int> idx(candidates.size());
    for (int i = 0; i < n; ++i) idx[i] = i;
    for (int i = 0; i < count; ++i) {
      int j = static_cast<int>(rng.uniform_int(i, n - 1));
      std::swap(idx[i], idx[j]);
      anchors.push_back(candidates[idx[i]]);
    }
  } else {
    for (int i = 0; i < count; ++i)
      anchors.push_back(candidates[rng.uniform_int(0, n - 1)]);
  }

  double side = std::sqrt(delta);
  int mask_w = std::max<int>(1, static_cast<int>(std::lround(region.w * side)));
  int mask_h = std::max<int>(1, static_cast<int>(std::lround(region.h * side)));

  Image out = img;
  for (auto [ax, ay] : anchors) {
    int x0 = static_cast<int>(std::lround(ax - mask_w / 2.0));
    int y0 = static_cast<int>(std::lround(ay - mask_h / 2.0));
    int x1 = std::min(x0 + mask_w, img.width);
    int y1 = std::min(y0 + mask_h, img.height);
    x0 = std::max(x0, 0);
    y0 = std::max(y0, 0);
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x)
        for (int c = 0; c < kChannels; ++c) out.at(y, x, c) = 0.0;
  }
  return out;
}

Image apply(const Image& img, const DistortionSpec& spec,
            const RegionAnnotation& region, RandomStream& rng) {
  require(!spec.empty(), "apply: spec selects no distortion");
  require(spec.has_blur() == spec.blur_angle.has_value(),
          "apply: blur angle must accompany eta");

  Image out = img;
  RegionAnnotation reg = region;
  if (spec.has_noise()) out = white_noise(out, *spec.sigma, rng);
  if (spec.has_blur()) out = motion_blur(out, *spec.eta, *spec.blur_angle);
  if (spec.has_downsample()) {
    int prev_h = out.height, prev_w = out.width;
    out = downsample(out, *spec.lambda_rate);
    double sy = static_cast<double>(out.height) / prev_h;
    double sx = static_cast<double>(out.width) / prev_w;
    reg.x *= sx;
    reg.w *= sx;
    reg.y *= sy;
    reg.h *= sy;
    for (auto& p : reg.parts) {
      p.x *= sx;
      p.y *= sy;
    }
  }
  if (spec.has_cutout()) {
    int count = reg.parts.empty() ? 4 : 3;
    out = cutout(out, reg, *spec.delta, count, rng);
  }
  return out;
}

DistortionSpec sample_spec(RandomStream& rng, const DistortionRanges& ranges) {
  enum Type { kNoise = 0, kBlur, kDownsample, kCutout };
  std::vector<Type> enabled;
  if (ranges.allow_noise) enabled.push_back(kNoise);
  if (ranges.allow_blur) enabled.push_back(kBlur);
  if (ranges.allow_downsample) enabled.push_back(kDownsample);
  if (ranges.allow_cutout) enabled.push_back(kCutout);
  require(!enabled.empty(), "sample_spec: no distortion type enabled");

  uint64_t mask =
      static_cast<uint64_t>(rng.uniform_int(1, (1ll << enabled.size()) - 1));
  auto selected = [&](Type t) {
    for (std::size_t i = 0; i < enabled.size(); ++i)
      if (enabled[i] == t && (mask >> i) & 1) return true;
    return false;
  };

  DistortionSpec spec;
  if (selected(kNoise)) spec.sigma = rng.uniform(ranges.sigma_lo, ranges.sigma_hi);
  if (selected(kBlur)) {
    spec.eta = static_cast<int>(rng.uniform_int(ranges.eta_lo, ranges.eta_hi));
    spec.blur_angle = rng.uniform(0.0, 180.0);
  }
  if (selected(kDownsample))
    spec.lambda_rate = rng.uniform(ranges.lambda_lo, ranges.lambda_hi);
  if (selected(kCutout)) spec.delta = rng.uniform(ranges.delta_lo, ranges.delta_hi);
  return spec;
}

void validate_spec(const DistortionSpec& spec, const DistortionRanges& ranges) {
  require(!spec.empty(), "spec: no distortion selected");
  require(spec.has_blur() == spec.blur_angle.has_value(),
          "spec: blur angle must be present iff eta is");
  if (spec.sigma)
    require(*spec.sigma >= ranges.sigma_lo && *spec.sigma <= ranges.sigma_hi,
            "spec: sigma out of range");
  if (spec.eta)
    require(*spec.eta >= ranges.eta_lo && *spec.eta <= ranges.eta_hi,
            "spec: eta out of range");
  if (spec.blur_angle)
    require(*spec.blur_angle >= 0.0 && *spec.blur_angle < 180.0,
            "spec: blur angle out of range");
  if (spec.lambda_rate)
    require(*spec.lambda_rate >= ranges.lambda_lo &&
                *spec.lambda_rate <= ranges.lambda_hi,
            "spec: lambda out of range");
  if (spec.delta)
    require(*spec.delta >= ranges.delta_lo && *spec.delta <= ranges.delta_hi,
            "spec: delta out of range");
}

}  // namespace hiertool
