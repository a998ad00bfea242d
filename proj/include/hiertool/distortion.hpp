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

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hiertool/image.hpp"
#include "hiertool/random.hpp"

namespace hiertool {

// Parameters of the degradation pipeline. A parameter is present iff its
// distortion is selected; `blur_angle` accompanies `eta`.
struct DistortionSpec {
  std::optional<double> sigma;        // white-noise stddev
  std::optional<int> eta;             // blur kernel length, pixels
  std::optional<double> blur_angle;   // degrees in [0, 180)
  std::optional<double> lambda_rate;  // output/input area ratio
  std::optional<double> delta;        // mask area / bbox area

  bool has_noise() const { return sigma.has_value(); }
  bool has_blur() const { return eta.has_value(); }
  bool has_downsample() const { return lambda_rate.has_value(); }
  bool has_cutout() const { return delta.has_value(); }
  bool empty() const {
    return !has_noise() && !has_blur() && !has_downsample() && !has_cutout();
  }
  // Selected type names in pipeline order.
  std::vector<std::string> types() const;
};

struct PartPoint {
  std::string name;
  double x = 0.0;
  double y = 0.0;
};

// Object bounding box plus optional named part locations, pixel coordinates.
struct RegionAnnotation {
  double x = 0.0, y = 0.0, w = 0.0, h = 0.0;
  std::vector<PartPoint> parts;
};

// Sampling ranges for sample_spec(); defaults follow the degradation design.
struct DistortionRanges {
  double sigma_lo = 0.1, sigma_hi = 0.2;
  int eta_lo = 5, eta_hi = 14;
  double lambda_lo = 0.4, lambda_hi = 0.7;
  double delta_lo = 0.02, delta_hi = 0.06;
  // Which distortion types sample_spec may select (at least one must stay
  // enabled).
  bool allow_noise = true, allow_blur = true, allow_downsample = true,
       allow_cutout = true;
};

// Adds i.i.d. N(0, sigma^2) to every channel of every pixel, then clamps to
// [0, 1]. The same sigma applies to all three channels.
Image white_noise(const Image& img, double sigma, RandomStream& rng);

// Normalized 1-D Gaussian profile of length eta laid along `angle`,
// bilinearly rasterized into an eta x eta kernel (row-major). Weights are
// nonnegative and sum to 1.
std::vector<double> motion_blur_kernel(int eta, double angle_deg);

// Convolves each channel with the same directional kernel; borders use edge
// replication.
Image motion_blur(const Image& img, int eta, double angle_deg);

// Shrinks to (round(h*sqrt(lambda)), round(w*sqrt(lambda))) with bilinear
// interpolation, so the output/input area ratio approximates lambda. Accepts
// lambda in (0, 1]; the sampled-range constraint lives on DistortionSpec.
Image downsample(const Image& img, double lambda_rate);

// Zeroes `count` rectangles whose aspect ratio matches the bbox and whose
// area is delta * bbox_area. Anchors are random part points when parts are
// provided, else random picks among the bbox center/left/right/top/bottom.
// Rectangles are clipped to the image bounds.
Image cutout(const Image& img, const RegionAnnotation& region, double delta,
             int count, RandomStream& rng);

// Full degradation pipeline in fixed order noise -> blur -> downsample ->
// cutout. The region annotation is rescaled when downsampling changes the
// image dimensions.
Image apply(const Image& img, const DistortionSpec& spec,
            const RegionAnnotation& region, RandomStream& rng);

// Uniformly samples a non-empty subset of the enabled types and each selected
// parameter uniformly within its range (blur angle uniform in [0, 180)).
DistortionSpec sample_spec(RandomStream& rng, const DistortionRanges& ranges = {});

// Validates presence/range invariants against the given ranges.
void validate_spec(const DistortionSpec& spec, const DistortionRanges& ranges = {});

}  // namespace hiertool
