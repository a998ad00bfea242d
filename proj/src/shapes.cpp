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

#include "hiertool/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "hiertool/error.hpp"
#include "hiertool/random.hpp"

namespace hiertool {

namespace {

constexpr double kPi = 3.14159265358979323846;

double fract(double v) { return v - std::floor(v); }

int sibling_index(const Hierarchy& h, NodeId id) {
  const auto& siblings = h.node(h.node(id).parent).children;
  for (std::size_t i = 0; i < siblings.size(); ++i)
    if (siblings[i] == id) return static_cast<int>(i);
  return 0;
}

std::vector<double> thumbnail(const Image& img, int size) {
  return resize_bilinear(img, size, size).data;
}

uint64_t image_content_hash(const Image& img) {
  uint64_t head = fnv1a64(std::string_view(
      reinterpret_cast<const char*>(img.data.data()),
      img.data.size() * sizeof(double)));
  return mix64(head ^ (static_cast<uint64_t>(img.height) << 32) ^
               static_cast<uint64_t>(img.width));
}

}  // namespace

ShapeWorld::ShapeWorld(const Hierarchy& h, int image_size)
    : h_(h), image_size_(image_size) {
  require(image_size_ >= 16, "shapes: image size too small");
  auto [begin, end] = h.level_slice(h.depth() - 1);
  for (int i = begin; i < end; ++i) leaves_.push_back(h.categories()[i]);
  require(!leaves_.empty(), "shapes: hierarchy has no leaf categories");
}

ShapeWorld::LeafStyle ShapeWorld::style_of(NodeId leaf) const {
  LabelPath path = h_.path_to(leaf);
  LeafStyle style;
  style.order_idx = sibling_index(h_, path.node_ids.front());
  if (path.length() >= 2)
    style.family_idx = sibling_index(h_, path.node_ids[path.length() - 2]);
  style.species_idx = sibling_index(h_, leaf);
  return style;
}

Image ShapeWorld::render(NodeId leaf, uint64_t jitter_seed) const {
  LeafStyle style = style_of(leaf);
  const int s = image_size_;
  const double bx = s / 8.0, by = s / 8.0, bw = 0.75 * s, bh = 0.75 * s;

  double jx = 0.0, jy = 0.0, phase = 0.0;
  if (jitter_seed != 0) {
    RandomStream jr(mix64(jitter_seed));
    jx = jr.uniform(-2.0, 2.0) * s / 64.0;
    jy = jr.uniform(-2.0, 2.0) * s / 64.0;
    phase = jr.uniform(0.0, 2.0 * kPi);
  }

  static const double kTints[3][kChannels] = {
      {0.10, 0.00, -0.06}, {-0.06, 0.10, 0.00}, {0.00, -0.06, 0.10}};
  const double base = 0.30 + 0.20 * (style.order_idx % 3);
  const double* tint = kTints[style.order_idx % 3];
  const double alpha = (style.family_idx % 4) * kPi / 4.0;  // stripe direction
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  const double period = 16.0 * s / 64.0;

  const double fx = 0.2 + 0.6 * fract(0.618033988749895 * (style.species_idx + 1));
  const double fy = 0.3 + 0.4 * fract(0.381966011250105 * (style.species_idx + 1));
  const double cx = bx + fx * bw + jx;
  const double cy = by + fy * bh + jy;
  const double radius = 6.0 * s / 64.0;
  static const double kDisc[kChannels] = {0.95, 0.90, 0.25};

  Image img(s, s, 0.85);
  for (int y = 0; y < s; ++y) {
    for (int x = 0; x < s; ++x) {
      bool inside = x >= bx && x < bx + bw && y >= by && y < by + bh;
      if (!inside) continue;
      double stripe = std::sin(2.0 * kPi * (x * ca + y * sa) / period + phase);
      double dxp = x - cx, dyp = y - cy;
      bool in_disc = dxp * dxp + dyp * dyp <= radius * radius;
      for (int c = 0; c < kChannels; ++c) {
        double v = in_disc ? kDisc[c] : base + tint[c] + 0.15 * stripe;
        img.at(y, x, c) = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  return img;
}

RegionAnnotation ShapeWorld::region(NodeId leaf, uint64_t jitter_seed) const {
  LeafStyle style = style_of(leaf);
  const int s = image_size_;
  RegionAnnotation r;
  r.x = s / 8.0;
  r.y = s / 8.0;
  r.w = 0.75 * s;
  r.h = 0.75 * s;

  double jx = 0.0, jy = 0.0;
  if (jitter_seed != 0) {
    RandomStream jr(mix64(jitter_seed));
    jx = jr.uniform(-2.0, 2.0) * s / 64.0;
    jy = jr.uniform(-2.0, 2.0) * s / 64.0;
  }
  const double fx = 0.2 + 0.6 * fract(0.618033988749895 * (style.species_idx + 1));
  const double fy = 0.3 + 0.4 * fract(0.381966011250105 * (style.species_idx + 1));
  double cx = r.x + fx * r.w + jx;
  double cy = r.y + fy * r.h + jy;
  const double radius = 6.0 * s / 64.0;
  auto clampx = [&](double v) { return std::clamp(v, r.x, r.x + r.w - 1); };
  auto clampy = [&](double v) { return std::clamp(v, r.y, r.y + r.h - 1); };
  r.parts = {
      {"center", clampx(cx), clampy(cy)},
      {"crown", clampx(cx), clampy(cy - radius)},
      {"belly", clampx(cx), clampy(cy + radius)},
      {"left_wing", clampx(cx - radius), clampy(cy)},
      {"right_wing", clampx(cx + radius), clampy(cy)},
  };
  return r;
}

std::vector<SourceSample> ShapeWorld::generate(int count, uint64_t seed) const {
  std::vector<SourceSample> sources;
  sources.reserve(count);
  for (int i = 0; i < count; ++i) {
    NodeId leaf = leaves_[i % leaves_.size()];
    uint64_t jitter = mix64(seed + 0x9e3779b97f4a7c15ull * (i + 1)) | 1;
    SourceSample s;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "src_%05d", i);
    s.id = buf;
    s.image = render(leaf, jitter);
    s.truth = h_.path_to(leaf);
    s.region = region(leaf, jitter);
    sources.push_back(std::move(s));
  }
  return sources;
}

TemplateAnnotator::TemplateAnnotator(
    const Hierarchy& h, std::vector<std::pair<NodeId, Image>> leaf_templates,
    AnnotatorNoise noise)
    : h_(h), noise_(std::move(noise)) {
  require(!leaf_templates.empty(), "annotator: no templates");
  if (!noise_.beta.empty())
    require(static_cast<int>(noise_.beta.size()) == h.depth(),
            "annotator: beta must list one rate per level");
  std::sort(leaf_templates.begin(), leaf_templates.end(),
            [&](const auto& a, const auto& b) {
              return h.category_index(a.first) < h.category_index(b.first);
            });
  for (auto& [leaf, img] : leaf_templates) {
    require(h.level_of(leaf) == h.depth() - 1,
            "annotator: template node is not a leaf");
    templates_.emplace_back(leaf, thumbnail(img, kThumbSize));
  }
}

TemplateAnnotator TemplateAnnotator::fit(const Hierarchy& h,
                                         const std::vector<SourceSample>& sources,
                                         AnnotatorNoise noise) {
  std::map<NodeId, std::pair<std::vector<double>, int>> sums;
  for (const auto& s : sources) {
    require(s.truth.length() == h.depth(),
            "annotator: source '" + s.id + "' is not labeled to full depth");
    NodeId leaf = s.truth.node_ids.back();
    auto thumb = thumbnail(s.image, kThumbSize);
    auto& [sum, n] = sums[leaf];
    if (sum.empty()) sum.assign(thumb.size(), 0.0);
    for (std::size_t i = 0; i < thumb.size(); ++i) sum[i] += thumb[i];
    ++n;
  }
  std::vector<std::pair<NodeId, Image>> templates;
  for (auto& [leaf, acc] : sums) {
    Image mean(kThumbSize, kThumbSize);
    for (std::size_t i = 0; i < acc.first.size(); ++i)
      mean.data[i] = acc.first[i] / acc.second;
    templates.emplace_back(leaf, std::move(mean));
  }
  return TemplateAnnotator(h, std::move(templates), std::move(noise));
}

double TemplateAnnotator::distance(const Image& img) const {
  auto thumb = thumbnail(img, kThumbSize);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [leaf, tpl] : templates_) {
    double sq = 0.0;
    for (std::size_t i = 0; i < thumb.size(); ++i) {
      double d = thumb[i] - tpl[i];
      sq += d * d;
    }
    best = std::min(best, sq);
  }
  return std::sqrt(best / (static_cast<double>(kThumbSize) * kThumbSize * kChannels));
}

LabelPath TemplateAnnotator::predict(const Image& img) const {
  auto thumb = thumbnail(img, kThumbSize);
  NodeId best_leaf = templates_.front().first;
  double best_sq = std::numeric_limits<double>::infinity();
  for (const auto& [leaf, tpl] : templates_) {
    double sq = 0.0;
    for (std::size_t i = 0; i < thumb.size(); ++i) {
      double d = thumb[i] - tpl[i];
      sq += d * d;
    }
    if (sq < best_sq) {
      best_sq = sq;
      best_leaf = leaf;
    }
  }
  LabelPath path = h_.path_to(best_leaf);
  if (noise_.beta.empty()) return path;

  double d = std::sqrt(best_sq /
                       (static_cast<double>(kThumbSize) * kThumbSize * kChannels));
  double excess = std::max(0.0, d - noise_.d_floor);
  RandomStream rng(mix64(noise_.seed ^ image_content_hash(img)));
  for (int l = 0; l < h_.depth(); ++l) {
    double flip = 1.0 - std::exp(-noise_.beta[l] * excess);
    if (rng.uniform() >= flip) continue;

    // Swap in a wrong sibling, then descend randomly to full depth.
    NodeId parent = l == 0 ? NodeId{0} : path.node_ids[l - 1];
    std::vector<NodeId> wrong;
    for (NodeId sib : h_.node(parent).children)
      if (sib != path.node_ids[l]) wrong.push_back(sib);
    if (wrong.empty()) break;

    LabelPath degraded = path;
    degraded.node_ids.resize(l + 1);
    degraded.node_ids[l] = wrong[rng.uniform_int(0, static_cast<int>(wrong.size()) - 1)];
    while (degraded.length() < h_.depth()) {
      const auto& kids = h_.node(degraded.node_ids.back()).children;
      if (kids.empty()) break;
      degraded.node_ids.push_back(
          kids[rng.uniform_int(0, static_cast<int>(kids.size()) - 1)]);
    }
    if (degraded.length() == h_.depth()) path = degraded;
    break;
  }
  return path;
}

}  // namespace hiertool
