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

#include "hiertool/dataset.hpp"
#include "hiertool/hierarchy.hpp"

namespace hiertool {

// Synthetic source-image generator for desk-scale runs and tests. Each leaf
// category renders a distinctive pattern: the top level sets the object's
// base tone/tint, the middle level the stripe orientation, the leaf the
// position of a bright disc. Instances differ by small deterministic jitter.
class ShapeWorld {
 public:
  ShapeWorld(const Hierarchy& h, int image_size = 64);

  int image_size() const { return image_size_; }

  // Deterministic render; jitter_seed 0 renders the canonical instance.
  Image render(NodeId leaf, uint64_t jitter_seed) const;
  RegionAnnotation region(NodeId leaf, uint64_t jitter_seed) const;

  // `count` sources cycling over the leaf categories, ids src_00000...
  std::vector<SourceSample> generate(int count, uint64_t seed) const;

 private:
  struct LeafStyle {
    int order_idx = 0;    // tone/tint
    int family_idx = 0;   // stripe orientation
    int species_idx = 0;  // disc placement
  };
  LeafStyle style_of(NodeId leaf) const;

  const Hierarchy& h_;
  int image_size_;
  std::vector<NodeId> leaves_;
};

// Parameters of the stochastic label degradation inside TemplateAnnotator.
// flip probability at level l is 1 - exp(-beta[l] * max(0, d - d_floor)),
// where d is the annotator's thumbnail distance to its best template. An
// empty beta disables degradation (pure nearest-template prediction).
struct AnnotatorNoise {
  std::vector<double> beta;
  double d_floor = 0.02;
  uint64_t seed = 0;
};

// Desk-scale annotator: nearest mean-thumbnail template per leaf, fitted on
// clean sources and then frozen; the measured distance doubles as a
// distortion-strength proxy driving per-level misclassification. Predictions
// derive their randomness from the image content, so they are deterministic
// and independent of call order.
class TemplateAnnotator : public AnnotatorOracle {
 public:
  static constexpr int kThumbSize = 24;

  TemplateAnnotator(const Hierarchy& h,
                    std::vector<std::pair<NodeId, Image>> leaf_templates,
                    AnnotatorNoise noise);

  // Fits one template per leaf as the mean thumbnail of its clean sources.
  static TemplateAnnotator fit(const Hierarchy& h,
                               const std::vector<SourceSample>& sources,
                               AnnotatorNoise noise);

  LabelPath predict(const Image& img) const override;

  // Thumbnail RMS distance used internally (exposed for tuning/tests).
  double distance(const Image& img) const;

 private:
  const Hierarchy& h_;
  std::vector<std::pair<NodeId, std::vector<double>>> templates_;
  AnnotatorNoise noise_;
};

}  // namespace hiertool
