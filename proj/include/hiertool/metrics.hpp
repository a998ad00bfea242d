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

#include <string>
#include <vector>

#include "hiertool/hierarchy.hpp"

namespace hiertool {

struct SampleMetrics {
  int sdl = 0;
  double ph = 0.0;
  double rh = 0.0;
};

struct MetricReport {
  double sdl_mean = 0.0;
  double ph_mean = 0.0;
  double rh_mean = 0.0;
  std::vector<SampleMetrics> per_sample;
};

// Cardinality of the symmetric difference between the ground-truth and
// predicted ancestor-closure sets. 0 iff the sets are equal.
int sdl(const NodeSet& truth, const NodeSet& pred);

// |truth ∩ pred| / |pred|; punishes over-specific predictions.
// Throws on an empty prediction set.
double hierarchical_precision(const NodeSet& truth, const NodeSet& pred);

// |truth ∩ pred| / |truth|; penalizes under-specific predictions.
// Throws on an empty truth set.
double hierarchical_recall(const NodeSet& truth, const NodeSet& pred);

// Converts each path to its ancestor closure, scores every aligned pair, and
// aggregates. Means use compensated summation so they are deterministic.
MetricReport evaluate_manifest(const std::vector<LabelPath>& truths,
                               const std::vector<LabelPath>& preds,
                               const Hierarchy& h);

// Label manifest I/O: one record per line,
// `image_id<TAB>name0/name1/None` with `None` padding below the labeled
// level; every line carries exactly `depth` segments.
struct LabelRecord {
  std::string image_id;
  LabelPath path;
};
std::vector<LabelRecord> load_label_manifest(const std::string& path,
                                             const Hierarchy& h);
std::string label_manifest_line(const std::string& image_id,
                                const LabelPath& path, const Hierarchy& h);
void write_label_manifest(const std::vector<LabelRecord>& records,
                          const std::string& path, const Hierarchy& h);

}  // namespace hiertool
