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

#include "hiertool/distortion.hpp"
#include "hiertool/hierarchy.hpp"
#include "hiertool/image.hpp"

namespace hiertool {

// A clean source image with its full-depth category path and region
// annotation.
struct SourceSample {
  std::string id;
  Image image;
  LabelPath truth;  // full depth
  RegionAnnotation region;
};

// Annotator used during dataset synthesis: predicts a full-depth path for a
// (distorted) image. Implementations must be safe for concurrent calls.
class AnnotatorOracle {
 public:
  virtual ~AnnotatorOracle() = default;
  virtual LabelPath predict(const Image& img) const = 0;
};

struct DatasetRecord {
  std::string image_id;
  std::string image_path;  // relative to the manifest directory
  std::vector<std::string> category_path;  // names, truncated at level_label
  int level_label = 0;
  DistortionSpec spec;
  std::string source_id;
  int attempts = 1;
};

struct BuildConfig {
  uint64_t seed = 0;
  int max_retries = 25;
  std::string split = "train";
  DistortionRanges ranges;
  int threads = 1;  // per-image work items are independent
};

// Per-level agreement bits between two full-depth paths.
CorrectnessVector correctness(const LabelPath& truth, const LabelPath& pred);

// Index of the finest correct level; v must be legal.
int assign_level(const CorrectnessVector& v);

struct BuildOutput {
  std::vector<DatasetRecord> records;
  std::vector<std::string> diagnostics;  // sidecar log lines, source order
  int skipped = 0;
};

// For each source: sample a distortion spec, degrade, annotate, and keep the
// sample when the correctness pattern is legal, labeling it with the finest
// correct level; illegal predictions retry with a fresh spec up to
// cfg.max_retries, after which the source is skipped. Distorted PNGs are
// written under out_dir/images. Deterministic for fixed (sources, annotator,
// seed) regardless of cfg.threads.
BuildOutput build_dataset(const std::vector<SourceSample>& sources,
                          const AnnotatorOracle& annotator, const Hierarchy& h,
                          const BuildConfig& cfg, const std::string& out_dir);

struct LevelCounts {
  std::vector<long> per_level;
  long total = 0;
};
LevelCounts summarize(const std::vector<DatasetRecord>& records,
                      const Hierarchy& h);
std::string format_level_counts(const LevelCounts& counts, const Hierarchy& h);

// Dataset manifest: one JSON object per line.
std::string manifest_to_string(const std::vector<DatasetRecord>& records,
                               const Hierarchy& h);
void write_dataset_manifest(const std::vector<DatasetRecord>& records,
                            const std::string& path, const Hierarchy& h);
std::vector<DatasetRecord> load_dataset_manifest(const std::string& path,
                                                 const Hierarchy& h);

// Source-set I/O: `sources.jsonl` in a directory, image paths relative to it.
void write_sources(const std::vector<SourceSample>& sources,
                   const std::string& dir, const Hierarchy& h);
std::vector<SourceSample> load_sources(const std::string& dir,
                                       const Hierarchy& h);

}  // namespace hiertool
