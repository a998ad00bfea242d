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

#include "hiertool/dataset.hpp"
#include "hiertool/model.hpp"

namespace hiertool {

struct TrainSample {
  Image image;
  int level = 0;
  std::vector<int> slice_targets;  // truth index within each level slice
};

struct TrainConfig {
  double lr = 0.01;
  double momentum = 0.9;
  int batch = 16;
  int epochs = 100;
  double lambda = 1.0;  // category-loss weight
  bool augment = true;
  double flip_prob = 0.5;
  double crop_min_scale = 0.75;
  uint64_t seed = 0;
};

struct TrainResult {
  std::vector<double> epoch_loss;  // per-epoch mean sample loss
};

// Mini-batch SGD with momentum over the hybrid loss. Deterministic for a
// fixed seed (initialization aside: the model arrives already initialized);
// shuffling and augmentation draw from streams derived from cfg.seed. A
// non-finite loss aborts with a diagnostic.
TrainResult train(SghpnModel& model, const std::vector<TrainSample>& samples,
                  const TrainConfig& cfg);

// Horizontal flip + random crop (train-time augmentation); the ingestion
// resize restores the model's input size afterwards.
Image augment_image(const Image& img, const TrainConfig& cfg, RandomStream& rng);

TrainSample make_train_sample(const Image& img, const LabelPath& truncated,
                              const Hierarchy& h);

// Loads record images relative to the manifest's directory.
std::vector<TrainSample> make_train_samples(
    const std::vector<DatasetRecord>& records, const std::string& manifest_dir,
    const Hierarchy& h);

// Key-value training/model config file (`key value` lines, `#` comments).
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
};
RunConfig parse_run_config(const std::string& path);

}  // namespace hiertool
