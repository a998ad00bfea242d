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

#include <json.hpp>

#include "hiertool/embeddings.hpp"
#include "hiertool/hierarchy.hpp"
#include "hiertool/image.hpp"
#include "hiertool/tensor.hpp"

namespace hiertool {

struct ModelConfig {
  int image_size = 64;
  int patch_size = 8;
  int width = 64;          // D
  int encoder_blocks = 4;  // L
  int decoder_blocks = 2;  // M
  int heads = 4;
  int mlp_ratio = 4;
  int category_count = 0;  // c, filled from the hierarchy
  int depth = 0;           // level count
  int embed_dim = 0;       // raw query-embedding width
  std::vector<std::pair<int, int>> level_slices;  // per-level ranges in [0, c)
  // false reproduces the plain-encoder baseline: no cross-attention decoder,
  // a classification token prepended to the patch tokens carries the scores.
  bool use_sgca = true;

  int patches_per_side() const { return image_size / patch_size; }
  int patch_count() const { return patches_per_side() * patches_per_side(); }
  int patch_dim() const { return 3 * patch_size * patch_size; }
  void validate() const;
  void fill_from_hierarchy(const Hierarchy& h);
};

struct Prediction {
  int level = 0;
  LabelPath path;  // length == level + 1
  std::vector<double> scores;        // length c
  std::vector<double> level_logits;  // length depth
};

// Row i is the raster-order, row-major flattening of patch i. The image must
// already be at cfg.image_size (resize happens at ingestion).
ad::Tensor patchify(const Image& img, const ModelConfig& cfg);

// Resize-to-model-size ingestion step.
ad::Tensor prepare_image(const Image& img, const ModelConfig& cfg);

struct LayerNormParams {
  ad::Tensor gain, bias;
};
struct MlpParams {
  ad::Tensor w1, b1, w2, b2;
};
struct BlockParams {
  LayerNormParams ln1, ln2;
  ad::AttentionParams attn;
  MlpParams mlp;
};

// The level-category hybrid prediction network: patch embedder + positional
// embeddings, a pre-norm encoder stack, a word-embedding-query cross-attention
// decoder producing one embedding per category, per-category scalar score
// heads, and a linear level predictor over the score vector.
class SghpnModel {
 public:
  SghpnModel(ModelConfig cfg, const QueryMatrix& queries, uint64_t seed);

  const ModelConfig& config() const { return cfg_; }

  // Z_L: token embeddings after the encoder stack.
  ad::Tensor encode(ad::Tape& tape, const ad::Tensor& patches) const;
  // F_M: one row per category (cross-attention over the tokens). Requires
  // use_sgca.
  ad::Tensor decode(ad::Tape& tape, const ad::Tensor& tokens) const;
  // Score vector s, [1 x c].
  ad::Tensor scores(ad::Tape& tape, const ad::Tensor& patches) const;
  // Level logits, [1 x depth].
  ad::Tensor level_logits(ad::Tape& tape, const ad::Tensor& score_vec) const;

  // Level-masked hybrid loss: cross-entropy on the level logits plus
  // lambda * per-level cross-entropy on the score slices of levels
  // 0..truth_level; deeper levels contribute nothing. slice_targets[l] is the
  // truth category's index within level l's slice.
  ad::Tensor loss(ad::Tape& tape, const ad::Tensor& score_vec,
                  const ad::Tensor& level_logit_vec, int truth_level,
                  const std::vector<int>& slice_targets,
                  double lambda = 1.0, bool include_level_term = true) const;

  // Forward pass + constrained decoding: the predicted level is the logits
  // argmax; the path takes the top-level argmax, then the best-scoring child
  // at each deeper level, guaranteeing a valid LabelPath.
  Prediction infer(const Image& img, const Hierarchy& h) const;

  // Trainable parameters, stable order and names.
  const std::vector<std::pair<std::string, ad::Tensor>>& named_parameters() const {
    return params_;
  }
  std::vector<ad::Tensor> parameters() const;

  // Checkpoint round trip; load() rebuilds the model from the stored config
  // and raw query matrix.
  void save(const std::string& path) const;
  static SghpnModel load(const std::string& path);

  const ad::Tensor& raw_queries() const { return raw_queries_; }

 private:
  void build_parameters(uint64_t seed);
  ad::Tensor mlp_forward(ad::Tape& tape, const ad::Tensor& x,
                         const MlpParams& p) const;

  ModelConfig cfg_;
  ad::Tensor raw_queries_;  // [c x embed_dim], constant
  ad::Tensor patch_w_, patch_b_, pos_embed_, cls_token_;
  ad::Tensor query_w_, query_b_;
  std::vector<BlockParams> encoder_;
  std::vector<BlockParams> decoder_;
  ad::Tensor score_w_, score_b_;  // per-category heads
  ad::Tensor level_w_, level_b_;
  std::vector<std::pair<std::string, ad::Tensor>> params_;
};

nlohmann::json model_config_to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& j);

}  // namespace hiertool
