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

#include "hiertool/model.hpp"

#include <algorithm>
#include <cmath>

#include "hiertool/checkpoint.hpp"
#include "hiertool/error.hpp"

namespace hiertool {

using ad::Tape;
using ad::Tensor;

void ModelConfig::validate() const {
  require(image_size > 0 && patch_size > 0 && image_size % patch_size == 0,
          "model: image size must be a positive multiple of the patch size");
  require(width > 0 && heads > 0 && width % heads == 0,
          "model: width must be a positive multiple of the head count");
  require(encoder_blocks >= 0 && decoder_blocks >= 0 && mlp_ratio >= 1,
          "model: negative block count");
  require(category_count > 0 && depth > 0, "model: empty category space");
  require(embed_dim > 0, "model: embedding width must be positive");
  require(static_cast<int>(level_slices.size()) == depth,
          "model: level slice count must equal depth");
  int cursor = 0;
  for (const auto& [b, e] : level_slices) {
    require(b == cursor && e > b, "model: level slices must partition [0, c)");
    cursor = e;
  }
  require(cursor == category_count, "model: level slices must cover all categories");
}

void ModelConfig::fill_from_hierarchy(const Hierarchy& h) {
  category_count = static_cast<int>(h.categories().size());
  depth = h.depth();
  level_slices.clear();
  for (int l = 0; l < depth; ++l) level_slices.push_back(h.level_slice(l));
}

nlohmann::json model_config_to_json(const ModelConfig& cfg) {
  nlohmann::json j;
  j["image_size"] = cfg.image_size;
  j["patch_size"] = cfg.patch_size;
  j["width"] = cfg.width;
  j["encoder_blocks"] = cfg.encoder_blocks;
  j["decoder_blocks"] = cfg.decoder_blocks;
  j["heads"] = cfg.heads;
  j["mlp_ratio"] = cfg.mlp_ratio;
  j["category_count"] = cfg.category_count;
  j["depth"] = cfg.depth;
  j["embed_dim"] = cfg.embed_dim;
  j["level_slices"] = cfg.level_slices;
  j["use_sgca"] = cfg.use_sgca;
  return j;
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig cfg;
  cfg.image_size = j.at("image_size").get<int>();
  cfg.patch_size = j.at("patch_size").get<int>();
  cfg.width = j.at("width").get<int>();
  cfg.encoder_blocks = j.at("encoder_blocks").get<int>();
  cfg.decoder_blocks = j.at("decoder_blocks").get<int>();
  cfg.heads = j.at("heads").get<int>();
  cfg.mlp_ratio = j.at("mlp_ratio").get<int>();
  cfg.category_count = j.at("category_count").get<int>();
  cfg.depth = j.at("depth").get<int>();
  cfg.embed_dim = j.at("embed_dim").get<int>();
  cfg.level_slices = j.at("level_slices").get<std::vector<std::pair<int, int>>>();
  cfg.use_sgca = j.at("use_sgca").get<bool>();
  cfg.validate();
  return cfg;
}

ad::Tensor patchify(const Image& img, const ModelConfig& cfg) {
  require(img.height == cfg.image_size && img.width == cfg.image_size,
          "patchify: image is " + std::to_string(img.height) + "x" +
              std::to_string(img.width) + ", expected " +
              std::to_string(cfg.image_size));
  const int p = cfg.patch_size;
  const int per_side = cfg.patches_per_side();
  Tensor out = Tensor::zeros({cfg.patch_count(), cfg.patch_dim()});
  for (int pr = 0; pr < per_side; ++pr) {
    for (int pc = 0; pc < per_side; ++pc) {
      int row = pr * per_side + pc;
      int k = 0;
      for (int py = 0; py < p; ++py)
        for (int px = 0; px < p; ++px)
          for (int c = 0; c < kChannels; ++c)
            out.at(row, k++) = img.at(pr * p + py, pc * p + px, c);
    }
  }
  return out;
}

ad::Tensor prepare_image(const Image& img, const ModelConfig& cfg) {
  if (img.height == cfg.image_size && img.width == cfg.image_size)
    return patchify(img, cfg);
  return patchify(resize_bilinear(img, cfg.image_size, cfg.image_size), cfg);
}

SghpnModel::SghpnModel(ModelConfig cfg, const QueryMatrix& queries, uint64_t seed)
    : cfg_(std::move(cfg)) {
  if (cfg_.embed_dim == 0) cfg_.embed_dim = queries.dim;
  cfg_.validate();
  require(queries.rows == cfg_.category_count,
          "model: query matrix rows != category count");
  require(queries.dim == cfg_.embed_dim,
          "model: query matrix width != embed_dim");
  raw_queries_ = Tensor::from_data({queries.rows, queries.dim}, queries.data);
  build_parameters(seed);
}

void SghpnModel::build_parameters(uint64_t seed) {
  RandomStream rng = RandomStream(seed).derive("init");
  const int d = cfg_.width;
  const int hidden = d * cfg_.mlp_ratio;
  const double std = 0.02;

  auto param = [&](const std::string& name, Tensor t) {
    params_.emplace_back(name, t);
    return t;
  };
  auto linear_w = [&](const std::string& name, int in, int out) {
    return param(name, ad::trunc_normal({in, out}, std, rng));
  };
  auto zeros = [&](const std::string& name, int r, int c) {
    return param(name, Tensor::zeros({r, c}, true));
  };
  auto make_block = [&](const std::string& prefix) {
    BlockParams b;
    b.ln1.gain = param(prefix + ".ln1.gain", Tensor::full({1, d}, 1.0, true));
    b.ln1.bias = zeros(prefix + ".ln1.bias", 1, d);
    b.attn.wq = linear_w(prefix + ".attn.wq", d, d);
    b.attn.bq = zeros(prefix + ".attn.bq", 1, d);
    b.attn.wk = linear_w(prefix + ".attn.wk", d, d);
    b.attn.bk = zeros(prefix + ".attn.bk", 1, d);
    b.attn.wv = linear_w(prefix + ".attn.wv", d, d);
    b.attn.bv = zeros(prefix + ".attn.bv", 1, d);
    b.attn.wo = linear_w(prefix + ".attn.wo", d, d);
    b.attn.bo = zeros(prefix + ".attn.bo", 1, d);
    b.ln2.gain = param(prefix + ".ln2.gain", Tensor::full({1, d}, 1.0, true));
    b.ln2.bias = zeros(prefix + ".ln2.bias", 1, d);
    b.mlp.w1 = linear_w(prefix + ".mlp.w1", d, hidden);
    b.mlp.b1 = zeros(prefix + ".mlp.b1", 1, hidden);
    b.mlp.w2 = linear_w(prefix + ".mlp.w2", hidden, d);
    b.mlp.b2 = zeros(prefix + ".mlp.b2", 1, d);
    return b;
  };

  patch_w_ = linear_w("patch.w", cfg_.patch_dim(), d);
  patch_b_ = zeros("patch.b", 1, d);
  int token_rows = cfg_.patch_count() + (cfg_.use_sgca ? 0 : 1);
  pos_embed_ = param("pos_embed", ad::trunc_normal({token_rows, d}, std, rng));
  if (!cfg_.use_sgca)
    cls_token_ = param("cls_token", ad::trunc_normal({1, d}, std, rng));
  if (cfg_.use_sgca) {
    query_w_ = linear_w("query.w", cfg_.embed_dim, d);
    query_b_ = zeros("query.b", 1, d);
  }
  for (int l = 0; l < cfg_.encoder_blocks; ++l)
    encoder_.push_back(make_block("enc" + std::to_string(l)));
  if (cfg_.use_sgca)
    for (int l = 0; l < cfg_.decoder_blocks; ++l)
      decoder_.push_back(make_block("dec" + std::to_string(l)));
  score_w_ = linear_w("score.w", cfg_.category_count, d);
  score_b_ = zeros("score.b", 1, cfg_.category_count);
  level_w_ = linear_w("level.w", cfg_.category_count, cfg_.depth);
  level_b_ = zeros("level.b", 1, cfg_.depth);
}

ad::Tensor SghpnModel::mlp_forward(Tape& tape, const Tensor& x,
                                   const MlpParams& p) const {
  Tensor h = tape.gelu(tape.add_rowwise(tape.matmul(x, p.w1), p.b1));
  return tape.add_rowwise(tape.matmul(h, p.w2), p.b2);
}

ad::Tensor SghpnModel::encode(Tape& tape, const Tensor& patches) const {
  require(patches.rank() == 2 && patches.rows() == cfg_.patch_count() &&
              patches.cols() == cfg_.patch_dim(),
          "encode: patch tensor shape mismatch");
  Tensor z = tape.add_rowwise(tape.matmul(patches, patch_w_), patch_b_);
  if (!cfg_.use_sgca) z = tape.concat_rows({cls_token_, z});
  z = tape.add(z, pos_embed_);
  for (const auto& block : encoder_) {
    Tensor zn = tape.layer_norm(z, block.ln1.gain, block.ln1.bias);
    Tensor a = ad::multi_head_attention(tape, zn, zn, zn, cfg_.heads, block.attn);
    z = tape.add(z, a);
    Tensor zn2 = tape.layer_norm(z, block.ln2.gain, block.ln2.bias);
    z = tape.add(z, mlp_forward(tape, zn2, block.mlp));
  }
  return z;
}

ad::Tensor SghpnModel::decode(Tape& tape, const Tensor& tokens) const {
  require(cfg_.use_sgca, "decode: model was built without the decoder");
  Tensor f = tape.add_rowwise(tape.matmul(raw_queries_, query_w_), query_b_);
  for (const auto& block : decoder_) {
    Tensor fn = tape.layer_norm(f, block.ln1.gain, block.ln1.bias);
    Tensor a =
        ad::multi_head_attention(tape, fn, tokens, tokens, cfg_.heads, block.attn);
    f = tape.add(f, a);
    Tensor fn2 = tape.layer_norm(f, block.ln2.gain, block.ln2.bias);
    f = tape.add(f, mlp_forward(tape, fn2, block.mlp));
  }
  return f;
}

ad::Tensor SghpnModel::scores(Tape& tape, const Tensor& patches) const {
  Tensor tokens = encode(tape, patches);
  if (cfg_.use_sgca) {
    Tensor f = decode(tape, tokens);
    // One scalar head per category: s_i = w_i . f_i + b_i.
    Tensor per_cat = tape.row_sum(tape.mul(f, score_w_));
    return tape.add(tape.transpose(per_cat), score_b_);
  }
  Tensor cls = tape.slice_rows(tokens, 0, 1);
  return tape.add(tape.matmul(cls, tape.transpose(score_w_)), score_b_);
}

ad::Tensor SghpnModel::level_logits(Tape& tape, const Tensor& score_vec) const {
  return tape.add(tape.matmul(score_vec, level_w_), level_b_);
}

ad::Tensor SghpnModel::loss(Tape& tape, const Tensor& score_vec,
                            const Tensor& level_logit_vec, int truth_level,
                            const std::vector<int>& slice_targets, double lambda,
                            bool include_level_term) const {
  require(truth_level >= 0 && truth_level < cfg_.depth,
          "loss: truth level out of range");
  require(static_cast<int>(slice_targets.size()) >= truth_level + 1,
          "loss: truth path shorter than its claimed level");
  Tensor category_total;
  for (int l = 0; l <= truth_level; ++l) {
    auto [b, e] = cfg_.level_slices[l];
    require(slice_targets[l] >= 0 && slice_targets[l] < e - b,
            "loss: slice target out of range at level " + std::to_string(l));
    Tensor term =
        tape.cross_entropy(tape.slice_cols(score_vec, b, e), slice_targets[l]);
    category_total = category_total.defined() ? tape.add(category_total, term) : term;
  }
  Tensor scaled = tape.scale(category_total, lambda);
  if (!include_level_term) return scaled;
  Tensor level_term = tape.cross_entropy(level_logit_vec, truth_level);
  return tape.add(level_term, scaled);
}

Prediction SghpnModel::infer(const Image& img, const Hierarchy& h) const {
  require(static_cast<int>(h.categories().size()) == cfg_.category_count &&
              h.depth() == cfg_.depth,
          "infer: hierarchy does not match the model's category space");
  Tape tape(false);
  Tensor x = prepare_image(img, cfg_);
  Tensor s = scores(tape, x);
  Tensor logits = level_logits(tape, s);

  Prediction pred;
  pred.scores = s.data();
  pred.level_logits = logits.data();
  int level = 0;
  for (int l = 1; l < cfg_.depth; ++l)
    if (pred.level_logits[l] > pred.level_logits[level]) level = l;

  // Constrained decoding: top-level argmax, then the best-scoring child of
  // the chosen node at each deeper level.
  auto [b0, e0] = cfg_.level_slices[0];
  int best = b0;
  for (int i = b0 + 1; i < e0; ++i)
    if (pred.scores[i] > pred.scores[best]) best = i;
  NodeId node = h.categories()[best];
  pred.path.node_ids.push_back(node);
  for (int l = 1; l <= level; ++l) {
    const auto& children = h.node(node).children;
    if (children.empty()) {
      level = l - 1;
      break;
    }
    NodeId chosen = children.front();
    double best_score = pred.scores[h.category_index(chosen)];
    for (NodeId c : children) {
      double sc = pred.scores[h.category_index(c)];
      if (sc > best_score) {
        best_score = sc;
        chosen = c;
      }
    }
    node = chosen;
    pred.path.node_ids.push_back(node);
  }
  pred.level = level;
  return pred;
}

std::vector<ad::Tensor> SghpnModel::parameters() const {
  std::vector<Tensor> out;
  out.reserve(params_.size());
  for (const auto& [name, t] : params_) out.push_back(t);
  return out;
}

void SghpnModel::save(const std::string& path) const {
  std::vector<std::pair<std::string, Tensor>> tensors = params_;
  tensors.emplace_back("query.embeddings", raw_queries_);
  nlohmann::json meta;
  meta["model"] = model_config_to_json(cfg_);
  save_checkpoint(path, tensors, meta);
}

SghpnModel SghpnModel::load(const std::string& path) {
  Checkpoint ckpt = load_checkpoint(path);
  require(ckpt.meta.contains("model"),
          "checkpoint: '" + path + "' carries no model config");
  ModelConfig cfg = model_config_from_json(ckpt.meta.at("model"));
  const Tensor* q = ckpt.find("query.embeddings");
  require(q != nullptr, "checkpoint: missing query embeddings");
  QueryMatrix qm;
  qm.rows = q->rows();
  qm.dim = q->cols();
  qm.data = q->data();
  SghpnModel model(cfg, qm, 0);
  for (auto& [name, t] : model.params_) {
    const Tensor* stored = ckpt.find(name);
    require(stored != nullptr, "checkpoint: missing tensor '" + name + "'");
    require(stored->shape() == t.shape(),
            "checkpoint: shape mismatch for '" + name + "'");
    t.data() = stored->data();
  }
  return model;
}

}  // namespace hiertool
