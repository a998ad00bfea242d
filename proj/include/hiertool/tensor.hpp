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

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "hiertool/random.hpp"

namespace hiertool::ad {

// Dense real tensor participating in reverse-mode autodiff. Value-semantic
// handle over shared storage: copies alias the same buffer, so parameters
// persist across tapes. 64-bit storage throughout; checkpoints serialize to
// 32-bit.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
  static Tensor full(std::vector<int> shape, double value,
                     bool requires_grad = false);
  static Tensor from_data(std::vector<int> shape, std::vector<double> data,
                          bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const std::vector<int>& shape() const { return impl_->shape; }
  std::int64_t size() const { return static_cast<std::int64_t>(impl_->data.size()); }
  int rank() const { return static_cast<int>(impl_->shape.size()); }
  int rows() const { return impl_->shape.at(0); }
  int cols() const { return impl_->shape.at(1); }

  std::vector<double>& data() { return impl_->data; }
  const std::vector<double>& data() const { return impl_->data; }
  // Gradient buffer; sized on first access.
  std::vector<double>& grad();
  bool has_grad() const { return !impl_->grad.empty(); }
  void zero_grad();
  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool rg) { impl_->requires_grad = rg; }

  double scalar() const;
  double at(int r, int c) const { return impl_->data[static_cast<std::size_t>(r) * cols() + c]; }
  double& at(int r, int c) { return impl_->data[static_cast<std::size_t>(r) * cols() + c]; }

  // Identity of the underlying buffer (aliasing check).
  const void* id() const { return impl_.get(); }

 private:
  struct Impl {
    std::vector<int> shape;
    std::vector<double> data;
    std::vector<double> grad;
    bool requires_grad = false;
  };
  std::shared_ptr<Impl> impl_;
};

// Reverse-mode computation tape. Operations append entries in execution
// order; backward() replays them in reverse, accumulating gradients
// additively. A tape and its tensors belong to one worker at a time;
// separate tapes are independent.
class Tape {
 public:
  explicit Tape(bool recording = true) : recording_(recording) {}

  bool recording() const { return recording_; }
  std::size_t entry_count() const { return entries_.size(); }

  // -- primitive ops ------------------------------------------------------
  Tensor matmul(const Tensor& a, const Tensor& b);
  Tensor transpose(const Tensor& x);
  Tensor add(const Tensor& a, const Tensor& b);
  Tensor sub(const Tensor& a, const Tensor& b);
  Tensor mul(const Tensor& a, const Tensor& b);  // elementwise
  Tensor scale(const Tensor& x, double k);
  // x: [m x n], bias: [1 x n]; adds the bias row to every row.
  Tensor add_rowwise(const Tensor& x, const Tensor& bias);
  Tensor slice_cols(const Tensor& x, int c0, int c1);
  Tensor slice_rows(const Tensor& x, int r0, int r1);
  Tensor concat_cols(const std::vector<Tensor>& xs);
  Tensor concat_rows(const std::vector<Tensor>& xs);
  Tensor row_sum(const Tensor& x);  // [m x n] -> [m x 1]
  Tensor sum(const Tensor& x);      // -> [1 x 1]

  // Max-subtracted row softmax; rows sum to 1.
  Tensor softmax(const Tensor& x);
  // Per-row standardization over the last axis, then affine. gain/bias: [1 x D].
  Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                    double eps = 1e-5);
  // Elementwise GELU, tanh approximation.
  Tensor gelu(const Tensor& x);
  // logits: [1 x n]; stable log-sum-exp cross-entropy against `target`.
  Tensor cross_entropy(const Tensor& logits, int target);

  // Populates grad of every tensor reachable from `loss` (grads are zeroed
  // first, then accumulated). `loss` must be a single-element tensor
  // produced on this tape.
  void backward(const Tensor& loss);

 private:
  friend class TapeOp;
  struct Entry {
    std::vector<Tensor> inputs;
    Tensor output;
    std::function<void()> back;
  };
  Tensor record(std::vector<Tensor> inputs, Tensor output,
                std::function<void()> back);

  bool recording_;
  std::vector<Entry> entries_;
};

// Projection parameters of one attention operation.
struct AttentionParams {
  Tensor wq, bq, wk, bk, wv, bv, wo, bo;
  std::vector<Tensor> all() const { return {wq, bq, wk, bk, wv, bv, wo, bo}; }
};

// Per-head projected scaled dot-product attention; self-attention is the
// q = k = v specialization. q: [Lq x D], k,v: [Lk x D] -> [Lq x D].
// `attn_out`, when given, receives each head's attention weight matrix.
Tensor multi_head_attention(Tape& tape, const Tensor& q, const Tensor& k,
                            const Tensor& v, int heads,
                            const AttentionParams& params,
                            std::vector<Tensor>* attn_out = nullptr);

// v <- momentum * v + grad;  p <- p - lr * v
void sgd_step(std::vector<Tensor>& params, std::vector<Tensor>& velocity,
              double lr, double momentum);

// Parameter initializers.
Tensor trunc_normal(std::vector<int> shape, double stddev, RandomStream& rng,
                    bool requires_grad = true);

}  // namespace hiertool::ad
