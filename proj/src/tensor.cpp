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

#include "hiertool/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "hiertool/error.hpp"

namespace hiertool::ad {

namespace {

std::int64_t shape_size(const std::vector<int>& shape) {
  std::int64_t n = 1;
  for (int d : shape) {
    require(d > 0, "tensor: shape dimensions must be positive");
    n *= d;
  }
  return n;
}

// c[m x n] = a[m x k] * b[k x n]
void mm_nn(const double* a, const double* b, double* c, int m, int k, int n,
           bool accumulate) {
  if (!accumulate) std::fill(c, c + static_cast<std::size_t>(m) * n, 0.0);
  for (int i = 0; i < m; ++i) {
    double* crow = c + static_cast<std::size_t>(i) * n;
    for (int kk = 0; kk < k; ++kk) {
      double av = a[static_cast<std::size_t>(i) * k + kk];
      const double* brow = b + static_cast<std::size_t>(kk) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// c[m x n] = a[m x k] * b^T, with b stored [n x k]
void mm_nt(const double* a, const double* b, double* c, int m, int k, int n,
           bool accumulate) {
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<std::size_t>(i) * k;
    double* crow = c + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* brow = b + static_cast<std::size_t>(j) * k;
      double dot = 0.0;
      for (int kk = 0; kk < k; ++kk) dot += arow[kk] * brow[kk];
      crow[j] = accumulate ? crow[j] + dot : dot;
    }
  }
}

// c[m x n] = a^T * b, with a stored [k x m], b stored [k x n]
void mm_tn(const double* a, const double* b, double* c, int m, int k, int n,
           bool accumulate) {
  if (!accumulate) std::fill(c, c + static_cast<std::size_t>(m) * n, 0.0);
  for (int kk = 0; kk < k; ++kk) {
    const double* arow = a + static_cast<std::size_t>(kk) * m;
    const double* brow = b + static_cast<std::size_t>(kk) * n;
    for (int i = 0; i < m; ++i) {
      double av = arow[i];
      if (av == 0.0) continue;
      double* crow = c + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void check_rank2(const Tensor& t, const char* op) {
  require(t.defined() && t.rank() == 2, std::string(op) + ": rank-2 tensor required");
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  require(a.shape() == b.shape(), std::string(op) + ": shape mismatch");
}

constexpr double kGeluCoeff = 0.044715;
const double kGeluScale = std::sqrt(2.0 / 3.14159265358979323846);

}  // namespace

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
  Tensor t;
  t.impl_ = std::make_shared<Impl>();
  std::int64_t n = shape_size(shape);
  t.impl_->shape = std::move(shape);
  t.impl_->data.assign(static_cast<std::size_t>(n), 0.0);
  t.impl_->requires_grad = requires_grad;
  return t;
}

Tensor Tensor::full(std::vector<int> shape, double value, bool requires_grad) {
  Tensor t = zeros(std::move(shape), requires_grad);
  std::fill(t.data().begin(), t.data().end(), value);
  return t;
}

Tensor Tensor::from_data(std::vector<int> shape, std::vector<double> data,
                         bool requires_grad) {
  Tensor t;
  t.impl_ = std::make_shared<Impl>();
  std::int64_t n = shape_size(shape);
  require(static_cast<std::size_t>(n) == data.size(),
          "tensor: data length does not match shape");
  t.impl_->shape = std::move(shape);
  t.impl_->data = std::move(data);
  t.impl_->requires_grad = requires_grad;
  return t;
}

std::vector<double>& Tensor::grad() {
  if (impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), 0.0);
  return impl_->grad;
}

void Tensor::zero_grad() { impl_->grad.assign(impl_->data.size(), 0.0); }

double Tensor::scalar() const {
  require(impl_ && impl_->data.size() == 1, "tensor: scalar() on non-scalar");
  return impl_->data[0];
}

Tensor Tape::record(std::vector<Tensor> inputs, Tensor output,
                    std::function<void()> back) {
  bool any_grad = false;
  for (const auto& in : inputs) any_grad = any_grad || in.requires_grad();
  if (recording_ && any_grad) {
    output.set_requires_grad(true);
    entries_.push_back(Entry{std::move(inputs), output, std::move(back)});
  }
  return output;
}

Tensor Tape::matmul(const Tensor& a, const Tensor& b) {
  check_rank2(a, "matmul");
  check_rank2(b, "matmul");
  require(a.cols() == b.rows(), "matmul: inner dimensions disagree");
  int m = a.rows(), k = a.cols(), n = b.cols();
  Tensor out = Tensor::zeros({m, n});
  mm_nn(a.data().data(), b.data().data(), out.data().data(), m, k, n, false);
  return record({a, b}, out, [a, b, out, m, k, n]() mutable {
    const double* go = out.grad().data();
    if (a.requires_grad())
      mm_nt(go, b.data().data(), a.grad().data(), m, n, k, true);
    if (b.requires_grad())
      mm_tn(a.data().data(), go, b.grad().data(), k, m, n, true);
  });
}

Tensor Tape::transpose(const Tensor& x) {
  check_rank2(x, "transpose");
  int m = x.rows(), n = x.cols();
  Tensor out = Tensor::zeros({n, m});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) out.at(j, i) = x.at(i, j);
  return record({x}, out, [x, out, m, n]() mutable {
    if (!x.requires_grad()) return;
    auto& gx = x.grad();
    const auto& go = out.grad();
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        gx[static_cast<std::size_t>(i) * n + j] +=
            go[static_cast<std::size_t>(j) * m + i];
  });
}

Tensor Tape::add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  Tensor out = Tensor::zeros(a.shape());
  for (std::size_t i = 0; i < out.data().size(); ++i)
    out.data()[i] = a.data()[i] + b.data()[i];
  return record({a, b}, out, [a, b, out]() mutable {
    const auto& go = out.grad();
    if (a.requires_grad()) {
      auto& ga = a.grad();
      for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i];
    }
    if (b.requires_grad()) {
      auto& gb = b.grad();
      for (std::size_t i = 0; i < go.size(); ++i) gb[i] += go[i];
    }
  });
}

Tensor Tape::sub(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "sub");
  Tensor out = Tensor::zeros(a.shape());
  for (std::size_t i = 0; i < out.data().size(); ++i)
    out.data()[i] = a.data()[i] - b.data()[i];
  return record({a, b}, out, [a, b, out]() mutable {
    const auto& go = out.grad();
    if (a.requires_grad()) {
      auto& ga = a.grad();
      for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i];
    }
    if (b.requires_grad()) {
      auto& gb = b.grad();
      for (std::size_t i = 0; i < go.size(); ++i) gb[i] -= go[i];
    }
  });
}

Tensor Tape::mul(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "mul");
  Tensor out = Tensor::zeros(a.shape());
  for (std::size_t i = 0; i < out.data().size(); ++i)
    out.data()[i] = a.data()[i] * b.data()[i];
  return record({a, b}, out, [a, b, out]() mutable {
    const auto& go = out.grad();
    if (a.requires_grad()) {
      auto& ga = a.grad();
      for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * b.data()[i];
    }
    if (b.requires_grad()) {
      auto& gb = b.grad();
      for (std::size_t i = 0; i < go.size(); ++i) gb[i] += go[i] * a.data()[i];
    }
  });
}

Tensor Tape::scale(const Tensor& x, double k) {
  Tensor out = Tensor::zeros(x.shape());
  for (std::size_t i = 0; i < out.data().size(); ++i)
    out.data()[i] = x.data()[i] * k;
  return record({x}, out, [x, out, k]() mutable {
    if (!x.requires_grad()) return;
    auto& gx = x.grad();
    const auto& go = out.grad();
    for (std::size_t i = 0; i < go.size(); ++i) gx[i] += k * go[i];
  });
}

Tensor Tape::add_rowwise(const Tensor& x, const Tensor& bias) {
  check_rank2(x, "add_rowwise");
  check_rank2(bias, "add_rowwise");
  require(bias.rows() == 1 && bias.cols() == x.cols(),
          "add_rowwise: bias must be [1 x cols]");
  int m = x.rows(), n = x.cols();
  Tensor out = Tensor::zeros({m, n});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) out.at(i, j) = x.at(i, j) + bias.at(0, j);
  return record({x, bias}, out, [x, bias, out, m, n]() mutable {
    const auto& go = out.grad();
    if (x.requires_grad()) {
      auto& gx = x.grad();
      for (std::size_t i = 0; i < go.size(); ++i) gx[i] += go[i];
    }
    if (bias.requires_grad()) {
      auto& gb = bias.grad();
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
          gb[j] += go[static_cast<std::size_t>(i) * n + j];
    }
  });
}

Tensor Tape::slice_cols(const Tensor& x, int c0, int c1) {
  check_rank2(x, "slice_cols");
  require(0 <= c0 && c0 < c1 && c1 <= x.cols(), "slice_cols: bad range");
  int m = x.rows(), w = c1 - c0;
  Tensor out = Tensor::zeros({m, w});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < w; ++j) out.at(i, j) = x.at(i, c0 + j);
  return record({x}, out, [x, out, m, w, c0]() mutable {
    if (!x.requires_grad()) return;
    auto& gx = x.grad();
    const auto& go = out.grad();
    int n = x.cols();
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < w; ++j)
        gx[static_cast<std::size_t>(i) * n + c0 + j] +=
            go[static_cast<std::size_t>(i) * w + j];
  });
}

Tensor Tape::slice_rows(const Tensor& x, int r0, int r1) {
  check_rank2(x, "slice_rows");
  require(0 <= r0 && r0 < r1 && r1 <= x.rows(), "slice_rows: bad range");
  int n = x.cols(), h = r1 - r0;
  Tensor out = Tensor::zeros({h, n});
  std::copy(x.data().begin() + static_cast<std::size_t>(r0) * n,
            x.data().begin() + static_cast<std::size_t>(r1) * n,
            out.data().begin());
  return record({x}, out, [x, out, r0, h, n]() mutable {
    if (!x.requires_grad()) return;
    auto& gx = x.grad();
    const auto& go = out.grad();
    for (std::size_t i = 0; i < static_cast<std::size_t>(h) * n; ++i)
      gx[static_cast<std::size_t>(r0) * n + i] += go[i];
  });
}

Tensor Tape::concat_cols(const std::vector<Tensor>& xs) {
  require(!xs.empty(), "concat_cols: empty input list");
  int m = xs[0].rows(), total = 0;
  for (const auto& x : xs) {
    check_rank2(x, "concat_cols");
    require(x.rows() == m, "concat_cols: row counts differ");
    total += x.cols();
  }
  Tensor out = Tensor::zeros({m, total});
  int off = 0;
  for (const auto& x : xs) {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < x.cols(); ++j) out.at(i, off + j) = x.at(i, j);
    off += x.cols();
  }
  return record(xs, out, [xs, out, m, total]() mutable {
    const auto& go = out.grad();
    int off = 0;
    for (auto& x : xs) {
      int w = x.cols();
      if (x.requires_grad()) {
        auto& gx = x.grad();
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < w; ++j)
            gx[static_cast<std::size_t>(i) * w + j] +=
                go[static_cast<std::size_t>(i) * total + off + j];
      }
      off += w;
    }
  });
}

Tensor Tape::concat_rows(const std::vector<Tensor>& xs) {
  require(!xs.empty(), "concat_rows: empty input list");
  int n = xs[0].cols(), total = 0;
  for (const auto& x : xs) {
    check_rank2(x, "concat_rows");
    require(x.cols() == n, "concat_rows: column counts differ");
    total += x.rows();
  }
  Tensor out = Tensor::zeros({total, n});
  std::size_t off = 0;
  for (const auto& x : xs) {
    std::copy(x.data().begin(), x.data().end(), out.data().begin() + off);
    off += x.data().size();
  }
  return record(xs, out, [xs, out]() mutable {
    const auto& go = out.grad();
    std::size_t off = 0;
    for (auto& x : xs) {
      if (x.requires_grad()) {
        auto& gx = x.grad();
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += go[off + i];
      }
      off += x.data().size();
    }
  });
}

Tensor Tape::row_sum(const Tensor& x) {
  check_rank2(x, "row_sum");
  int m = x.rows(), n = x.cols();
  Tensor out = Tensor::zeros({m, 1});
  for (int i = 0; i < m; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += x.at(i, j);
    out.at(i, 0) = s;
  }
  return record({x}, out, [x, out, m, n]() mutable {
    if (!x.requires_grad()) return;
    auto& gx = x.grad();
    const auto& go = out.grad();
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        gx[static_cast<std::size_t>(i) * n + j] += go[i];
  });
}

Tensor Tape::sum(const Tensor& x) {
  Tensor out = Tensor::zeros({1, 1});
  double s = 0.0;
  for (double v : x.data()) s += v;
  out.data()[0] = s;
  return record({x}, out, [x, out]() mutable {
    if (!x.requires_grad()) return;
    auto& gx = x.grad();
    double g = out.grad()[0];
    for (double& v : gx) v += g;
  });
}

Tensor Tape::softmax(const Tensor& x) {
  check_rank2(x, "softmax");
  int m = x.rows(), n = x.cols();
  Tensor out = Tensor::zeros({m, n});
  for (int i = 0; i < m; ++i) {
    double mx = x.at(i, 0);
    for (int j = 1; j < n; ++j) mx = std::max(mx, x.at(i, j));
    double z = 0.0;
    for (int j = 0; j < n; ++j) {
      double e = std::exp(x.at(i, j) - mx);
      out.at(i, j) = e;
      z += e;
    }
    for (int j = 0; j < n; ++j) out.at(i, j) /= z;
  }
  return record({x}, out, [x, out, m, n]() mutable {
    if (!x.requires_grad()) return;
    auto& gx = x.grad();
    const auto& go = out.grad();
    for (int i = 0; i < m; ++i) {
      const double* y = out.data().data() + static_cast<std::size_t>(i) * n;
      const double* g = go.data() + static_cast<std::size_t>(i) * n;
      double dot = 0.0;
      for (int j = 0; j < n; ++j) dot += g[j] * y[j];
      double* gxr = gx.data() + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) gxr[j] += y[j] * (g[j] - dot);
    }
  });
}

Tensor Tape::layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                        double eps) {
  check_rank2(x, "layer_norm");
  int m = x.rows(), n = x.cols();
  require(gain.rank() == 2 && gain.rows() == 1 && gain.cols() == n,
          "layer_norm: gain must be [1 x D]");
  require(bias.rank() == 2 && bias.rows() == 1 && bias.cols() == n,
          "layer_norm: bias must be [1 x D]");

  Tensor out = Tensor::zeros({m, n});
  auto xhat = std::make_shared<std::vector<double>>(static_cast<std::size_t>(m) * n);
  auto inv_std = std::make_shared<std::vector<double>>(m);
  for (int i = 0; i < m; ++i) {
    double mu = 0.0;
    for (int j = 0; j < n; ++j) mu += x.at(i, j);
    mu /= n;
    double var = 0.0;
    for (int j = 0; j < n; ++j) {
      double d = x.at(i, j) - mu;
      var += d * d;
    }
    var /= n;
    double inv = 1.0 / std::sqrt(var + eps);
    (*inv_std)[i] = inv;
    for (int j = 0; j < n; ++j) {
      double xh = (x.at(i, j) - mu) * inv;
      (*xhat)[static_cast<std::size_t>(i) * n + j] = xh;
      out.at(i, j) = gain.at(0, j) * xh + bias.at(0, j);
    }
  }
  return record({x, gain, bias}, out,
                [x, gain, bias, out, xhat, inv_std, m, n]() mutable {
    const auto& go = out.grad();
    for (int i = 0; i < m; ++i) {
      const double* g = go.data() + static_cast<std::size_t>(i) * n;
      const double* xh = xhat->data() + static_cast<std::size_t>(i) * n;
      if (gain.requires_grad()) {
        auto& gg = gain.grad();
        for (int j = 0; j < n; ++j) gg[j] += g[j] * xh[j];
      }
      if (bias.requires_grad()) {
        auto& gb = bias.grad();
        for (int j = 0; j < n; ++j) gb[j] += g[j];
      }
      if (x.requires_grad()) {
        double mh = 0.0, mhx = 0.0;
        for (int j = 0; j < n; ++j) {
          double h = g[j] * gain.at(0, j);
          mh += h;
          mhx += h * xh[j];
        }
        mh /= n;
        mhx /= n;
        double inv = (*inv_std)[i];
        auto& gx = x.grad();
        for (int j = 0; j < n; ++j) {
          double h = g[j] * gain.at(0, j);
          gx[static_cast<std::size_t>(i) * n + j] +=
              inv * (h - mh - xh[j] * mhx);
        }
      }
    }
  });
}

Tensor Tape::gelu(const Tensor& x) {
  Tensor out = Tensor::zeros(x.shape());
  for (std::size_t i = 0; i < x.data().size(); ++i) {
    double v = x.data()[i];
    double u = kGeluScale * (v + kGeluCoeff * v * v * v);
    out.data()[i] = 0.5 * v * (1.0 + std::tanh(u));
  }
  return record({x}, out, [x, out]() mutable {
    if (!x.requires_grad()) return;
    auto& gx = x.grad();
    const auto& go = out.grad();
    for (std::size_t i = 0; i < gx.size(); ++i) {
      double v = x.data()[i];
      double u = kGeluScale * (v + kGeluCoeff * v * v * v);
      double t = std::tanh(u);
      double du = kGeluScale * (1.0 + 3.0 * kGeluCoeff * v * v);
      double d = 0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * du;
      gx[i] += go[i] * d;
    }
  });
}

Tensor Tape::cross_entropy(const Tensor& logits, int target) {
  check_rank2(logits, "cross_entropy");
  require(logits.rows() == 1, "cross_entropy: logits must be [1 x n]");
  int n = logits.cols();
  require(target >= 0 && target < n, "cross_entropy: target out of range");
  double mx = logits.at(0, 0);
  for (int j = 1; j < n; ++j) mx = std::max(mx, logits.at(0, j));
  double z = 0.0;
  for (int j = 0; j < n; ++j) z += std::exp(logits.at(0, j) - mx);
  double lse = mx + std::log(z);
  Tensor out = Tensor::zeros({1, 1});
  out.data()[0] = lse - logits.at(0, target);
  return record({logits}, out, [logits, out, target, lse, n]() mutable {
    if (!logits.requires_grad()) return;
    auto& gl = logits.grad();
    double g = out.grad()[0];
    for (int j = 0; j < n; ++j) {
      double p = std::exp(logits.at(0, j) - lse);
      gl[j] += g * (p - (j == target ? 1.0 : 0.0));
    }
  });
}

void Tape::backward(const Tensor& loss) {
  require(loss.defined() && loss.size() == 1,
          "backward: loss must be a scalar tensor");
  bool on_tape = false;
  for (const auto& e : entries_)
    if (e.output.id() == loss.id()) on_tape = true;
  require(on_tape, "backward: loss was not produced on this tape");

  std::unordered_set<const void*> seen;
  for (auto& e : entries_) {
    for (auto& t : e.inputs)
      if (seen.insert(t.id()).second) Tensor(t).zero_grad();
    if (seen.insert(e.output.id()).second) e.output.zero_grad();
  }
  Tensor(loss).grad()[0] = 1.0;
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) it->back();
}

Tensor multi_head_attention(Tape& tape, const Tensor& q, const Tensor& k,
                            const Tensor& v, int heads,
                            const AttentionParams& params,
                            std::vector<Tensor>* attn_out) {
  int d = q.cols();
  require(k.cols() == d && v.cols() == d, "attention: width mismatch");
  require(k.rows() == v.rows(), "attention: key/value length mismatch");
  require(heads >= 1 && d % heads == 0,
          "attention: width must be divisible by head count");
  int dh = d / heads;
  Tensor qp = tape.add_rowwise(tape.matmul(q, params.wq), params.bq);
  Tensor kp = tape.add_rowwise(tape.matmul(k, params.wk), params.bk);
  Tensor vp = tape.add_rowwise(tape.matmul(v, params.wv), params.bv);
  double inv_scale = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Tensor> head_outputs;
  for (int h = 0; h < heads; ++h) {
    Tensor qh = tape.slice_cols(qp, h * dh, (h + 1) * dh);
    Tensor kh = tape.slice_cols(kp, h * dh, (h + 1) * dh);
    Tensor vh = tape.slice_cols(vp, h * dh, (h + 1) * dh);
    Tensor scores = tape.scale(tape.matmul(qh, tape.transpose(kh)), inv_scale);
    Tensor attn = tape.softmax(scores);
    if (attn_out) attn_out->push_back(attn);
    head_outputs.push_back(tape.matmul(attn, vh));
  }
  Tensor merged = tape.concat_cols(head_outputs);
  return tape.add_rowwise(tape.matmul(merged, params.wo), params.bo);
}

void sgd_step(std::vector<Tensor>& params, std::vector<Tensor>& velocity,
              double lr, double momentum) {
  require(params.size() == velocity.size(),
          "sgd_step: parameter/velocity count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = params[i];
    Tensor& v = velocity[i];
    require(p.has_grad(), "sgd_step: missing gradient for a parameter");
    require(v.size() == p.size(), "sgd_step: velocity shape mismatch");
    auto& pv = p.data();
    auto& vv = v.data();
    const auto& g = p.grad();
    for (std::size_t j = 0; j < pv.size(); ++j) {
      vv[j] = momentum * vv[j] + g[j];
      pv[j] -= lr * vv[j];
    }
  }
}

Tensor trunc_normal(std::vector<int> shape, double stddev, RandomStream& rng,
                    bool requires_grad) {
  Tensor t = Tensor::zeros(std::move(shape), requires_grad);
  for (double& v : t.data()) {
    double z;
    do {
      z = rng.gaussian();
    } while (std::abs(z) > 2.0);
    v = z * stddev;
  }
  return t;
}

}  // namespace hiertool::ad
