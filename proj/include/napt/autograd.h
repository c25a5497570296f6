// Copyright 2026 The napt Authors
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

// Reverse-mode automatic differentiation over dense Eigen matrices.
//
// A Tape records every operation of one forward pass. Values are immutable
// once pushed; Tape::backward() walks the nodes in reverse order and
// accumulates gradients into the Parameter objects that were bound with
// Tape::param(). All matrices are time-major: one row per frame.

#ifndef NAPT_AUTOGRAD_H_
#define NAPT_AUTOGRAD_H_

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "napt/common.h"

namespace napt {

template <typename Scalar>
struct Parameter {
  std::string name;
  Matrix<Scalar> value;
  Matrix<Scalar> grad;
  bool trainable = true;    // false for running statistics
  bool decay = true;        // subject to weight decay
  bool discardable = false; // pre-training worker heads

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

template <typename Scalar>
class Tape;

template <typename Scalar>
struct Var {
  Tape<Scalar>* tape = nullptr;
  int id = -1;

  const Matrix<Scalar>& value() const { return tape->value(id); }
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  Scalar scalar() const { return value()(0, 0); }
};

template <typename Scalar>
class Tape {
 public:
  using Mat = Matrix<Scalar>;
  using Backward = std::function<void(Tape&, const Mat&)>;

  explicit Tape(bool training = false) : training_(training) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool training() const { return training_; }

  Var<Scalar> constant(Mat value) {
    return push(std::move(value), {}, nullptr);
  }

  /// Binds a parameter. Binding the same parameter twice yields one node.
  Var<Scalar> param(Parameter<Scalar>& p) {
    auto it = bound_.find(&p);
    if (it != bound_.end()) return {this, it->second};
    Node n;
    n.value = p.value;
    n.requires_grad = p.trainable;
    n.param = &p;
    nodes_.push_back(std::move(n));
    const int id = int(nodes_.size()) - 1;
    bound_[&p] = id;
    return {this, id};
  }

  /// Records an operation. The node requires a gradient when any parent does.
  Var<Scalar> push(Mat value, std::initializer_list<int> parents,
                   Backward backward) {
    return push_n(std::move(value), std::vector<int>(parents), std::move(backward));
  }

  Var<Scalar> push_n(Mat value, const std::vector<int>& parents,
                     Backward backward) {
    Node n;
    n.value = std::move(value);
    for (int p : parents) n.requires_grad = n.requires_grad || nodes_[p].requires_grad;
    if (n.requires_grad) n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return {this, int(nodes_.size()) - 1};
  }

  const Mat& value(int id) const { return nodes_[id].value; }
  bool needs_grad(int id) const { return nodes_[id].requires_grad; }

  template <typename Derived>
  void accumulate(int id, const Eigen::MatrixBase<Derived>& g) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0)
      n.grad = g;
    else
      n.grad += g;
  }

  /// Adds g into rows [start, start + g.rows()) of node id's gradient.
  template <typename Derived>
  void accumulate_rows(int id, Index start, const Eigen::MatrixBase<Derived>& g) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
    n.grad.middleRows(start, g.rows()) += g;
  }

  template <typename Derived>
  void accumulate_cols(int id, Index start, const Eigen::MatrixBase<Derived>& g) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
    n.grad.middleCols(start, g.cols()) += g;
  }

  Mat& grad_buffer(int id) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
    return n.grad;
  }

  /// Back-propagates from a 1x1 loss and adds the result into the bound
  /// parameters' grad fields.
  void backward(Var<Scalar> loss) {
    if (loss.rows() != 1 || loss.cols() != 1)
      throw Error("backward() needs a scalar loss");
    if (!nodes_[loss.id].requires_grad) return;
    nodes_[loss.id].grad = Mat::Constant(1, 1, Scalar(1));
    for (int i = loss.id; i >= 0; --i) {
      Node& n = nodes_[i];
      if (n.grad.size() == 0) continue;
      if (n.backward) n.backward(*this, n.grad);
      if (n.param) {
        if (n.param->grad.size() == 0) n.param->zero_grad();
        n.param->grad += n.grad;
      }
      if (!n.param) Mat().swap(n.grad);
    }
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat value;
    Mat grad;
    Backward backward;
    bool requires_grad = false;
    Parameter<Scalar>* param = nullptr;
  };

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter<Scalar>*, int> bound_;
  bool training_;
};

// ---------------------------------------------------------------------------
// Elementwise and linear algebra.

template <typename S>
Var<S> add(Var<S> a, Var<S> b) {
  const int ia = a.id, ib = b.id;
  return a.tape->push(a.value() + b.value(), {ia, ib},
                      [ia, ib](Tape<S>& t, const Matrix<S>& g) {
                        t.accumulate(ia, g);
                        t.accumulate(ib, g);
                      });
}

template <typename S>
Var<S> sub(Var<S> a, Var<S> b) {
  const int ia = a.id, ib = b.id;
  return a.tape->push(a.value() - b.value(), {ia, ib},
                      [ia, ib](Tape<S>& t, const Matrix<S>& g) {
                        t.accumulate(ia, g);
                        if (t.needs_grad(ib)) t.accumulate(ib, -g);
                      });
}

template <typename S>
Var<S> operator+(Var<S> a, Var<S> b) { return add(a, b); }
template <typename S>
Var<S> operator-(Var<S> a, Var<S> b) { return sub(a, b); }

template <typename S>
Var<S> scale(Var<S> a, S c) {
  const int ia = a.id;
  return a.tape->push(a.value() * c, {ia},
                      [ia, c](Tape<S>& t, const Matrix<S>& g) { t.accumulate(ia, g * c); });
}

/// a (n x k) times b (k x m).
template <typename S>
Var<S> matmul(Var<S> a, Var<S> b) {
  const int ia = a.id, ib = b.id;
  return a.tape->push(a.value() * b.value(), {ia, ib},
                      [ia, ib](Tape<S>& t, const Matrix<S>& g) {
                        if (t.needs_grad(ia)) t.accumulate(ia, g * t.value(ib).transpose());
                        if (t.needs_grad(ib)) t.accumulate(ib, t.value(ia).transpose() * g);
                      });
}

/// a times b transposed.
template <typename S>
Var<S> matmul_nt(Var<S> a, Var<S> b) {
  const int ia = a.id, ib = b.id;
  return a.tape->push(a.value() * b.value().transpose(), {ia, ib},
                      [ia, ib](Tape<S>& t, const Matrix<S>& g) {
                        if (t.needs_grad(ia)) t.accumulate(ia, g * t.value(ib));
                        if (t.needs_grad(ib)) t.accumulate(ib, g.transpose() * t.value(ia));
                      });
}

/// Adds a 1 x C row to every row of x.
template <typename S>
Var<S> add_row(Var<S> x, Var<S> row) {
  const int ix = x.id, ir = row.id;
  Matrix<S> out = x.value();
  out.rowwise() += row.value().row(0);
  return x.tape->push(std::move(out), {ix, ir},
                      [ix, ir](Tape<S>& t, const Matrix<S>& g) {
                        t.accumulate(ix, g);
                        if (t.needs_grad(ir)) t.accumulate(ir, g.colwise().sum());
                      });
}

/// Multiplies column c of x by row(0, c).
template <typename S>
Var<S> mul_row(Var<S> x, Var<S> row) {
  const int ix = x.id, ir = row.id;
  Matrix<S> out = x.value() * row.value().row(0).asDiagonal();
  return x.tape->push(std::move(out), {ix, ir},
                      [ix, ir](Tape<S>& t, const Matrix<S>& g) {
                        const auto& r = t.value(ir);
                        if (t.needs_grad(ix)) t.accumulate(ix, g * r.row(0).asDiagonal());
                        if (t.needs_grad(ir))
                          t.accumulate(ir, g.cwiseProduct(t.value(ix)).colwise().sum());
                      });
}

/// Adds a constant matrix (e.g. positional encodings).
template <typename S>
Var<S> add_const(Var<S> x, const Matrix<S>& c) {
  const int ix = x.id;
  return x.tape->push(x.value() + c, {ix},
                      [ix](Tape<S>& t, const Matrix<S>& g) { t.accumulate(ix, g); });
}

template <typename S>
Var<S> relu(Var<S> x) {
  const int ix = x.id;
  return x.tape->push(x.value().cwiseMax(S(0)), {ix},
                      [ix](Tape<S>& t, const Matrix<S>& g) {
                        t.accumulate(ix, (t.value(ix).array() > S(0)).select(g, S(0)));
                      });
}

/// Per-channel parametric ReLU; slope is 1 x C.
template <typename S>
Var<S> prelu(Var<S> x, Var<S> slope) {
  const int ix = x.id, is = slope.id;
  const auto& xv = x.value();
  Matrix<S> out = (xv.array() > S(0)).select(xv, xv * slope.value().row(0).asDiagonal());
  return x.tape->push(std::move(out), {ix, is},
                      [ix, is](Tape<S>& t, const Matrix<S>& g) {
                        const auto& xv = t.value(ix);
                        const auto pos = (xv.array() > S(0));
                        if (t.needs_grad(ix)) {
                          Matrix<S> scaled = g * t.value(is).row(0).asDiagonal();
                          t.accumulate(ix, pos.select(g, scaled));
                        }
                        if (t.needs_grad(is)) {
                          Matrix<S> neg = pos.select(Matrix<S>::Zero(xv.rows(), xv.cols()),
                                                     g.cwiseProduct(xv));
                          t.accumulate(is, neg.colwise().sum());
                        }
                      });
}

/// Exact GELU, x * Phi(x).
template <typename S>
Var<S> gelu(Var<S> x) {
  const int ix = x.id;
  const S inv_sqrt2 = S(1) / std::sqrt(S(2));
  Matrix<S> out = x.value().unaryExpr([inv_sqrt2](S v) {
    return S(0.5) * v * (S(1) + std::erf(v * inv_sqrt2));
  });
  return x.tape->push(std::move(out), {ix},
                      [ix, inv_sqrt2](Tape<S>& t, const Matrix<S>& g) {
                        const S inv_sqrt_2pi = S(0.3989422804014327);
                        Matrix<S> d = t.value(ix).unaryExpr([&](S v) {
                          return S(0.5) * (S(1) + std::erf(v * inv_sqrt2)) +
                                 v * inv_sqrt_2pi * std::exp(S(-0.5) * v * v);
                        });
                        t.accumulate(ix, g.cwiseProduct(d));
                      });
}

/// Inverted dropout. Identity outside training mode or when p == 0.
template <typename S>
Var<S> dropout(Var<S> x, double p, std::mt19937_64& rng) {
  if (!x.tape->training() || p <= 0.0) return x;
  const int ix = x.id;
  std::bernoulli_distribution keep(1.0 - p);
  const S s = S(1.0 / (1.0 - p));
  Matrix<S> mask(x.rows(), x.cols());
  for (Index j = 0; j < mask.cols(); ++j)
    for (Index i = 0; i < mask.rows(); ++i) mask(i, j) = keep(rng) ? s : S(0);
  Matrix<S> out = x.value().cwiseProduct(mask);
  return x.tape->push(std::move(out), {ix},
                      [ix, mask = std::move(mask)](Tape<S>& t, const Matrix<S>& g) {
                        t.accumulate(ix, g.cwiseProduct(mask));
                      });
}

/// Elementwise clamp; the gradient is zero where the input lies outside
/// [lo, hi].
template <typename S>
Var<S> clamp(Var<S> x, S lo, S hi) {
  const int ix = x.id;
  return x.tape->push(x.value().cwiseMax(lo).cwiseMin(hi), {ix},
                      [ix, lo, hi](Tape<S>& t, const Matrix<S>& g) {
                        const auto& v = t.value(ix).array();
                        t.accumulate(ix, ((v >= lo) && (v <= hi)).select(g, S(0)));
                      });
}

// ---------------------------------------------------------------------------
// Normalisation.

/// Normalises each row over its columns, then applies gain and bias rows.
template <typename S>
Var<S> layer_norm(Var<S> x, Var<S> gain, Var<S> bias, S eps = S(1e-5)) {
  const int ix = x.id;
  const auto& xv = x.value();
  const Index C = xv.cols();
  Vector<S> mean = xv.rowwise().mean();
  Matrix<S> centered = xv.colwise() - mean;
  Vector<S> inv_std =
      ((centered.array().square().rowwise().sum() / S(C)) + eps).rsqrt().matrix();
  Matrix<S> xhat = inv_std.asDiagonal() * centered;
  Var<S> normed = x.tape->push(
      xhat, {ix}, [ix, xhat, inv_std, C](Tape<S>& t, const Matrix<S>& g) {
        // dx = inv_std * (g - mean(g) - xhat * mean(g * xhat)) per row.
        Vector<S> gm = g.rowwise().mean();
        Vector<S> gxm = g.cwiseProduct(xhat).rowwise().sum() / S(C);
        Matrix<S> dx = g;
        dx.colwise() -= gm;
        dx -= gxm.asDiagonal() * xhat;
        t.accumulate(ix, inv_std.asDiagonal() * dx);
      });
  return add_row(mul_row(normed, gain), bias);
}

/// Running statistics for batch normalisation, stored as non-trainable
/// parameters so they are checkpointed.
template <typename S>
struct BatchNormStats {
  Parameter<S>* mean = nullptr;
  Parameter<S>* var = nullptr;
  double momentum = 0.1;
};

/// Per-column batch normalisation. Training mode uses the statistics of the
/// rows of x and updates the running averages; inference uses the running
/// averages.
template <typename S>
Var<S> batch_norm(Var<S> x, Var<S> gain, Var<S> bias, const BatchNormStats<S>& stats,
                  S eps = S(1e-5)) {
  const int ix = x.id;
  const auto& xv = x.value();
  const Index N = xv.rows();
  if (!x.tape->training()) {
    RowVector<S> inv_std = (stats.var->value.row(0).array() + eps).rsqrt().matrix();
    RowVector<S> shift = -stats.mean->value.row(0).cwiseProduct(inv_std);
    Matrix<S> xhat = xv * inv_std.asDiagonal();
    xhat.rowwise() += shift;
    Var<S> normed = x.tape->push(std::move(xhat), {ix},
                                 [ix, inv_std](Tape<S>& t, const Matrix<S>& g) {
                                   t.accumulate(ix, g * inv_std.asDiagonal());
                                 });
    return add_row(mul_row(normed, gain), bias);
  }
  if (N < 2) throw Error("batch_norm in training mode needs at least 2 rows");
  RowVector<S> mean = xv.colwise().mean();
  Matrix<S> centered = xv.rowwise() - mean;
  RowVector<S> var = centered.array().square().colwise().sum() / S(N);
  RowVector<S> inv_std = (var.array() + eps).rsqrt().matrix();
  Matrix<S> xhat = centered * inv_std.asDiagonal();

  const S m = S(stats.momentum);
  stats.mean->value = (S(1) - m) * stats.mean->value + m * mean;
  stats.var->value = (S(1) - m) * stats.var->value + m * var * (S(N) / S(N - 1));

  Var<S> normed = x.tape->push(
      xhat, {ix}, [ix, xhat, inv_std, N](Tape<S>& t, const Matrix<S>& g) {
        RowVector<S> gm = g.colwise().mean();
        RowVector<S> gxm = g.cwiseProduct(xhat).colwise().sum() / S(N);
        Matrix<S> dx = g.rowwise() - gm;
        dx -= xhat * gxm.asDiagonal();
        t.accumulate(ix, dx * inv_std.asDiagonal());
      });
  return add_row(mul_row(normed, gain), bias);
}

template <typename S>
Var<S> softmax_rows(Var<S> x) {
  const int ix = x.id;
  Matrix<S> y = x.value();
  for (Index i = 0; i < y.rows(); ++i) {
    const S m = y.row(i).maxCoeff();
    y.row(i) = (y.row(i).array() - m).exp();
    y.row(i) /= y.row(i).sum();
  }
  Matrix<S> y_copy = y;
  return x.tape->push(std::move(y), {ix},
                      [ix, y = std::move(y_copy)](Tape<S>& t, const Matrix<S>& g) {
                        Vector<S> dots = g.cwiseProduct(y).rowwise().sum();
                        Matrix<S> dx = g;
                        dx.colwise() -= dots;
                        t.accumulate(ix, y.cwiseProduct(dx));
                      });
}

// ---------------------------------------------------------------------------
// Structural operations.

template <typename S>
Var<S> row_slice(Var<S> x, Index start, Index n) {
  const int ix = x.id;
  return x.tape->push(x.value().middleRows(start, n), {ix},
                      [ix, start](Tape<S>& t, const Matrix<S>& g) {
                        t.accumulate_rows(ix, start, g);
                      });
}

template <typename S>
Var<S> col_slice(Var<S> x, Index start, Index n) {
  const int ix = x.id;
  return x.tape->push(x.value().middleCols(start, n), {ix},
                      [ix, start](Tape<S>& t, const Matrix<S>& g) {
                        t.accumulate_cols(ix, start, g);
                      });
}

template <typename S>
Var<S> concat_rows(const std::vector<Var<S>>& xs) {
  Index rows = 0;
  const Index cols = xs.front().cols();
  std::vector<int> ids;
  for (const auto& x : xs) {
    rows += x.rows();
    ids.push_back(x.id);
  }
  Matrix<S> out(rows, cols);
  Index r = 0;
  for (const auto& x : xs) {
    out.middleRows(r, x.rows()) = x.value();
    r += x.rows();
  }
  return xs.front().tape->push_n(std::move(out), ids,
                                 [ids](Tape<S>& t, const Matrix<S>& g) {
                                   Index r = 0;
                                   for (int id : ids) {
                                     const Index n = t.value(id).rows();
                                     if (t.needs_grad(id)) t.accumulate(id, g.middleRows(r, n));
                                     r += n;
                                   }
                                 });
}

template <typename S>
Var<S> concat_cols(const std::vector<Var<S>>& xs) {
  Index cols = 0;
  const Index rows = xs.front().rows();
  std::vector<int> ids;
  for (const auto& x : xs) {
    cols += x.cols();
    ids.push_back(x.id);
  }
  Matrix<S> out(rows, cols);
  Index c = 0;
  for (const auto& x : xs) {
    out.middleCols(c, x.cols()) = x.value();
    c += x.cols();
  }
  return xs.front().tape->push_n(std::move(out), ids,
                                 [ids](Tape<S>& t, const Matrix<S>& g) {
                                   Index c = 0;
                                   for (int id : ids) {
                                     const Index n = t.value(id).cols();
                                     if (t.needs_grad(id)) t.accumulate(id, g.middleCols(c, n));
                                     c += n;
                                   }
                                 });
}

/// Selects rows by index (repeats allowed).
template <typename S>
Var<S> gather_rows(Var<S> x, std::vector<Index> idx) {
  const int ix = x.id;
  Matrix<S> out(Index(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(Index(i)) = x.value().row(idx[i]);
  return x.tape->push(std::move(out), {ix},
                      [ix, idx = std::move(idx)](Tape<S>& t, const Matrix<S>& g) {
                        Matrix<S>& dx = t.grad_buffer(ix);
                        for (std::size_t i = 0; i < idx.size(); ++i)
                          dx.row(idx[i]) += g.row(Index(i));
                      });
}

struct RowRange {
  Index start = 0;
  Index length = 0;
};

/// One output row per range: the mean of x's rows in that range.
template <typename S>
Var<S> range_mean(Var<S> x, std::vector<RowRange> ranges) {
  const int ix = x.id;
  Matrix<S> out(Index(ranges.size()), x.cols());
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    const auto& r = ranges[i];
    if (r.length <= 0 || r.start < 0 || r.start + r.length > x.rows())
      throw Error("range_mean: range out of bounds");
    out.row(Index(i)) = x.value().middleRows(r.start, r.length).colwise().mean();
  }
  return x.tape->push(std::move(out), {ix},
                      [ix, ranges = std::move(ranges)](Tape<S>& t, const Matrix<S>& g) {
                        Matrix<S>& dx = t.grad_buffer(ix);
                        for (std::size_t i = 0; i < ranges.size(); ++i) {
                          const auto& r = ranges[i];
                          dx.middleRows(r.start, r.length).rowwise() +=
                              g.row(Index(i)) / S(r.length);
                        }
                      });
}

/// Sum of w_i * x_i over 1x1 inputs.
template <typename S>
Var<S> weighted_sum(const std::vector<Var<S>>& xs, const std::vector<S>& w) {
  Matrix<S> out = Matrix<S>::Zero(1, 1);
  std::vector<int> ids;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out(0, 0) += w[i] * xs[i].scalar();
    ids.push_back(xs[i].id);
  }
  return xs.front().tape->push_n(std::move(out), ids,
                                 [ids, w](Tape<S>& t, const Matrix<S>& g) {
                                   for (std::size_t i = 0; i < ids.size(); ++i)
                                     if (t.needs_grad(ids[i]))
                                       t.accumulate(ids[i], g * w[i]);
                                 });
}

// ---------------------------------------------------------------------------
// Convolution over a batch of variable-length sequences stacked along rows.

/// Lengths of the sequences stacked in a batch matrix.
using Segments = std::vector<Index>;

inline Index total_length(const Segments& seg) {
  Index n = 0;
  for (Index s : seg) n += s;
  return n;
}

struct ConvGeometry {
  Index kernel = 1;
  Index stride = 1;
  Index pad_left = 0;
  Index pad_right = 0;

  Index out_length(Index in) const {
    const Index padded = in + pad_left + pad_right;
    return padded < kernel ? 0 : (padded - kernel) / stride + 1;
  }
};

/// Padding of kernel - stride frames in total, so output length is
/// floor(input / stride).
inline ConvGeometry decimating_geometry(Index kernel, Index stride) {
  if (kernel < stride) throw Error("kernel must be at least the stride");
  const Index pad = kernel - stride;
  return {kernel, stride, pad / 2, pad - pad / 2};
}

namespace detail {

template <typename S>
Matrix<S> im2col(const Matrix<S>& x, const Segments& in_seg,
                 const Segments& out_seg, const ConvGeometry& geo) {
  const Index C = x.cols();
  Matrix<S> col = Matrix<S>::Zero(total_length(out_seg), geo.kernel * C);
  Index in_off = 0, out_off = 0;
  for (std::size_t s = 0; s < in_seg.size(); ++s) {
    for (Index t = 0; t < out_seg[s]; ++t) {
      for (Index k = 0; k < geo.kernel; ++k) {
        const Index src = t * geo.stride + k - geo.pad_left;
        if (src < 0 || src >= in_seg[s]) continue;
        col.block(out_off + t, k * C, 1, C) = x.row(in_off + src);
      }
    }
    in_off += in_seg[s];
    out_off += out_seg[s];
  }
  return col;
}

template <typename S>
void col2im_add(const Matrix<S>& dcol, const Segments& in_seg,
                const Segments& out_seg, const ConvGeometry& geo, Matrix<S>& dx) {
  const Index C = dx.cols();
  Index in_off = 0, out_off = 0;
  for (std::size_t s = 0; s < in_seg.size(); ++s) {
    for (Index t = 0; t < out_seg[s]; ++t) {
      for (Index k = 0; k < geo.kernel; ++k) {
        const Index src = t * geo.stride + k - geo.pad_left;
        if (src < 0 || src >= in_seg[s]) continue;
        dx.row(in_off + src) += dcol.block(out_off + t, k * C, 1, C);
      }
    }
    in_off += in_seg[s];
    out_off += out_seg[s];
  }
}

}  // namespace detail

template <typename S>
struct SegmentedVar {
  Var<S> x;
  Segments segments;
};

/// 1-D convolution applied independently to each stacked sequence, without
/// bias. weight is (kernel * C_in) x C_out with row index k * C_in + c.
template <typename S>
SegmentedVar<S> conv1d(const SegmentedVar<S>& in, Var<S> weight, const ConvGeometry& geo) {
  const int ix = in.x.id, iw = weight.id;
  const Index C = in.x.cols();
  if (weight.rows() != geo.kernel * C) throw Error("conv1d: weight shape mismatch");
  Segments out_seg;
  for (Index len : in.segments) {
    const Index o = geo.out_length(len);
    if (o <= 0) throw Error("conv1d: sequence shorter than the receptive field");
    out_seg.push_back(o);
  }
  Matrix<S> out = detail::im2col(in.x.value(), in.segments, out_seg, geo) * weight.value();
  Var<S> y = in.x.tape->push(
      std::move(out), {ix, iw},
      [ix, iw, geo, in_seg = in.segments, out_seg](Tape<S>& t, const Matrix<S>& g) {
        const Matrix<S>& xv = t.value(ix);
        if (t.needs_grad(iw))
          t.accumulate(iw, detail::im2col(xv, in_seg, out_seg, geo).transpose() * g);
        if (t.needs_grad(ix)) {
          Matrix<S> dcol = g * t.value(iw).transpose();
          detail::col2im_add(dcol, in_seg, out_seg, geo, t.grad_buffer(ix));
        }
      });
  return {y, std::move(out_seg)};
}

/// Convolution followed by a 1 x C_out bias row.
template <typename S>
SegmentedVar<S> conv1d(const SegmentedVar<S>& in, Var<S> weight, Var<S> bias,
                       const ConvGeometry& geo) {
  SegmentedVar<S> out = conv1d(in, weight, geo);
  out.x = add_row(out.x, bias);
  return out;
}

/// Mean over each stacked sequence: one row per segment.
template <typename S>
Var<S> segment_mean(const SegmentedVar<S>& in) {
  std::vector<RowRange> ranges;
  Index off = 0;
  for (Index len : in.segments) {
    ranges.push_back({off, len});
    off += len;
  }
  return range_mean(in.x, std::move(ranges));
}

// ---------------------------------------------------------------------------
// Losses. Each returns a 1 x 1 node.

/// Mean squared error against a constant target.
template <typename S>
Var<S> mse_loss(Var<S> pred, const Matrix<S>& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw Error("mse_loss: shape mismatch");
  const int ip = pred.id;
  const S n = S(target.size());
  Matrix<S> diff = pred.value() - target;
  Matrix<S> out = Matrix<S>::Constant(1, 1, diff.squaredNorm() / n);
  return pred.tape->push(std::move(out), {ip},
                         [ip, diff = std::move(diff), n](Tape<S>& t, const Matrix<S>& g) {
                           t.accumulate(ip, diff * (S(2) * g(0, 0) / n));
                         });
}

/// Mean absolute error over the selected rows (all rows when empty).
template <typename S>
Var<S> l1_loss(Var<S> pred, const Matrix<S>& target, std::vector<Index> rows = {}) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw Error("l1_loss: shape mismatch");
  const int ip = pred.id;
  if (rows.empty())
    for (Index i = 0; i < target.rows(); ++i) rows.push_back(i);
  const S n = S(rows.size() * std::size_t(target.cols()));
  Matrix<S> sign = Matrix<S>::Zero(target.rows(), target.cols());
  S total = 0;
  for (Index r : rows) {
    const auto d = (pred.value().row(r) - target.row(r)).eval();
    total += d.cwiseAbs().sum();
    sign.row(r) = d.unaryExpr([](S v) { return S((v > 0) - (v < 0)); });
  }
  return pred.tape->push(Matrix<S>::Constant(1, 1, total / n), {ip},
                         [ip, sign = std::move(sign), n](Tape<S>& t, const Matrix<S>& g) {
                           t.accumulate(ip, sign * (g(0, 0) / n));
                         });
}

/// Binary cross-entropy on logits (n x 1) with 0/1 labels, averaged.
template <typename S>
Var<S> bce_with_logits(Var<S> logits, const std::vector<int>& labels) {
  const int il = logits.id;
  const Index n = logits.rows();
  if (logits.cols() != 1 || Index(labels.size()) != n)
    throw Error("bce_with_logits: shape mismatch");
  Matrix<S> dlogit(n, 1);
  S total = 0;
  for (Index i = 0; i < n; ++i) {
    const S z = logits.value()(i, 0);
    const S y = S(labels[std::size_t(i)]);
    // log(1 + exp(-|z|)) + max(z, 0) - z * y
    total += std::log1p(std::exp(-std::abs(z))) + std::max(z, S(0)) - z * y;
    dlogit(i, 0) = S(1) / (S(1) + std::exp(-z)) - y;
  }
  return logits.tape->push(Matrix<S>::Constant(1, 1, total / S(n)), {il},
                           [il, dlogit = std::move(dlogit), n](Tape<S>& t, const Matrix<S>& g) {
                             t.accumulate(il, dlogit * (g(0, 0) / S(n)));
                           });
}

/// Softmax cross-entropy, logits B x C, one label per row, averaged.
template <typename S>
Var<S> softmax_cross_entropy(Var<S> logits, const std::vector<int>& labels) {
  const int il = logits.id;
  const Index B = logits.rows(), C = logits.cols();
  if (Index(labels.size()) != B) throw Error("softmax_cross_entropy: label count mismatch");
  Matrix<S> dlogit(B, C);
  S total = 0;
  for (Index i = 0; i < B; ++i) {
    const int y = labels[std::size_t(i)];
    if (y < 0 || y >= C) throw Error("softmax_cross_entropy: label out of range");
    const auto row = logits.value().row(i);
    const S m = row.maxCoeff();
    const S lse = m + std::log((row.array() - m).exp().sum());
    total += lse - row(y);
    dlogit.row(i) = (row.array() - lse).exp();
    dlogit(i, y) -= S(1);
  }
  return logits.tape->push(Matrix<S>::Constant(1, 1, total / S(B)), {il},
                           [il, dlogit = std::move(dlogit), B](Tape<S>& t, const Matrix<S>& g) {
                             t.accumulate(il, dlogit * (g(0, 0) / S(B)));
                           });
}

}  // namespace napt

#endif  // NAPT_AUTOGRAD_H_
