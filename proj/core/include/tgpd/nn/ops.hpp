// Copyright 2026 The tgpd Authors. All rights reserved.
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

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "tgpd/nn/tape.hpp"

namespace tgpd::nn {

enum class Activation { kRelu, kSigmoid, kTanh };

namespace detail {

template <typename T>
void require_same_tape(Var<T> a, Var<T> b) {
  if (a.tape() != b.tape()) throw Error("operands recorded on different tapes");
}

template <typename T>
bool any_grad(std::initializer_list<Var<T>> vars) {
  for (const auto& v : vars) {
    if (v.tape()->needs_grad(v.id())) return true;
  }
  return false;
}

template <typename T>
void accumulate(Tape<T>& tape, Var<T> v, const typename Tensor<T>::Matrix& g) {
  if (!tape.needs_grad(v.id())) return;
  tape.grad_buffer(v.id()).mat() += g;
}

template <typename T>
T sigmoid(T x) {
  return x >= T(0) ? T(1) / (T(1) + std::exp(-x)) : std::exp(x) / (T(1) + std::exp(x));
}

}  // namespace detail

// a[m x k] * b[k x n]
template <typename T>
Var<T> matmul(Var<T> a, Var<T> b) {
  detail::require_same_tape(a, b);
  const auto& av = a.value();
  const auto& bv = b.value();
  if (av.cols() != bv.rows()) {
    throw ShapeError("matmul: " + shape_string(av.shape()) + " x " + shape_string(bv.shape()));
  }
  Tensor<T> out({av.rows(), bv.cols()});
  out.mat().noalias() = av.mat() * bv.mat();
  Tape<T>& tape = *a.tape();
  return tape.push(std::move(out), detail::any_grad({a, b}),
                   [&tape, a, b](std::size_t self) {
                     const auto g = tape.grad_buffer(self).mat();
                     if (tape.needs_grad(a.id())) {
                       tape.grad_buffer(a.id()).mat().noalias() += g * b.value().mat().transpose();
                     }
                     if (tape.needs_grad(b.id())) {
                       tape.grad_buffer(b.id()).mat().noalias() += a.value().mat().transpose() * g;
                     }
                   },
                   "matmul");
}

template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
  detail::require_same_tape(a, b);
  if (a.shape() != b.shape()) {
    throw ShapeError("add: " + shape_string(a.shape()) + " + " + shape_string(b.shape()));
  }
  Tensor<T> out = a.value();
  out.mat() += b.value().mat();
  Tape<T>& tape = *a.tape();
  return tape.push(std::move(out), detail::any_grad({a, b}),
                   [&tape, a, b](std::size_t self) {
                     const typename Tensor<T>::Matrix g = tape.grad_buffer(self).mat();
                     detail::accumulate(tape, a, g);
                     detail::accumulate(tape, b, g);
                   },
                   "add");
}

// x[B x n] + bias[n], the bias broadcast over rows. The only broadcast
// supported anywhere in the core.
template <typename T>
Var<T> add_bias(Var<T> x, Var<T> bias) {
  detail::require_same_tape(x, bias);
  const auto& xv = x.value();
  const auto& bv = bias.value();
  if (bv.rows() != 1 || bv.cols() != xv.cols()) {
    throw ShapeError("add_bias: " + shape_string(xv.shape()) + " + " + shape_string(bv.shape()));
  }
  Tensor<T> out = xv;
  out.mat().rowwise() += bv.mat().row(0);
  Tape<T>& tape = *x.tape();
  return tape.push(std::move(out), detail::any_grad({x, bias}),
                   [&tape, x, bias](std::size_t self) {
                     const auto g = tape.grad_buffer(self).mat();
                     if (tape.needs_grad(x.id())) tape.grad_buffer(x.id()).mat() += g;
                     if (tape.needs_grad(bias.id())) {
                       tape.grad_buffer(bias.id()).mat().row(0) += g.colwise().sum();
                     }
                   },
                   "add_bias");
}

template <typename T>
Var<T> scale(Var<T> x, T factor) {
  Tensor<T> out = x.value();
  out.mat() *= factor;
  Tape<T>& tape = *x.tape();
  return tape.push(std::move(out), tape.needs_grad(x.id()),
                   [&tape, x, factor](std::size_t self) {
                     tape.grad_buffer(x.id()).mat() += factor * tape.grad_buffer(self).mat();
                   },
                   "scale");
}

// Sum of all entries, as a rank-1 tensor of length 1.
template <typename T>
Var<T> sum(Var<T> x) {
  Tensor<T> out({1}, x.value().mat().sum());
  Tape<T>& tape = *x.tape();
  return tape.push(std::move(out), tape.needs_grad(x.id()),
                   [&tape, x](std::size_t self) {
                     const T g = tape.grad_buffer(self)[0];
                     tape.grad_buffer(x.id()).mat().array() += g;
                   },
                   "sum");
}

template <typename T>
Var<T> activation(Activation kind, Var<T> x) {
  Tensor<T> out = x.value();
  for (auto& v : out.values()) {
    switch (kind) {
      case Activation::kRelu: v = v > T(0) ? v : T(0); break;
      case Activation::kSigmoid: v = detail::sigmoid(v); break;
      case Activation::kTanh: v = std::tanh(v); break;
    }
  }
  Tape<T>& tape = *x.tape();
  const char* name = kind == Activation::kRelu ? "relu" : kind == Activation::kSigmoid ? "sigmoid" : "tanh";
  return tape.push(std::move(out), tape.needs_grad(x.id()),
                   [&tape, x, kind](std::size_t self) {
                     const auto g = tape.grad_buffer(self).values();
                     const auto y = tape.value(self).values();
                     auto dx = tape.grad_buffer(x.id()).values();
                     for (std::size_t i = 0; i < dx.size(); ++i) {
                       switch (kind) {
                         // Subgradient at exactly 0 is 0.
                         case Activation::kRelu: dx[i] += y[i] > T(0) ? g[i] : T(0); break;
                         case Activation::kSigmoid: dx[i] += g[i] * y[i] * (T(1) - y[i]); break;
                         case Activation::kTanh: dx[i] += g[i] * (T(1) - y[i] * y[i]); break;
                       }
                     }
                   },
                   name);
}

template <typename T> Var<T> relu(Var<T> x) { return activation(Activation::kRelu, x); }
template <typename T> Var<T> sigmoid(Var<T> x) { return activation(Activation::kSigmoid, x); }
template <typename T> Var<T> tanh(Var<T> x) { return activation(Activation::kTanh, x); }

// Row-wise softmax(q / tau) with max subtraction.
template <typename T>
Tensor<T> softmax_t(const Tensor<T>& q, T tau) {
  if (!(tau > T(0))) throw NumericError("softmax temperature must be positive");
  Tensor<T> out = q;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    const T mx = *std::max_element(row.begin(), row.end());
    T total = 0;
    for (auto& v : row) {
      v = std::exp((v - mx) / tau);
      total += v;
    }
    for (auto& v : row) v /= total;
  }
  return out;
}

template <typename T>
Var<T> softmax_t(Var<T> q, T tau) {
  Tensor<T> out = softmax_t(q.value(), tau);
  Tape<T>& tape = *q.tape();
  return tape.push(std::move(out), tape.needs_grad(q.id()),
                   [&tape, q, tau](std::size_t self) {
                     const auto& y = tape.value(self);
                     const auto& g = tape.grad_buffer(self);
                     auto& dq = tape.grad_buffer(q.id());
                     for (std::size_t r = 0; r < y.rows(); ++r) {
                       auto yr = y.row(r);
                       auto gr = g.row(r);
                       T dot = 0;
                       for (std::size_t i = 0; i < yr.size(); ++i) dot += yr[i] * gr[i];
                       auto dr = dq.row(r);
                       for (std::size_t i = 0; i < yr.size(); ++i) dr[i] += yr[i] * (gr[i] - dot) / tau;
                     }
                   },
                   "softmax_t");
}

// Columns [begin, end) of x.
template <typename T>
Var<T> columns(Var<T> x, std::size_t begin, std::size_t end) {
  const auto& xv = x.value();
  if (begin > end || end > xv.cols()) throw ShapeError("columns: range out of bounds");
  Tensor<T> out({xv.rows(), end - begin});
  out.mat() = xv.mat().middleCols(static_cast<Eigen::Index>(begin),
                                  static_cast<Eigen::Index>(end - begin));
  Tape<T>& tape = *x.tape();
  return tape.push(std::move(out), tape.needs_grad(x.id()),
                   [&tape, x, begin, end](std::size_t self) {
                     tape.grad_buffer(x.id())
                         .mat()
                         .middleCols(static_cast<Eigen::Index>(begin),
                                     static_cast<Eigen::Index>(end - begin)) +=
                         tape.grad_buffer(self).mat();
                   },
                   "columns");
}

// Gathers rows of `table`; a negative id yields a zero row that receives no
// gradient. Gradients scatter-add into the gathered rows only.
template <typename T>
Var<T> gather_rows(Var<T> table, std::span<const long> ids) {
  const auto& tv = table.value();
  Tensor<T> out({ids.size(), tv.cols()});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0) continue;
    if (static_cast<std::size_t>(ids[i]) >= tv.rows()) {
      throw ShapeError("embedding id " + std::to_string(ids[i]) + " out of range for " +
                       std::to_string(tv.rows()) + " rows");
    }
    auto src = tv.row(static_cast<std::size_t>(ids[i]));
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  Tape<T>& tape = *table.tape();
  std::vector<long> idv(ids.begin(), ids.end());
  return tape.push(std::move(out), tape.needs_grad(table.id()),
                   [&tape, table, idv = std::move(idv)](std::size_t self) {
                     const auto& g = tape.grad_buffer(self);
                     auto& dt = tape.grad_buffer(table.id());
                     for (std::size_t i = 0; i < idv.size(); ++i) {
                       if (idv[i] < 0) continue;
                       auto dst = dt.row(static_cast<std::size_t>(idv[i]));
                       auto src = g.row(i);
                       for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
                     }
                   },
                   "gather_rows");
}

// One rank-1 embedding vector per token id.
template <typename T>
std::vector<Var<T>> embedding_lookup(Var<T> table, std::span<const long> ids) {
  std::vector<Var<T>> out;
  out.reserve(ids.size());
  for (long id : ids) {
    if (id < 0) throw ShapeError("embedding id must be non-negative");
    const long one[1] = {id};
    Var<T> row = gather_rows(table, std::span<const long>(one, 1));
    out.push_back(row);
  }
  return out;
}

// Row b of the result is the mean over the first lengths[b] steps of row b
// of each element of hs. Steps past a row's length are ignored entirely.
template <typename T>
Var<T> masked_sequence_mean(std::span<const Var<T>> hs, std::span<const std::size_t> lengths) {
  if (hs.empty()) throw ShapeError("sequence_mean of an empty sequence");
  const Shape& shape = hs[0].shape();
  for (const auto& h : hs) {
    if (h.shape() != shape) throw ShapeError("sequence_mean: ragged element shapes");
    if (h.tape() != hs[0].tape()) throw Error("operands recorded on different tapes");
  }
  const std::size_t rows = hs[0].value().rows();
  if (lengths.size() != rows) throw ShapeError("sequence_mean: one length per row required");
  for (std::size_t len : lengths) {
    if (len == 0 || len > hs.size()) throw ShapeError("sequence_mean: invalid row length");
  }
  Tensor<T> out(shape);
  bool needs = false;
  for (std::size_t t = 0; t < hs.size(); ++t) {
    const auto& hv = hs[t].value();
    needs = needs || hs[t].tape()->needs_grad(hs[t].id());
    for (std::size_t r = 0; r < rows; ++r) {
      if (t >= lengths[r]) continue;
      auto dst = out.row(r);
      auto src = hv.row(r);
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
  }
  for (std::size_t r = 0; r < rows; ++r) {
    const T inv = T(1) / static_cast<T>(lengths[r]);
    for (auto& v : out.row(r)) v *= inv;
  }
  Tape<T>& tape = *hs[0].tape();
  std::vector<Var<T>> hv(hs.begin(), hs.end());
  std::vector<std::size_t> lens(lengths.begin(), lengths.end());
  return tape.push(std::move(out), needs,
                   [&tape, hv = std::move(hv), lens = std::move(lens)](std::size_t self) {
                     const auto& g = tape.grad_buffer(self);
                     for (std::size_t t = 0; t < hv.size(); ++t) {
                       if (!tape.needs_grad(hv[t].id())) continue;
                       auto& dh = tape.grad_buffer(hv[t].id());
                       for (std::size_t r = 0; r < lens.size(); ++r) {
                         if (t >= lens[r]) continue;
                         const T inv = T(1) / static_cast<T>(lens[r]);
                         auto dst = dh.row(r);
                         auto src = g.row(r);
                         for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += inv * src[k];
                       }
                     }
                   },
                   "sequence_mean");
}

template <typename T>
Var<T> sequence_mean(std::span<const Var<T>> hs) {
  if (hs.empty()) throw ShapeError("sequence_mean of an empty sequence");
  std::vector<std::size_t> lengths(hs[0].value().rows(), hs.size());
  return masked_sequence_mean(hs, std::span<const std::size_t>(lengths));
}

// Mean over rows b of (targets[b] - q[b, index[b]])^2. Only the selected
// slot of each row receives gradient.
template <typename T>
Var<T> squared_td_loss(Var<T> q, std::span<const std::size_t> index, std::span<const T> targets) {
  const auto& qv = q.value();
  if (index.size() != qv.rows() || targets.size() != qv.rows()) {
    throw ShapeError("squared_td_loss: one index and target per row required");
  }
  T loss = 0;
  for (std::size_t r = 0; r < qv.rows(); ++r) {
    if (index[r] >= qv.cols()) {
      throw ShapeError("squared_td_loss: index " + std::to_string(index[r]) + " out of range");
    }
    const T diff = targets[r] - qv(r, index[r]);
    loss += diff * diff;
  }
  const T inv = T(1) / static_cast<T>(qv.rows());
  Tape<T>& tape = *q.tape();
  std::vector<std::size_t> idx(index.begin(), index.end());
  std::vector<T> ys(targets.begin(), targets.end());
  return tape.push(Tensor<T>({1}, loss * inv), tape.needs_grad(q.id()),
                   [&tape, q, inv, idx = std::move(idx), ys = std::move(ys)](std::size_t self) {
                     const T g = tape.grad_buffer(self)[0];
                     const auto& qv = q.value();
                     auto& dq = tape.grad_buffer(q.id());
                     for (std::size_t r = 0; r < idx.size(); ++r) {
                       dq(r, idx[r]) += g * inv * T(-2) * (ys[r] - qv(r, idx[r]));
                     }
                   },
                   "squared_td_loss");
}

template <typename T>
Var<T> squared_td_loss(Var<T> q, std::size_t index, T target) {
  const std::size_t idx[1] = {index};
  const T ys[1] = {target};
  return squared_td_loss(q, std::span<const std::size_t>(idx, 1), std::span<const T>(ys, 1));
}

// Mean over rows of KL(p || softmax(logits)), with 0 ln 0 = 0. Each row of
// `target` must be a probability vector.
template <typename T>
Var<T> kl_loss(const Tensor<T>& target, Var<T> logits) {
  const auto& lv = logits.value();
  if (target.shape() != lv.shape() && !(target.rows() == lv.rows() && target.cols() == lv.cols())) {
    throw ShapeError("kl_loss: target " + shape_string(target.shape()) + " vs logits " +
                     shape_string(lv.shape()));
  }
  const T tol = T(1e-6) + static_cast<T>(4 * target.cols()) * std::numeric_limits<T>::epsilon();
  for (std::size_t r = 0; r < target.rows(); ++r) {
    T total = 0;
    for (T v : target.row(r)) {
      if (v < T(0)) throw NumericError("kl_loss: negative target probability");
      total += v;
    }
    if (std::abs(total - T(1)) > tol) throw NumericError("kl_loss: target row does not sum to 1");
  }
  Tensor<T> probs = softmax_t(lv, T(1));
  T loss = 0;
  for (std::size_t r = 0; r < lv.rows(); ++r) {
    auto lr = lv.row(r);
    const T mx = *std::max_element(lr.begin(), lr.end());
    T lse = 0;
    for (T v : lr) lse += std::exp(v - mx);
    lse = mx + std::log(lse);
    auto pr = target.row(r);
    for (std::size_t i = 0; i < pr.size(); ++i) {
      if (pr[i] > T(0)) loss += pr[i] * (std::log(pr[i]) - (lr[i] - lse));
    }
  }
  const T inv = T(1) / static_cast<T>(lv.rows());
  Tape<T>& tape = *logits.tape();
  return tape.push(Tensor<T>({1}, loss * inv), tape.needs_grad(logits.id()),
                   [&tape, logits, inv, probs = std::move(probs), target](std::size_t self) {
                     const T g = tape.grad_buffer(self)[0] * inv;
                     auto& dl = tape.grad_buffer(logits.id());
                     auto dv = dl.values();
                     auto pv = probs.values();
                     auto tv = target.values();
                     for (std::size_t i = 0; i < dv.size(); ++i) dv[i] += g * (pv[i] - tv[i]);
                   },
                   "kl_loss");
}

}  // namespace tgpd::nn
