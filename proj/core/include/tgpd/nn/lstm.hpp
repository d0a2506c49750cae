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

#include <utility>

#include "tgpd/nn/ops.hpp"

namespace tgpd::nn {

// Weights of one LSTM layer. Gate blocks along the 4H axis are ordered
// input, forget, candidate, output.
template <typename T>
struct LstmBundle {
  Parameter<T> wx;  // [d x 4H]
  Parameter<T> wh;  // [H x 4H]
  Parameter<T> b;   // [4H]

  std::size_t input_size() const { return wx.value.rows(); }
  std::size_t hidden_size() const { return wh.value.rows(); }
};

// Bundle parameters bound to a tape once per forward pass.
template <typename T>
struct LstmVars {
  Var<T> wx, wh, b;

  static LstmVars bind(Tape<T>& tape, LstmBundle<T>& bundle) {
    return {tape.param(bundle.wx), tape.param(bundle.wh), tape.param(bundle.b)};
  }
  std::size_t hidden_size() const { return wh.value().rows(); }
};

// Gate nonlinearities and state update from pre-activations z[B x 4H] and
// the previous cell c[B x H]. Returns [h' | c'] as one [B x 2H] value.
template <typename T>
Var<T> lstm_cell(Var<T> z, Var<T> c) {
  const auto& zv = z.value();
  const auto& cv = c.value();
  const std::size_t H = cv.cols();
  if (zv.cols() != 4 * H || zv.rows() != cv.rows()) {
    throw ShapeError("lstm_cell: gates " + shape_string(zv.shape()) + " vs cell " +
                     shape_string(cv.shape()));
  }
  const std::size_t B = cv.rows();
  Tensor<T> gates({B, 4 * H});  // activated i, f, g, o
  Tensor<T> out({B, 2 * H});
  for (std::size_t r = 0; r < B; ++r) {
    auto zr = zv.row(r);
    auto gr = gates.row(r);
    auto cr = cv.row(r);
    auto orow = out.row(r);
    for (std::size_t k = 0; k < H; ++k) {
      const T i = detail::sigmoid(zr[k]);
      const T f = detail::sigmoid(zr[H + k]);
      const T g = std::tanh(zr[2 * H + k]);
      const T o = detail::sigmoid(zr[3 * H + k]);
      gr[k] = i;
      gr[H + k] = f;
      gr[2 * H + k] = g;
      gr[3 * H + k] = o;
      const T cn = f * cr[k] + i * g;
      orow[H + k] = cn;
      orow[k] = o * std::tanh(cn);
    }
  }
  Tape<T>& tape = *z.tape();
  return tape.push(
      std::move(out), detail::any_grad({z, c}),
      [&tape, z, c, H, gates = std::move(gates)](std::size_t self) {
        const auto& y = tape.value(self);
        const auto& gy = tape.grad_buffer(self);
        const auto& cv = c.value();
        const bool want_z = tape.needs_grad(z.id());
        const bool want_c = tape.needs_grad(c.id());
        Tensor<T>* dz = want_z ? &tape.grad_buffer(z.id()) : nullptr;
        Tensor<T>* dc = want_c ? &tape.grad_buffer(c.id()) : nullptr;
        for (std::size_t r = 0; r < cv.rows(); ++r) {
          auto gr = gates.row(r);
          auto yr = y.row(r);
          auto dyr = gy.row(r);
          auto cr = cv.row(r);
          for (std::size_t k = 0; k < H; ++k) {
            const T i = gr[k], f = gr[H + k], g = gr[2 * H + k], o = gr[3 * H + k];
            const T tc = std::tanh(yr[H + k]);
            const T dh = dyr[k];
            const T dcn = dyr[H + k] + dh * o * (T(1) - tc * tc);
            if (dz) {
              auto dzr = dz->row(r);
              dzr[k] += dcn * g * i * (T(1) - i);
              dzr[H + k] += dcn * cr[k] * f * (T(1) - f);
              dzr[2 * H + k] += dcn * i * (T(1) - g * g);
              dzr[3 * H + k] += dh * tc * o * (T(1) - o);
            }
            if (dc) dc->row(r)[k] += dcn * f;
          }
        }
      },
      "lstm_cell");
}

// One LSTM step over a batch: x[B x d], h[B x H], c[B x H] -> (h', c').
template <typename T>
std::pair<Var<T>, Var<T>> lstm_step(const LstmVars<T>& w, Var<T> x, Var<T> h, Var<T> c) {
  const std::size_t H = w.hidden_size();
  if (h.value().cols() != H || c.value().cols() != H || x.value().cols() != w.wx.value().rows()) {
    throw ShapeError("lstm_step: input " + shape_string(x.shape()) + ", hidden " +
                     shape_string(h.shape()) + " do not fit the bundle");
  }
  Var<T> z = add_bias(add(matmul(x, w.wx), matmul(h, w.wh)), w.b);
  Var<T> hc = lstm_cell(z, c);
  return {columns(hc, 0, H), columns(hc, H, 2 * H)};
}

template <typename T>
std::pair<Var<T>, Var<T>> lstm_step(LstmBundle<T>& bundle, Var<T> x, Var<T> h, Var<T> c) {
  return lstm_step(LstmVars<T>::bind(*x.tape(), bundle), x, h, c);
}

}  // namespace tgpd::nn
