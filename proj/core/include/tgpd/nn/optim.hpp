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
#include <span>

#include "tgpd/nn/tensor.hpp"

namespace tgpd::nn {

// Global L2 norm of all parameter gradients.
template <typename T>
double gradient_norm(std::span<Parameter<T>* const> params) {
  double total = 0.0;
  for (const auto* p : params) {
    for (T g : p->grad.values()) total += static_cast<double>(g) * static_cast<double>(g);
  }
  return std::sqrt(total);
}

// Clips the global gradient norm to clip_norm, applies theta -= lr * grad to
// every non-frozen row, then zeroes all gradients. clip_norm <= 0 disables
// clipping.
template <typename T>
void sgd_update(std::span<Parameter<T>* const> params, double lr, double clip_norm) {
  if (!(lr > 0.0)) throw NumericError("learning rate must be positive");
  const double norm = gradient_norm(params);
  if (!std::isfinite(norm)) throw NumericError("non-finite gradient");
  const double factor = (clip_norm > 0.0 && norm > clip_norm) ? clip_norm / norm : 1.0;
  const T step = static_cast<T>(lr * factor);
  for (auto* p : params) {
    if (!p->frozen) {
      const std::size_t rows = p->value.rows();
      const std::size_t cols = p->value.cols();
      for (std::size_t r = 0; r < rows; ++r) {
        if (p->row_frozen(r)) continue;
        T* v = p->value.data() + r * cols;
        const T* g = p->grad.data() + r * cols;
        for (std::size_t k = 0; k < cols; ++k) v[k] -= step * g[k];
      }
    }
    p->zero_grad();
  }
}

}  // namespace tgpd::nn
