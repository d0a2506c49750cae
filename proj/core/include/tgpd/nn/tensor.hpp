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

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "tgpd/common/error.hpp"

namespace tgpd::nn {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);

// Dense row-major array of rank 1 or 2. A rank-1 tensor of length n behaves
// as a 1 x n row wherever a matrix is expected.
template <typename T>
class Tensor {
 public:
  using Scalar = T;
  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using MatrixMap = Eigen::Map<Matrix>;
  using ConstMatrixMap = Eigen::Map<const Matrix>;

  Tensor() = default;

  explicit Tensor(Shape shape, T fill = T(0)) : shape_(std::move(shape)) {
    check_rank();
    values_.assign(count(shape_), fill);
  }

  Tensor(Shape shape, std::span<const T> values) : shape_(std::move(shape)), values_(values.begin(), values.end()) {
    check_rank();
    if (values_.size() != count(shape_)) {
      throw ShapeError("tensor of shape " + shape_string(shape_) + " given " +
                       std::to_string(values_.size()) + " values");
    }
  }

  Tensor(Shape shape, const std::vector<T>& values) : Tensor(std::move(shape), std::span<const T>(values)) {}

  static Tensor vector(const std::vector<T>& values) { return Tensor({values.size()}, values); }

  static Tensor matrix(std::size_t rows, std::size_t cols, const std::vector<T>& values) {
    return Tensor({rows, cols}, values);
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  std::size_t rows() const noexcept { return shape_.size() == 2 ? shape_[0] : 1; }
  std::size_t cols() const noexcept {
    return shape_.empty() ? 0 : (shape_.size() == 2 ? shape_[1] : shape_[0]);
  }

  std::span<T> values() noexcept { return values_; }
  std::span<const T> values() const noexcept { return values_; }
  T* data() noexcept { return values_.data(); }
  const T* data() const noexcept { return values_.data(); }

  T& operator[](std::size_t i) { return values_[i]; }
  const T& operator[](std::size_t i) const { return values_[i]; }
  T& operator()(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }

  std::span<T> row(std::size_t r) { return {values_.data() + r * cols(), cols()}; }
  std::span<const T> row(std::size_t r) const { return {values_.data() + r * cols(), cols()}; }

  MatrixMap mat() {
    return MatrixMap(values_.data(), static_cast<Eigen::Index>(rows()),
                     static_cast<Eigen::Index>(cols()));
  }
  ConstMatrixMap mat() const {
    return ConstMatrixMap(values_.data(), static_cast<Eigen::Index>(rows()),
                          static_cast<Eigen::Index>(cols()));
  }

  void fill(T v) { std::fill(values_.begin(), values_.end(), v); }

  bool all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](T v) { return std::isfinite(v); });
  }

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> out(values_.begin(), values_.end());
    return Tensor<U>(shape_, out);
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.values_ == b.values_;
  }

 private:
  static std::size_t count(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  }
  void check_rank() const {
    if (shape_.empty() || shape_.size() > 2) {
      throw ShapeError("tensors must have rank 1 or 2, got " + shape_string(shape_));
    }
  }

  Shape shape_;
  // Aligned so vectorised kernels round identically from run to run.
  std::vector<T, Eigen::aligned_allocator<T>> values_;
};

inline std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

// Learnable array. Rows listed in `frozen_rows` (or the whole array when
// `frozen` is set) still receive gradients but are skipped by the optimizer.
template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
  bool frozen = false;
  std::vector<char> frozen_rows;

  Parameter() = default;
  Parameter(std::string n, Tensor<T> v)
      : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}

  void zero_grad() { grad.fill(T(0)); }
  bool row_frozen(std::size_t r) const {
    return frozen || (r < frozen_rows.size() && frozen_rows[r]);
  }
  void freeze_row(std::size_t r, bool on = true) {
    if (frozen_rows.size() < value.rows()) frozen_rows.resize(value.rows(), 0);
    frozen_rows.at(r) = on ? 1 : 0;
  }
};

}  // namespace tgpd::nn
