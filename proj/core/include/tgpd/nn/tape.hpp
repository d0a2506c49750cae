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

#include <functional>
#include <string_view>
#include <vector>

#include "tgpd/nn/tensor.hpp"

namespace tgpd::nn {

template <typename T>
class Tape;

// Handle to a value recorded on a tape.
template <typename T>
class Var {
 public:
  Var() = default;
  Var(Tape<T>* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Tensor<T>& value() const { return tape_->value(id_); }
  const Tensor<T>& grad() const { return tape_->grad(id_); }
  const Shape& shape() const { return value().shape(); }
  Tape<T>* tape() const { return tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape<T>* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Records operations in execution order; backward() replays them in exact
// reverse order. Node gradients are reset at the start of every backward
// pass, parameter gradients accumulate across passes until zeroed.
template <typename T>
class Tape {
 public:
  using BackwardFn = std::function<void(std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<T> constant(Tensor<T> value) { return push(std::move(value), false, nullptr, "constant"); }

  // Differentiable leaf; its gradient is readable after backward().
  Var<T> input(Tensor<T> value) {
    return push(std::move(value), grad_enabled_, nullptr, "input");
  }

  // With gradients disabled, parameter and input leaves are recorded as
  // constants, so nothing downstream builds backward closures.
  void set_grad_enabled(bool on) noexcept { grad_enabled_ = on; }
  bool grad_enabled() const noexcept { return grad_enabled_; }

  // Leaf bound to a parameter. The value is referenced, not copied, so the
  // parameter must outlive the tape's use of it.
  Var<T> param(Parameter<T>& p) {
    Node node;
    node.ref = &p.value;
    node.needs_grad = grad_enabled_;
    node.param = &p;
    nodes_.push_back(std::move(node));
    return {this, nodes_.size() - 1};
  }

  Var<T> push(Tensor<T> value, bool needs_grad, BackwardFn fn, std::string_view op) {
    if (!value.all_finite()) {
      throw NumericError("non-finite value produced by " + std::string(op));
    }
    Node node;
    node.value = std::move(value);
    node.needs_grad = needs_grad;
    node.backward = needs_grad ? std::move(fn) : nullptr;
    nodes_.push_back(std::move(node));
    return {this, nodes_.size() - 1};
  }

  const Tensor<T>& value(std::size_t id) const {
    const Node& n = nodes_.at(id);
    return n.ref ? *n.ref : n.value;
  }

  bool needs_grad(std::size_t id) const { return nodes_.at(id).needs_grad; }
  bool has_grad(std::size_t id) const { return !nodes_.at(id).grad.empty(); }

  const Tensor<T>& grad(std::size_t id) const {
    const Node& n = nodes_.at(id);
    if (n.grad.empty()) {
      static thread_local Tensor<T> empty;
      empty = Tensor<T>(value(id).shape());
      return empty;
    }
    return n.grad;
  }

  // Gradient buffer of a node, zero-allocated on first use.
  Tensor<T>& grad_buffer(std::size_t id) {
    Node& n = nodes_.at(id);
    if (n.grad.empty()) n.grad = Tensor<T>(value(id).shape());
    return n.grad;
  }

  void backward(Var<T> loss) {
    if (loss.value().size() != 1) {
      throw ShapeError("backward needs a scalar loss, got " + shape_string(loss.shape()));
    }
    backward(loss, Tensor<T>(loss.shape(), T(1)));
  }

  void backward(Var<T> out, const Tensor<T>& seed) {
    if (out.tape() != this) throw Error("backward on a variable from another tape");
    if (seed.shape() != out.shape()) {
      throw ShapeError("seed shape " + shape_string(seed.shape()) + " does not match output " +
                       shape_string(out.shape()));
    }
    for (auto& n : nodes_) n.grad = Tensor<T>();
    if (!nodes_[out.id()].needs_grad) return;
    nodes_[out.id()].grad = seed;
    for (std::size_t i = out.id() + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.needs_grad || n.grad.empty()) continue;
      if (n.param) {
        auto dst = n.param->grad.values();
        auto src = n.grad.values();
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
      } else if (n.backward) {
        n.backward(i);
      }
    }
  }

  std::size_t size() const noexcept { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  struct Node {
    Tensor<T> value;
    const Tensor<T>* ref = nullptr;
    Tensor<T> grad;
    BackwardFn backward;
    Parameter<T>* param = nullptr;
    bool needs_grad = false;
  };

  std::vector<Node> nodes_;
  bool grad_enabled_ = true;
};

}  // namespace tgpd::nn
