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

#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "tgpd/nn/optim.hpp"

namespace tgpd::testing {
namespace {

using nn::Tensor;

TEST(Tensor, ShapesAndAccess) {
  auto m = Tensor<float>::matrix(2, 3, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.cols(), 3u);
  EXPECT_EQ(m(1, 2), 6.0f);
  auto v = Tensor<float>::vector({1, 2});
  EXPECT_EQ(v.rows(), 1u);
  EXPECT_EQ(v.cols(), 2u);
  EXPECT_THROW(Tensor<float>({2, 2}, std::vector<float>{1, 2, 3}), ShapeError);
}

TEST(Ops, MatmulOracle) {
  nn::Tape<double> tape;
  auto a = tape.constant(Tensor<double>::matrix(2, 2, {1, 2, 3, 4}));
  auto b = tape.constant(Tensor<double>::matrix(2, 1, {1, 1}));
  const auto& y = nn::matmul(a, b).value();
  EXPECT_EQ(y(0, 0), 3.0);
  EXPECT_EQ(y(1, 0), 7.0);
  EXPECT_THROW(nn::matmul(b, b), ShapeError);
}

TEST(Ops, SoftmaxOracle) {
  // softmax([1, 2, 3]) = e^k / (e + e^2 + e^3).
  const auto p = nn::softmax_t(Tensor<double>::vector({1, 2, 3}), 1.0);
  EXPECT_NEAR(p[0], 0.0900306, 1e-6);
  EXPECT_NEAR(p[1], 0.2447285, 1e-6);
  EXPECT_NEAR(p[2], 0.6652410, 1e-6);
  EXPECT_THROW(nn::softmax_t(Tensor<double>::vector({1, 2}), 0.0), NumericError);
}

TEST(Ops, SoftmaxIsShiftInvariantAndStable) {
  const auto a = nn::softmax_t(Tensor<double>::vector({1000, 1001, 1002}), 1.0);
  const auto b = nn::softmax_t(Tensor<double>::vector({0, 1, 2}), 1.0);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
}

TEST(Ops, TemperatureSharpensTowardArgmax) {
  const auto q = Tensor<double>::vector({0.2, 0.5, 0.1});
  double prev = 0.0;
  for (double tau : {1.0, 0.1, 0.01}) {
    const double mass = nn::softmax_t(q, tau)[1];
    EXPECT_GT(mass, prev);
    prev = mass;
  }
  EXPECT_GT(prev, 0.999);
}

TEST(Ops, KlOracles) {
  nn::Tape<double> tape;
  // KL([1, 0] || uniform) = ln 2.
  auto uniform = tape.input(Tensor<double>::vector({0.0, 0.0}));
  EXPECT_NEAR(nn::kl_loss(Tensor<double>::vector({1.0, 0.0}), uniform).value()[0], std::log(2.0), 1e-12);
  // Teacher [1, 0] at tau 0.5 against a uniform student.
  const auto target = nn::softmax_t(Tensor<double>::vector({1.0, 0.0}), 0.5);
  EXPECT_NEAR(nn::kl_loss(target, uniform).value()[0], 0.3278133, 1e-6);
  // Equal distributions give zero.
  auto logits = tape.input(Tensor<double>::vector({0.3, -1.2, 2.0}));
  EXPECT_NEAR(nn::kl_loss(nn::softmax_t(logits.value(), 1.0), logits).value()[0], 0.0, 1e-12);
  EXPECT_THROW(nn::kl_loss(Tensor<double>::vector({0.5, 0.2, 0.1}), logits), NumericError);
}

TEST(Ops, KlIsNonNegative) {
  Rng rng(17);
  for (int i = 0; i < 1000; ++i) {
    nn::Tape<double> tape;
    auto logits = tape.input(random_tensor({1, 5}, rng, 3.0));
    const auto p = nn::softmax_t(random_tensor({1, 5}, rng, 3.0), 0.3);
    EXPECT_GE(nn::kl_loss(p, logits).value()[0], -1e-12);
  }
}

TEST(Ops, KlGradientIsSoftmaxMinusTarget) {
  nn::Tape<double> tape;
  auto logits = tape.input(Tensor<double>::vector({0.5, -0.3, 1.1}));
  const auto p = nn::softmax_t(Tensor<double>::vector({2.0, 0.0, 1.0}), 0.5);
  tape.backward(nn::kl_loss(p, logits));
  const auto s = nn::softmax_t(logits.value(), 1.0);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(logits.grad()[i], s[i] - p[i], 1e-12);
}

TEST(Ops, ReluDerivativeAtZeroIsZero) {
  nn::Tape<double> tape;
  auto x = tape.input(Tensor<double>::vector({-1.0, 0.0, 2.0}));
  tape.backward(nn::sum(nn::relu(x)));
  EXPECT_EQ(x.grad()[0], 0.0);
  EXPECT_EQ(x.grad()[1], 0.0);
  EXPECT_EQ(x.grad()[2], 1.0);
}

TEST(Ops, GatherScattersIntoGatheredRowsOnly) {
  nn::Tape<double> tape;
  auto table = tape.input(Tensor<double>::matrix(3, 2, {1, 2, 3, 4, 5, 6}));
  const long ids[] = {2, 2, -1};
  auto g = nn::gather_rows(table, std::span<const long>(ids));
  EXPECT_EQ(g.value()(2, 0), 0.0);
  tape.backward(nn::sum(g));
  EXPECT_EQ(table.grad()(0, 0), 0.0);
  EXPECT_EQ(table.grad()(1, 1), 0.0);
  EXPECT_EQ(table.grad()(2, 0), 2.0);
}

TEST(Ops, MaskedMeanIgnoresPadding) {
  nn::Tape<double> tape;
  std::vector<nn::Var<double>> hs = {tape.input(Tensor<double>::matrix(2, 1, {1, 10})),
                                     tape.input(Tensor<double>::matrix(2, 1, {3, 99}))};
  const std::size_t lengths[] = {2, 1};
  auto m = nn::masked_sequence_mean(std::span<const nn::Var<double>>(hs), std::span<const std::size_t>(lengths));
  EXPECT_EQ(m.value()(0, 0), 2.0);
  EXPECT_EQ(m.value()(1, 0), 10.0);
}

TEST(Ops, NonFiniteValuesAreRejected) {
  nn::Tape<double> tape;
  auto x = tape.input(Tensor<double>::vector({1e308, 1e308}));
  EXPECT_THROW(nn::scale(x, 10.0), NumericError);
}

TEST(Ops, TdLossTouchesOnlyTakenSlot) {
  nn::Tape<double> tape;
  auto q = tape.input(Tensor<double>::matrix(1, 3, {0.5, 1.0, -2.0}));
  auto loss = nn::squared_td_loss(q, 1, 0.25);
  EXPECT_NEAR(loss.value()[0], 0.5625, 1e-15);
  tape.backward(loss);
  EXPECT_EQ(q.grad()(0, 0), 0.0);
  EXPECT_NEAR(q.grad()(0, 1), 1.5, 1e-15);
  EXPECT_EQ(q.grad()(0, 2), 0.0);
}

TEST(Optim, SgdConvergesOnQuadratic) {
  // (theta - 3)^2 from 0 with lr 0.1 contracts the error by 0.8 per step.
  nn::Parameter<double> theta("theta", Tensor<double>::vector({0.0}));
  for (int i = 0; i < 100; ++i) {
    nn::Tape<double> tape;
    auto t = tape.param(theta);
    auto d = nn::add(t, tape.constant(Tensor<double>::vector({-3.0})));
    auto sq = nn::squared_td_loss(d, 0, 0.0);
    tape.backward(sq);
    nn::Parameter<double>* ps[] = {&theta};
    nn::sgd_update(std::span<nn::Parameter<double>* const>(ps), 0.1, 0.0);
  }
  EXPECT_NEAR(theta.value[0], 3.0, 1e-8);
}

TEST(Optim, ClipsGlobalNormAndSkipsFrozenRows) {
  nn::Parameter<double> a("a", Tensor<double>::matrix(2, 1, {0, 0}));
  nn::Parameter<double> b("b", Tensor<double>::vector({0}));
  a.grad = Tensor<double>::matrix(2, 1, {3, 0});
  b.grad = Tensor<double>::vector({4});
  a.freeze_row(1);
  nn::Parameter<double>* ps[] = {&a, &b};
  EXPECT_DOUBLE_EQ(nn::gradient_norm(std::span<nn::Parameter<double>* const>(ps)), 5.0);
  nn::sgd_update(std::span<nn::Parameter<double>* const>(ps), 1.0, 1.0);
  EXPECT_NEAR(a.value[0], -0.6, 1e-15);
  EXPECT_EQ(a.value[1], 0.0);
  EXPECT_NEAR(b.value[0], -0.8, 1e-15);
  EXPECT_EQ(a.grad[0], 0.0);
  EXPECT_THROW(nn::sgd_update(std::span<nn::Parameter<double>* const>(ps), 0.0, 1.0), NumericError);
}

TEST(Optim, FrozenRowsStillReceiveGradient) {
  nn::Parameter<double> table("e", Tensor<double>::matrix(2, 2, {1, 2, 3, 4}));
  table.freeze_row(0);
  nn::Tape<double> tape;
  const long ids[] = {0, 1};
  tape.backward(nn::sum(nn::gather_rows(tape.param(table), std::span<const long>(ids))));
  EXPECT_EQ(table.grad(0, 0), 1.0);
  nn::Parameter<double>* ps[] = {&table};
  nn::sgd_update(std::span<nn::Parameter<double>* const>(ps), 0.5, 0.0);
  EXPECT_EQ(table.value(0, 0), 1.0);
  EXPECT_EQ(table.value(1, 0), 2.5);
}

TEST(Lstm, ForwardMatchesScalarReference) {
  Rng rng(2);
  const std::size_t d = 3, H = 2;
  nn::LstmBundle<double> w{nn::Parameter<double>("wx", random_tensor({d, 4 * H}, rng)),
                           nn::Parameter<double>("wh", random_tensor({H, 4 * H}, rng)),
                           nn::Parameter<double>("b", random_tensor({4 * H}, rng))};
  const auto x = random_tensor({1, d}, rng);
  const auto h0 = random_tensor({1, H}, rng);
  const auto c0 = random_tensor({1, H}, rng);
  nn::Tape<double> tape;
  auto [h, c] = nn::lstm_step(w, tape.constant(x), tape.constant(h0), tape.constant(c0));
  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  for (std::size_t k = 0; k < H; ++k) {
    double z[4];
    for (std::size_t g = 0; g < 4; ++g) {
      z[g] = w.b.value[g * H + k];
      for (std::size_t j = 0; j < d; ++j) z[g] += x[j] * w.wx.value(j, g * H + k);
      for (std::size_t j = 0; j < H; ++j) z[g] += h0[j] * w.wh.value(j, g * H + k);
    }
    const double cn = sig(z[1]) * c0[k] + sig(z[0]) * std::tanh(z[2]);
    EXPECT_NEAR(c.value()[k], cn, 1e-12);
    EXPECT_NEAR(h.value()[k], sig(z[3]) * std::tanh(cn), 1e-12);
  }
}

TEST(Network, InferenceMatchesTapeForward) {
  auto c = make_net_case(31);
  nn::Tape<double> tape;
  auto q = c.net.forward(tape, std::span<const env::TokenSeq>(c.seqs), 0);
  auto [qa, qo] = c.net.q_values(std::span<const env::TokenSeq>(c.seqs), 0);
  for (std::size_t i = 0; i < qa.size(); ++i) EXPECT_NEAR(qa[i], q.q_action.value()[i], 1e-12);
  for (std::size_t i = 0; i < qo.size(); ++i) EXPECT_NEAR(qo[i], q.q_object.value()[i], 1e-12);
}

TEST(Network, PaddingDoesNotLeakAcrossBatchRows) {
  auto c = make_net_case(8);
  const env::TokenSeq shorter = {1};
  const env::TokenSeq longer = {1, 2, 3, 4, 5};
  std::vector<env::TokenSeq> alone = {shorter};
  std::vector<env::TokenSeq> mixed = {shorter, longer};
  nn::Tape<double> t1, t2;
  auto a = c.net.forward(t1, std::span<const env::TokenSeq>(alone), 0);
  auto b = c.net.forward(t2, std::span<const env::TokenSeq>(mixed), 0);
  for (std::size_t k = 0; k < a.q_action.value().cols(); ++k) {
    EXPECT_NEAR(a.q_action.value()(0, k), b.q_action.value()(0, k), 1e-14);
  }
}

}  // namespace
}  // namespace tgpd::testing
