// Copyright 2026 The VJMHT Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "test_util.hpp"
#include "vjmht/error.hpp"
#include "vjmht/autodiff.hpp"

namespace ad = vjmht::ad;
using ad::Tape;
using ad::Tensor;
using ad::Var;
using vjmht::testing::max_grad_error;
using vjmht::testing::random_tensor;

TEST(Matmul, IdentityLeft) {
  Tape tape;
  const Var a = tape.constant(Tensor(2, 2, {1, 0, 0, 1}));
  const Var b = tape.constant(Tensor(2, 2, {1, 2, 3, 4}));
  EXPECT_EQ(ad::matmul(a, b).value(), Tensor(2, 2, {1, 2, 3, 4}));
  EXPECT_EQ(ad::matmul(b, a).value(), Tensor(2, 2, {1, 2, 3, 4}));
}

TEST(Matmul, MatchesTripleLoop) {
  std::mt19937_64 rng(3);
  const Tensor a = random_tensor(3, 4, rng), b = random_tensor(4, 2, rng);
  Tape tape;
  const Tensor c = ad::matmul(tape.constant(a), tape.constant(b)).value();
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < 4; ++t) s += a(i, t) * b(t, j);
      EXPECT_NEAR(c(i, j), s, 1e-12);
    }
  }
}

TEST(Matmul, ShapeMismatchThrows) {
  Tape tape;
  EXPECT_THROW(ad::matmul(tape.constant(Tensor(2, 3)), tape.constant(Tensor(2, 3))), vjmht::DimensionError);
}

TEST(Softmax, Examples) {
  Tape tape;
  const Tensor s1 = ad::softmax(tape.constant(Tensor::row({0, 0}))).value();
  EXPECT_DOUBLE_EQ(s1[0], 0.5);
  EXPECT_DOUBLE_EQ(s1[1], 0.5);
  const Tensor s2 = ad::softmax(tape.constant(Tensor::row({0, std::log(3.0)}))).value();
  EXPECT_NEAR(s2[0], 0.25, 1e-15);
  EXPECT_NEAR(s2[1], 0.75, 1e-15);
  const std::vector<std::uint8_t> allowed{1, 1, 0};
  const Tensor s3 = ad::softmax(tape.constant(Tensor::row({5, 5, 5})), allowed).value();
  EXPECT_EQ(s3[0], 0.5);
  EXPECT_EQ(s3[1], 0.5);
  EXPECT_EQ(s3[2], 0.0);
}

TEST(Softmax, RowsSumToOneAndMaskedExactZero) {
  std::mt19937_64 rng(5);
  const Tensor x = random_tensor(6, 6, rng, 10.0);
  std::vector<std::uint8_t> allowed(36);
  std::bernoulli_distribution coin(0.5);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) allowed[i * 6 + j] = i == j || coin(rng);
  }
  Tape tape;
  const Tensor s = ad::softmax(tape.constant(x), allowed).value();
  for (std::size_t i = 0; i < 6; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < 6; ++j) {
      total += s(i, j);
      if (!allowed[i * 6 + j]) EXPECT_EQ(s(i, j), 0.0);
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

TEST(Softmax, FullyMaskedRowThrows) {
  Tape tape;
  const std::vector<std::uint8_t> allowed{0, 0};
  EXPECT_THROW(ad::softmax(tape.constant(Tensor::row({1, 2})), allowed), vjmht::InvalidArgument);
}

TEST(LayerNorm, Examples) {
  Tape tape;
  const Var one = tape.constant(Tensor::row({1, 1}));
  const Var zero = tape.constant(Tensor::row({0, 0}));
  const Tensor a = ad::layer_norm(tape.constant(Tensor::row({1, -1})), one, zero, 1e-12).value();
  EXPECT_NEAR(a[0], 1.0, 1e-9);
  EXPECT_NEAR(a[1], -1.0, 1e-9);

  const Var g4 = tape.constant(Tensor(1, 4, 1.0)), b4 = tape.constant(Tensor(1, 4, 0.0));
  const Tensor c = ad::layer_norm(tape.constant(Tensor(1, 4, 7.5)), g4, b4).value();
  for (double v : c.data()) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(LayerNorm, StandardisesRows) {
  std::mt19937_64 rng(11);
  Tape tape;
  const Tensor y = ad::layer_norm(tape.constant(random_tensor(4, 8, rng, 3.0)), tape.constant(Tensor(1, 8, 1.0)),
                                  tape.constant(Tensor(1, 8, 0.0)), 1e-12)
                       .value();
  for (std::size_t i = 0; i < 4; ++i) {
    double m = 0.0, v = 0.0;
    for (std::size_t j = 0; j < 8; ++j) m += y(i, j) / 8;
    for (std::size_t j = 0; j < 8; ++j) v += (y(i, j) - m) * (y(i, j) - m) / 8;
    EXPECT_LT(std::abs(m), 1e-9);
    EXPECT_LT(std::abs(v - 1.0), 1e-6);
  }
}

TEST(Elementwise, ReluAndMse) {
  Tape tape;
  EXPECT_EQ(ad::relu(tape.constant(Tensor::row({-1, 0, 2}))).value(), Tensor::row({0, 0, 2}));

  Tensor x = Tensor::row({0.3, -2.0});
  x.set_requires_grad(true);
  {
    Tape t;
    const Var v = t.param(x);
    const Var loss = ad::mse(v, t.constant(x));
    EXPECT_EQ(loss.value()[0], 0.0);
    t.backward(loss);
    EXPECT_EQ(x.grad()[0], 0.0);
    EXPECT_EQ(x.grad()[1], 0.0);
  }
  Tensor a = Tensor::row({1, 1});
  a.set_requires_grad(true);
  Tape t;
  const Var loss = ad::mse(t.param(a), t.constant(Tensor::row({0, 0})));
  EXPECT_EQ(loss.value()[0], 1.0);
  t.backward(loss);
  EXPECT_EQ(a.grad()[0], 1.0);
  EXPECT_EQ(a.grad()[1], 1.0);
}

TEST(Backward, SumGivesOnes) {
  Tensor x = Tensor::row({1, 2, 3});
  x.set_requires_grad(true);
  Tape tape;
  tape.backward(ad::sum(tape.param(x)));
  for (double g : x.grad()) EXPECT_EQ(g, 1.0);
}

TEST(Backward, LinearLeastSquaresAnalytic) {
  std::mt19937_64 rng(2);
  Tensor w = random_tensor(3, 2, rng);
  const Tensor x = random_tensor(2, 1, rng), y = random_tensor(3, 1, rng);
  w.set_requires_grad(true);
  Tape tape;
  tape.backward(ad::mse(ad::matmul(tape.param(w), tape.constant(x)), tape.constant(y)));
  const Tensor r = ad::matmul(w, x);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      EXPECT_NEAR(w.grad()[i * 2 + j], 2.0 / 3.0 * (r[i] - y[i]) * x[j], 1e-14);
    }
  }
}

TEST(Backward, NonScalarLossThrows) {
  Tape tape;
  EXPECT_THROW(tape.backward(tape.constant(Tensor(2, 1))), vjmht::Error);
}

TEST(Tensor, NonFiniteRejected) {
  Tape tape;
  Tensor bad = Tensor::row({1.0, std::numeric_limits<double>::quiet_NaN()});
  EXPECT_FALSE(bad.all_finite());
  EXPECT_THROW(tape.constant(bad), vjmht::NumericError);
}

class OpGradients : public ::testing::Test {
 protected:
  std::mt19937_64 rng{17};
};

TEST_F(OpGradients, MatmulTransposeAdd) {
  std::vector<Tensor> in{random_tensor(3, 4, rng), random_tensor(4, 2, rng), random_tensor(3, 2, rng)};
  EXPECT_LT(max_grad_error(in,
                           [](Tape&, const std::vector<Var>& v) {
                             return ad::sub(ad::add(ad::matmul(v[0], v[1]), v[2]),
                                            ad::scale(ad::transpose(ad::matmul(ad::transpose(v[1]), ad::transpose(v[0]))), 0.25));
                           }),
            1e-4);
}

TEST_F(OpGradients, RowOps) {
  std::vector<Tensor> in{random_tensor(4, 3, rng), random_tensor(1, 3, rng), random_tensor(4, 1, rng)};
  EXPECT_LT(max_grad_error(in,
                           [](Tape&, const std::vector<Var>& v) {
                             return ad::add_scalar(ad::scale(ad::mul_rows(ad::add_row(v[0], v[1]), v[2]), 0.7), 0.1);
                           }),
            1e-4);
}

TEST_F(OpGradients, ReluSquare) {
  std::vector<Tensor> in{random_tensor(3, 5, rng)};
  EXPECT_LT(max_grad_error(in, [](Tape&, const std::vector<Var>& v) { return ad::square(ad::relu(v[0])); }), 1e-4);
}

TEST_F(OpGradients, MaskedSoftmax) {
  std::vector<Tensor> in{random_tensor(3, 3, rng)};
  const std::vector<std::uint8_t> allowed{1, 0, 1, 1, 1, 0, 0, 1, 1};
  EXPECT_LT(max_grad_error(in, [&](Tape&, const std::vector<Var>& v) { return ad::softmax(v[0], allowed); }), 1e-4);
}

TEST_F(OpGradients, LayerNorm) {
  std::vector<Tensor> in{random_tensor(3, 6, rng), random_tensor(1, 6, rng), random_tensor(1, 6, rng)};
  EXPECT_LT(max_grad_error(in, [](Tape&, const std::vector<Var>& v) { return ad::layer_norm(v[0], v[1], v[2]); }),
            1e-4);
}

TEST_F(OpGradients, ConcatSliceGather) {
  std::vector<Tensor> in{random_tensor(2, 3, rng), random_tensor(3, 3, rng), random_tensor(2, 2, rng)};
  EXPECT_LT(max_grad_error(in,
                           [](Tape&, const std::vector<Var>& v) {
                             const Var rows = ad::concat_rows({v[0], v[1]});
                             const Var picked = ad::gather_rows(rows, {4, 0, 0, 2});
                             const Var cols = ad::concat_cols({ad::slice_rows(picked, 1, 2), v[2]});
                             return ad::slice_cols(cols, 1, 3);
                           }),
            1e-4);
}

TEST_F(OpGradients, Reductions) {
  std::vector<Tensor> in{random_tensor(3, 3, rng)};
  EXPECT_LT(max_grad_error(in,
                           [](Tape&, const std::vector<Var>& v) {
                             return ad::concat_cols({ad::sum(v[0]), ad::mean(ad::square(v[0]))});
                           }),
            1e-4);
}

TEST(Tape, ReplayIsBitIdentical) {
  auto run = [] {
    std::mt19937_64 rng(9);
    Tensor w = random_tensor(4, 4, rng);
    const Tensor x = random_tensor(3, 4, rng);
    w.set_requires_grad(true);
    Tape tape;
    const Var y = ad::softmax(ad::matmul(tape.constant(x), tape.param(w)));
    const Var loss = ad::mean(ad::square(y));
    tape.backward(loss);
    return std::make_pair(loss.value()[0], std::vector<double>(w.grad().begin(), w.grad().end()));
  };
  EXPECT_EQ(run(), run());
}

TEST(Helpers, RoundToFloat) {
  Tensor t = Tensor::row({0.1, 1.0 / 3.0});
  ad::round_to_float(t);
  EXPECT_EQ(t[0], static_cast<double>(0.1f));
  EXPECT_EQ(t[1], static_cast<double>(1.0f / 3.0f));
}
