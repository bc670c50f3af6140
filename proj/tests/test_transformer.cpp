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
#include <random>

#include "test_util.hpp"
#include "vjmht/error.hpp"
#include "vjmht/transformer.hpp"

namespace ad = vjmht::ad;
namespace nn = vjmht::nn;
using ad::AttentionMask;
using ad::Tape;
using ad::Tensor;
using ad::Var;
using vjmht::testing::random_tensor;

namespace {

// Straight-line reference pieces on plain tensors.
Tensor ref_softmax_rows(Tensor x, const AttentionMask& mask) {
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double mx = -1e300;
    for (std::size_t j = 0; j < x.cols(); ++j) {
      if (mask.allowed(i, j)) mx = std::max(mx, x(i, j));
    }
    double z = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) {
      x(i, j) = mask.allowed(i, j) ? std::exp(x(i, j) - mx) : 0.0;
      z += x(i, j);
    }
    for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) /= z;
  }
  return x;
}

Tensor ref_transpose(const Tensor& a) {
  Tensor t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  }
  return t;
}

Tensor ref_mha(const Tensor& x, const AttentionMask& mask, const nn::EncoderLayerParams& p) {
  const std::size_t n = x.rows(), d = x.cols(), h = p.heads(), dh = d / h;
  Tensor cat(n, d);
  for (std::size_t k = 0; k < h; ++k) {
    const Tensor q = ad::matmul(x, p.wq[k]), kk = ad::matmul(x, p.wk[k]), v = ad::matmul(x, p.wv[k]);
    Tensor logits = ad::matmul(q, ref_transpose(kk));
    for (double& l : logits.data()) l /= std::sqrt(static_cast<double>(dh));
    const Tensor head = ad::matmul(ref_softmax_rows(logits, mask), v);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < dh; ++j) cat(i, k * dh + j) = head(i, j);
    }
  }
  return ad::matmul(cat, p.wo);
}

Tensor ref_ffn(const Tensor& x, const nn::EncoderLayerParams& p) {
  Tensor out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    std::vector<double> hidden(p.ffn());
    for (std::size_t k = 0; k < p.ffn(); ++k) {
      double s = p.b1[k];
      for (std::size_t j = 0; j < x.cols(); ++j) s += x(i, j) * p.w1(j, k);
      hidden[k] = std::max(0.0, s);
    }
    for (std::size_t j = 0; j < x.cols(); ++j) {
      double s = p.b2[j];
      for (std::size_t k = 0; k < p.ffn(); ++k) s += hidden[k] * p.w2(k, j);
      out(i, j) = s;
    }
  }
  return out;
}

nn::EncoderLayerParams random_layer(std::size_t d, std::size_t heads, std::size_t ffn, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto p = nn::EncoderLayerParams::init({d, heads, ffn, 1}, rng);
  // Non-trivial norms and biases so every parameter matters.
  for (auto* t : {&p.b1, &p.b2, &p.ln1_bias, &p.ln2_bias}) *t = random_tensor(1, t->cols(), rng, 0.3);
  for (auto* t : {&p.ln1_gain, &p.ln2_gain}) {
    *t = random_tensor(1, t->cols(), rng, 0.2);
    for (double& g : t->data()) g += 1.0;
  }
  return p;
}

AttentionMask random_mask(std::size_t n, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.6);
  std::vector<std::uint8_t> bits(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) bits[i * n + j] = i == j || coin(rng);
  }
  return AttentionMask(n, bits);
}

}  // namespace

TEST(PositionalEncoding, FirstRowAndAnalyticRow) {
  const Tensor pe = nn::sinusoidal_positional_encoding(2, 4);
  EXPECT_EQ(pe.row_span(0)[0], 0.0);
  EXPECT_EQ(pe.row_span(0)[1], 1.0);
  EXPECT_EQ(pe.row_span(0)[2], 0.0);
  EXPECT_EQ(pe.row_span(0)[3], 1.0);
  EXPECT_NEAR(pe(1, 0), std::sin(1.0), 1e-15);
  EXPECT_NEAR(pe(1, 1), std::cos(1.0), 1e-15);
  EXPECT_NEAR(pe(1, 2), std::sin(0.01), 1e-15);
  EXPECT_NEAR(pe(1, 3), std::cos(0.01), 1e-15);
}

TEST(PositionalEncoding, RangeAndOddDim) {
  const Tensor pe = nn::sinusoidal_positional_encoding(1000, 512);
  for (double v : pe.data()) {
    EXPECT_GE(v, -1.0);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_THROW(nn::sinusoidal_positional_encoding(3, 5), vjmht::InvalidArgument);
}

TEST(MultiHeadAttention, SingleToken) {
  const auto p = random_layer(4, 1, 8, 1);
  std::mt19937_64 rng(2);
  const Tensor x = random_tensor(1, 4, rng);
  Tape tape;
  const Var xv = tape.constant(x);
  std::vector<Tensor> weights;
  const Tensor out =
      nn::multi_head_attention(xv, xv, xv, AttentionMask::full(1), nn::bind(tape, p), &weights).value();
  EXPECT_EQ(weights.at(0)[0], 1.0);
  const Tensor expect = ad::matmul(ad::matmul(x, p.wv[0]), p.wo);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(out[j], expect[j], 1e-14);
}

TEST(MultiHeadAttention, IdenticalTokensSplitEvenly) {
  const auto p = random_layer(4, 2, 8, 3);
  Tensor x(2, 4);
  for (std::size_t j = 0; j < 4; ++j) x(0, j) = x(1, j) = 0.25 * static_cast<double>(j) - 0.3;
  Tape tape;
  const Var xv = tape.constant(x);
  std::vector<Tensor> weights;
  nn::multi_head_attention(xv, xv, xv, AttentionMask::full(2), nn::bind(tape, p), &weights);
  ASSERT_EQ(weights.size(), 2u);
  for (const auto& w : weights) {
    for (double v : w.data()) EXPECT_DOUBLE_EQ(v, 0.5);
  }
}

TEST(MultiHeadAttention, MatchesStraightLineOracle) {
  const auto p = random_layer(4, 2, 8, 4);
  std::mt19937_64 rng(5);
  const Tensor x = random_tensor(3, 4, rng);
  for (const auto& mask : {AttentionMask::full(3), random_mask(3, rng)}) {
    Tape tape;
    const Var xv = tape.constant(x);
    const Tensor got = nn::multi_head_attention(xv, xv, xv, mask, nn::bind(tape, p)).value();
    const Tensor want = ref_mha(x, mask, p);
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-12);
  }
}

TEST(FeedForward, DeadReluGivesBias) {
  auto p = random_layer(4, 2, 6, 6);
  p.w1 = Tensor(4, 6);
  p.b1 = Tensor(1, 6);
  p.b2 = Tensor::row({1.5, -2, 0, 3});
  std::mt19937_64 rng(7);
  Tape tape;
  const Tensor y = nn::feed_forward(tape.constant(random_tensor(3, 4, rng)), nn::bind(tape, p)).value();
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(y(i, j), p.b2[j]);
  }
}

TEST(FeedForward, PositionwiseAndLoopOracle) {
  const auto p = random_layer(4, 2, 6, 8);
  std::mt19937_64 rng(9);
  const Tensor x = random_tensor(5, 4, rng);
  Tape tape;
  const auto vars = nn::bind(tape, p);
  const Tensor all = nn::feed_forward(tape.constant(x), vars).value();
  const Tensor want = ref_ffn(x, p);
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_NEAR(all[i], want[i], 1e-12);
  const Tensor row2 = nn::feed_forward(ad::slice_rows(tape.constant(x), 2, 1), vars).value();
  for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(row2[j], all(2, j));
}

TEST(EncoderLayer, ShapePreserved) {
  const auto p = random_layer(6, 3, 10, 10);
  std::mt19937_64 rng(11);
  for (std::size_t n : {1u, 2u, 7u}) {
    Tape tape;
    const Tensor y = nn::encoder_layer(tape.constant(random_tensor(n, 6, rng)), AttentionMask::full(n),
                                       nn::bind(tape, p))
                         .value();
    EXPECT_EQ(y.rows(), n);
    EXPECT_EQ(y.cols(), 6u);
  }
}

TEST(EncoderLayer, PermutationEquivariant) {
  const auto p = random_layer(4, 2, 8, 12);
  std::mt19937_64 rng(13);
  const std::size_t n = 5;
  const Tensor x = random_tensor(n, 4, rng);
  const AttentionMask mask = random_mask(n, rng);
  const std::vector<std::size_t> perm{3, 0, 4, 1, 2};  // new row k holds old row perm[k]
  Tensor xp(n, 4);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < 4; ++j) xp(k, j) = x(perm[k], j);
  }
  Tape tape;
  const auto vars = nn::bind(tape, p);
  const Tensor y = nn::encoder_layer(tape.constant(x), mask, vars).value();
  const Tensor yp = nn::encoder_layer(tape.constant(xp), mask.permuted(perm), vars).value();
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(yp(k, j), y(perm[k], j), 1e-12);
  }
}

TEST(EncoderLayer, MaskedTokenHasNoInfluence) {
  const auto p = random_layer(4, 2, 8, 14);
  std::mt19937_64 rng(15);
  const std::size_t n = 4, hidden = 2;
  std::vector<std::uint8_t> bits(n * n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (i != hidden) bits[i * n + hidden] = 0;
  }
  const AttentionMask mask(n, bits);
  const Tensor x = random_tensor(n, 4, rng);
  Tensor x2 = x;
  for (std::size_t j = 0; j < 4; ++j) x2(hidden, j) += 3.0 * static_cast<double>(j + 1);
  Tape tape;
  const auto vars = nn::bind(tape, p);
  const Tensor y = nn::encoder_layer(tape.constant(x), mask, vars).value();
  const Tensor y2 = nn::encoder_layer(tape.constant(x2), mask, vars).value();
  for (std::size_t i = 0; i < n; ++i) {
    if (i == hidden) continue;
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(y(i, j), y2(i, j));
  }
}

TEST(EncoderStack, ZeroOneTwoLayers) {
  std::mt19937_64 rng(16);
  const Tensor x = random_tensor(3, 4, rng);
  const AttentionMask mask = random_mask(3, rng);
  nn::EncoderStackParams stack;
  stack.layers = {random_layer(4, 2, 8, 17), random_layer(4, 2, 8, 18)};
  Tape tape;
  const auto vars = nn::bind(tape, stack);
  const Var xv = tape.constant(x);

  EXPECT_EQ(nn::encoder_stack(xv, mask, {}).value(), x);
  // value() refers into the tape, so copy before recording more nodes.
  const Tensor one = nn::encoder_stack(xv, mask, {vars[0]}).value();
  EXPECT_EQ(one, nn::encoder_layer(xv, mask, vars[0]).value());
  nn::AttentionTrace trace;
  const Tensor two = nn::encoder_stack(xv, mask, vars, &trace).value();
  EXPECT_EQ(two, nn::encoder_layer(nn::encoder_layer(xv, mask, vars[0]), mask, vars[1]).value());

  ASSERT_EQ(trace.layers.size(), 2u);
  for (const auto& layer : trace.layers) {
    ASSERT_EQ(layer.size(), 2u);
    for (const auto& w : layer) {
      for (std::size_t i = 0; i < 3; ++i) {
        double total = 0.0;
        for (std::size_t j = 0; j < 3; ++j) {
          total += w(i, j);
          if (!mask.allowed(i, j)) EXPECT_EQ(w(i, j), 0.0);
        }
        EXPECT_NEAR(total, 1.0, 1e-9);
      }
    }
  }
}

TEST(EncoderStack, InputGradientMatchesFiniteDifferences) {
  nn::EncoderStackParams stack;
  stack.layers = {random_layer(4, 2, 8, 19), random_layer(4, 2, 8, 20)};
  std::mt19937_64 rng(21);
  const AttentionMask mask = random_mask(4, rng);
  std::vector<Tensor> in{random_tensor(4, 4, rng)};
  const double err = vjmht::testing::max_grad_error(in, [&](Tape& tape, const std::vector<Var>& v) {
    return nn::encoder_stack(v[0], mask, nn::bind(tape, std::as_const(stack)));
  });
  EXPECT_LT(err, 1e-4);
}

TEST(EncoderLayer, ParameterGradientsMatchFiniteDifferences) {
  auto p = random_layer(4, 2, 6, 22);
  std::mt19937_64 rng(23);
  const AttentionMask mask = random_mask(3, rng);
  const Tensor x = random_tensor(3, 4, rng);
  std::vector<Tensor> in;
  p.visit("", [&](const std::string&, Tensor& t) { in.push_back(t); });
  const double err = vjmht::testing::max_grad_error(in, [&](Tape& tape, const std::vector<Var>& v) {
    nn::EncoderLayerVars lv;
    std::size_t k = 0;
    for (std::size_t h = 0; h < 2; ++h) {
      lv.wq.push_back(v[k++]);
      lv.wk.push_back(v[k++]);
      lv.wv.push_back(v[k++]);
    }
    lv.wo = v[k++];
    lv.w1 = v[k++];
    lv.b1 = v[k++];
    lv.w2 = v[k++];
    lv.b2 = v[k++];
    lv.ln1_gain = v[k++];
    lv.ln1_bias = v[k++];
    lv.ln2_gain = v[k++];
    lv.ln2_bias = v[k++];
    return nn::encoder_layer(tape.constant(x), mask, lv);
  });
  EXPECT_LT(err, 1e-4);
}

TEST(StackConfig, HeadsMustDivideDim) {
  std::mt19937_64 rng(0);
  EXPECT_THROW(nn::EncoderLayerParams::init({6, 4, 8, 1}, rng), vjmht::InvalidArgument);
}
