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

#include "vjmht/error.hpp"
#include "vjmht/evaluation.hpp"

namespace eval = vjmht::eval;
using Mask = std::vector<std::uint8_t>;

TEST(FMeasure, Examples) {
  const Mask gt{1, 1, 0, 0, 1};
  const auto same = eval::f_measure(gt, gt);
  EXPECT_EQ(same.precision, 1.0);
  EXPECT_EQ(same.recall, 1.0);
  EXPECT_EQ(same.f_measure, 1.0);

  Mask pred(40, 0), ref(40, 0);
  for (int j = 0; j < 10; ++j) pred[j] = 1;
  for (int j = 5; j < 25; ++j) ref[j] = 1;
  const auto r = eval::f_measure(pred, ref);
  EXPECT_EQ(r.precision, 0.5);
  EXPECT_EQ(r.recall, 0.25);
  EXPECT_NEAR(r.f_measure, 1.0 / 3.0, 1e-15);

  const auto disjoint = eval::f_measure(Mask{1, 0}, Mask{0, 1});
  EXPECT_EQ(disjoint.f_measure, 0.0);
  EXPECT_EQ(eval::f_measure(Mask{0, 0}, Mask{0, 1}).precision, 0.0);
  EXPECT_THROW(eval::f_measure(Mask{1, 0}, Mask{0, 0}), vjmht::InvalidArgument);
  EXPECT_THROW(eval::f_measure(Mask{1}, Mask{0, 1}), vjmht::DimensionError);
}

TEST(FMeasure, SymmetricWhenSizesMatch) {
  const Mask a{1, 1, 0, 0, 1, 0}, b{0, 1, 1, 0, 1, 0};
  EXPECT_EQ(eval::f_measure(a, b).f_measure, eval::f_measure(b, a).f_measure);
}

TEST(FMeasure, MultiAnnotator) {
  const Mask pred{1, 1, 0, 0, 0};
  const std::vector<Mask> one{{1, 0, 0, 0, 1}};
  EXPECT_EQ(eval::f_measure_multi(pred, one, eval::Aggregation::max), eval::f_measure(pred, one[0]).f_measure);
  EXPECT_EQ(eval::f_measure_multi(pred, one, eval::Aggregation::mean), eval::f_measure(pred, one[0]).f_measure);
  // Prediction frames 0..4 against two annotators of 5 frames each.
  Mask p(10, 0), g1(10, 0), g2(10, 0);
  for (int j = 0; j < 5; ++j) p[j] = 1;
  g1[0] = 1;
  for (int j = 5; j < 9; ++j) g1[j] = 1;  // overlap 1 -> F 0.2
  for (int j = 0; j < 3; ++j) g2[j] = 1;
  for (int j = 5; j < 7; ++j) g2[j] = 1;  // overlap 3 -> F 0.6
  const std::vector<Mask> two{g1, g2};
  EXPECT_NEAR(eval::f_measure_multi(p, two, eval::Aggregation::max), 0.6, 1e-15);
  EXPECT_NEAR(eval::f_measure_multi(p, two, eval::Aggregation::mean), 0.4, 1e-15);
  EXPECT_EQ(eval::f_measure_multi(g2, two, eval::Aggregation::max), 1.0);
}

TEST(Kendall, Examples) {
  const std::vector<double> a{1, 2, 3}, r{3, 2, 1};
  EXPECT_EQ(eval::kendall_tau(a, a), 1.0);
  EXPECT_EQ(eval::kendall_tau(r, a), -1.0);
  EXPECT_NEAR(eval::kendall_tau(std::vector<double>{1, 3, 2, 4}, std::vector<double>{1, 2, 3, 4}), 4.0 / 6.0, 1e-15);
  EXPECT_THROW(eval::kendall_tau(std::vector<double>{1, 1}, std::vector<double>{1, 2}), vjmht::InvalidArgument);
  EXPECT_THROW(eval::kendall_tau(std::vector<double>{1}, std::vector<double>{1}), vjmht::InvalidArgument);
}

TEST(Kendall, TieCorrection) {
  // tau-b for a = [1,1,2,3], b = [1,2,2,3]: nc=4, nd=0, 5 untied in each.
  EXPECT_NEAR(eval::kendall_tau(std::vector<double>{1, 1, 2, 3}, std::vector<double>{1, 2, 2, 3}), 4.0 / 5.0, 1e-15);
}

TEST(Spearman, Examples) {
  const std::vector<double> a{1, 2, 3, 4};
  EXPECT_NEAR(eval::spearman_rho(a, a), 1.0, 1e-15);
  EXPECT_NEAR(eval::spearman_rho(a, std::vector<double>{4, 3, 2, 1}), -1.0, 1e-15);
  EXPECT_NEAR(eval::spearman_rho(std::vector<double>{1, 2, 3, 5}, a), 1.0, 1e-15);
  EXPECT_EQ(eval::average_ranks(std::vector<double>{10, 20, 10, 5}), (std::vector<double>{2.5, 4, 2.5, 1}));
}

TEST(RankMetrics, InvariantUnderMonotoneMaps) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> d(1, 8);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> a(30), b(30);
    for (auto& x : a) x = d(rng);
    for (auto& x : b) x = d(rng);
    std::vector<double> a1 = a, a3 = a;
    for (auto& x : a1) x = 2 * x + 1;
    for (auto& x : a3) x = x * x * x;
    const double tau = eval::kendall_tau(a, b), rho = eval::spearman_rho(a, b);
    EXPECT_NEAR(eval::kendall_tau(a1, b), tau, 1e-12);
    EXPECT_NEAR(eval::kendall_tau(a3, b), tau, 1e-12);
    EXPECT_NEAR(eval::spearman_rho(a1, b), rho, 1e-12);
    EXPECT_NEAR(eval::spearman_rho(a3, b), rho, 1e-12);
    EXPECT_LE(std::abs(tau), 1.0);
    EXPECT_LE(std::abs(rho), 1.0);
  }
}

TEST(HumanBaseline, Examples) {
  const std::vector<double> a{1, 2, 3, 4}, rev{4, 3, 2, 1};
  const auto same = eval::human_baseline({a, a});
  EXPECT_NEAR(same.kendall_tau, 1.0, 1e-15);
  EXPECT_NEAR(same.spearman_rho, 1.0, 1e-15);
  const auto opposite = eval::human_baseline({a, rev});
  EXPECT_NEAR(opposite.kendall_tau, -1.0, 1e-15);
  EXPECT_NEAR(opposite.spearman_rho, -1.0, 1e-15);
  EXPECT_THROW(eval::human_baseline({a}), vjmht::InvalidArgument);
}

TEST(HumanBaseline, LoopOracle) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<std::vector<double>> ann(3, std::vector<double>(12));
  for (auto& v : ann) {
    for (auto& x : v) x = u(rng);
  }
  double tau = 0, rho = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    std::vector<double> rest(12, 0.0);
    for (std::size_t o = 0; o < 3; ++o) {
      if (o == k) continue;
      for (std::size_t j = 0; j < 12; ++j) rest[j] += ann[o][j] / 2.0;
    }
    tau += eval::kendall_tau(ann[k], rest) / 3.0;
    rho += eval::spearman_rho(ann[k], rest) / 3.0;
  }
  const auto got = eval::human_baseline(ann);
  EXPECT_NEAR(got.kendall_tau, tau, 1e-12);
  EXPECT_NEAR(got.spearman_rho, rho, 1e-12);
}

TEST(EvaluateVideo, ReportAndAggregation) {
  const Mask y{1, 1, 0, 0, 0, 0};
  const std::vector<double> scores{0.9, 0.9, 0.1, 0.1, 0.5, 0.5};
  const std::vector<Mask> users{{1, 1, 0, 0, 0, 0}, {0, 0, 0, 0, 1, 1}};
  const std::vector<double> gt{1, 1, 0, 0, 0.5, 0.5};
  const auto mean = eval::evaluate_video(y, scores, users, gt, eval::Aggregation::mean);
  EXPECT_EQ(mean.f_measure, 0.5);
  EXPECT_EQ(mean.f_measure_max, 1.0);
  EXPECT_EQ(mean.precision, 0.5);
  EXPECT_NEAR(mean.kendall_tau, 1.0, 1e-15);
  const auto max = eval::evaluate_video(y, scores, users, gt, eval::Aggregation::max);
  EXPECT_EQ(max.f_measure, 1.0);
  EXPECT_EQ(max.precision, 1.0);

  const auto flat = eval::evaluate_video(y, std::vector<double>(6, 0.3), users, gt);
  EXPECT_TRUE(std::isnan(flat.kendall_tau));
  const auto agg = eval::aggregate_reports({mean, flat});
  EXPECT_EQ(agg.f_measure, 0.5);
  EXPECT_NEAR(agg.kendall_tau, 1.0, 1e-15);

  // Without gt the mean of user summaries is the reference curve.
  const auto fallback = eval::evaluate_video(y, scores, users, {});
  EXPECT_EQ(eval::mean_annotation(users), (std::vector<double>{0.5, 0.5, 0, 0, 0.5, 0.5}));
  EXPECT_FALSE(std::isnan(fallback.kendall_tau));
}
