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

#include <numeric>
#include <random>

#include "vjmht/error.hpp"
#include "vjmht/summarize.hpp"

namespace summary = vjmht::summary;
using vjmht::ShotBoundaries;

namespace {

// Best subset value by enumeration.
double brute_best(const std::vector<double>& v, const std::vector<std::int64_t>& w, std::int64_t cap) {
  double best = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << v.size()); ++mask) {
    double val = 0.0;
    std::int64_t wt = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (mask >> i & 1u) {
        val += v[i];
        wt += w[i];
      }
    }
    if (wt <= cap) best = std::max(best, val);
  }
  return best;
}

}  // namespace

TEST(Knapsack, Examples) {
  const std::vector<double> v{0.9, 0.8, 0.3};
  const std::vector<std::int64_t> w{10, 6, 5};
  EXPECT_EQ(summary::knapsack_select(v, w, 11), (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(summary::knapsack_select(v, w, 21), (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_TRUE(summary::knapsack_select(v, w, 0).empty());
}

TEST(Knapsack, NegativeValuesNeverChosenAndErrors) {
  const std::vector<double> v{-1.0, 0.5};
  const std::vector<std::int64_t> w{1, 1};
  EXPECT_EQ(summary::knapsack_select(v, w, 5), (std::vector<std::size_t>{1}));
  const std::vector<std::int64_t> bad{1, -1};
  EXPECT_THROW(summary::knapsack_select(v, bad, 5), vjmht::InvalidArgument);
  EXPECT_THROW(summary::knapsack_select(v, w, -1), vjmht::InvalidArgument);
  const std::vector<std::int64_t> short_w{1};
  EXPECT_THROW(summary::knapsack_select(v, short_w, 5), vjmht::DimensionError);
}

TEST(Knapsack, TieBreaksOnWeightThenIndex) {
  // {0} and {1,2} share value 1; {1,2} is lighter.
  EXPECT_EQ(summary::knapsack_select(std::vector<double>{1, 0.5, 0.5}, std::vector<std::int64_t>{3, 1, 1}, 3),
            (std::vector<std::size_t>{1, 2}));
  // Equal value and weight: lexicographically smaller index list.
  EXPECT_EQ(summary::knapsack_select(std::vector<double>{1, 1, 1}, std::vector<std::int64_t>{3, 3, 3}, 4),
            (std::vector<std::size_t>{0}));
  EXPECT_EQ(summary::knapsack_select(std::vector<double>{0.5, 1, 0.5}, std::vector<std::int64_t>{1, 2, 1}, 2),
            (std::vector<std::size_t>{0, 2}));
  // A free zero-value item ties on value and weight; [0, 1] precedes [1].
  EXPECT_EQ(summary::knapsack_select(std::vector<double>{0, 1}, std::vector<std::int64_t>{0, 1}, 1),
            (std::vector<std::size_t>{0, 1}));
}

TEST(Knapsack, RandomMatchesBruteForce) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> n_dist(0, 10), w_dist(1, 12);
  std::uniform_int_distribution<int> v_dist(-4, 20);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = static_cast<std::size_t>(n_dist(rng));
    std::vector<double> v(n);
    std::vector<std::int64_t> w(n);
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = v_dist(rng) / 4.0;
      w[i] = w_dist(rng);
    }
    const std::int64_t cap = w_dist(rng) * 2;
    const auto sel = summary::knapsack_select(v, w, cap);
    double val = 0.0;
    std::int64_t wt = 0;
    for (auto i : sel) {
      val += v[i];
      wt += w[i];
    }
    EXPECT_LE(wt, cap);
    EXPECT_EQ(val, brute_best(v, w, cap));
    EXPECT_TRUE(std::is_sorted(sel.begin(), sel.end()));
  }
}

TEST(Summary, CapacityFloor) {
  EXPECT_EQ(summary::summary_capacity(0.15, 12), 1);
  EXPECT_EQ(summary::summary_capacity(0.15, 64), 9);
  EXPECT_EQ(summary::summary_capacity(0.15, 100), 15);
  EXPECT_EQ(summary::summary_capacity(1.0, 7), 7);
  EXPECT_THROW(summary::summary_capacity(0.0, 7), vjmht::InvalidArgument);
  EXPECT_THROW(summary::summary_capacity(1.5, 7), vjmht::InvalidArgument);
}

TEST(Summary, UniformScoresNothingFits) {
  const std::vector<double> scores(12, 0.5);
  const auto s = summary::generate_summary(scores, ShotBoundaries({0, 4, 8, 12}), 0.15);
  EXPECT_TRUE(s.selected_shots.empty());
  EXPECT_EQ(s.selected_frames(), 0u);
}

TEST(Summary, PicksShotWithinBudget) {
  // Shot 0 (8 frames) exceeds floor(0.15 * 20) = 3, shot 1 (3 frames) fits.
  std::vector<double> scores(20, 0.1);
  for (std::size_t j = 0; j < 8; ++j) scores[j] = 0.9;
  const auto s = summary::generate_summary(scores, ShotBoundaries({0, 8, 11, 20}));
  EXPECT_EQ(s.selected_shots, (std::vector<std::size_t>{1}));
  EXPECT_EQ(s.runs(), (std::vector<std::pair<std::size_t, std::size_t>>{{8, 3}}));
}

TEST(Summary, ValueModes) {
  // mean: shot 1 (short, high) wins; sum: shot 0 (long, lower mean) wins.
  std::vector<double> scores{0.5, 0.5, 0.5, 0.5, 0.9, 0.9, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0,
                             0, 0, 0, 0, 0, 0, 0, 0, 0, 0};
  const ShotBoundaries cuts({0, 4, 6, 30});
  EXPECT_EQ(summary::generate_summary(scores, cuts, 0.15, summary::ValueMode::mean).selected_shots,
            (std::vector<std::size_t>{1}));
  EXPECT_EQ(summary::generate_summary(scores, cuts, 0.15, summary::ValueMode::sum).selected_shots,
            (std::vector<std::size_t>{0}));
}

TEST(Summary, RandomInstancesHonourBudgetAndOptimum) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> len(1, 9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<std::size_t> cuts{0};
    for (int i = 0; i < 6; ++i) cuts.push_back(cuts.back() + static_cast<std::size_t>(len(rng)));
    const ShotBoundaries b(cuts);
    std::vector<double> shot_val(6), frames;
    for (std::size_t i = 0; i < 6; ++i) {
      shot_val[i] = u(rng);
      for (std::size_t k = 0; k < b.length(i); ++k) frames.push_back(shot_val[i]);
    }
    const double gamma = 0.15 + 0.3 * u(rng);
    const auto s = summary::generate_summary(frames, b, gamma);
    const auto cap = summary::summary_capacity(gamma, b.frame_count());
    EXPECT_LE(static_cast<std::int64_t>(s.selected_frames()), cap);
    std::vector<std::int64_t> w;
    for (std::size_t i = 0; i < 6; ++i) w.push_back(static_cast<std::int64_t>(b.length(i)));
    double val = 0.0;
    for (auto i : s.selected_shots) val += shot_val[i];
    EXPECT_NEAR(val, brute_best(shot_val, w, cap), 1e-12);
    const auto shot = b.frame_to_shot();
    for (std::size_t j = 1; j < frames.size(); ++j) {
      if (shot[j] == shot[j - 1]) EXPECT_EQ(s.y[j], s.y[j - 1]);
    }
  }
}
