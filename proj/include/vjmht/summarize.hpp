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

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "vjmht/video.hpp"

namespace vjmht::summary {

/// Default summary length as a fraction of the video.
inline constexpr double kDefaultGamma = 0.15;

/// 0/1 knapsack by dynamic programming. Among subsets with maximal value the
/// one with the smallest total weight wins, then the lexicographically
/// smallest ascending index list. Returns ascending indices.
std::vector<std::size_t> knapsack_select(std::span<const double> values, std::span<const std::int64_t> weights,
                                         std::int64_t capacity);

enum class ValueMode { mean, sum };

struct SummaryMask {
  std::vector<std::uint8_t> y;              // per frame
  std::vector<std::size_t> selected_shots;  // ascending
  double gamma = kDefaultGamma;

  std::size_t selected_frames() const;
  /// [start, length] runs of selected frames.
  std::vector<std::pair<std::size_t, std::size_t>> runs() const;
};

/// floor(gamma * M), guarded against representation error in the product.
std::int64_t summary_capacity(double gamma, std::size_t frames);

/// Selects whole shots with the knapsack so that at most floor(gamma M)
/// frames are kept. Shot value is the mean (or sum) of its frame scores.
SummaryMask generate_summary(std::span<const double> frame_scores, const ShotBoundaries& cuts,
                             double gamma = kDefaultGamma, ValueMode mode = ValueMode::mean);

}  // namespace vjmht::summary
