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

// Kernel temporal segmentation: choose cut points that minimise the
// within-segment kernel scatter plus a penalty on the number of segments.

#include <cstddef>
#include <string>
#include <vector>

#include "vjmht/autodiff.hpp"
#include "vjmht/video.hpp"

namespace vjmht::seg {

struct Kernel {
  enum class Kind { linear, rbf };
  Kind kind = Kind::linear;
  double sigma = 1.0;  // rbf bandwidth

  static Kernel linear() { return {}; }
  static Kernel rbf(double sigma) { return {Kind::rbf, sigma}; }
};

struct KtsConfig {
  std::size_t max_segments = 40;
  double penalty_coefficient = 1.0;
  Kernel kernel;

  void validate() const;
};

/// K[i, j] = <f_i, f_j> or exp(-||f_i - f_j||^2 / (2 sigma^2)).
ad::Tensor gram_matrix(const ad::Tensor& features, const Kernel& kernel);

/// O(1) within-segment scatter queries backed by prefix sums of a gram
/// matrix.
class SegmentCost {
 public:
  explicit SegmentCost(const ad::Tensor& gram);

  std::size_t frames() const { return n_; }

  /// sum_{t in [a,b)} K[t,t] - (1/(b-a)) sum_{t,u in [a,b)} K[t,u].
  double operator()(std::size_t a, std::size_t b) const;

 private:
  std::size_t n_ = 0;
  std::vector<double> diag_;   // diag_[i] = sum_{t<i} K[t,t]
  std::vector<double> block_;  // (n+1)^2, block_[i][j] = sum_{t<i,u<j} K[t,u]
};

struct KtsSolution {
  /// cost[m - 1] is the optimal scatter with exactly m segments.
  std::vector<double> cost;
  /// cuts[m - 1] is the matching partition.
  std::vector<ShotBoundaries> cuts;
  /// cost + penalty for each m.
  std::vector<double> objective;
  std::size_t best_segments = 0;

  const ShotBoundaries& best() const { return cuts[best_segments - 1]; }
};

/// Penalty m (log(M/m) + 1) scaled by the configured coefficient.
double segment_penalty(std::size_t segments, std::size_t frames, double coefficient);

/// Dynamic programme over all segment counts 1..min(max_segments, M).
/// Ties keep the earliest cut.
KtsSolution kts_solve(const ad::Tensor& features, const KtsConfig& cfg);

/// Cuts with the smallest penalised cost.
ShotBoundaries kts(const ad::Tensor& features, const KtsConfig& cfg = {});

/// Optimal partition into exactly `segments` pieces.
ShotBoundaries kts_fixed(const ad::Tensor& features, std::size_t segments, const Kernel& kernel = {});

}  // namespace vjmht::seg
