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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vjmht/autodiff.hpp"

namespace vjmht {

/// Shot cuts b_0 = 0 < b_1 < ... < b_P = M; shot i covers frames
/// [b_i, b_{i+1}).
class ShotBoundaries {
 public:
  ShotBoundaries() = default;
  /// Throws InvalidArgument unless the cuts are a valid partition.
  explicit ShotBoundaries(std::vector<std::size_t> cuts);

  static ShotBoundaries single(std::size_t frames);

  /// Inclusive 1-based (first, last) frame pairs, one per shot, as used by
  /// annotation tools that number frames from 1.
  static ShotBoundaries from_one_based_ranges(const std::vector<std::pair<std::size_t, std::size_t>>& ranges);
  std::vector<std::pair<std::size_t, std::size_t>> to_one_based_ranges() const;

  const std::vector<std::size_t>& cuts() const { return cuts_; }
  std::size_t shot_count() const { return cuts_.empty() ? 0 : cuts_.size() - 1; }
  std::size_t frame_count() const { return cuts_.empty() ? 0 : cuts_.back(); }
  std::size_t begin(std::size_t shot) const { return cuts_[shot]; }
  std::size_t end(std::size_t shot) const { return cuts_[shot + 1]; }
  std::size_t length(std::size_t shot) const { return cuts_[shot + 1] - cuts_[shot]; }

  /// Shot index of every frame.
  std::vector<std::size_t> frame_to_shot() const;

  friend bool operator==(const ShotBoundaries&, const ShotBoundaries&) = default;

 private:
  std::vector<std::size_t> cuts_;
};

/// One video's frame features plus whatever annotation is available.
struct VideoRecord {
  std::string id;
  ad::Tensor features;                          // M x d_f
  std::optional<std::vector<double>> gt_scores;  // length M, in [0, 1]
  std::vector<std::vector<std::uint8_t>> user_summaries;  // each length M
  std::optional<ShotBoundaries> boundaries;
  std::optional<int> cluster_id;

  std::size_t frame_count() const { return features.rows(); }
};

}  // namespace vjmht
