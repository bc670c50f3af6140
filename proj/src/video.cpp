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

#include "vjmht/video.hpp"

#include <string>

#include "vjmht/error.hpp"

namespace vjmht {

ShotBoundaries::ShotBoundaries(std::vector<std::size_t> cuts) : cuts_(std::move(cuts)) {
  if (cuts_.size() < 2) throw InvalidArgument("shot boundaries need at least one shot");
  if (cuts_.front() != 0) throw InvalidArgument("first cut must be frame 0");
  for (std::size_t i = 1; i < cuts_.size(); ++i) {
    if (cuts_[i] <= cuts_[i - 1]) {
      throw InvalidArgument("shot cuts must be strictly increasing (cut " + std::to_string(i) + ")");
    }
  }
}

ShotBoundaries ShotBoundaries::single(std::size_t frames) { return ShotBoundaries({0, frames}); }

ShotBoundaries ShotBoundaries::from_one_based_ranges(
    const std::vector<std::pair<std::size_t, std::size_t>>& ranges) {
  std::vector<std::size_t> cuts{0};
  for (const auto& [first, last] : ranges) {
    if (first != cuts.back() + 1 || last < first) {
      throw InvalidArgument("shot ranges must be contiguous, 1-based and non-empty");
    }
    cuts.push_back(last);
  }
  return ShotBoundaries(std::move(cuts));
}

std::vector<std::pair<std::size_t, std::size_t>> ShotBoundaries::to_one_based_ranges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < shot_count(); ++i) out.emplace_back(cuts_[i] + 1, cuts_[i + 1]);
  return out;
}

std::vector<std::size_t> ShotBoundaries::frame_to_shot() const {
  std::vector<std::size_t> idx(frame_count());
  for (std::size_t s = 0; s < shot_count(); ++s) {
    for (std::size_t f = cuts_[s]; f < cuts_[s + 1]; ++f) idx[f] = s;
  }
  return idx;
}

}  // namespace vjmht
