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
#include <vector>

#include "vjmht/model.hpp"
#include "vjmht/video.hpp"

namespace vjmht::cluster {

using Point = std::vector<double>;

struct KMeansResult {
  std::vector<int> assignments;
  std::vector<Point> centroids;
  std::size_t iterations = 0;
  /// Within-cluster sum of squares after each assignment step.
  std::vector<double> inertia;
};

/// k-means++ seeding followed by Lloyd iterations until the assignment stops
/// changing or `max_iterations` is hit. An empty cluster is re-seeded at the
/// point farthest from its centroid. Deterministic for a given seed.
KMeansResult kmeans(const std::vector<Point>& points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iterations = 100);

/// Video-level descriptor used for grouping: r^1 of a single-video forward
/// pass when a model is given (the video needs boundaries), otherwise the
/// mean frame feature.
Point clustering_representation(const VideoRecord& video, const model::VjmhtParams* model = nullptr);

}  // namespace vjmht::cluster
