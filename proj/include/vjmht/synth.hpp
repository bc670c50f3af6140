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

// Synthetic co-summarization data with planted shot structure.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "vjmht/io.hpp"
#include "vjmht/video.hpp"

namespace vjmht::synth {

struct SynthConfig {
  std::uint64_t seed = 0;
  std::size_t n_videos = 8;
  std::size_t frames = 64;  // M per video
  std::size_t dim = 32;     // d_f
  std::size_t n_clusters = 4;
  std::size_t important_concepts = 3;    // per cluster
  std::size_t unimportant_concepts = 3;  // per cluster
  double noise = 0.1;                    // per-coordinate frame noise
  double gamma = 0.15;                   // budget the planted summary is built for

  void validate() const;
};

/// Every video holds two short important shots that together fill the
/// budget floor(gamma M) exactly, plus longer shots (about a third of them
/// important) too long to share the budget with a short one. Shot features
/// sit around concept centroids drawn per cluster; neighbouring shots never
/// share a concept. gt is 1 on important frames, and the single user summary
/// is the knapsack summary of gt, i.e. the two short shots.
///
/// Videos carry their planted boundaries, gt, user summary and cluster id.
/// Feature values are single-precision representable.
std::vector<VideoRecord> synth_videos(const SynthConfig& cfg);

/// Writes features/, gt/, user/ VJMF files and manifest.json under `dir`.
/// With `planted_cuts` the boundaries are also stored in the cuts cache so
/// that training reuses them instead of running KTS.
io::DatasetManifest write_dataset(const std::vector<VideoRecord>& videos, const std::filesystem::path& dir,
                                  bool planted_cuts = false);

}  // namespace vjmht::synth
