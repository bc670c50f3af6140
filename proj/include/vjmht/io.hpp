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

// VJMF feature container and the dataset manifest.
//
// VJMF layout, all little-endian:
//   0..3   magic "VJMF"
//   4..5   u16 version = 1
//   6..7   u16 reserved = 0
//   8..11  u32 rows (M)
//   12..15 u32 cols (d)
//   16..   M*d float32, row-major

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vjmht/autodiff.hpp"
#include "vjmht/segmentation.hpp"
#include "vjmht/video.hpp"

namespace vjmht::io {

inline constexpr double kExpectedFps = 2.0;

std::string encode_vjmf(const ad::Tensor& t);
ad::Tensor decode_vjmf(const std::string& bytes);

void write_vjmf(const std::filesystem::path& path, const ad::Tensor& t);
/// Throws FormatError with the offending byte offset on malformed input.
ad::Tensor load_features(const std::filesystem::path& path);

struct ManifestEntry {
  std::string video_id;
  std::filesystem::path features_path;
  std::optional<std::filesystem::path> gt_scores_path;
  std::optional<std::filesystem::path> user_summaries_path;
  double fps_after_subsample = kExpectedFps;
  std::optional<int> cluster_id;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  /// Directory relative paths are resolved against; cached cuts live in
  /// <base_dir>/cuts/.
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::filesystem::path& p) const;
  std::filesystem::path cuts_path(const std::string& video_id) const;
};

/// Parses and validates (unique ids, declared 2 fps). Files are checked by
/// load_dataset.
DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

/// Scales scores by their maximum so they lie in [0, 1] (no-op if max <= 0).
std::vector<double> normalize_scores(std::vector<double> scores);

/// Loads features and annotations of every entry. Ground truth is
/// normalised; user summaries are stored one annotator per column.
std::vector<VideoRecord> load_dataset(const DatasetManifest& manifest);

std::vector<std::size_t> read_cuts_json(const std::filesystem::path& path);
void write_cuts_json(const std::filesystem::path& path, const ShotBoundaries& cuts);

/// Reuses <base_dir>/cuts/<id>.json when present, otherwise runs KTS and
/// writes the cache.
void ensure_boundaries(const DatasetManifest& manifest, std::vector<VideoRecord>& videos,
                       const seg::KtsConfig& cfg);

}  // namespace vjmht::io
