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

#include "vjmht/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "le_bytes.hpp"

namespace vjmht::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kHeader = 16;

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

std::string encode_vjmf(const ad::Tensor& t) {
  std::string out = "VJMF";
  detail::put_u16(out, 1);
  detail::put_u16(out, 0);
  detail::put_u32(out, static_cast<std::uint32_t>(t.rows()));
  detail::put_u32(out, static_cast<std::uint32_t>(t.cols()));
  out.reserve(kHeader + 4 * t.size());
  for (double v : t.data()) detail::put_f32(out, static_cast<float>(v));
  return out;
}

ad::Tensor decode_vjmf(const std::string& bytes) {
  if (bytes.size() < kHeader) {
    throw FormatError("VJMF truncated header: " + std::to_string(bytes.size()) + " of 16 bytes");
  }
  if (bytes.compare(0, 4, "VJMF") != 0) throw FormatError("VJMF bad magic at byte 0");
  if (const auto v = detail::get_u16(bytes, 4); v != 1) {
    throw FormatError("VJMF unsupported version " + std::to_string(v) + " at byte 4");
  }
  if (detail::get_u16(bytes, 6) != 0) throw FormatError("VJMF reserved field not zero at byte 6");
  const std::size_t rows = detail::get_u32(bytes, 8);
  const std::size_t cols = detail::get_u32(bytes, 12);
  const std::size_t expected = kHeader + 4 * rows * cols;
  if (bytes.size() != expected) {
    throw FormatError("VJMF length mismatch: expected " + std::to_string(expected) + " bytes, got " +
                      std::to_string(bytes.size()));
  }
  ad::Tensor t(rows, cols);
  for (std::size_t i = 0; i < rows * cols; ++i) {
    const std::size_t off = kHeader + 4 * i;
    const double v = detail::get_f32(bytes, off);
    if (!std::isfinite(v)) throw NumericError("VJMF non-finite value at byte " + std::to_string(off));
    t[i] = v;
  }
  return t;
}

void write_vjmf(const fs::path& path, const ad::Tensor& t) { write_file(path, encode_vjmf(t)); }

ad::Tensor load_features(const fs::path& path) {
  try {
    return decode_vjmf(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

fs::path DatasetManifest::resolve(const fs::path& p) const { return p.is_absolute() ? p : base_dir / p; }

fs::path DatasetManifest::cuts_path(const std::string& video_id) const {
  return base_dir / "cuts" / (video_id + ".json");
}

DatasetManifest read_manifest(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  DatasetManifest m;
  m.base_dir = path.parent_path();
  std::set<std::string> seen;
  try {
    for (const auto& e : j.at("videos")) {
      ManifestEntry entry;
      entry.video_id = e.at("video_id").get<std::string>();
      entry.features_path = e.at("features_path").get<std::string>();
      if (e.contains("gt_scores_path") && !e["gt_scores_path"].is_null()) {
        entry.gt_scores_path = e["gt_scores_path"].get<std::string>();
      }
      if (e.contains("user_summaries_path") && !e["user_summaries_path"].is_null()) {
        entry.user_summaries_path = e["user_summaries_path"].get<std::string>();
      }
      entry.fps_after_subsample = e.value("fps_after_subsample", kExpectedFps);
      if (e.contains("cluster_id") && !e["cluster_id"].is_null()) entry.cluster_id = e["cluster_id"].get<int>();
      if (!seen.insert(entry.video_id).second) throw FormatError("duplicate video_id " + entry.video_id);
      if (std::abs(entry.fps_after_subsample - kExpectedFps) > 1e-9) {
        throw FormatError("video " + entry.video_id + " declares " + std::to_string(entry.fps_after_subsample) +
                          " fps; features must be sub-sampled to 2 fps");
      }
      m.entries.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return m;
}

void write_manifest(const DatasetManifest& manifest, const fs::path& path) {
  json videos = json::array();
  for (const auto& e : manifest.entries) {
    json o;
    o["video_id"] = e.video_id;
    o["features_path"] = e.features_path.generic_string();
    if (e.gt_scores_path) o["gt_scores_path"] = e.gt_scores_path->generic_string();
    if (e.user_summaries_path) o["user_summaries_path"] = e.user_summaries_path->generic_string();
    o["fps_after_subsample"] = e.fps_after_subsample;
    if (e.cluster_id) o["cluster_id"] = *e.cluster_id;
    videos.push_back(std::move(o));
  }
  write_file(path, json{{"videos", videos}}.dump(2) + "\n");
}

std::vector<double> normalize_scores(std::vector<double> scores) {
  if (scores.empty()) return scores;
  const double mx = *std::max_element(scores.begin(), scores.end());
  if (mx > 0.0) {
    for (double& s : scores) s /= mx;
  }
  return scores;
}

std::vector<VideoRecord> load_dataset(const DatasetManifest& manifest) {
  std::vector<VideoRecord> out;
  for (const auto& e : manifest.entries) {
    VideoRecord v;
    v.id = e.video_id;
    v.features = load_features(manifest.resolve(e.features_path));
    v.cluster_id = e.cluster_id;
    const std::size_t m = v.features.rows();
    if (m == 0) throw FormatError("video " + e.video_id + " has no frames");
    if (e.gt_scores_path) {
      const auto g = load_features(manifest.resolve(*e.gt_scores_path));
      if (g.rows() != m || g.cols() != 1) {
        throw FormatError("video " + e.video_id + ": ground truth must be " + std::to_string(m) + " x 1");
      }
      v.gt_scores = normalize_scores(g.values());
    }
    if (e.user_summaries_path) {
      const auto u = load_features(manifest.resolve(*e.user_summaries_path));
      if (u.rows() != m || u.cols() == 0) {
        throw FormatError("video " + e.video_id + ": user summaries must have " + std::to_string(m) + " rows");
      }
      for (std::size_t a = 0; a < u.cols(); ++a) {
        std::vector<std::uint8_t> mask(m);
        for (std::size_t j = 0; j < m; ++j) {
          const double x = u(j, a);
          if (x != 0.0 && x != 1.0) throw FormatError("video " + e.video_id + ": user summary values must be 0 or 1");
          mask[j] = x != 0.0;
        }
        v.user_summaries.push_back(std::move(mask));
      }
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<std::size_t> read_cuts_json(const fs::path& path) {
  try {
    return json::parse(read_file(path)).get<std::vector<std::size_t>>();
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_cuts_json(const fs::path& path, const ShotBoundaries& cuts) {
  write_file(path, json(cuts.cuts()).dump() + "\n");
}

void ensure_boundaries(const DatasetManifest& manifest, std::vector<VideoRecord>& videos,
                       const seg::KtsConfig& cfg) {
  for (auto& v : videos) {
    if (v.boundaries) continue;
    const auto cache = manifest.cuts_path(v.id);
    if (fs::exists(cache)) {
      ShotBoundaries b(read_cuts_json(cache));
      if (b.frame_count() != v.frame_count()) {
        throw FormatError(cache.string() + ": cached cuts do not cover " + std::to_string(v.frame_count()) +
                          " frames");
      }
      v.boundaries = std::move(b);
    } else {
      v.boundaries = seg::kts(v.features, cfg);
      write_cuts_json(cache, *v.boundaries);
    }
  }
}

}  // namespace vjmht::io
