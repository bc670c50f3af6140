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

#include "vjmht/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "vjmht/error.hpp"
#include "vjmht/summarize.hpp"

namespace vjmht::synth {

namespace fs = std::filesystem;

void SynthConfig::validate() const {
  if (n_videos == 0 || frames == 0 || dim == 0 || n_clusters == 0) {
    throw InvalidArgument("synth: counts and sizes must be positive");
  }
  if (important_concepts == 0 || unimportant_concepts == 0) throw InvalidArgument("synth: empty concept pool");
  if (!(noise >= 0.0)) throw InvalidArgument("synth: noise must be non-negative");
  const auto cap = summary::summary_capacity(gamma, frames);
  if (cap < 2) throw InvalidArgument("synth: budget floor(gamma M) must be at least 2 frames");
  if (static_cast<std::size_t>(cap) >= frames) throw InvalidArgument("synth: budget leaves no frames for long shots");
}

namespace {

struct PlantedShot {
  std::size_t length;
  bool important;
};

// Two short important shots filling the budget, then long shots covering the
// rest. Long shots are at least cap - min(short) + 1 frames so that no long
// shot fits next to a short one.
std::vector<PlantedShot> plan_shots(std::size_t frames, std::size_t cap, std::mt19937_64& rng) {
  const std::size_t a = cap / 2, b = cap - a;
  const std::size_t min_long = cap - std::min(a, b) + 1;
  const std::size_t rest = frames - cap;

  std::vector<std::size_t> lengths;
  if (rest < min_long) {
    lengths.push_back(rest);
  } else {
    const std::size_t k_max = rest / min_long;
    const std::size_t k_min = std::max<std::size_t>(1, (rest + 2 * min_long - 1) / (2 * min_long));
    std::uniform_int_distribution<std::size_t> pick_k(std::min(k_min, k_max), k_max);
    const std::size_t k = pick_k(rng);
    lengths.assign(k, min_long);
    std::uniform_int_distribution<std::size_t> pick_shot(0, k - 1);
    for (std::size_t extra = rest - k * min_long; extra > 0; --extra) {
      std::size_t s = pick_shot(rng);
      // Prefer shots still under twice the minimum; fall back to any.
      for (std::size_t tries = 0; tries < k && lengths[s] >= 2 * min_long; ++tries) s = (s + 1) % k;
      ++lengths[s];
    }
  }

  const std::size_t n_long = lengths.size();
  std::size_t n_important = std::max<std::size_t>(1, n_long / 3);
  if (n_long > 1) n_important = std::min(n_important, n_long - 1);
  std::vector<std::uint8_t> flags(n_long, 0);
  std::fill(flags.begin(), flags.begin() + static_cast<std::ptrdiff_t>(n_important), 1);
  if (n_long == 1) flags[0] = 0;
  std::shuffle(flags.begin(), flags.end(), rng);

  std::vector<PlantedShot> shots{{a, true}, {b, true}};
  for (std::size_t i = 0; i < n_long; ++i) shots.push_back({lengths[i], flags[i] != 0});
  std::shuffle(shots.begin(), shots.end(), rng);
  return shots;
}

}  // namespace

std::vector<VideoRecord> synth_videos(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // pools[c][0..I) important, [I..I+U) unimportant
  const std::size_t pool = cfg.important_concepts + cfg.unimportant_concepts;
  std::vector<std::vector<std::vector<double>>> pools(cfg.n_clusters);
  for (auto& p : pools) {
    p.resize(pool);
    for (auto& centroid : p) {
      centroid.resize(cfg.dim);
      for (double& x : centroid) x = gauss(rng);
    }
  }

  const std::size_t cap = static_cast<std::size_t>(summary::summary_capacity(cfg.gamma, cfg.frames));
  std::vector<VideoRecord> out;
  for (std::size_t n = 0; n < cfg.n_videos; ++n) {
    const std::size_t cluster = n % cfg.n_clusters;
    const auto shots = plan_shots(cfg.frames, cap, rng);

    VideoRecord v;
    v.id = "synth_" + std::to_string(n);
    v.cluster_id = static_cast<int>(cluster);
    v.features = ad::Tensor(cfg.frames, cfg.dim);
    std::vector<double> gt(cfg.frames, 0.0);
    std::vector<std::size_t> cuts{0};
    std::size_t frame = 0;
    std::size_t prev_concept = pool;
    for (const auto& s : shots) {
      const std::size_t lo = s.important ? 0 : cfg.important_concepts;
      const std::size_t count = s.important ? cfg.important_concepts : cfg.unimportant_concepts;
      std::size_t chosen = prev_concept;
      std::uniform_int_distribution<std::size_t> pick(lo, lo + count - 1);
      if (count == 1) {
        chosen = lo;
      } else {
        while (chosen == prev_concept) chosen = pick(rng);
      }
      prev_concept = chosen;
      const auto& centroid = pools[cluster][chosen];
      for (std::size_t t = 0; t < s.length; ++t, ++frame) {
        for (std::size_t j = 0; j < cfg.dim; ++j) {
          v.features(frame, j) = static_cast<float>(centroid[j] + cfg.noise * gauss(rng));
        }
        gt[frame] = s.important ? 1.0 : 0.0;
      }
      cuts.push_back(frame);
    }
    v.boundaries = ShotBoundaries(std::move(cuts));
    v.user_summaries.push_back(summary::generate_summary(gt, *v.boundaries, cfg.gamma).y);
    v.gt_scores = std::move(gt);
    out.push_back(std::move(v));
  }
  return out;
}

io::DatasetManifest write_dataset(const std::vector<VideoRecord>& videos, const fs::path& dir, bool planted_cuts) {
  io::DatasetManifest manifest;
  manifest.base_dir = dir;
  for (const auto& v : videos) {
    io::ManifestEntry e;
    e.video_id = v.id;
    e.features_path = fs::path("features") / (v.id + ".vjmf");
    io::write_vjmf(dir / e.features_path, v.features);
    if (v.gt_scores) {
      e.gt_scores_path = fs::path("gt") / (v.id + ".vjmf");
      io::write_vjmf(dir / *e.gt_scores_path, ad::Tensor(v.gt_scores->size(), 1, *v.gt_scores));
    }
    if (!v.user_summaries.empty()) {
      const std::size_t m = v.frame_count();
      ad::Tensor u(m, v.user_summaries.size());
      for (std::size_t a = 0; a < v.user_summaries.size(); ++a) {
        for (std::size_t j = 0; j < m; ++j) u(j, a) = v.user_summaries[a][j];
      }
      e.user_summaries_path = fs::path("user") / (v.id + ".vjmf");
      io::write_vjmf(dir / *e.user_summaries_path, u);
    }
    e.cluster_id = v.cluster_id;
    if (planted_cuts && v.boundaries) io::write_cuts_json(manifest.cuts_path(v.id), *v.boundaries);
    manifest.entries.push_back(std::move(e));
  }
  io::write_manifest(manifest, dir / "manifest.json");
  return manifest;
}

}  // namespace vjmht::synth
