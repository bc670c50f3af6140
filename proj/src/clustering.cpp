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

#include "vjmht/clustering.hpp"

#include <limits>
#include <random>
#include <string>

namespace vjmht::cluster {

namespace {

double dist2(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::pair<int, double> nearest(const Point& p, const std::vector<Point>& centroids) {
  int best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = dist2(p, centroids[c]);
    if (d < bd) {
      bd = d;
      best = static_cast<int>(c);
    }
  }
  return {best, bd};
}

std::vector<Point> seed_plus_plus(const std::vector<Point>& points, std::size_t k, std::mt19937_64& rng) {
  const std::size_t n = points.size();
  std::vector<Point> centroids;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  centroids.push_back(points[pick(rng)]);
  std::vector<double> d2(n);
  while (centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = nearest(points[i], centroids).second;
      total += d2[i];
    }
    if (total <= 0.0) {
      centroids.push_back(points[pick(rng)]);
      continue;
    }
    std::uniform_real_distribution<double> u(0.0, total);
    double r = u(rng);
    std::size_t chosen = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] == 0.0) continue;
      r -= d2[i];
      if (r <= 0.0) {
        chosen = i;
        break;
      }
    }
    centroids.push_back(points[chosen]);
  }
  return centroids;
}

}  // namespace

KMeansResult kmeans(const std::vector<Point>& points, std::size_t k, std::uint64_t seed, std::size_t max_iterations) {
  const std::size_t n = points.size();
  if (k == 0) throw InvalidArgument("kmeans: k must be positive");
  if (k > n) {
    throw InvalidArgument("kmeans: k = " + std::to_string(k) + " exceeds " + std::to_string(n) + " points");
  }
  const std::size_t dim = points.front().size();
  for (const auto& p : points) {
    if (p.size() != dim) throw DimensionError("kmeans: points differ in dimension");
  }

  std::mt19937_64 rng(seed);
  KMeansResult res;
  res.centroids = seed_plus_plus(points, k, rng);
  res.assignments.assign(n, -1);

  for (std::size_t it = 0; it < max_iterations; ++it) {
    bool changed = false;
    double inertia = 0.0;
    std::vector<double> own(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto [c, d] = nearest(points[i], res.centroids);
      if (c != res.assignments[i]) changed = true;
      res.assignments[i] = c;
      own[i] = d;
      inertia += d;
    }
    res.inertia.push_back(inertia);
    res.iterations = it + 1;
    if (!changed) break;

    std::vector<Point> sums(k, Point(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(res.assignments[i]);
      ++counts[c];
      for (std::size_t j = 0; j < dim; ++j) sums[c][j] += points[i][j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        std::size_t far = 0;
        for (std::size_t i = 1; i < n; ++i) {
          if (own[i] > own[far]) far = i;
        }
        res.centroids[c] = points[far];
        own[far] = 0.0;
        continue;
      }
      for (std::size_t j = 0; j < dim; ++j) res.centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
    }
  }
  return res;
}

Point clustering_representation(const VideoRecord& video, const model::VjmhtParams* model) {
  if (model) {
    const auto out = model::forward_single(*model, video);
    return out.video_rep.values();
  }
  const auto& f = video.features;
  if (f.rows() == 0) throw InvalidArgument("clustering_representation: video has no frames");
  Point mean(f.cols(), 0.0);
  for (std::size_t i = 0; i < f.rows(); ++i) {
    for (std::size_t j = 0; j < f.cols(); ++j) mean[j] += f(i, j);
  }
  for (double& v : mean) v /= static_cast<double>(f.rows());
  return mean;
}

}  // namespace vjmht::cluster
