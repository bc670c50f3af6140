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

#include "vjmht/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vjmht::seg {

void KtsConfig::validate() const {
  if (max_segments == 0) throw InvalidArgument("max_segments must be at least 1");
  if (!(penalty_coefficient >= 0.0)) throw InvalidArgument("penalty coefficient must be non-negative");
  if (kernel.kind == Kernel::Kind::rbf && !(kernel.sigma > 0.0)) throw InvalidArgument("rbf sigma must be positive");
}

ad::Tensor gram_matrix(const ad::Tensor& features, const Kernel& kernel) {
  const std::size_t n = features.rows(), d = features.cols();
  if (n == 0) throw InvalidArgument("gram_matrix: no frames");
  ad::Tensor k(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double v = 0.0;
      if (kernel.kind == Kernel::Kind::linear) {
        for (std::size_t c = 0; c < d; ++c) v += features(i, c) * features(j, c);
      } else {
        double dist2 = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
          const double diff = features(i, c) - features(j, c);
          dist2 += diff * diff;
        }
        v = std::exp(-dist2 / (2.0 * kernel.sigma * kernel.sigma));
      }
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

SegmentCost::SegmentCost(const ad::Tensor& gram) : n_(gram.rows()) {
  if (gram.rows() != gram.cols()) throw DimensionError("gram matrix must be square");
  const std::size_t w = n_ + 1;
  diag_.assign(w, 0.0);
  block_.assign(w * w, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    diag_[i + 1] = diag_[i] + gram(i, i);
    for (std::size_t j = 0; j < n_; ++j) {
      block_[(i + 1) * w + (j + 1)] = gram(i, j) + block_[i * w + (j + 1)] + block_[(i + 1) * w + j] - block_[i * w + j];
    }
  }
}

double SegmentCost::operator()(std::size_t a, std::size_t b) const {
  if (!(a < b && b <= n_)) throw InvalidArgument("segment_cost: empty or out-of-range segment");
  const std::size_t w = n_ + 1;
  const double diag = diag_[b] - diag_[a];
  const double block = block_[b * w + b] - block_[a * w + b] - block_[b * w + a] + block_[a * w + a];
  return diag - block / static_cast<double>(b - a);
}

double segment_penalty(std::size_t segments, std::size_t frames, double coefficient) {
  const double m = static_cast<double>(segments);
  return coefficient * m * (std::log(static_cast<double>(frames) / m) + 1.0);
}

namespace {

// Suffix formulation: g(k, a) is the best scatter of frames [a, M) split
// into k segments. Scanning the first cut upwards with a strict comparison
// yields the lexicographically smallest optimal cut list.
struct Table {
  std::size_t max_m = 0;
  std::size_t n = 0;
  std::vector<double> cost;        // [k][a], k = 1..max_m
  std::vector<std::size_t> next;  // end of the first segment

  double& g(std::size_t k, std::size_t a) { return cost[k * (n + 1) + a]; }
  std::size_t& first(std::size_t k, std::size_t a) { return next[k * (n + 1) + a]; }
};

Table fill(const SegmentCost& sc, std::size_t max_m) {
  const std::size_t n = sc.frames();
  Table t;
  t.max_m = max_m;
  t.n = n;
  const double inf = std::numeric_limits<double>::infinity();
  t.cost.assign((max_m + 1) * (n + 1), inf);
  t.next.assign((max_m + 1) * (n + 1), n);
  for (std::size_t a = 0; a < n; ++a) t.g(1, a) = sc(a, n);
  for (std::size_t k = 2; k <= max_m; ++k) {
    for (std::size_t a = 0; a + k <= n; ++a) {
      double best = inf;
      std::size_t arg = n;
      for (std::size_t b = a + 1; b + k - 1 <= n; ++b) {
        const double v = sc(a, b) + t.g(k - 1, b);
        if (v < best) {
          best = v;
          arg = b;
        }
      }
      t.g(k, a) = best;
      t.first(k, a) = arg;
    }
  }
  return t;
}

ShotBoundaries backtrack(Table& t, std::size_t m) {
  std::vector<std::size_t> cuts{0};
  std::size_t a = 0;
  for (std::size_t k = m; k >= 2; --k) {
    a = t.first(k, a);
    cuts.push_back(a);
  }
  cuts.push_back(t.n);
  return ShotBoundaries(std::move(cuts));
}

}  // namespace

KtsSolution kts_solve(const ad::Tensor& features, const KtsConfig& cfg) {
  cfg.validate();
  const std::size_t n = features.rows();
  if (n == 0) throw InvalidArgument("kts: video has no frames");
  const SegmentCost sc(gram_matrix(features, cfg.kernel));
  const std::size_t max_m = std::min(cfg.max_segments, n);
  Table t = fill(sc, max_m);

  KtsSolution sol;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t m = 1; m <= max_m; ++m) {
    sol.cost.push_back(t.g(m, 0));
    sol.cuts.push_back(backtrack(t, m));
    const double obj = t.g(m, 0) + segment_penalty(m, n, cfg.penalty_coefficient);
    sol.objective.push_back(obj);
    if (obj < best) {
      best = obj;
      sol.best_segments = m;
    }
  }
  return sol;
}

ShotBoundaries kts(const ad::Tensor& features, const KtsConfig& cfg) { return kts_solve(features, cfg).best(); }

ShotBoundaries kts_fixed(const ad::Tensor& features, std::size_t segments, const Kernel& kernel) {
  if (segments == 0 || segments > features.rows()) {
    throw InvalidArgument("kts_fixed: segment count must be in [1, M]");
  }
  KtsConfig cfg;
  cfg.max_segments = segments;
  cfg.kernel = kernel;
  return kts_solve(features, cfg).cuts.back();
}

}  // namespace vjmht::seg
