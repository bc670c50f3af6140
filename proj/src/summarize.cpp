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

#include "vjmht/summarize.hpp"

#include <cmath>
#include <string>

#include "vjmht/error.hpp"

namespace vjmht::summary {

namespace {

// Best subset of items i.. for one capacity. `nonempty` is all the
// lexicographic tie-break needs: {i} u A beats B (B within i+1..) exactly
// when B is non-empty.
struct Cell {
  double value = 0.0;
  std::int64_t weight = 0;
  bool nonempty = false;
  bool take = false;
};

}  // namespace

std::vector<std::size_t> knapsack_select(std::span<const double> values, std::span<const std::int64_t> weights,
                                         std::int64_t capacity) {
  if (values.size() != weights.size()) throw DimensionError("knapsack: values and weights differ in length");
  if (capacity < 0) throw InvalidArgument("knapsack: negative capacity");
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0) throw InvalidArgument("knapsack: negative weight at item " + std::to_string(i));
    if (!std::isfinite(values[i])) throw NumericError("knapsack: non-finite value at item " + std::to_string(i));
  }
  const std::size_t n = values.size();
  const std::size_t w = static_cast<std::size_t>(capacity) + 1;
  // table[i][c]: items i..n-1; row n is the empty suffix.
  std::vector<Cell> table((n + 1) * w);
  for (std::size_t i = n; i-- > 0;) {
    const auto wi = weights[i];
    for (std::size_t c = 0; c < w; ++c) {
      Cell skip = table[(i + 1) * w + c];
      skip.take = false;
      Cell best = skip;
      if (wi <= static_cast<std::int64_t>(c)) {
        const Cell& rest = table[(i + 1) * w + (c - static_cast<std::size_t>(wi))];
        Cell take{values[i] + rest.value, wi + rest.weight, true, true};
        const bool better = take.value > skip.value ||
                            (take.value == skip.value &&
                             (take.weight < skip.weight || (take.weight == skip.weight && skip.nonempty)));
        if (better) best = take;
      }
      table[i * w + c] = best;
    }
  }
  std::vector<std::size_t> chosen;
  std::size_t c = w - 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (table[i * w + c].take) {
      chosen.push_back(i);
      c -= static_cast<std::size_t>(weights[i]);
    }
  }
  return chosen;
}

std::size_t SummaryMask::selected_frames() const {
  std::size_t n = 0;
  for (auto v : y) n += v;
  return n;
}

std::vector<std::pair<std::size_t, std::size_t>> SummaryMask::runs() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t j = 0; j < y.size();) {
    if (!y[j]) {
      ++j;
      continue;
    }
    std::size_t k = j;
    while (k < y.size() && y[k]) ++k;
    out.emplace_back(j, k - j);
    j = k;
  }
  return out;
}

std::int64_t summary_capacity(double gamma, std::size_t frames) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidArgument("summary ratio must be in (0, 1]");
  return static_cast<std::int64_t>(std::floor(gamma * static_cast<double>(frames) + 1e-9));
}

SummaryMask generate_summary(std::span<const double> frame_scores, const ShotBoundaries& cuts, double gamma,
                             ValueMode mode) {
  const std::size_t m = cuts.frame_count();
  if (frame_scores.size() != m) {
    throw DimensionError("generate_summary: " + std::to_string(frame_scores.size()) + " scores for " +
                         std::to_string(m) + " frames");
  }
  const std::size_t p = cuts.shot_count();
  std::vector<double> values(p);
  std::vector<std::int64_t> weights(p);
  for (std::size_t s = 0; s < p; ++s) {
    double total = 0.0;
    for (std::size_t j = cuts.begin(s); j < cuts.end(s); ++j) total += frame_scores[j];
    weights[s] = static_cast<std::int64_t>(cuts.length(s));
    values[s] = mode == ValueMode::mean ? total / static_cast<double>(cuts.length(s)) : total;
  }
  SummaryMask out;
  out.gamma = gamma;
  out.selected_shots = knapsack_select(values, weights, summary_capacity(gamma, m));
  out.y.assign(m, 0);
  for (std::size_t s : out.selected_shots) {
    for (std::size_t j = cuts.begin(s); j < cuts.end(s); ++j) out.y[j] = 1;
  }
  return out;
}

}  // namespace vjmht::summary
