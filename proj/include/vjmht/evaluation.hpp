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

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace vjmht::eval {

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
};

/// Frame-overlap precision, recall and their harmonic mean. An empty
/// prediction has precision 0; an empty ground truth is an error.
PRF f_measure(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt);

enum class Aggregation { mean, max };

/// F-measure against several annotators, reduced by `mode`.
double f_measure_multi(std::span<const std::uint8_t> pred, const std::vector<std::vector<std::uint8_t>>& gts,
                       Aggregation mode);

/// Kendall tau-b with tie correction, O(n^2).
double kendall_tau(std::span<const double> a, std::span<const double> b);

/// Pearson correlation of average-tie ranks.
double spearman_rho(std::span<const double> a, std::span<const double> b);

/// Fractional ranks starting at 1; tied values share their average rank.
std::vector<double> average_ranks(std::span<const double> v);

struct RankBaseline {
  double kendall_tau = 0.0;
  double spearman_rho = 0.0;
};

/// Leave-one-out agreement: every annotator against the mean of the others,
/// averaged over annotators.
RankBaseline human_baseline(const std::vector<std::vector<double>>& annotations);

struct EvalReport {
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  double f_measure_mean = 0.0;
  double f_measure_max = 0.0;
  double kendall_tau = 0.0;
  double spearman_rho = 0.0;
  Aggregation aggregation_mode = Aggregation::mean;
};

/// Scores one video. `reference` is the annotated frame-score curve used for
/// the rank metrics (ground-truth scores, or the mean of user summaries when
/// none exist). Rank metrics are NaN when either curve is constant.
/// precision/recall/f_measure follow `mode`; for max they come from the
/// best-matching annotator.
EvalReport evaluate_video(std::span<const std::uint8_t> summary, std::span<const double> frame_scores,
                          const std::vector<std::vector<std::uint8_t>>& user_summaries,
                          std::span<const double> reference, Aggregation mode = Aggregation::mean);

/// Mean of every field over videos, skipping NaN rank metrics.
EvalReport aggregate_reports(const std::vector<EvalReport>& reports);

/// Mean of several 0/1 annotations, frame by frame.
std::vector<double> mean_annotation(const std::vector<std::vector<std::uint8_t>>& user_summaries);

}  // namespace vjmht::eval
