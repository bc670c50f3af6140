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

#include "vjmht/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "vjmht/error.hpp"

namespace vjmht::eval {

PRF f_measure(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt) {
  if (pred.size() != gt.size()) throw DimensionError("f_measure: masks differ in length");
  std::size_t np = 0, ng = 0, both = 0;
  for (std::size_t j = 0; j < pred.size(); ++j) {
    const bool p = pred[j] != 0, g = gt[j] != 0;
    np += p;
    ng += g;
    both += p && g;
  }
  if (ng == 0) throw InvalidArgument("f_measure: empty ground-truth summary");
  PRF r;
  r.precision = np == 0 ? 0.0 : static_cast<double>(both) / static_cast<double>(np);
  r.recall = static_cast<double>(both) / static_cast<double>(ng);
  const double s = r.precision + r.recall;
  r.f_measure = s == 0.0 ? 0.0 : 2.0 * r.precision * r.recall / s;
  return r;
}

double f_measure_multi(std::span<const std::uint8_t> pred, const std::vector<std::vector<std::uint8_t>>& gts,
                       Aggregation mode) {
  if (gts.empty()) throw InvalidArgument("f_measure_multi: no annotators");
  double acc = 0.0;
  for (const auto& g : gts) {
    const double f = f_measure(pred, g).f_measure;
    acc = mode == Aggregation::max ? std::max(acc, f) : acc + f;
  }
  return mode == Aggregation::max ? acc : acc / static_cast<double>(gts.size());
}

namespace {

void check_pair(std::span<const double> a, std::span<const double> b, const char* who) {
  if (a.size() != b.size()) throw DimensionError(std::string(who) + ": inputs differ in length");
  if (a.size() < 2) throw InvalidArgument(std::string(who) + ": needs at least two observations");
  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
  };
  if (constant(a) || constant(b)) throw InvalidArgument(std::string(who) + ": constant input, correlation undefined");
}

}  // namespace

double kendall_tau(std::span<const double> a, std::span<const double> b) {
  check_pair(a, b, "kendall_tau");
  const std::size_t n = a.size();
  // n0 - n1 and n0 - n2 are the pair counts untied in a and in b.
  long long concordant = 0, discordant = 0, untied_a = 0, untied_b = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double da = a[i] - a[j];
      const double db = b[i] - b[j];
      if (da != 0.0) ++untied_a;
      if (db != 0.0) ++untied_b;
      const double s = da * db;
      if (s > 0.0) {
        ++concordant;
      } else if (s < 0.0) {
        ++discordant;
      }
    }
  }
  return static_cast<double>(concordant - discordant) /
         std::sqrt(static_cast<double>(untied_a) * static_cast<double>(untied_b));
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman_rho(std::span<const double> a, std::span<const double> b) {
  check_pair(a, b, "spearman_rho");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(ra.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    const double x = ra[i] - ma, y = rb[i] - mb;
    sab += x * y;
    saa += x * x;
    sbb += y * y;
  }
  return sab / std::sqrt(saa * sbb);
}

RankBaseline human_baseline(const std::vector<std::vector<double>>& annotations) {
  const std::size_t u = annotations.size();
  if (u < 2) throw InvalidArgument("human_baseline: needs at least two annotators");
  const std::size_t n = annotations.front().size();
  for (const auto& a : annotations) {
    if (a.size() != n) throw DimensionError("human_baseline: annotations differ in length");
  }
  RankBaseline out;
  for (std::size_t k = 0; k < u; ++k) {
    std::vector<double> rest(n, 0.0);
    for (std::size_t o = 0; o < u; ++o) {
      if (o == k) continue;
      for (std::size_t j = 0; j < n; ++j) rest[j] += annotations[o][j];
    }
    for (double& v : rest) v /= static_cast<double>(u - 1);
    out.kendall_tau += kendall_tau(annotations[k], rest);
    out.spearman_rho += spearman_rho(annotations[k], rest);
  }
  out.kendall_tau /= static_cast<double>(u);
  out.spearman_rho /= static_cast<double>(u);
  return out;
}

std::vector<double> mean_annotation(const std::vector<std::vector<std::uint8_t>>& user_summaries) {
  if (user_summaries.empty()) return {};
  std::vector<double> out(user_summaries.front().size(), 0.0);
  for (const auto& u : user_summaries) {
    if (u.size() != out.size()) throw DimensionError("mean_annotation: annotations differ in length");
    for (std::size_t j = 0; j < u.size(); ++j) out[j] += u[j] != 0;
  }
  for (double& v : out) v /= static_cast<double>(user_summaries.size());
  return out;
}

namespace {

bool is_constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

}  // namespace

EvalReport evaluate_video(std::span<const std::uint8_t> summary, std::span<const double> frame_scores,
                          const std::vector<std::vector<std::uint8_t>>& user_summaries,
                          std::span<const double> reference, Aggregation mode) {
  if (user_summaries.empty()) throw InvalidArgument("evaluate_video: no user summaries");
  if (frame_scores.size() != summary.size()) throw DimensionError("evaluate_video: scores and summary differ in length");
  EvalReport r;
  r.aggregation_mode = mode;
  double best = -1.0;
  for (const auto& u : user_summaries) {
    const PRF prf = f_measure(summary, u);
    r.f_measure_mean += prf.f_measure;
    r.f_measure_max = std::max(r.f_measure_max, prf.f_measure);
    if (mode == Aggregation::mean) {
      r.precision += prf.precision;
      r.recall += prf.recall;
    } else if (prf.f_measure > best) {
      best = prf.f_measure;
      r.precision = prf.precision;
      r.recall = prf.recall;
    }
  }
  const double u = static_cast<double>(user_summaries.size());
  r.f_measure_mean /= u;
  if (mode == Aggregation::mean) {
    r.precision /= u;
    r.recall /= u;
  }
  r.f_measure = mode == Aggregation::mean ? r.f_measure_mean : r.f_measure_max;

  std::vector<double> fallback;
  if (reference.empty()) {
    fallback = mean_annotation(user_summaries);
    reference = fallback;
  }
  if (reference.size() != frame_scores.size()) throw DimensionError("evaluate_video: reference length mismatch");
  if (frame_scores.size() < 2 || is_constant(frame_scores) || is_constant(reference)) {
    r.kendall_tau = r.spearman_rho = std::numeric_limits<double>::quiet_NaN();
  } else {
    r.kendall_tau = kendall_tau(frame_scores, reference);
    r.spearman_rho = spearman_rho(frame_scores, reference);
  }
  return r;
}

EvalReport aggregate_reports(const std::vector<EvalReport>& reports) {
  EvalReport out;
  if (reports.empty()) return out;
  out.aggregation_mode = reports.front().aggregation_mode;
  std::size_t ranked = 0;
  for (const auto& r : reports) {
    out.precision += r.precision;
    out.recall += r.recall;
    out.f_measure += r.f_measure;
    out.f_measure_mean += r.f_measure_mean;
    out.f_measure_max += r.f_measure_max;
    if (!std::isnan(r.kendall_tau)) {
      out.kendall_tau += r.kendall_tau;
      out.spearman_rho += r.spearman_rho;
      ++ranked;
    }
  }
  const double n = static_cast<double>(reports.size());
  out.precision /= n;
  out.recall /= n;
  out.f_measure /= n;
  out.f_measure_mean /= n;
  out.f_measure_max /= n;
  if (ranked == 0) {
    out.kendall_tau = out.spearman_rho = std::numeric_limits<double>::quiet_NaN();
  } else {
    out.kendall_tau /= static_cast<double>(ranked);
    out.spearman_rho /= static_cast<double>(ranked);
  }
  return out;
}

}  // namespace vjmht::eval
