/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 Pipesim Contributors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "pipesim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "pipesim/errors.hpp"

namespace pipesim::metrics {

namespace {

// Nearest-rank lookup on an already sorted series.
double nearest_rank(const std::vector<double>& sorted, double p) {
  const auto n = sorted.size();
  auto idx = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(n)));
  if (idx < 1) idx = 1;
  if (idx > n) idx = n;
  return sorted[idx - 1];
}

}  // namespace

double percentile(std::span<const double> series, double p) {
  if (series.empty()) throw MetricsError("percentile: empty series");
  std::vector<double> sorted(series.begin(), series.end());
  std::sort(sorted.begin(), sorted.end());
  return nearest_rank(sorted, p);
}

LatencySummary summarize(std::span<const double> series) {
  if (series.empty()) throw MetricsError("summarize: empty series");
  std::vector<double> sorted(series.begin(), series.end());
  std::sort(sorted.begin(), sorted.end());

  LatencySummary s;
  s.count = sorted.size();
  if (sorted.front() == sorted.back()) {
    // Constant series: the mean is the value and the spread is zero, exactly.
    // Summation rounding must not manufacture a phantom deviation here.
    s.avg_ms = sorted.front();
    s.stddev_ms = 0.0;
  } else {
    // Accumulate in ascending order so the result is independent of the
    // input permutation.
    double sum = 0.0;
    for (double v : sorted) sum += v;
    s.avg_ms = sum / static_cast<double>(s.count);
    double sq = 0.0;
    for (double v : sorted) sq += (v - s.avg_ms) * (v - s.avg_ms);
    s.stddev_ms = std::sqrt(sq / static_cast<double>(s.count));
  }
  s.min_ms = sorted.front();
  s.max_ms = sorted.back();
  s.p10 = nearest_rank(sorted, 10.0);
  s.p90 = nearest_rank(sorted, 90.0);
  s.p95 = nearest_rank(sorted, 95.0);
  s.p100 = nearest_rank(sorted, 100.0);
  s.tail_ms = s.p100 - s.p95;
  s.flatness_ms = s.p90 - s.p10;
  return s;
}

RankTestResult mann_whitney(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw MetricsError("mann_whitney: empty sample");

  const std::size_t n1 = a.size();
  const std::size_t n2 = b.size();
  const std::size_t n = n1 + n2;

  // Pool, remembering sample membership, then rank with average ranks.
  std::vector<std::pair<double, int>> pooled;
  pooled.reserve(n);
  for (double v : a) pooled.emplace_back(v, 0);
  for (double v : b) pooled.emplace_back(v, 1);
  std::stable_sort(pooled.begin(), pooled.end(),
                   [](const auto& x, const auto& y) { return x.first < y.first; });

  double rank_sum_a = 0.0;
  double tie_term = 0.0;  // sum of t^3 - t over tie groups
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && pooled[j + 1].first == pooled[i].first) ++j;
    const double group = static_cast<double>(j - i + 1);
    // 1-based ranks i+1 .. j+1 averaged.
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (pooled[k].second == 0) rank_sum_a += avg_rank;
    }
    tie_term += group * group * group - group;
    i = j + 1;
  }

  const double dn1 = static_cast<double>(n1);
  const double dn2 = static_cast<double>(n2);
  const double dn = static_cast<double>(n);
  const double u1 = rank_sum_a - dn1 * (dn1 + 1.0) / 2.0;
  const double u2 = dn1 * dn2 - u1;

  RankTestResult r;
  r.n1 = n1;
  r.n2 = n2;
  r.u_statistic = std::min(u1, u2);

  double variance = dn1 * dn2 / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
  if (variance > 0.0) {
    r.z_score = (u1 - dn1 * dn2 / 2.0) / std::sqrt(variance);
  } else {
    r.z_score = 0.0;  // degenerate: all pooled values identical
  }
  r.significant = std::abs(r.z_score) > 1.96;
  return r;
}

}  // namespace pipesim::metrics
