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

#ifndef PIPESIM_METRICS_HPP
#define PIPESIM_METRICS_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace pipesim::metrics {

/// Latency-determinism statistics for one observed latency series.
///
/// tail_ms is p100 - p95: how stretched the outliers are near the maximum.
/// flatness_ms is p90 - p10: how concentrated the bulk of the distribution is.
struct LatencySummary {
  std::size_t count = 0;
  double avg_ms = 0.0;
  double stddev_ms = 0.0;  // population standard deviation
  double min_ms = 0.0;
  double max_ms = 0.0;
  double p10 = 0.0;
  double p90 = 0.0;
  double p95 = 0.0;
  double p100 = 0.0;
  double tail_ms = 0.0;
  double flatness_ms = 0.0;
};

/// Two-sample rank test result. U is min(U1, U2); the Z sign follows the
/// first sample's U so that swapping the samples flips it.
struct RankTestResult {
  double u_statistic = 0.0;
  double z_score = 0.0;
  bool significant = false;  // |Z| > 1.96, two-tailed at alpha = 0.05
  std::size_t n1 = 0;
  std::size_t n2 = 0;
};

/// Nearest-rank percentile: value at index ceil(p/100 * n) on the ascending
/// sort, 1-based. p = 0 yields the minimum, p = 100 the maximum, which keeps
/// tail = max - p95 well defined. Throws MetricsError on an empty series.
double percentile(std::span<const double> series, double p);

LatencySummary summarize(std::span<const double> series);

/// Mann-Whitney U with average ranks for ties and a tie-corrected normal
/// approximation for Z. When every pooled value is identical the variance
/// degenerates and Z is defined as 0 (not significant).
RankTestResult mann_whitney(std::span<const double> a, std::span<const double> b);

}  // namespace pipesim::metrics

#endif  // PIPESIM_METRICS_HPP
