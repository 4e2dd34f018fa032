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

#ifndef PIPESIM_EXPERIMENT_HPP
#define PIPESIM_EXPERIMENT_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pipesim/engine.hpp"
#include "pipesim/metrics.hpp"
#include "pipesim/partition.hpp"
#include "pipesim/templates.hpp"

namespace pipesim {

struct AppEntry {
  std::string template_name;
  int instances = 1;
};

struct TrimSpec {
  int head = 10;
  int tail = 10;
};

/// How instance sources are phased against each other. Staggered spreads the
/// start offsets evenly across one frame period; Random draws each offset
/// uniformly in [0, period) from the seeded stream, modelling independently
/// launched processes.
enum class SourcePhase { Staggered, Random };

/// Full description of one experiment: device inventory, application mix,
/// placement policy, and the measurement protocol (message count, trimming,
/// seeded repetitions).
struct ExperimentConfig {
  std::vector<DeviceSpec> devices;
  std::vector<AppEntry> apps;
  PlacementPolicy policy;
  int messages_per_run = 1000;
  TrimSpec trim;
  int repetitions = 10;
  double frame_period_ms = 30.0;
  SourcePhase source_phase = SourcePhase::Staggered;
  std::uint64_t seed = 0;
  ContentionConfig contention;
  std::string output_dir;  // empty keeps everything in memory
  bool dump_event_log = false;
  Calibration calibration = Calibration::defaults();

  void validate() const;  // throws ConfigError on an invalid configuration
  int total_instances() const;

  /// Deterministic YAML serialization of the effective configuration; the
  /// provenance hash is computed over this text and it is echoed to
  /// <output_dir>/config.yaml.
  std::string canonical_text() const;
};

struct DenialRecord {
  std::string instance_id;
  DenialReason reason = DenialReason::SmOversubscription;
  std::string detail;
};

struct PathSeries {
  std::string instance_id;
  std::string path_id;  // "<template>/p<k>", shared across instances
  std::vector<double> e2e;
};

struct IsolationAudit {
  long graphics_events_on_compute = 0;
  long compute_kernels_on_graphics = 0;
};

struct RepetitionResult {
  int repetition = 0;
  std::vector<PathSeries> series;
  std::map<int, double> utilization;  // device id -> busy fraction over the run
  std::vector<DenialRecord> denials;
  double end_time_ms = 0.0;
  std::optional<IsolationAudit> isolation;
};

/// One summary.csv row: metrics for a path, pooled across instances, averaged
/// over repetitions. `peak` carries the max-of-repetitions aggregation that
/// the report prints alongside the default.
struct SummaryRow {
  std::string policy;
  int instances = 0;
  std::string path_id;
  std::size_t count = 0;
  metrics::LatencySummary mean;
  metrics::LatencySummary peak;
  double utilization = 0.0;  // compute-device utilization, mean over reps
};

struct ExperimentReport {
  ExperimentConfig config;
  std::string policy_label;
  int instances = 0;
  std::vector<RepetitionResult> reps;

  std::vector<std::string> path_ids() const;
  /// Per-repetition pooled values for one path (across instances).
  std::vector<std::vector<double>> per_rep_values(const std::string& path_id) const;
  /// All values for one path pooled across instances and repetitions.
  std::vector<double> pooled(const std::string& path_id) const;
  std::vector<SummaryRow> summary_rows() const;
  double mean_utilization(int device) const;
  /// Mean over repetitions of the per-repetition max for one path.
  double mean_max(const std::string& path_id) const;
  /// Worst-path aggregate for one template: per repetition, the max across
  /// the template's paths; averaged over repetitions.
  double worst_path_mean_max(const std::string& template_name) const;
  long total_denials() const;
};

/// Runs the experiment: seeds engine repetition r with seed + r, runs all
/// instances concurrently on the shared engine, applies trimming, writes raw
/// CSVs when output_dir is set, and aggregates the report.
ExperimentReport run(const ExperimentConfig& config);

class KeyMismatchError : public std::runtime_error {
 public:
  explicit KeyMismatchError(const std::string& what) : std::runtime_error(what) {}
};

struct ComparisonRow {
  std::string key;  // "<instances>/<path_id>"
  double delta_avg_pct = 0.0;
  double delta_max_pct = 0.0;
  double delta_stddev_pct = 0.0;
  double delta_tail_pct = 0.0;
  double delta_flatness_pct = 0.0;
  metrics::RankTestResult rank;
};

/// Per-metric percentage deltas (b relative to a) plus a rank test on the
/// pooled latency series, per (instances, path) key.
std::vector<ComparisonRow> compare(const ExperimentReport& a, const ExperimentReport& b);

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows);

struct SweepRow {
  double thread_pct = 0.0;
  std::size_t count = 0;
  metrics::LatencySummary mean;  // pooled across the first template's paths
  double utilization = 0.0;
  int denied = 0;
  std::string note;
};

/// One full run per thread-percentage value, rows ordered by value. Requires
/// an *Mps policy. Denials shrink the admitted set rather than degrading it,
/// which real MPS would not do; rows with denials carry a note saying so.
std::vector<SweepRow> sweep_thread_pct(const ExperimentConfig& config,
                                       const std::vector<double>& values);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

/// Rebuilds a report from a run output directory (config.yaml plus the raw
/// per-repetition CSVs). Round-trip-exact CSV formatting makes the result
/// equal to the in-memory report the run produced.
ExperimentReport load_report_from_dir(const std::string& output_dir);

/// Recomputes summary.csv and report.txt from the raw CSVs under
/// `output_dir`; output is byte-identical to what run() wrote.
void regenerate_report(const std::string& output_dir);

std::string summary_csv_text(const ExperimentReport& report);
std::string report_text(const ExperimentReport& report);

}  // namespace pipesim

#endif  // PIPESIM_EXPERIMENT_HPP
