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

#include "pipesim/experiment.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <set>
#include <sstream>

#include "pipesim/config.hpp"
#include "pipesim/csvio.hpp"
#include "pipesim/errors.hpp"
#include "pipesim/rng.hpp"
#include "pipesim/runner.hpp"
#include "pipesim/tracking.hpp"

namespace fs = std::filesystem;

namespace pipesim {

namespace {

const char* to_string(DenialReason r) {
  return r == DenialReason::SmOversubscription ? "SmOversubscription"
                                               : "MemoryOversubscription";
}

/// Devices that host compute kernels under a policy; utilization summaries
/// average over these.
std::vector<int> compute_devices(const ExperimentConfig& config) {
  if (policy_isolates(config.policy.kind)) return {config.policy.compute_device};
  if (config.policy.kind == PolicyKind::SingleGpuMps ||
      config.policy.kind == PolicyKind::SingleGpu) {
    std::vector<int> all;
    for (std::size_t i = 0; i < config.devices.size(); ++i) all.push_back(static_cast<int>(i));
    return all;
  }
  return {config.policy.compute_device};
}

SchedMode device_mode(const ExperimentConfig& config, int device) {
  if (!policy_uses_mps(config.policy.kind)) return SchedMode::TimeSliced;
  if (config.policy.kind == PolicyKind::SingleGpuMps) return SchedMode::SpatialMPS;
  return device == config.policy.compute_device ? SchedMode::SpatialMPS
                                                : SchedMode::TimeSliced;
}

struct MeanAccumulator {
  metrics::LatencySummary mean{};
  metrics::LatencySummary peak{};
  int n = 0;

  void add(const metrics::LatencySummary& s) {
    auto acc = [this](double& m, double& p, double v) {
      m += v;
      if (n == 0 || v > p) p = v;
    };
    acc(mean.avg_ms, peak.avg_ms, s.avg_ms);
    acc(mean.stddev_ms, peak.stddev_ms, s.stddev_ms);
    acc(mean.min_ms, peak.min_ms, s.min_ms);
    acc(mean.max_ms, peak.max_ms, s.max_ms);
    acc(mean.p10, peak.p10, s.p10);
    acc(mean.p90, peak.p90, s.p90);
    acc(mean.p95, peak.p95, s.p95);
    acc(mean.p100, peak.p100, s.p100);
    acc(mean.tail_ms, peak.tail_ms, s.tail_ms);
    acc(mean.flatness_ms, peak.flatness_ms, s.flatness_ms);
    mean.count = s.count;
    peak.count = s.count;
    n++;
  }
  metrics::LatencySummary result_mean() const {
    metrics::LatencySummary out = mean;
    const double dn = n > 0 ? static_cast<double>(n) : 1.0;
    out.avg_ms /= dn;
    out.stddev_ms /= dn;
    out.min_ms /= dn;
    out.max_ms /= dn;
    out.p10 /= dn;
    out.p90 /= dn;
    out.p95 /= dn;
    out.p100 /= dn;
    out.tail_ms /= dn;
    out.flatness_ms /= dn;
    return out;
  }
};

}  // namespace

void ExperimentConfig::validate() const {
  if (devices.empty()) throw ConfigError("config: at least one device is required");
  if (apps.empty()) throw ConfigError("config: at least one app entry is required");
  for (const auto& a : apps) {
    if (!is_known_template(a.template_name)) {
      throw ConfigError("config: unknown template " + a.template_name);
    }
    if (a.instances < 1) throw ConfigError("config: instances must be >= 1");
  }
  if (messages_per_run <= trim.head + trim.tail) {
    throw ConfigError("config: messages_per_run must exceed trim_head + trim_tail");
  }
  if (trim.head < 0 || trim.tail < 0) throw ConfigError("config: negative trim");
  if (repetitions < 1) throw ConfigError("config: repetitions must be >= 1");
  if (frame_period_ms <= 0) throw ConfigError("config: frame_period_ms must be positive");
  contention.validate();
  const int n = static_cast<int>(devices.size());
  if (policy.compute_device < 0 || policy.compute_device >= n ||
      policy.graphics_device < 0 || policy.graphics_device >= n) {
    throw ConfigError("config: policy device index out of range");
  }
  if (policy_isolates(policy.kind) && policy.compute_device == policy.graphics_device) {
    throw ConfigError("config: isolated policies need distinct compute and graphics devices");
  }
  if (policy_uses_mps(policy.kind) &&
      (policy.thread_pct <= 0.0 || policy.thread_pct > 100.0)) {
    throw ConfigError("config: *Mps policies need thread_pct in (0,100]");
  }
  for (const auto& d : devices) {
    if (d.sm_count < 1) throw ConfigError("config: device sm_count must be >= 1");
  }
}

int ExperimentConfig::total_instances() const {
  int n = 0;
  for (const auto& a : apps) n += a.instances;
  return n;
}

std::string ExperimentConfig::canonical_text() const {
  // output_dir and dump_event_log are I/O destinations, not experiment
  // identity, so they stay out of the canonical form (and hash).
  std::ostringstream out;
  out << "devices:\n";
  for (const auto& d : devices) {
    out << "  - {sm_count: " << d.sm_count << ", memory_capacity_bytes: " << d.memory_capacity
        << ", graphics_capable: " << (d.graphics_capable ? "true" : "false") << "}\n";
  }
  out << "apps:\n";
  for (const auto& a : apps) {
    out << "  - {template: " << a.template_name << ", instances: " << a.instances << "}\n";
  }
  out << "policy: {kind: " << to_string(policy.kind)
      << ", compute_device: " << policy.compute_device
      << ", graphics_device: " << policy.graphics_device
      << ", thread_pct: " << format_double(policy.thread_pct)
      << ", mem_limit_bytes: " << policy.mem_limit_bytes
      << ", pin_cpu: " << (policy.pin_cpu ? "true" : "false") << "}\n";
  out << "messages_per_run: " << messages_per_run << "\n";
  out << "trim: {head: " << trim.head << ", tail: " << trim.tail << "}\n";
  out << "repetitions: " << repetitions << "\n";
  out << "frame_period_ms: " << format_double(frame_period_ms) << "\n";
  out << "source_phase: " << (source_phase == SourcePhase::Staggered ? "staggered" : "random")
      << "\n";
  out << "seed: " << seed << "\n";
  out << "contention: {ctx_switch_compute_compute_ms: "
      << format_double(contention.ctx_switch_compute_compute_ms)
      << ", ctx_switch_compute_graphics_ms: "
      << format_double(contention.ctx_switch_compute_graphics_ms)
      << ", time_slice_quantum_ms: " << format_double(contention.time_slice_quantum_ms)
      << ", jitter_sigma: " << format_double(contention.jitter_sigma)
      << ", transfer_bandwidth_bytes_per_ms: "
      << format_double(contention.transfer_bandwidth_bytes_per_ms)
      << ", transfer_latency_ms: " << format_double(contention.transfer_latency_ms)
      << ", cpu_affinity_jitter_multiplier: "
      << format_double(contention.cpu_affinity_jitter_multiplier)
      << ", source_tick_jitter_ms: " << format_double(contention.source_tick_jitter_ms)
      << ", opportunistic_sms: " << (contention.opportunistic_sms ? "true" : "false")
      << "}\n";
  out << "calibration:\n";
  for (const auto& [name, tpl] : calibration.templates) {
    out << "  " << name << ":\n";
    out << "    payload_bytes: " << tpl.payload_bytes << "\n";
    out << "    operators:\n";
    for (const auto& [op, w] : tpl.operators) {
      out << "      " << op << ": {sm_demand: " << w.sm_demand
          << ", base_duration_ms: " << format_double(w.base_duration_ms)
          << ", memory_bytes: " << w.memory_bytes
          << ", is_graphics: " << (w.is_graphics ? "true" : "false")
          << ", parallel_streams: " << w.parallel_streams << "}\n";
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// running

namespace {

struct InstancePlanContext {
  std::string instance_id;
  std::string template_name;
  int global_index = 0;
  PlacementPolicy resolved;
};

RepetitionResult run_repetition(const ExperimentConfig& config, int rep,
                                std::vector<PlacementPlan>* plans_out) {
  RepetitionResult result;
  result.repetition = rep;

  SimEngine engine(config.contention);
  for (std::size_t i = 0; i < config.devices.size(); ++i) {
    DeviceSpec spec = config.devices[i];
    // The scheduling mode follows the placement policy: *Mps policies put
    // their compute devices in SpatialMPS, everything else time-slices.
    spec.sched_mode = device_mode(config, static_cast<int>(i));
    engine.add_device(spec);
  }

  PartitionManager manager(engine);
  FlowTracker tracker;

  struct Live {
    std::unique_ptr<OperatorGraph> graph;
    std::unique_ptr<InstanceRunner> runner;
    std::vector<std::string> path_ids;
    std::string instance_id;
  };
  std::vector<Live> live;

  const std::uint64_t rep_seed = mix_seed(config.seed + static_cast<std::uint64_t>(rep));
  const int total = config.total_instances();
  const int ndev = static_cast<int>(config.devices.size());

  int global_index = 0;
  std::map<std::string, int> per_template_counter;
  for (const auto& app : config.apps) {
    for (int k = 0; k < app.instances; ++k, ++global_index) {
      const int tpl_index = per_template_counter[app.template_name]++;
      const std::string instance_id = app.template_name + "-" + std::to_string(tpl_index);

      PlacementPolicy resolved = config.policy;
      if (!policy_isolates(config.policy.kind)) {
        const int dev = global_index % ndev;
        resolved.compute_device = dev;
        resolved.graphics_device = dev;
      }

      auto graph = std::make_unique<OperatorGraph>(
          make_template(app.template_name, instance_id, config.calibration));
      PlacementPlan plan = manager.place(instance_id, *graph, resolved);
      if (plans_out && rep == 0) plans_out->push_back(plan);
      if (plan.denial) {
        result.denials.push_back(
            DenialRecord{instance_id, plan.denial->reason, plan.denial->detail});
        continue;
      }

      bool has_compute = false;
      bool has_graphics = false;
      for (const auto& a : plan.ops) {
        if (a.graphics) has_graphics = true;
        if (!a.host && !a.graphics) has_compute = true;
      }

      InstanceSetup setup;
      setup.plan = std::move(plan);
      setup.graph = graph.get();
      if (has_compute) {
        setup.compute_context = engine.create_context(
            resolved.compute_device, instance_id, ContextKind::Compute,
            setup.plan.partition ? setup.plan.partition->partition_id : -1);
      }
      if (has_graphics) {
        setup.graphics_context = engine.create_context(resolved.graphics_device, instance_id,
                                                       ContextKind::Graphics);
      }
      setup.payload_bytes = template_payload_bytes(app.template_name, config.calibration);
      setup.frame_period_ms = config.frame_period_ms;
      if (config.source_phase == SourcePhase::Staggered) {
        setup.start_offset_ms =
            config.frame_period_ms * static_cast<double>(global_index) / total;
      } else {
        SeededRng phase_rng(mix_seed(rep_seed ^ 0x9e3779b97f4a7c15ULL) +
                            static_cast<std::uint64_t>(global_index));
        setup.start_offset_ms = phase_rng.uniform01() * config.frame_period_ms;
      }
      setup.messages_target = config.messages_per_run;
      setup.jitter_sigma = config.contention.jitter_sigma;
      const double pin_scale =
          setup.plan.pin_cpu ? config.contention.cpu_affinity_jitter_multiplier : 1.0;
      setup.host_jitter_sigma = config.contention.jitter_sigma * pin_scale;
      setup.tick_jitter_ms = config.contention.source_tick_jitter_ms * pin_scale;
      setup.rng_seed = mix_seed(rep_seed + static_cast<std::uint64_t>(global_index) + 1);
      setup.tick_rng_seed =
          mix_seed((rep_seed ^ 0x7421fca3c5a91e37ULL) +
                   static_cast<std::uint64_t>(global_index) + 1);
      for (std::size_t p = 0; p < graph->paths().size(); ++p) {
        setup.path_ids.push_back(app.template_name + "/p" + std::to_string(p));
      }

      Live entry;
      entry.graph = std::move(graph);
      entry.path_ids = setup.path_ids;
      entry.instance_id = instance_id;
      entry.runner = std::make_unique<InstanceRunner>(engine, tracker, std::move(setup));
      entry.runner->start();
      live.push_back(std::move(entry));
    }
  }

  engine.run();
  result.end_time_ms = engine.now();

  for (const auto& entry : live) {
    const auto& paths = entry.graph->paths();
    for (std::size_t p = 0; p < paths.size(); ++p) {
      auto series = tracker.e2e_latencies(entry.instance_id, entry.path_ids[p],
                                          paths[p].front(), paths[p].back(), config.trim.head,
                                          config.trim.tail);
      PathSeries ps;
      ps.instance_id = entry.instance_id;
      ps.path_id = entry.path_ids[p];
      ps.e2e = series.values();
      result.series.push_back(std::move(ps));
    }
  }

  for (int d = 0; d < ndev; ++d) {
    result.utilization[d] =
        result.end_time_ms > 0 ? engine.utilization(d, 0.0, result.end_time_ms) : 0.0;
  }

  if (policy_isolates(config.policy.kind)) {
    IsolationAudit audit;
    for (const auto& row : engine.event_log()) {
      const bool render = row.event_kind.rfind("render", 0) == 0;
      const bool kernel = row.event_kind.rfind("kernel", 0) == 0;
      if (render && row.device == config.policy.compute_device) {
        audit.graphics_events_on_compute++;
      }
      if (kernel && row.device == config.policy.graphics_device) {
        audit.compute_kernels_on_graphics++;
      }
    }
    result.isolation = audit;
  }

  if (!config.output_dir.empty()) {
    const fs::path rep_dir = fs::path(config.output_dir) / to_string(config.policy.kind) /
                             std::to_string(total) / ("rep" + std::to_string(rep));
    fs::create_directories(rep_dir);
    {
      std::ofstream out(rep_dir / "trails.csv");
      tracker.write_trails_csv(out);
    }
    {
      std::ofstream out(rep_dir / "latencies.csv");
      out << "instance_id,path_id,message_id,e2e_ms\n";
      for (const auto& entry : live) {
        const auto& paths = entry.graph->paths();
        for (std::size_t p = 0; p < paths.size(); ++p) {
          auto series = tracker.e2e_latencies(entry.instance_id, entry.path_ids[p],
                                              paths[p].front(), paths[p].back(),
                                              config.trim.head, config.trim.tail);
          for (const auto& r : series.records) {
            out << r.instance_id << ',' << r.path_id << ',' << r.message_id << ','
                << format_double(r.e2e_ms) << '\n';
          }
        }
      }
    }
    {
      std::ofstream out(rep_dir / "utilization.csv");
      out << "device,utilization\n";
      for (const auto& [dev, util] : result.utilization) {
        out << dev << ',' << format_double(util) << '\n';
      }
    }
    {
      std::ofstream out(rep_dir / "denials.csv");
      out << "instance_id,reason,detail\n";
      for (const auto& d : result.denials) {
        out << d.instance_id << ',' << to_string(d.reason) << ',' << d.detail << '\n';
      }
    }
    if (config.dump_event_log) {
      std::ofstream out(rep_dir / "events.csv");
      engine.write_event_log_csv(out);
    }
  }

  return result;
}

}  // namespace

ExperimentReport run(const ExperimentConfig& config) {
  config.validate();
  ExperimentReport report;
  report.config = config;
  report.policy_label = to_string(config.policy.kind);
  report.instances = config.total_instances();

  std::vector<PlacementPlan> plans;
  for (int rep = 0; rep < config.repetitions; ++rep) {
    report.reps.push_back(run_repetition(config, rep, &plans));
  }

  if (!config.output_dir.empty()) {
    fs::create_directories(config.output_dir);
    {
      std::ofstream out(fs::path(config.output_dir) / "config.yaml");
      out << config.canonical_text();
    }
    {
      std::ofstream out(fs::path(config.output_dir) / "placement.csv");
      PartitionManager::write_plan_csv(out, plans);
    }
    {
      std::ofstream out(fs::path(config.output_dir) / "summary.csv");
      out << summary_csv_text(report);
    }
    {
      std::ofstream out(fs::path(config.output_dir) / "report.txt");
      out << report_text(report);
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// report accessors

std::vector<std::string> ExperimentReport::path_ids() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& rep : reps) {
    for (const auto& s : rep.series) {
      if (seen.insert(s.path_id).second) out.push_back(s.path_id);
    }
  }
  return out;
}

std::vector<std::vector<double>> ExperimentReport::per_rep_values(
    const std::string& path_id) const {
  std::vector<std::vector<double>> out;
  for (const auto& rep : reps) {
    std::vector<double> pooled;
    for (const auto& s : rep.series) {
      if (s.path_id != path_id) continue;
      pooled.insert(pooled.end(), s.e2e.begin(), s.e2e.end());
    }
    out.push_back(std::move(pooled));
  }
  return out;
}

std::vector<double> ExperimentReport::pooled(const std::string& path_id) const {
  std::vector<double> out;
  for (const auto& rep : reps) {
    for (const auto& s : rep.series) {
      if (s.path_id != path_id) continue;
      out.insert(out.end(), s.e2e.begin(), s.e2e.end());
    }
  }
  return out;
}

std::vector<SummaryRow> ExperimentReport::summary_rows() const {
  std::vector<SummaryRow> rows;
  for (const auto& path_id : path_ids()) {
    MeanAccumulator acc;
    std::size_t count = 0;
    for (const auto& values : per_rep_values(path_id)) {
      if (values.empty()) continue;
      acc.add(metrics::summarize(values));
      count = values.size();
    }
    SummaryRow row;
    row.policy = policy_label;
    row.instances = instances;
    row.path_id = path_id;
    row.count = count;
    row.mean = acc.result_mean();
    row.peak = acc.peak;
    double util = 0.0;
    const auto devs = compute_devices(config);
    for (int d : devs) util += mean_utilization(d);
    row.utilization = devs.empty() ? 0.0 : util / static_cast<double>(devs.size());
    rows.push_back(std::move(row));
  }
  return rows;
}

double ExperimentReport::mean_utilization(int device) const {
  double sum = 0.0;
  for (const auto& rep : reps) {
    auto it = rep.utilization.find(device);
    if (it != rep.utilization.end()) sum += it->second;
  }
  return reps.empty() ? 0.0 : sum / static_cast<double>(reps.size());
}

double ExperimentReport::mean_max(const std::string& path_id) const {
  double sum = 0.0;
  int n = 0;
  for (const auto& values : per_rep_values(path_id)) {
    if (values.empty()) continue;
    sum += *std::max_element(values.begin(), values.end());
    n++;
  }
  return n > 0 ? sum / n : 0.0;
}

double ExperimentReport::worst_path_mean_max(const std::string& template_name) const {
  // Per repetition, the worst E2E across the template's paths; averaged over
  // repetitions. A single-number aggregate on top of the per-path series.
  double sum = 0.0;
  int n = 0;
  for (const auto& rep : reps) {
    double worst = 0.0;
    bool any = false;
    for (const auto& s : rep.series) {
      if (s.path_id.rfind(template_name + "/", 0) != 0 || s.e2e.empty()) continue;
      worst = std::max(worst, *std::max_element(s.e2e.begin(), s.e2e.end()));
      any = true;
    }
    if (any) {
      sum += worst;
      n++;
    }
  }
  return n > 0 ? sum / n : 0.0;
}

long ExperimentReport::total_denials() const {
  long n = 0;
  for (const auto& rep : reps) n += static_cast<long>(rep.denials.size());
  return n;
}

// ---------------------------------------------------------------------------
// summary / report rendering

std::string summary_csv_text(const ExperimentReport& report) {
  std::ostringstream out;
  out << "policy,instances,path_id,count,avg_ms,stddev_ms,max_ms,tail_ms,flatness_ms,"
         "utilization\n";
  for (const auto& row : report.summary_rows()) {
    out << row.policy << ',' << row.instances << ',' << row.path_id << ',' << row.count << ','
        << format_double(row.mean.avg_ms) << ',' << format_double(row.mean.stddev_ms) << ','
        << format_double(row.mean.max_ms) << ',' << format_double(row.mean.tail_ms) << ','
        << format_double(row.mean.flatness_ms) << ',' << format_double(row.utilization)
        << '\n';
  }
  return out.str();
}

std::string report_text(const ExperimentReport& report) {
  std::ostringstream out;
  const auto canonical = report.config.canonical_text();
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical)));
  out << "pipesim experiment report\n";
  out << "version: 0.1.0\n";
  out << "config_hash: " << hash << "\n";
  out << "seed: " << report.config.seed << "\n";
  out << "policy: " << report.policy_label << "\n";
  out << "instances: " << report.instances << "\n";
  out << "repetitions: " << report.config.repetitions << "\n";
  out << "messages_per_run: " << report.config.messages_per_run << "\n";
  out << "trim: " << report.config.trim.head << "/" << report.config.trim.tail << "\n";
  out << "aggregation: mean of per-repetition metrics; peak of repetitions in parentheses\n";
  out << "denials: " << report.total_denials() << "\n";
  for (const auto& rep : report.reps) {
    for (const auto& d : rep.denials) {
      out << "  rep" << rep.repetition << " " << d.instance_id << ": " << to_string(d.reason)
          << "\n";
    }
  }
  out << "utilization:";
  for (std::size_t d = 0; d < report.config.devices.size(); ++d) {
    out << " dev" << d << "=" << format_double(report.mean_utilization(static_cast<int>(d)));
  }
  out << "\n";
  for (const auto& row : report.summary_rows()) {
    out << "path " << row.path_id << ": count=" << row.count << " avg="
        << format_double(row.mean.avg_ms) << "(" << format_double(row.peak.avg_ms) << ")"
        << " stddev=" << format_double(row.mean.stddev_ms) << "("
        << format_double(row.peak.stddev_ms) << ")"
        << " max=" << format_double(row.mean.max_ms) << "(" << format_double(row.peak.max_ms)
        << ")"
        << " tail=" << format_double(row.mean.tail_ms) << "(" << format_double(row.peak.tail_ms)
        << ")"
        << " flatness=" << format_double(row.mean.flatness_ms) << "("
        << format_double(row.peak.flatness_ms) << ")\n";
  }
  std::set<std::string> templates;
  for (const auto& app : report.config.apps) templates.insert(app.template_name);
  for (const auto& tpl : templates) {
    out << "worst-path " << tpl << ": mean_max=" << format_double(report.worst_path_mean_max(tpl))
        << " (single-number aggregate added by pipesim)\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// compare

namespace {

double delta_pct(double a, double b) {
  if (a == 0.0) return b == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return (b - a) / a * 100.0;
}

}  // namespace

std::vector<ComparisonRow> compare(const ExperimentReport& a, const ExperimentReport& b) {
  if (a.instances != b.instances) {
    throw KeyMismatchError("instance counts differ: " + std::to_string(a.instances) + " vs " +
                           std::to_string(b.instances));
  }
  const auto pa = a.path_ids();
  const auto pb = b.path_ids();
  if (std::set<std::string>(pa.begin(), pa.end()) != std::set<std::string>(pb.begin(), pb.end())) {
    throw KeyMismatchError("path keys differ between reports");
  }

  std::map<std::string, SummaryRow> rows_a, rows_b;
  for (const auto& r : a.summary_rows()) rows_a[r.path_id] = r;
  for (const auto& r : b.summary_rows()) rows_b[r.path_id] = r;

  std::vector<ComparisonRow> out;
  for (const auto& path_id : pa) {
    const auto& ra = rows_a.at(path_id);
    const auto& rb = rows_b.at(path_id);
    ComparisonRow row;
    row.key = std::to_string(a.instances) + "/" + path_id;
    row.delta_avg_pct = delta_pct(ra.mean.avg_ms, rb.mean.avg_ms);
    row.delta_max_pct = delta_pct(ra.mean.max_ms, rb.mean.max_ms);
    row.delta_stddev_pct = delta_pct(ra.mean.stddev_ms, rb.mean.stddev_ms);
    row.delta_tail_pct = delta_pct(ra.mean.tail_ms, rb.mean.tail_ms);
    row.delta_flatness_pct = delta_pct(ra.mean.flatness_ms, rb.mean.flatness_ms);
    row.rank = metrics::mann_whitney(a.pooled(path_id), b.pooled(path_id));
    out.push_back(std::move(row));
  }
  return out;
}

void write_comparison_csv(std::ostream& out, const std::vector<ComparisonRow>& rows) {
  out << "pair,u,z,significant\n";
  for (const auto& r : rows) {
    out << r.key << ',' << format_double(r.rank.u_statistic) << ','
        << format_double(r.rank.z_score) << ',' << (r.rank.significant ? "true" : "false")
        << '\n';
  }
}

// ---------------------------------------------------------------------------
// sweep

std::vector<SweepRow> sweep_thread_pct(const ExperimentConfig& config,
                                       const std::vector<double>& values) {
  if (!policy_uses_mps(config.policy.kind)) {
    throw ConfigError("sweep requires an *Mps placement policy");
  }
  std::vector<double> ordered = values;
  std::sort(ordered.begin(), ordered.end());

  std::vector<SweepRow> rows;
  for (double pct : ordered) {
    ExperimentConfig cfg = config;
    cfg.policy.thread_pct = pct;
    if (!cfg.output_dir.empty()) {
      cfg.output_dir = (fs::path(config.output_dir) /
                        ("thread_pct_" + format_double(pct)))
                           .string();
    }
    auto report = run(cfg);

    // Pool the first app template's paths into one row per value.
    const std::string& tpl = config.apps.front().template_name;
    MeanAccumulator acc;
    std::size_t count = 0;
    for (std::size_t rep = 0; rep < report.reps.size(); ++rep) {
      std::vector<double> pooled;
      for (const auto& s : report.reps[rep].series) {
        if (s.path_id.rfind(tpl + "/", 0) != 0) continue;
        pooled.insert(pooled.end(), s.e2e.begin(), s.e2e.end());
      }
      if (pooled.empty()) continue;
      acc.add(metrics::summarize(pooled));
      count = pooled.size();
    }

    SweepRow row;
    row.thread_pct = pct;
    row.count = count;
    row.mean = acc.result_mean();
    const auto devs = compute_devices(cfg);
    double util = 0.0;
    for (int d : devs) util += report.mean_utilization(d);
    row.utilization = devs.empty() ? 0.0 : util / static_cast<double>(devs.size());
    row.denied = static_cast<int>(report.total_denials() / report.config.repetitions);
    if (row.denied > 0) {
      row.note = "admission denied surplus clients; hardware MPS degrades instead of denying";
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "thread_pct,count,avg_ms,stddev_ms,max_ms,tail_ms,flatness_ms,utilization,denied,"
         "note\n";
  for (const auto& r : rows) {
    out << format_double(r.thread_pct) << ',' << r.count << ',' << format_double(r.mean.avg_ms)
        << ',' << format_double(r.mean.stddev_ms) << ',' << format_double(r.mean.max_ms) << ','
        << format_double(r.mean.tail_ms) << ',' << format_double(r.mean.flatness_ms) << ','
        << format_double(r.utilization) << ',' << r.denied << ',' << r.note << '\n';
  }
}

// ---------------------------------------------------------------------------
// report regeneration from raw CSVs

ExperimentReport load_report_from_dir(const std::string& output_dir) {
  const fs::path root(output_dir);
  ExperimentConfig config = parse_config_yaml_file((root / "config.yaml").string());

  ExperimentReport report;
  report.config = config;
  report.policy_label = to_string(config.policy.kind);
  report.instances = config.total_instances();

  const fs::path base = root / report.policy_label / std::to_string(report.instances);
  for (int rep = 0; rep < config.repetitions; ++rep) {
    const fs::path rep_dir = base / ("rep" + std::to_string(rep));
    RepetitionResult result;
    result.repetition = rep;

    std::ifstream lat(rep_dir / "latencies.csv");
    if (!lat) throw ConfigError("missing " + (rep_dir / "latencies.csv").string());
    std::string line;
    std::getline(lat, line);  // header
    PathSeries* current = nullptr;
    while (std::getline(lat, line)) {
      if (line.empty()) continue;
      auto fields = split_csv_line(line);
      if (fields.size() != 4) continue;
      if (!current || current->instance_id != fields[0] || current->path_id != fields[1]) {
        result.series.push_back(PathSeries{fields[0], fields[1], {}});
        current = &result.series.back();
      }
      current->e2e.push_back(parse_double(fields[3]));
    }

    std::ifstream util(rep_dir / "utilization.csv");
    if (util) {
      std::getline(util, line);
      while (std::getline(util, line)) {
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 2) continue;
        result.utilization[static_cast<int>(parse_u64(fields[0]))] = parse_double(fields[1]);
      }
    }

    std::ifstream den(rep_dir / "denials.csv");
    if (den) {
      std::getline(den, line);
      while (std::getline(den, line)) {
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() < 2) continue;
        DenialRecord d;
        d.instance_id = fields[0];
        d.reason = fields[1] == "MemoryOversubscription" ? DenialReason::MemoryOversubscription
                                                         : DenialReason::SmOversubscription;
        if (fields.size() > 2) d.detail = fields[2];
        result.denials.push_back(std::move(d));
      }
    }

    report.reps.push_back(std::move(result));
  }
  return report;
}

void regenerate_report(const std::string& output_dir) {
  auto report = load_report_from_dir(output_dir);
  const fs::path root(output_dir);
  {
    std::ofstream out(root / "summary.csv");
    out << summary_csv_text(report);
  }
  {
    std::ofstream out(root / "report.txt");
    out << report_text(report);
  }
}

}  // namespace pipesim
