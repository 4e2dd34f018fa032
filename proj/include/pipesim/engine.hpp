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

#ifndef PIPESIM_ENGINE_HPP
#define PIPESIM_ENGINE_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace pipesim {

/// How a device arbitrates concurrent clients.
///
/// TimeSliced: one context owns the whole device at a time; contexts rotate
/// in quanta and pay a switch penalty on every context change.
/// SpatialMPS: each client's kernels run inside its reserved SM partition,
/// uninterrupted; partitions execute concurrently and never share SMs.
enum class SchedMode { TimeSliced, SpatialMPS };

enum class ContextKind { Compute, Graphics };

struct DeviceSpec {
  int device_id = 0;
  int sm_count = 48;
  std::uint64_t memory_capacity = 16'000'000'000ULL;
  bool graphics_capable = true;
  SchedMode sched_mode = SchedMode::TimeSliced;
};

/// Scheduling-cost and variability knobs. All values are calibration inputs;
/// the compute<->graphics switch cost must be at least the compute<->compute
/// cost.
struct ContentionConfig {
  double ctx_switch_compute_compute_ms = 0.1;
  double ctx_switch_compute_graphics_ms = 0.8;
  double time_slice_quantum_ms = 2.0;
  double jitter_sigma = 0.08;
  double transfer_bandwidth_bytes_per_ms = 1.0e6;
  double transfer_latency_ms = 0.2;
  double cpu_affinity_jitter_multiplier = 0.6;
  /// Host scheduling slop on source wakeups: each frame tick lands uniformly
  /// within [0, this] after its grid point. CPU pinning scales it down by
  /// cpu_affinity_jitter_multiplier.
  double source_tick_jitter_ms = 3.0;
  bool opportunistic_sms = false;

  void validate() const;
};

/// One simulated CUDA kernel launch.
///
/// Effective busy time is base_duration_ms * max(1, sm_demand / granted_sms)
/// * jitter_multiplier. The SM grant is fixed when the task starts and held
/// until it completes; freed SMs are redistributed only at task boundaries.
struct KernelTask {
  int context = -1;
  int sm_demand = 0;
  double base_duration_ms = 0.0;
  std::uint64_t memory_bytes = 0;
  int stream_index = 0;
  double jitter_multiplier = 1.0;
};

struct TransferTask {
  int src_device = 0;
  int dst_device = 0;
  std::uint64_t bytes = 0;
  bool overlapped = true;
};

/// Debug event-log row. Header: time_ms,device,context,event_kind,detail
struct EngineLogRow {
  double time_ms = 0.0;
  int device = -1;
  int context = -1;
  std::string event_kind;
  std::string detail;
};

/// Interval during which a kernel held `sms` SMs on a device. Utilization and
/// the SM-conservation checks are computed from these. Graphics passes do not
/// accrue SM time: utilization measures compute-kernel SM residency.
struct BusySegment {
  double t0 = 0.0;
  double t1 = 0.0;
  int sms = 0;
};

using CompletionFn = std::function<void(double finish_time_ms)>;

/// Deterministic single-lane discrete-event engine with simulated GPUs.
///
/// One event queue, strictly ordered by (time, sequence). No operation may be
/// invoked concurrently with stepping; separate engines are fully
/// independent. Completion callbacks always run as their own events so device
/// state is never mutated re-entrantly.
class SimEngine {
 public:
  explicit SimEngine(ContentionConfig config = {});
  ~SimEngine();
  SimEngine(const SimEngine&) = delete;
  SimEngine& operator=(const SimEngine&) = delete;

  double now() const;
  void schedule_at(double time_ms, std::function<void()> fn);
  void schedule_in(double delay_ms, std::function<void()> fn);

  /// Runs until the event queue drains or stop() is called.
  void run();
  void stop();
  bool stopped() const;

  const ContentionConfig& contention() const;

  int add_device(const DeviceSpec& spec);
  const DeviceSpec& device_spec(int device_id) const;

  /// Registers a client context on a device. Graphics contexts never hold a
  /// partition.
  int create_context(int device_id, std::string client, ContextKind kind,
                     int partition_id = -1);

  /// Partition runtime on a device: `granted_sms` reserved SMs and a pinned
  /// memory cap. Admission policy lives in the partition manager; the engine
  /// only enforces the runtime limits.
  int create_partition(int device_id, int granted_sms, std::uint64_t mem_limit_bytes,
                       std::string client);
  void retire_partition(int partition_id);
  bool partition_busy(int partition_id) const;

  void submit_kernel(int device_id, const KernelTask& task, CompletionFn on_done = {});

  /// Non-preemptible graphics pass. Once started it runs to completion before
  /// any other context receives the device (TimeSliced) or the render lane
  /// (SpatialMPS).
  void submit_render(int device_id, int context, double base_duration_ms,
                     double jitter_multiplier = 1.0, CompletionFn on_done = {});

  /// Inter-device copy. Overlapped transfers occupy only the per-direction
  /// copy lane and run concurrently with compute; non-overlapped transfers
  /// block the submitting context by running through its device schedule.
  void submit_transfer(const TransferTask& task, int src_context = -1,
                       CompletionFn on_done = {});

  /// busy-SM-time / (sm_count * window). Window end must exceed its start.
  double utilization(int device_id, double window_start_ms, double window_end_ms) const;

  const std::vector<BusySegment>& busy_segments(int device_id) const;
  const std::vector<EngineLogRow>& event_log() const;
  void write_event_log_csv(std::ostream& out) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pipesim

#endif  // PIPESIM_ENGINE_HPP
