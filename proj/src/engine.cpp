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

#include "pipesim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <ostream>
#include <queue>
#include <utility>

#include "pipesim/csvio.hpp"
#include "pipesim/errors.hpp"

namespace pipesim {

namespace {

// The engine clock is integer microseconds. Millisecond doubles appear only
// at the API boundary, so equal simulated intervals always convert to the
// same double and deterministic runs produce exactly equal latencies.
using TimeUs = std::int64_t;

inline TimeUs to_us(double ms) { return std::llround(ms * 1000.0); }
inline double to_ms(TimeUs us) { return static_cast<double>(us) / 1000.0; }

// Residual work below half a microsecond counts as done when a quantum
// expires.
constexpr double kWorkEpsilonUs = 0.5;

}  // namespace

void ContentionConfig::validate() const {
  if (ctx_switch_compute_compute_ms < 0 || ctx_switch_compute_graphics_ms < 0 ||
      time_slice_quantum_ms < 0 || jitter_sigma < 0 || transfer_latency_ms < 0 ||
      source_tick_jitter_ms < 0 || transfer_bandwidth_bytes_per_ms <= 0) {
    throw ConfigError("contention: negative cost or non-positive bandwidth");
  }
  if (ctx_switch_compute_graphics_ms < ctx_switch_compute_compute_ms) {
    throw ConfigError("contention: compute<->graphics switch cost must be >= compute<->compute");
  }
  if (cpu_affinity_jitter_multiplier <= 0 || cpu_affinity_jitter_multiplier > 1) {
    throw ConfigError("contention: cpu_affinity_jitter_multiplier must be in (0,1]");
  }
}

struct SimEngine::Impl {
  struct Event {
    TimeUs time;
    std::uint64_t seq;
    std::function<void()> fn;
  };
  struct EventOrder {
    bool operator()(const Event& a, const Event& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.seq > b.seq;
    }
  };

  struct Work {
    std::uint64_t seq = 0;
    bool is_render = false;
    KernelTask kernel;
    TimeUs render_duration = 0;   // renders: pre-jittered full duration
    double work_remaining = 0.0;  // kernels: full-grant microseconds still owed
    CompletionFn done;
  };

  struct Running {
    std::uint64_t seq = 0;
    KernelTask kernel;
    double work_remaining = 0.0;  // as of slice_start
    double rate = 1.0;            // work microseconds retired per microsecond
    int grant = 0;
    int grant_partition = 0;
    int grant_pool = 0;
    TimeUs slice_start = 0;
    CompletionFn done;
  };

  struct PartitionState {
    int id = -1;
    int device = -1;
    int granted = 0;
    int free = 0;
    std::uint64_t mem_limit = 0;
    std::uint64_t mem_used = 0;
    std::string client;
    bool retired = false;
    int running = 0;
    int waiting = 0;
  };

  struct ContextState {
    int id = -1;
    int device = -1;
    std::string client;
    ContextKind kind = ContextKind::Compute;
    int partition = -1;
    std::deque<Work> queue;  // TimeSliced pending work
    bool in_rotation = false;
  };

  struct DeviceState {
    DeviceSpec spec;
    // TimeSliced rotation
    std::deque<int> rotation;
    int running_ctx = -1;
    int last_ctx = -1;
    bool switching = false;
    TimeUs turn_end = 0;
    std::uint64_t turn_token = 0;
    bool render_active = false;
    std::vector<Running> running;
    // SpatialMPS
    int pool_base = 0;  // SMs not reserved by any partition
    int pool_borrowed = 0;
    std::deque<Work> mps_waiting;  // device-wide FIFO, oldest first
    std::deque<Work> render_queue;
    int last_render_ctx = -1;
    bool compute_since_render = false;
    // accounting
    int committed_sms = 0;
    std::uint64_t mem_used = 0;
    std::vector<BusySegment> segments;
  };

  ContentionConfig config;
  TimeUs now = 0;
  std::uint64_t next_seq = 0;
  bool stopped = false;
  std::priority_queue<Event, std::vector<Event>, EventOrder> queue;
  std::vector<DeviceState> devices;
  std::vector<ContextState> contexts;
  std::vector<PartitionState> partitions;
  std::map<std::pair<int, int>, TimeUs> lane_free;  // (src,dst) -> earliest free
  std::vector<EngineLogRow> log;

  // ---- plumbing ----

  void require_running() const {
    if (stopped) throw SimulationError(SimError::EngineStopped, "engine is stopped");
  }

  DeviceState& dev(int id) {
    if (id < 0 || static_cast<std::size_t>(id) >= devices.size()) {
      throw SimulationError(SimError::UnknownDevice, "unknown device " + std::to_string(id));
    }
    return devices[static_cast<std::size_t>(id)];
  }
  const DeviceState& dev(int id) const {
    return const_cast<Impl*>(this)->dev(id);
  }
  ContextState& ctx(int id) {
    if (id < 0 || static_cast<std::size_t>(id) >= contexts.size()) {
      throw SimulationError(SimError::UnknownContext, "unknown context " + std::to_string(id));
    }
    return contexts[static_cast<std::size_t>(id)];
  }
  PartitionState& part(int id) {
    if (id < 0 || static_cast<std::size_t>(id) >= partitions.size() ||
        partitions[static_cast<std::size_t>(id)].retired) {
      throw PartitionOpError(PartitionError::UnknownPartition,
                             "unknown partition " + std::to_string(id));
    }
    return partitions[static_cast<std::size_t>(id)];
  }

  void schedule(TimeUs t, std::function<void()> fn) {
    if (t < now) t = now;
    queue.push(Event{t, next_seq++, std::move(fn)});
  }

  void add_log(int device, int context, const char* kind, std::string detail) {
    log.push_back(EngineLogRow{to_ms(now), device, context, kind, std::move(detail)});
  }

  int pool_avail(const DeviceState& d) const {
    return std::max(0, d.pool_base - d.pool_borrowed);
  }

  TimeUs switch_cost_us(int prev_ctx, int next_ctx) const {
    if (prev_ctx < 0 || prev_ctx == next_ctx) return 0;
    const auto& a = contexts[static_cast<std::size_t>(prev_ctx)];
    const auto& b = contexts[static_cast<std::size_t>(next_ctx)];
    return to_us(a.kind == b.kind ? config.ctx_switch_compute_compute_ms
                                  : config.ctx_switch_compute_graphics_ms);
  }

  // Fires the user's completion callback as its own event so device state is
  // never mutated re-entrantly.
  void fire(CompletionFn& cb) {
    if (!cb) return;
    schedule(now, [cb = std::move(cb), t = to_ms(now)]() mutable { cb(t); });
  }

  // ---- TimeSliced scheduling ----

  void ts_submit(DeviceState& d, ContextState& c, Work w) {
    c.queue.push_back(std::move(w));
    if (d.running_ctx == c.id) {
      // The submitting context already holds the device; a compute turn can
      // absorb new work mid-quantum.
      if (!d.switching && !d.render_active && c.kind == ContextKind::Compute) {
        ts_fill(d, c);
      }
      return;
    }
    ts_enqueue(d, c);
    ts_kick(d);
  }

  void ts_enqueue(DeviceState& d, ContextState& c) {
    if (!c.in_rotation && d.running_ctx != c.id && !c.queue.empty()) {
      d.rotation.push_back(c.id);
      c.in_rotation = true;
    }
  }

  void ts_kick(DeviceState& d) {
    if (d.running_ctx != -1 || d.rotation.empty()) return;
    const int next = d.rotation.front();
    d.rotation.pop_front();
    auto& c = ctx(next);
    c.in_rotation = false;
    const TimeUs pen = switch_cost_us(d.last_ctx, next);
    d.running_ctx = next;
    d.switching = true;
    if (pen > 0) {
      add_log(d.spec.device_id, next, "ctx_switch",
              "from=" + std::to_string(d.last_ctx) + " cost_ms=" + format_double(to_ms(pen)));
    }
    d.last_ctx = next;
    schedule(now + pen, [this, devid = d.spec.device_id, next] {
      auto& dd = devices[static_cast<std::size_t>(devid)];
      if (dd.running_ctx != next || !dd.switching) return;
      ts_turn_begin(dd, ctx(next));
    });
  }

  void ts_turn_begin(DeviceState& d, ContextState& c) {
    d.switching = false;
    if (c.kind == ContextKind::Graphics) {
      // One render per turn, non-preemptible: no quantum event is armed, so
      // nothing can interrupt it.
      Work w = std::move(c.queue.front());
      c.queue.pop_front();
      d.render_active = true;
      add_log(d.spec.device_id, c.id, "render_start",
              "dur_ms=" + format_double(to_ms(w.render_duration)));
      schedule(now + w.render_duration,
               [this, devid = d.spec.device_id, cid = c.id, w = std::move(w)]() mutable {
                 auto& dd = devices[static_cast<std::size_t>(devid)];
                 dd.render_active = false;
                 add_log(dd.spec.device_id, cid, "render_end", "");
                 fire(w.done);
                 ts_end_turn(dd, ctx(cid));
               });
      return;
    }
    d.turn_token++;
    d.turn_end = now + to_us(config.time_slice_quantum_ms);
    ts_fill(d, c);
    schedule(d.turn_end, [this, devid = d.spec.device_id, token = d.turn_token] {
      auto& dd = devices[static_cast<std::size_t>(devid)];
      if (dd.turn_token != token) return;
      ts_quantum_expire(dd);
    });
  }

  // Starts as many queued kernels of the running compute context as SMs
  // allow, in submission order.
  void ts_fill(DeviceState& d, ContextState& c) {
    while (!c.queue.empty()) {
      Work& w = c.queue.front();
      const int free = d.spec.sm_count - d.committed_sms;
      if (w.kernel.sm_demand > 0 && free < 1) break;
      const int grant = std::min(w.kernel.sm_demand, free);
      Work taken = std::move(w);
      c.queue.pop_front();
      start_kernel(d, std::move(taken), grant, grant, 0, d.turn_token);
    }
  }

  void start_kernel(DeviceState& d, Work w, int grant, int grant_partition, int grant_pool,
                    std::uint64_t token) {
    Running r;
    r.seq = w.seq;
    r.kernel = w.kernel;
    r.work_remaining = w.work_remaining;
    r.grant = grant;
    r.grant_partition = grant_partition;
    r.grant_pool = grant_pool;
    r.rate = w.kernel.sm_demand > 0
                 ? std::min(1.0, static_cast<double>(grant) / w.kernel.sm_demand)
                 : 1.0;
    r.slice_start = now;
    r.done = std::move(w.done);
    d.committed_sms += grant;
    d.pool_borrowed += grant_pool;
    d.compute_since_render = true;
    if (d.spec.sched_mode == SchedMode::SpatialMPS) {
      const int pid = ctx(r.kernel.context).partition;
      if (pid >= 0) partitions[static_cast<std::size_t>(pid)].running++;
    }
    add_log(d.spec.device_id, r.kernel.context, "kernel_start",
            "sms=" + std::to_string(grant) + " demand=" + std::to_string(r.kernel.sm_demand) +
                " stream=" + std::to_string(r.kernel.stream_index));
    const TimeUs completion = now + std::llround(r.work_remaining / r.rate);
    const std::uint64_t seq = r.seq;
    d.running.push_back(std::move(r));
    schedule(completion, [this, devid = d.spec.device_id, seq, token] {
      auto& dd = devices[static_cast<std::size_t>(devid)];
      if (dd.spec.sched_mode == SchedMode::TimeSliced && dd.turn_token != token) return;
      on_kernel_complete(dd, seq);
    });
  }

  void on_kernel_complete(DeviceState& d, std::uint64_t seq) {
    auto it = std::find_if(d.running.begin(), d.running.end(),
                           [seq](const Running& r) { return r.seq == seq; });
    if (it == d.running.end()) return;  // stale event
    Running r = std::move(*it);
    d.running.erase(it);
    finish_running(d, r);
    if (d.spec.sched_mode == SchedMode::TimeSliced) {
      auto& c = ctx(d.running_ctx);
      ts_fill(d, c);
      if (d.running.empty() && c.queue.empty()) {
        ts_end_turn(d, c);
      }
    } else {
      mps_service(d);
    }
  }

  // Common completion bookkeeping: accounting segment, SM/memory release,
  // callback, log.
  void finish_running(DeviceState& d, Running& r) {
    if (r.grant > 0) {
      d.segments.push_back(BusySegment{to_ms(r.slice_start), to_ms(now), r.grant});
    }
    d.committed_sms -= r.grant;
    d.pool_borrowed -= r.grant_pool;
    release_memory(d, r.kernel);
    if (d.spec.sched_mode == SchedMode::SpatialMPS) {
      const int pid = ctx(r.kernel.context).partition;
      if (pid >= 0) {
        auto& p = partitions[static_cast<std::size_t>(pid)];
        p.free += r.grant_partition;
        p.running--;
      }
    }
    add_log(d.spec.device_id, r.kernel.context, "kernel_end",
            "stream=" + std::to_string(r.kernel.stream_index));
    fire(r.done);
  }

  void ts_quantum_expire(DeviceState& d) {
    auto& c = ctx(d.running_ctx);
    // Preempt in submission order so the resume order is stable.
    std::sort(d.running.begin(), d.running.end(),
              [](const Running& a, const Running& b) { return a.seq < b.seq; });
    std::vector<Running> preempted;
    preempted.swap(d.running);
    for (auto& r : preempted) {
      const double progressed = static_cast<double>(now - r.slice_start) * r.rate;
      r.work_remaining -= progressed;
      if (r.grant > 0) {
        d.segments.push_back(BusySegment{to_ms(r.slice_start), to_ms(now), r.grant});
      }
      d.committed_sms -= r.grant;
      d.pool_borrowed -= r.grant_pool;
      if (r.work_remaining <= kWorkEpsilonUs) {
        release_memory(d, r.kernel);
        add_log(d.spec.device_id, r.kernel.context, "kernel_end",
                "stream=" + std::to_string(r.kernel.stream_index));
        fire(r.done);
        continue;
      }
      add_log(d.spec.device_id, r.kernel.context, "quantum_preempt",
              "remaining_ms=" + format_double(r.work_remaining / 1000.0));
      Work w;
      w.seq = r.seq;
      w.kernel = r.kernel;
      w.work_remaining = r.work_remaining;
      w.done = std::move(r.done);
      c.queue.push_front(std::move(w));
    }
    // push_front reversed the relative order of preempted tasks; restore it.
    std::sort(c.queue.begin(), c.queue.end(),
              [](const Work& a, const Work& b) { return a.seq < b.seq; });
    ts_end_turn(d, c);
  }

  void ts_end_turn(DeviceState& d, ContextState& c) {
    d.turn_token++;
    d.running_ctx = -1;
    ts_enqueue(d, c);
    ts_kick(d);
  }

  // ---- SpatialMPS scheduling ----

  void mps_submit(DeviceState& d, ContextState& c, Work w) {
    if (c.partition < 0) {
      throw SimulationError(SimError::NoPartition,
                            "context " + std::to_string(c.id) +
                                " has no partition on SpatialMPS device");
    }
    auto& p = partitions[static_cast<std::size_t>(c.partition)];
    if (!mps_try_start(d, p, w)) {
      p.waiting++;
      d.mps_waiting.push_back(std::move(w));
      add_log(d.spec.device_id, c.id, "kernel_wait",
              "partition=" + std::to_string(p.id));
    }
  }

  bool mps_try_start(DeviceState& d, PartitionState& p, Work& w) {
    const int pool = config.opportunistic_sms ? pool_avail(d) : 0;
    const int from_partition = std::min(w.kernel.sm_demand, p.free);
    // Pool borrowing is all-or-nothing: idle unreserved SMs top a task up to
    // its full demand or not at all, so a nearly-empty pool cannot trap a
    // kernel in a tiny lifetime grant.
    const int shortfall = w.kernel.sm_demand - from_partition;
    const int from_pool = (shortfall > 0 && pool >= shortfall) ? shortfall : 0;
    const int grant = from_partition + from_pool;
    if (w.kernel.sm_demand > 0 && grant < 1) return false;
    p.free -= from_partition;
    start_kernel(d, std::move(w), grant, from_partition, from_pool, 0);
    return true;
  }

  // Offers freed SMs to waiting kernels, oldest first. A pass only ever
  // consumes capacity, so one in-order sweep is enough. mps_try_start moves
  // the work out only when the task actually starts.
  void mps_service(DeviceState& d) {
    for (auto it = d.mps_waiting.begin(); it != d.mps_waiting.end();) {
      auto& p = partitions[static_cast<std::size_t>(ctx(it->kernel.context).partition)];
      if (mps_try_start(d, p, *it)) {
        p.waiting--;
        it = d.mps_waiting.erase(it);
      } else {
        ++it;
      }
    }
  }

  void mps_submit_render(DeviceState& d, Work w) {
    d.render_queue.push_back(std::move(w));
    if (!d.render_active) mps_render_next(d);
  }

  void mps_render_next(DeviceState& d) {
    if (d.render_queue.empty()) return;
    Work w = std::move(d.render_queue.front());
    d.render_queue.pop_front();
    const int cid = w.kernel.context;
    TimeUs pen = 0;
    if (d.compute_since_render) {
      // Compute activity evicted the resident graphics state.
      pen = to_us(config.ctx_switch_compute_graphics_ms);
    } else if (d.last_render_ctx >= 0 && d.last_render_ctx != cid) {
      pen = to_us(config.ctx_switch_compute_compute_ms);
    }
    d.compute_since_render = false;
    d.render_active = true;
    if (pen > 0) {
      add_log(d.spec.device_id, cid, "ctx_switch",
              "render_lane cost_ms=" + format_double(to_ms(pen)));
    }
    schedule(now + pen, [this, devid = d.spec.device_id, w = std::move(w)]() mutable {
      auto& dd = devices[static_cast<std::size_t>(devid)];
      add_log(dd.spec.device_id, w.kernel.context, "render_start",
              "dur_ms=" + format_double(to_ms(w.render_duration)));
      schedule(now + w.render_duration,
               [this, devid, w = std::move(w)]() mutable {
                 auto& d2 = devices[static_cast<std::size_t>(devid)];
                 d2.render_active = false;
                 d2.last_render_ctx = w.kernel.context;
                 add_log(d2.spec.device_id, w.kernel.context, "render_end", "");
                 fire(w.done);
                 mps_render_next(d2);
               });
    });
  }

  // ---- memory accounting ----

  void acquire_memory(DeviceState& d, ContextState& c, const KernelTask& task) {
    if (task.memory_bytes == 0) return;
    if (d.spec.sched_mode == SchedMode::SpatialMPS && c.partition >= 0) {
      auto& p = partitions[static_cast<std::size_t>(c.partition)];
      if (p.mem_used + task.memory_bytes > p.mem_limit) {
        throw SimulationError(SimError::OutOfMemory,
                              "partition " + std::to_string(p.id) + " memory cap exceeded");
      }
      p.mem_used += task.memory_bytes;
    } else {
      if (d.mem_used + task.memory_bytes > d.spec.memory_capacity) {
        throw SimulationError(SimError::OutOfMemory,
                              "device " + std::to_string(d.spec.device_id) + " memory exceeded");
      }
      d.mem_used += task.memory_bytes;
    }
  }

  void release_memory(DeviceState& d, const KernelTask& task) {
    if (task.memory_bytes == 0) return;
    const int pid = task.context >= 0 ? ctx(task.context).partition : -1;
    if (d.spec.sched_mode == SchedMode::SpatialMPS && pid >= 0) {
      partitions[static_cast<std::size_t>(pid)].mem_used -= task.memory_bytes;
    } else {
      d.mem_used -= task.memory_bytes;
    }
  }
};

SimEngine::SimEngine(ContentionConfig config) : impl_(std::make_unique<Impl>()) {
  config.validate();
  impl_->config = config;
}

SimEngine::~SimEngine() = default;

double SimEngine::now() const { return to_ms(impl_->now); }

const ContentionConfig& SimEngine::contention() const { return impl_->config; }

void SimEngine::schedule_at(double time_ms, std::function<void()> fn) {
  impl_->require_running();
  impl_->schedule(to_us(time_ms), std::move(fn));
}

void SimEngine::schedule_in(double delay_ms, std::function<void()> fn) {
  impl_->require_running();
  impl_->schedule(impl_->now + to_us(delay_ms), std::move(fn));
}

void SimEngine::run() {
  auto& im = *impl_;
  while (!im.queue.empty() && !im.stopped) {
    Impl::Event ev = std::move(const_cast<Impl::Event&>(im.queue.top()));
    im.queue.pop();
    im.now = ev.time;
    ev.fn();
  }
}

void SimEngine::stop() { impl_->stopped = true; }

bool SimEngine::stopped() const { return impl_->stopped; }

int SimEngine::add_device(const DeviceSpec& spec) {
  if (spec.sm_count < 1) throw ConfigError("device sm_count must be >= 1");
  Impl::DeviceState d;
  d.spec = spec;
  d.spec.device_id = static_cast<int>(impl_->devices.size());
  d.pool_base = spec.sm_count;
  impl_->devices.push_back(std::move(d));
  return impl_->devices.back().spec.device_id;
}

const DeviceSpec& SimEngine::device_spec(int device_id) const {
  return impl_->dev(device_id).spec;
}

int SimEngine::create_context(int device_id, std::string client, ContextKind kind,
                              int partition_id) {
  impl_->dev(device_id);
  if (kind == ContextKind::Graphics && partition_id >= 0) {
    throw SimulationError(SimError::WrongContextKind,
                          "graphics contexts never hold a partition");
  }
  if (partition_id >= 0) impl_->part(partition_id);  // must exist
  Impl::ContextState c;
  c.id = static_cast<int>(impl_->contexts.size());
  c.device = device_id;
  c.client = std::move(client);
  c.kind = kind;
  c.partition = partition_id;
  impl_->contexts.push_back(std::move(c));
  return impl_->contexts.back().id;
}

int SimEngine::create_partition(int device_id, int granted_sms,
                                std::uint64_t mem_limit_bytes, std::string client) {
  auto& d = impl_->dev(device_id);
  if (granted_sms < 1 || granted_sms > d.pool_base) {
    throw ConfigError("partition reservation of " + std::to_string(granted_sms) +
                      " SMs does not fit the unreserved pool");
  }
  Impl::PartitionState p;
  p.id = static_cast<int>(impl_->partitions.size());
  p.device = device_id;
  p.granted = granted_sms;
  p.free = granted_sms;
  p.mem_limit = mem_limit_bytes;
  p.client = std::move(client);
  impl_->partitions.push_back(std::move(p));
  d.pool_base -= granted_sms;
  return impl_->partitions.back().id;
}

void SimEngine::retire_partition(int partition_id) {
  auto& p = impl_->part(partition_id);
  auto& d = impl_->dev(p.device);
  d.pool_base += p.granted;
  p.retired = true;
}

bool SimEngine::partition_busy(int partition_id) const {
  const auto& p = impl_->part(partition_id);
  return p.running > 0 || p.waiting > 0;
}

void SimEngine::submit_kernel(int device_id, const KernelTask& task, CompletionFn on_done) {
  auto& im = *impl_;
  im.require_running();
  auto& d = im.dev(device_id);
  auto& c = im.ctx(task.context);
  if (c.kind != ContextKind::Compute) {
    throw SimulationError(SimError::WrongContextKind, "kernels require a Compute context");
  }
  im.acquire_memory(d, c, task);
  Impl::Work w;
  w.seq = im.next_seq++;
  w.kernel = task;
  w.work_remaining =
      static_cast<double>(to_us(task.base_duration_ms * task.jitter_multiplier));
  w.done = std::move(on_done);
  im.add_log(device_id, task.context, "kernel_submit",
             "sms=" + std::to_string(task.sm_demand) + " base_ms=" +
                 format_double(task.base_duration_ms));
  if (d.spec.sched_mode == SchedMode::TimeSliced) {
    im.ts_submit(d, c, std::move(w));
  } else {
    im.mps_submit(d, c, std::move(w));
  }
}

void SimEngine::submit_render(int device_id, int context, double base_duration_ms,
                              double jitter_multiplier, CompletionFn on_done) {
  auto& im = *impl_;
  im.require_running();
  auto& d = im.dev(device_id);
  auto& c = im.ctx(context);
  if (!d.spec.graphics_capable) {
    throw SimulationError(SimError::NotGraphicsCapable,
                          "device " + std::to_string(device_id) + " has no graphics engine");
  }
  if (c.kind != ContextKind::Graphics) {
    throw SimulationError(SimError::WrongContextKind, "renders require a Graphics context");
  }
  Impl::Work w;
  w.seq = im.next_seq++;
  w.is_render = true;
  w.kernel.context = context;
  w.render_duration = to_us(base_duration_ms * jitter_multiplier);
  w.done = std::move(on_done);
  im.add_log(device_id, context, "render_submit", "base_ms=" + format_double(base_duration_ms));
  if (d.spec.sched_mode == SchedMode::TimeSliced) {
    im.ts_submit(d, c, std::move(w));
  } else {
    im.mps_submit_render(d, std::move(w));
  }
}

void SimEngine::submit_transfer(const TransferTask& task, int src_context,
                                CompletionFn on_done) {
  auto& im = *impl_;
  im.require_running();
  im.dev(task.src_device);
  im.dev(task.dst_device);
  if (task.src_device == task.dst_device) {
    throw SimulationError(SimError::SameDevice, "transfer src and dst devices are equal");
  }
  const double duration_ms = im.config.transfer_latency_ms +
                             static_cast<double>(task.bytes) /
                                 im.config.transfer_bandwidth_bytes_per_ms;
  if (task.overlapped) {
    // One full-duplex copy engine per device pair: same-direction transfers
    // serialize, opposite directions are independent.
    auto key = std::make_pair(task.src_device, task.dst_device);
    auto [it, inserted] = im.lane_free.try_emplace(key, 0);
    const TimeUs start = std::max(im.now, it->second);
    const TimeUs fin = start + to_us(duration_ms);
    it->second = fin;
    im.schedule(start, [this, task] {
      impl_->add_log(task.src_device, -1, "transfer_start",
                     "dst=" + std::to_string(task.dst_device) +
                         " bytes=" + std::to_string(task.bytes));
    });
    im.schedule(fin, [this, task, cb = std::move(on_done)]() mutable {
      impl_->add_log(task.src_device, -1, "transfer_end",
                     "dst=" + std::to_string(task.dst_device));
      if (cb) cb(to_ms(impl_->now));
    });
    return;
  }
  // Blocking copy: the source context drives it, so it runs through the
  // device schedule like a zero-SM kernel and delays co-located work.
  if (src_context < 0) {
    throw SimulationError(SimError::UnknownContext,
                          "non-overlapped transfers need the blocking source context");
  }
  KernelTask pseudo;
  pseudo.context = src_context;
  pseudo.sm_demand = 0;
  pseudo.base_duration_ms = duration_ms;
  im.add_log(task.src_device, src_context, "transfer_start",
             "dst=" + std::to_string(task.dst_device) + " blocking bytes=" +
                 std::to_string(task.bytes));
  submit_kernel(task.src_device, pseudo,
                [this, task, cb = std::move(on_done)](double t) {
                  impl_->add_log(task.src_device, -1, "transfer_end",
                                 "dst=" + std::to_string(task.dst_device));
                  if (cb) cb(t);
                });
}

double SimEngine::utilization(int device_id, double window_start_ms,
                              double window_end_ms) const {
  const auto& d = impl_->dev(device_id);
  if (window_end_ms <= window_start_ms) {
    throw SimulationError(SimError::EmptyWindow, "utilization window is empty");
  }
  double busy = 0.0;
  for (const auto& s : d.segments) {
    const double lo = std::max(s.t0, window_start_ms);
    const double hi = std::min(s.t1, window_end_ms);
    if (hi > lo) busy += (hi - lo) * s.sms;
  }
  return busy / (static_cast<double>(d.spec.sm_count) * (window_end_ms - window_start_ms));
}

const std::vector<BusySegment>& SimEngine::busy_segments(int device_id) const {
  return impl_->dev(device_id).segments;
}

const std::vector<EngineLogRow>& SimEngine::event_log() const { return impl_->log; }

void SimEngine::write_event_log_csv(std::ostream& out) const {
  out << "time_ms,device,context,event_kind,detail\n";
  for (const auto& row : impl_->log) {
    out << format_double(row.time_ms) << ',' << row.device << ',' << row.context << ','
        << row.event_kind << ',' << row.detail << '\n';
  }
}

}  // namespace pipesim
