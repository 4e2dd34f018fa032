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

#include "pipesim/runner.hpp"

#include <algorithm>
#include <set>

#include "pipesim/errors.hpp"

namespace pipesim {

InstanceRunner::InstanceRunner(SimEngine& engine, FlowTracker& tracker, InstanceSetup setup)
    : engine_(engine),
      tracker_(tracker),
      setup_(std::move(setup)),
      rng_(setup_.rng_seed),
      tick_rng_(setup_.tick_rng_seed) {
  const auto& graph = *setup_.graph;
  const auto roots = graph.roots();
  const std::string root = roots.front();

  // Restrict the topological sweep to operators reachable from the entry
  // root. Template graphs are single-root, so this is usually everything.
  std::set<std::string> reachable;
  std::vector<std::string> stack{root};
  while (!stack.empty()) {
    auto cur = stack.back();
    stack.pop_back();
    if (!reachable.insert(cur).second) continue;
    for (const auto& nxt : graph.successors(cur)) stack.push_back(nxt);
  }

  for (const auto& name : graph.topological_order()) {
    if (!reachable.count(name)) continue;
    Stage s;
    s.op = &graph.op(name);
    s.assignment = setup_.plan.assignment(name);
    for (const auto& hop : setup_.plan.transfers) {
      if (hop.consumer == name) s.transfers_before.push_back(hop);
    }
    const auto& paths = graph.paths();
    for (std::size_t i = 0; i < paths.size(); ++i) {
      if (std::find(paths[i].begin(), paths[i].end(), name) != paths[i].end()) {
        s.path_ids.push_back(setup_.path_ids.at(i));
      }
    }
    stages_.push_back(std::move(s));
  }
}

const std::string& InstanceRunner::instance_id() const { return setup_.graph->instance_id(); }

void InstanceRunner::start() {
  if (setup_.messages_target <= 0) return;
  schedule_tick(0);
}

void InstanceRunner::schedule_tick(int frame_index) {
  // Each wakeup lands a little after its grid point, modelling host timer
  // scheduling slop.
  const double noise =
      setup_.tick_jitter_ms > 0 ? tick_rng_.uniform01() * setup_.tick_jitter_ms : 0.0;
  engine_.schedule_at(setup_.start_offset_ms + frame_index * setup_.frame_period_ms + noise,
                      [this, frame_index] { on_tick(frame_index); });
}

void InstanceRunner::on_tick(int frame_index) {
  if (emitted_ >= setup_.messages_target) return;
  if (busy_) {
    // The previous message has not reached the leaf; the replayer drops this
    // frame rather than queueing it.
    skipped_++;
    schedule_tick(frame_index + 1);
    return;
  }
  Message msg;
  msg.message_id = static_cast<std::uint64_t>(emitted_);
  msg.payload_bytes = setup_.payload_bytes;
  emitted_++;
  busy_ = true;
  process_message(std::move(msg), [this](Message) {
    busy_ = false;
    completed_++;
  });
  if (emitted_ < setup_.messages_target) schedule_tick(frame_index + 1);
}

void InstanceRunner::process_message(Message msg, std::function<void(Message)> done) {
  if (engine_.stopped()) {
    throw SimulationError(SimError::EngineStopped, "engine is stopped");
  }
  auto ex = std::make_shared<Execution>();
  ex->msg = std::move(msg);
  ex->done = std::move(done);
  run_stage(ex);
}

void InstanceRunner::record_event(const Stage& stage, const std::shared_ptr<Execution>& ex,
                                  TrailEventKind kind) {
  ex->msg.trail.push_back(TrailEntry{stage.op->name, kind, engine_.now()});
  for (const auto& path_id : stage.path_ids) {
    tracker_.record(TrailEvent{setup_.graph->instance_id(), path_id, ex->msg.message_id,
                               stage.op->name, kind, engine_.now()});
  }
}

void InstanceRunner::run_stage(const std::shared_ptr<Execution>& ex) {
  const Stage& stage = stages_[ex->stage_index];

  if (!stage.assignment.host && setup_.plan.denial.has_value()) {
    throw SimulationError(SimError::PartitionDenied,
                          instance_id() + ": admission denied, device stages cannot run");
  }

  // Cross-device inputs arrive before the operator can receive the message.
  if (!stage.transfers_before.empty()) {
    ex->pending_parts = static_cast<int>(stage.transfers_before.size());
    for (const auto& hop : stage.transfers_before) {
      TransferTask t;
      t.src_device = hop.src_device;
      t.dst_device = hop.dst_device;
      t.bytes = ex->msg.payload_bytes;
      engine_.submit_transfer(t, setup_.compute_context, [this, ex](double) {
        if (--ex->pending_parts == 0) dispatch_stage(ex);
      });
    }
    return;
  }
  dispatch_stage(ex);
}

void InstanceRunner::dispatch_stage(const std::shared_ptr<Execution>& ex) {
  const Stage& stage = stages_[ex->stage_index];
  const auto& demand = stage.op->workload;
  record_event(stage, ex, TrailEventKind::Receive);

  if (stage.assignment.host) {
    const double duration = demand.base_duration_ms * rng_.jitter(setup_.host_jitter_sigma);
    engine_.schedule_in(duration, [this, ex] { complete_stage(ex); });
    return;
  }
  if (stage.assignment.graphics) {
    engine_.submit_render(stage.assignment.device, setup_.graphics_context,
                          demand.base_duration_ms, rng_.jitter(setup_.jitter_sigma),
                          [this, ex](double) { complete_stage(ex); });
    return;
  }
  // One kernel per parallel stream; the stage completes when all streams do.
  ex->pending_parts = demand.parallel_streams;
  for (int s = 0; s < demand.parallel_streams; ++s) {
    KernelTask task;
    task.context = setup_.compute_context;
    task.sm_demand = demand.sm_demand;
    task.base_duration_ms = demand.base_duration_ms;
    task.memory_bytes = demand.memory_bytes;
    task.stream_index = s;
    task.jitter_multiplier = rng_.jitter(setup_.jitter_sigma);
    engine_.submit_kernel(stage.assignment.device, task, [this, ex](double) {
      if (--ex->pending_parts == 0) complete_stage(ex);
    });
  }
}

void InstanceRunner::complete_stage(const std::shared_ptr<Execution>& ex) {
  record_event(stages_[ex->stage_index], ex, TrailEventKind::Emit);
  ex->stage_index++;
  if (ex->stage_index < stages_.size()) {
    run_stage(ex);
    return;
  }
  if (ex->done) ex->done(std::move(ex->msg));
}

}  // namespace pipesim
