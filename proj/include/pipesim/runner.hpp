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

#ifndef PIPESIM_RUNNER_HPP
#define PIPESIM_RUNNER_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pipesim/engine.hpp"
#include "pipesim/graph.hpp"
#include "pipesim/partition.hpp"
#include "pipesim/rng.hpp"
#include "pipesim/tracking.hpp"

namespace pipesim {

/// Everything one application instance needs to execute on the shared engine.
struct InstanceSetup {
  const OperatorGraph* graph = nullptr;
  PlacementPlan plan;
  int compute_context = -1;   // -1 when the graph has no compute kernels
  int graphics_context = -1;  // -1 when the graph has no graphics operators
  std::uint64_t payload_bytes = 0;
  double frame_period_ms = 30.0;
  double start_offset_ms = 0.0;
  int messages_target = 0;
  double jitter_sigma = 0.0;       // applied to GPU kernels and renders
  double host_jitter_sigma = 0.0;  // applied to host stages (pinning scales this)
  double tick_jitter_ms = 0.0;     // uniform wakeup slop added to each frame tick
  std::uint64_t rng_seed = 0;
  std::uint64_t tick_rng_seed = 0;
  /// Path labels aligned with graph->paths(); used as tracker path ids.
  std::vector<std::string> path_ids;
};

/// Single-lane executor for one graph instance: a paced source emits one
/// message per frame period (skipping the frame while the previous message is
/// still in flight), and each message visits the operators in topological
/// order, one at a time.
///
/// Multiple instances interleave only through the shared engine's device
/// schedules.
class InstanceRunner {
 public:
  InstanceRunner(SimEngine& engine, FlowTracker& tracker, InstanceSetup setup);

  /// Schedules the paced source. The run finishes when the engine drains.
  void start();

  /// Executes one message through the graph starting now. `done` receives the
  /// completed message (trail filled). Throws SimulationError{PartitionDenied}
  /// from the first device stage when the instance's admission was denied.
  void process_message(Message msg, std::function<void(Message)> done);

  int messages_emitted() const { return emitted_; }
  int messages_completed() const { return completed_; }
  int frames_skipped() const { return skipped_; }
  const std::string& instance_id() const;

 private:
  struct Stage {
    const OperatorSpec* op = nullptr;
    OperatorAssignment assignment;
    std::vector<TransferHop> transfers_before;
    std::vector<std::string> path_ids;  // paths this operator lies on
  };
  struct Execution {
    Message msg;
    std::size_t stage_index = 0;
    int pending_parts = 0;  // outstanding streams or transfers for this stage
    std::function<void(Message)> done;
  };

  void schedule_tick(int frame_index);
  void on_tick(int frame_index);
  void run_stage(const std::shared_ptr<Execution>& ex);
  void dispatch_stage(const std::shared_ptr<Execution>& ex);
  void complete_stage(const std::shared_ptr<Execution>& ex);
  void record_event(const Stage& stage, const std::shared_ptr<Execution>& ex,
                    TrailEventKind kind);

  SimEngine& engine_;
  FlowTracker& tracker_;
  InstanceSetup setup_;
  SeededRng rng_;
  SeededRng tick_rng_;
  std::vector<Stage> stages_;  // topological order, restricted to the root's reach
  bool busy_ = false;
  int emitted_ = 0;
  int completed_ = 0;
  int skipped_ = 0;
};

}  // namespace pipesim

#endif  // PIPESIM_RUNNER_HPP
