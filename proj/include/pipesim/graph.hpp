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

#ifndef PIPESIM_GRAPH_HPP
#define PIPESIM_GRAPH_HPP

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace pipesim {

enum class OperatorKind { Source, Compute, Inference, Graphics, Sink };

const char* to_string(OperatorKind kind);

/// Simulation-level resource demand of one operator per message.
///
/// sm_demand and base_duration_ms stand in for profiled kernel cost; they are
/// calibration inputs, not measurements. sm_demand == 0 marks a pure-host
/// operator that consumes host time only. parallel_streams models operators
/// that launch several concurrent kernel streams per message.
struct WorkloadDemand {
  int sm_demand = 0;
  double base_duration_ms = 0.0;
  std::uint64_t memory_bytes = 0;
  bool is_graphics = false;
  int parallel_streams = 1;
};

struct OperatorSpec {
  std::string name;
  OperatorKind kind = OperatorKind::Compute;
  std::vector<std::string> input_ports;
  std::vector<std::string> output_ports;
  WorkloadDemand workload;
};

/// One directed connection between an output port and an input port.
struct FlowEdge {
  std::string src_operator;
  std::string src_port;
  std::string dst_operator;
  std::string dst_port;
};

enum class TrailEventKind { Receive, Emit };

const char* to_string(TrailEventKind kind);

struct TrailEntry {
  std::string operator_name;
  TrailEventKind kind = TrailEventKind::Receive;
  double sim_time_ms = 0.0;
};

/// A unit of streaming data. The trail is append-only and its timestamps are
/// nondecreasing; for every operator visited, receive precedes emit.
struct Message {
  std::uint64_t message_id = 0;
  std::uint64_t payload_bytes = 0;
  std::vector<TrailEntry> trail;
};

/// Validated directed acyclic operator graph for one application instance.
///
/// Construction performs full validation (cycles, dangling ports, duplicate
/// input edges, connectivity, per-operator invariants) and throws
/// GraphValidationError on any violation. Instances are immutable afterwards
/// and safe to share read-only.
class OperatorGraph {
 public:
  static OperatorGraph build(std::vector<OperatorSpec> operators,
                             std::vector<FlowEdge> edges,
                             std::string instance_id);

  const std::string& instance_id() const { return instance_id_; }
  const std::vector<OperatorSpec>& operators() const { return operators_; }
  const std::vector<FlowEdge>& edges() const { return edges_; }

  bool has_operator(std::string_view name) const;
  const OperatorSpec& op(std::string_view name) const;

  /// Operator names with no incoming / no outgoing edges, sorted by name.
  std::vector<std::string> roots() const;
  std::vector<std::string> leaves() const;

  /// Deterministic topological order: edge order respected, ties broken by
  /// lexicographic operator name.
  const std::vector<std::string>& topological_order() const { return topo_order_; }

  /// All simple root-to-leaf operator paths, ordered lexicographically by
  /// node sequence.
  const std::vector<std::vector<std::string>>& paths() const { return paths_; }

  /// Distinct downstream operators of `name`, sorted.
  std::vector<std::string> successors(std::string_view name) const;
  /// Distinct upstream operators of `name`, sorted.
  std::vector<std::string> predecessors(std::string_view name) const;

 private:
  OperatorGraph() = default;
  void validate();
  void compute_topological_order();
  void compute_paths();

  std::string instance_id_;
  std::vector<OperatorSpec> operators_;
  std::vector<FlowEdge> edges_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::vector<std::string> topo_order_;
  std::vector<std::vector<std::string>> paths_;
};

}  // namespace pipesim

#endif  // PIPESIM_GRAPH_HPP
