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

#include "pipesim/graph.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "pipesim/errors.hpp"

namespace pipesim {

const char* to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::Source: return "Source";
    case OperatorKind::Compute: return "Compute";
    case OperatorKind::Inference: return "Inference";
    case OperatorKind::Graphics: return "Graphics";
    case OperatorKind::Sink: return "Sink";
  }
  return "?";
}

const char* to_string(TrailEventKind kind) {
  return kind == TrailEventKind::Receive ? "receive" : "emit";
}

OperatorGraph OperatorGraph::build(std::vector<OperatorSpec> operators,
                                   std::vector<FlowEdge> edges,
                                   std::string instance_id) {
  OperatorGraph g;
  g.instance_id_ = std::move(instance_id);
  g.operators_ = std::move(operators);
  g.edges_ = std::move(edges);
  for (std::size_t i = 0; i < g.operators_.size(); ++i) {
    auto [it, inserted] = g.index_.emplace(g.operators_[i].name, i);
    if (!inserted) {
      throw GraphValidationError(GraphError::DuplicateName,
                                 "duplicate operator name: " + g.operators_[i].name);
    }
  }
  g.validate();
  g.compute_topological_order();
  g.compute_paths();
  return g;
}

bool OperatorGraph::has_operator(std::string_view name) const {
  return index_.find(name) != index_.end();
}

const OperatorSpec& OperatorGraph::op(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown operator: " + std::string(name));
  return operators_[it->second];
}

std::vector<std::string> OperatorGraph::successors(std::string_view name) const {
  std::set<std::string> out;
  for (const auto& e : edges_) {
    if (e.src_operator == name) out.insert(e.dst_operator);
  }
  return {out.begin(), out.end()};
}

std::vector<std::string> OperatorGraph::predecessors(std::string_view name) const {
  std::set<std::string> out;
  for (const auto& e : edges_) {
    if (e.dst_operator == name) out.insert(e.src_operator);
  }
  return {out.begin(), out.end()};
}

std::vector<std::string> OperatorGraph::roots() const {
  std::set<std::string> has_in;
  for (const auto& e : edges_) has_in.insert(e.dst_operator);
  std::vector<std::string> out;
  for (const auto& op : operators_) {
    if (!has_in.count(op.name)) out.push_back(op.name);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> OperatorGraph::leaves() const {
  std::set<std::string> has_out;
  for (const auto& e : edges_) has_out.insert(e.src_operator);
  std::vector<std::string> out;
  for (const auto& op : operators_) {
    if (!has_out.count(op.name)) out.push_back(op.name);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void OperatorGraph::validate() {
  if (operators_.empty()) {
    throw GraphValidationError(GraphError::InvalidOperator, "graph has no operators");
  }

  // Per-operator invariants.
  for (const auto& op : operators_) {
    std::set<std::string> ports;
    for (const auto& p : op.input_ports) {
      if (!ports.insert(p).second) {
        throw GraphValidationError(GraphError::InvalidOperator,
                                   op.name + ": duplicate port name " + p);
      }
    }
    for (const auto& p : op.output_ports) {
      if (!ports.insert(p).second) {
        throw GraphValidationError(GraphError::InvalidOperator,
                                   op.name + ": duplicate port name " + p);
      }
    }
    if (op.kind == OperatorKind::Source && !op.input_ports.empty()) {
      throw GraphValidationError(GraphError::InvalidOperator,
                                 op.name + ": Source operators take no input ports");
    }
    if (op.workload.parallel_streams < 1) {
      throw GraphValidationError(GraphError::InvalidOperator,
                                 op.name + ": parallel_streams must be >= 1");
    }
    if (op.workload.sm_demand < 0) {
      throw GraphValidationError(GraphError::InvalidOperator,
                                 op.name + ": negative sm_demand");
    }
  }

  // Edge endpoints must resolve to declared ports; each input port takes at
  // most one incoming edge.
  std::set<std::pair<std::string, std::string>> used_inputs;
  for (const auto& e : edges_) {
    auto src = index_.find(e.src_operator);
    auto dst = index_.find(e.dst_operator);
    if (src == index_.end() || dst == index_.end()) {
      throw GraphValidationError(GraphError::DanglingPort,
                                 "edge references unknown operator: " + e.src_operator + " -> " +
                                     e.dst_operator);
    }
    const auto& sp = operators_[src->second].output_ports;
    const auto& dp = operators_[dst->second].input_ports;
    if (std::find(sp.begin(), sp.end(), e.src_port) == sp.end()) {
      throw GraphValidationError(GraphError::DanglingPort,
                                 e.src_operator + " has no output port " + e.src_port);
    }
    if (std::find(dp.begin(), dp.end(), e.dst_port) == dp.end()) {
      throw GraphValidationError(GraphError::DanglingPort,
                                 e.dst_operator + " has no input port " + e.dst_port);
    }
    if (!used_inputs.emplace(e.dst_operator, e.dst_port).second) {
      throw GraphValidationError(GraphError::DuplicateInputEdge,
                                 "input port " + e.dst_operator + "." + e.dst_port +
                                     " has more than one incoming edge");
    }
  }

  // Weak connectivity over the undirected view.
  if (operators_.size() > 1) {
    std::map<std::string, std::set<std::string>> adj;
    for (const auto& e : edges_) {
      adj[e.src_operator].insert(e.dst_operator);
      adj[e.dst_operator].insert(e.src_operator);
    }
    std::set<std::string> seen;
    std::vector<std::string> stack{operators_.front().name};
    while (!stack.empty()) {
      auto cur = stack.back();
      stack.pop_back();
      if (!seen.insert(cur).second) continue;
      for (const auto& nxt : adj[cur]) stack.push_back(nxt);
    }
    if (seen.size() != operators_.size()) {
      throw GraphValidationError(GraphError::DisconnectedGraph,
                                 "graph is not weakly connected");
    }
  }

  // Roots must be Sources. (Leaves may be any kind; a single-operator
  // Source graph doubles as its own sink.)
  for (const auto& r : roots()) {
    if (op(r).kind != OperatorKind::Source) {
      throw GraphValidationError(GraphError::InvalidOperator,
                                 r + ": root operator must be a Source");
    }
  }
}

void OperatorGraph::compute_topological_order() {
  // Kahn's algorithm over a sorted ready set gives the lexicographic
  // tie-break for free; running out of ready nodes early means a cycle.
  std::map<std::string, int> in_degree;
  for (const auto& op : operators_) in_degree[op.name] = 0;
  std::map<std::string, std::set<std::string>> succ;
  for (const auto& e : edges_) {
    if (succ[e.src_operator].insert(e.dst_operator).second) {
      in_degree[e.dst_operator] += 1;
    }
  }
  std::set<std::string> ready;
  for (const auto& [name, deg] : in_degree) {
    if (deg == 0) ready.insert(name);
  }
  topo_order_.clear();
  while (!ready.empty()) {
    auto cur = *ready.begin();
    ready.erase(ready.begin());
    topo_order_.push_back(cur);
    for (const auto& nxt : succ[cur]) {
      if (--in_degree[nxt] == 0) ready.insert(nxt);
    }
  }
  if (topo_order_.size() != operators_.size()) {
    throw GraphValidationError(GraphError::CycleDetected, "graph contains a cycle");
  }
}

void OperatorGraph::compute_paths() {
  paths_.clear();
  const auto leaf_names = leaves();
  std::set<std::string> leaf_set(leaf_names.begin(), leaf_names.end());

  std::vector<std::string> current;
  // DFS over sorted successors; output order is lexicographic by node
  // sequence because roots and successor sets are visited in sorted order.
  auto dfs = [&](auto&& self, const std::string& node) -> void {
    current.push_back(node);
    if (leaf_set.count(node)) {
      paths_.push_back(current);
    }
    for (const auto& nxt : successors(node)) {
      self(self, nxt);
    }
    current.pop_back();
  };
  for (const auto& r : roots()) dfs(dfs, r);
}

}  // namespace pipesim
