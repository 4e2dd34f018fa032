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

#include "pipesim/partition.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "pipesim/csvio.hpp"
#include "pipesim/errors.hpp"

namespace pipesim {

const char* to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::SingleGpu: return "SingleGpu";
    case PolicyKind::SingleGpuMps: return "SingleGpuMps";
    case PolicyKind::IsolatedMultiGpu: return "IsolatedMultiGpu";
    case PolicyKind::IsolatedMultiGpuMps: return "IsolatedMultiGpuMps";
    case PolicyKind::IsolatedMultiGpuMpsPin: return "IsolatedMultiGpuMpsPin";
  }
  return "?";
}

std::optional<PolicyKind> parse_policy_kind(const std::string& name) {
  if (name == "SingleGpu") return PolicyKind::SingleGpu;
  if (name == "SingleGpuMps") return PolicyKind::SingleGpuMps;
  if (name == "IsolatedMultiGpu" || name == "IMG") return PolicyKind::IsolatedMultiGpu;
  if (name == "IsolatedMultiGpuMps" || name == "IMG-MPS") return PolicyKind::IsolatedMultiGpuMps;
  if (name == "IsolatedMultiGpuMpsPin" || name == "IMG-MPS-Pin") {
    return PolicyKind::IsolatedMultiGpuMpsPin;
  }
  return std::nullopt;
}

const OperatorAssignment& PlacementPlan::assignment(const std::string& op) const {
  for (const auto& a : ops) {
    if (a.op == op) return a;
  }
  throw std::out_of_range("no assignment for operator " + op);
}

PartitionManager::PartitionManager(SimEngine& engine) : engine_(engine) {}

AdmitOutcome PartitionManager::admit(int device_id, double thread_pct,
                                     std::uint64_t mem_limit_bytes,
                                     const std::string& client) {
  if (thread_pct <= 0.0 || thread_pct > 100.0) {
    return Denial{DenialReason::SmOversubscription,
                  "thread_pct must lie in (0,100], got " + format_double(thread_pct)};
  }
  if (mem_limit_bytes == 0) {
    return Denial{DenialReason::MemoryOversubscription, "mem_limit must be positive"};
  }
  const auto& spec = engine_.device_spec(device_id);
  auto& entry = ledger_[device_id];
  if (entry.admitted_pct + thread_pct > 100.0 + 1e-9) {
    return Denial{DenialReason::SmOversubscription,
                  client + ": admitted thread percentage would reach " +
                      format_double(entry.admitted_pct + thread_pct)};
  }
  if (entry.reserved_mem + mem_limit_bytes > spec.memory_capacity) {
    return Denial{DenialReason::MemoryOversubscription,
                  client + ": reserved memory would exceed device capacity"};
  }

  // ceil on the percentage, then cap to the SMs still unreserved so the sum
  // of grants never exceeds the device. Admission is governed by the
  // percentage sum; only the grant is squeezed.
  int grant = static_cast<int>(std::ceil(thread_pct / 100.0 * spec.sm_count));
  grant = std::min(grant, spec.sm_count - entry.reserved_sms);

  Partition p;
  p.device_id = device_id;
  p.thread_pct = thread_pct;
  p.granted_sms = grant;
  p.mem_limit_bytes = mem_limit_bytes;
  p.client = client;
  p.partition_id = engine_.create_partition(device_id, grant, mem_limit_bytes, client);

  entry.admitted_pct += thread_pct;
  entry.reserved_mem += mem_limit_bytes;
  entry.reserved_sms += grant;
  entry.active_partitions += 1;

  if (partitions_.size() <= static_cast<std::size_t>(p.partition_id)) {
    partitions_.resize(static_cast<std::size_t>(p.partition_id) + 1);
    retired_.resize(partitions_.size(), false);
  }
  partitions_[static_cast<std::size_t>(p.partition_id)] = p;
  return p;
}

void PartitionManager::release(int partition_id) {
  if (partition_id < 0 || static_cast<std::size_t>(partition_id) >= partitions_.size() ||
      retired_[static_cast<std::size_t>(partition_id)]) {
    throw PartitionOpError(PartitionError::UnknownPartition,
                           "unknown partition " + std::to_string(partition_id));
  }
  if (engine_.partition_busy(partition_id)) {
    throw PartitionOpError(PartitionError::PartitionBusy,
                           "partition " + std::to_string(partition_id) + " has work in flight");
  }
  const auto& p = partitions_[static_cast<std::size_t>(partition_id)];
  auto& entry = ledger_[p.device_id];
  entry.admitted_pct -= p.thread_pct;
  entry.reserved_mem -= p.mem_limit_bytes;
  entry.reserved_sms -= p.granted_sms;
  entry.active_partitions -= 1;
  engine_.retire_partition(partition_id);
  retired_[static_cast<std::size_t>(partition_id)] = true;
}

PlacementPlan PartitionManager::place(const std::string& instance_id,
                                      const OperatorGraph& graph,
                                      const PlacementPolicy& policy) {
  const auto& graphics_spec = engine_.device_spec(policy.graphics_device);
  engine_.device_spec(policy.compute_device);
  if (!graphics_spec.graphics_capable) {
    bool needs_graphics = false;
    for (const auto& op : graph.operators()) {
      if (op.kind == OperatorKind::Graphics || op.workload.is_graphics) needs_graphics = true;
    }
    if (needs_graphics) {
      throw PartitionOpError(PartitionError::GraphicsOnComputeOnlyDevice,
                             "policy maps graphics work onto a compute-only device");
    }
  }

  PlacementPlan plan;
  plan.instance_id = instance_id;
  plan.policy = policy.kind;
  plan.pin_cpu = policy.pin_cpu;

  if (policy_uses_mps(policy.kind)) {
    auto outcome = admit(policy.compute_device, policy.thread_pct, policy.mem_limit_bytes,
                         instance_id);
    if (auto* denial = std::get_if<Denial>(&outcome)) {
      // The mapping is still reported so callers can see what would have run;
      // executing any device stage of a denied instance raises
      // PartitionDenied.
      plan.denial = *denial;
    } else {
      plan.partition = std::get<Partition>(outcome);
    }
  }

  for (const auto& name : graph.topological_order()) {
    const auto& op = graph.op(name);
    OperatorAssignment a;
    a.op = name;
    const bool graphics = op.kind == OperatorKind::Graphics || op.workload.is_graphics;
    if (graphics) {
      a.graphics = true;
      a.device = policy.graphics_device;
    } else if (op.workload.sm_demand > 0) {
      a.device = policy.compute_device;
      a.in_partition = plan.partition.has_value();
    } else {
      a.host = true;
    }
    plan.ops.push_back(std::move(a));
  }

  // A graphics operator fed from another device pays a transfer per
  // cross-device producer edge.
  for (const auto& a : plan.ops) {
    if (!a.graphics) continue;
    for (const auto& producer : graph.predecessors(a.op)) {
      const auto& pa = plan.assignment(producer);
      if (!pa.host && pa.device != a.device) {
        plan.transfers.push_back(TransferHop{producer, a.op, pa.device, a.device});
      }
    }
  }
  return plan;
}

const LedgerEntry& PartitionManager::ledger(int device_id) const {
  static const LedgerEntry kEmpty;
  auto it = ledger_.find(device_id);
  return it == ledger_.end() ? kEmpty : it->second;
}

void PartitionManager::write_plan_csv(std::ostream& out,
                                      const std::vector<PlacementPlan>& plans) {
  out << "instance,operator,device,partition,thread_pct\n";
  for (const auto& plan : plans) {
    for (const auto& a : plan.ops) {
      out << plan.instance_id << ',' << a.op << ',';
      if (a.host) {
        out << "host";
      } else {
        out << a.device;
      }
      out << ',';
      if (a.in_partition && plan.partition) {
        out << plan.partition->partition_id << ',' << format_double(plan.partition->thread_pct);
      } else {
        out << "-,0";
      }
      out << '\n';
    }
  }
}

}  // namespace pipesim
