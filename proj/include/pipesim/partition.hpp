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

#ifndef PIPESIM_PARTITION_HPP
#define PIPESIM_PARTITION_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pipesim/engine.hpp"
#include "pipesim/graph.hpp"

namespace pipesim {

/// An MPS-style reservation: a thread percentage mapped onto a reserved SM
/// set plus a pinned memory cap, bound to one client on one device.
struct Partition {
  int partition_id = -1;
  int device_id = -1;
  double thread_pct = 0.0;
  int granted_sms = 0;
  std::uint64_t mem_limit_bytes = 0;
  std::string client;
};

enum class DenialReason { SmOversubscription, MemoryOversubscription };

struct Denial {
  DenialReason reason = DenialReason::SmOversubscription;
  std::string detail;
};

using AdmitOutcome = std::variant<Partition, Denial>;

enum class PolicyKind {
  SingleGpu,
  SingleGpuMps,
  IsolatedMultiGpu,
  IsolatedMultiGpuMps,
  IsolatedMultiGpuMpsPin,
};

const char* to_string(PolicyKind kind);
std::optional<PolicyKind> parse_policy_kind(const std::string& name);

inline bool policy_uses_mps(PolicyKind k) {
  return k == PolicyKind::SingleGpuMps || k == PolicyKind::IsolatedMultiGpuMps ||
         k == PolicyKind::IsolatedMultiGpuMpsPin;
}
inline bool policy_isolates(PolicyKind k) {
  return k == PolicyKind::IsolatedMultiGpu || k == PolicyKind::IsolatedMultiGpuMps ||
         k == PolicyKind::IsolatedMultiGpuMpsPin;
}

/// Where an application's compute and graphics workloads go.
struct PlacementPolicy {
  PolicyKind kind = PolicyKind::SingleGpu;
  int compute_device = 0;
  int graphics_device = 0;
  double thread_pct = 20.0;
  std::uint64_t mem_limit_bytes = 2'000'000'000ULL;
  bool pin_cpu = false;
};

/// One operator's assignment in a placement plan.
struct OperatorAssignment {
  std::string op;
  bool host = false;       // pure-host stage, no device involved
  int device = -1;
  bool graphics = false;   // runs as a render pass
  bool in_partition = false;
};

/// A cross-device hop inserted before a graphics operator whose producer
/// lives on another device.
struct TransferHop {
  std::string producer;
  std::string consumer;
  int src_device = -1;
  int dst_device = -1;
};

struct PlacementPlan {
  std::string instance_id;
  PolicyKind policy = PolicyKind::SingleGpu;
  std::vector<OperatorAssignment> ops;   // in graph topological order
  std::vector<TransferHop> transfers;
  std::optional<Partition> partition;    // one per instance for *Mps policies
  std::optional<Denial> denial;          // set when admission refused the instance
  bool pin_cpu = false;

  const OperatorAssignment& assignment(const std::string& op) const;
};

/// Per-device admission bookkeeping: the sum of admitted thread percentages
/// never exceeds 100 and reserved memory never exceeds capacity.
struct LedgerEntry {
  double admitted_pct = 0.0;
  std::uint64_t reserved_mem = 0;
  int reserved_sms = 0;
  int active_partitions = 0;
};

/// Creates partitions under admission control and maps application graphs
/// onto devices according to a placement policy. The ledger is single-owner
/// state, mutated only between engine events.
class PartitionManager {
 public:
  explicit PartitionManager(SimEngine& engine);

  /// Admits a client at `thread_pct` with a pinned memory cap, or returns a
  /// denial. Denials leave the ledger untouched. The SM grant is
  /// ceil(pct/100 * sm_count), rounded down if the tail of the device's SM
  /// budget cannot cover the ceiling (admission follows the percentage
  /// arithmetic, grants follow the SM budget).
  AdmitOutcome admit(int device_id, double thread_pct, std::uint64_t mem_limit_bytes,
                     const std::string& client);

  /// Releases a partition. Throws PartitionOpError{PartitionBusy} while the
  /// partition still has running or waiting work and
  /// PartitionOpError{UnknownPartition} for retired or unknown ids.
  void release(int partition_id);

  /// Maps one application instance onto devices. Compute and Inference
  /// operators go to the policy's compute device (inside a partition for
  /// *Mps policies), Graphics operators to the graphics device, and a
  /// transfer hop is inserted for each cross-device edge into a graphics
  /// operator. An admission denial is reported in the plan, not thrown.
  PlacementPlan place(const std::string& instance_id, const OperatorGraph& graph,
                      const PlacementPolicy& policy);

  const LedgerEntry& ledger(int device_id) const;
  const std::vector<Partition>& partitions() const { return partitions_; }

  /// Placement plan export. Header: instance,operator,device,partition,thread_pct
  static void write_plan_csv(std::ostream& out, const std::vector<PlacementPlan>& plans);

 private:
  SimEngine& engine_;
  std::map<int, LedgerEntry> ledger_;
  std::vector<Partition> partitions_;  // by id, including retired
  std::vector<bool> retired_;
};

}  // namespace pipesim

#endif  // PIPESIM_PARTITION_HPP
