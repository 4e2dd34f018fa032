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

#ifndef PIPESIM_TRACKING_HPP
#define PIPESIM_TRACKING_HPP

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "pipesim/graph.hpp"

namespace pipesim {

/// One per-path timestamp record: a message was received by or emitted from
/// an operator at a simulated time.
struct TrailEvent {
  std::string instance_id;
  std::string path_id;
  std::uint64_t message_id = 0;
  std::string operator_name;
  TrailEventKind kind = TrailEventKind::Receive;
  double sim_time_ms = 0.0;
};

struct LatencyRecord {
  std::string instance_id;
  std::string path_id;
  std::uint64_t message_id = 0;
  double e2e_ms = 0.0;
};

/// Per-(instance, path) end-to-end latency series, ordered by message id.
/// Trimmed counts are carried along rather than silently dropped.
struct LatencySeries {
  std::string instance_id;
  std::string path_id;
  std::vector<LatencyRecord> records;
  int trim_head = 0;
  int trim_tail = 0;

  std::vector<double> values() const {
    std::vector<double> v;
    v.reserve(records.size());
    for (const auto& r : records) v.push_back(r.e2e_ms);
    return v;
  }
};

enum class RecordStatus { Accepted, Duplicate };

/// Append-only run log of trail events, owned by the engine lane. Analysis
/// operations are pure functions over the stored snapshot.
class FlowTracker {
 public:
  /// Appends the event; a second event with the same
  /// (instance, path, message, operator, kind) key is rejected.
  RecordStatus record(const TrailEvent& event);

  /// End-to-end latency per message for one (instance, path): leaf emit minus
  /// root receive, with the first trim_head and last trim_tail messages
  /// discarded. Throws TrackingError{IncompleteTrail} if a message lacks its
  /// leaf emit and TrackingError{EmptySeries} if trimming exceeds the data.
  LatencySeries e2e_latencies(const std::string& instance_id, const std::string& path_id,
                              const std::string& root_op, const std::string& leaf_op,
                              int trim_head, int trim_tail) const;

  const std::vector<TrailEvent>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }

  /// Raw trail export. Header:
  /// instance_id,path_id,message_id,operator,kind,sim_time_ms
  void write_trails_csv(std::ostream& out) const;

  static void write_latencies_csv(std::ostream& out, const std::vector<LatencySeries>& series);

 private:
  using Key = std::tuple<std::string, std::string, std::uint64_t, std::string, int>;
  std::vector<TrailEvent> events_;
  std::set<Key> seen_;
};

}  // namespace pipesim

#endif  // PIPESIM_TRACKING_HPP
