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

#include "pipesim/tracking.hpp"

#include <cmath>
#include <map>
#include <ostream>

#include "pipesim/csvio.hpp"
#include "pipesim/errors.hpp"

namespace pipesim {

RecordStatus FlowTracker::record(const TrailEvent& event) {
  Key key{event.instance_id, event.path_id, event.message_id, event.operator_name,
          static_cast<int>(event.kind)};
  if (!seen_.insert(key).second) return RecordStatus::Duplicate;
  events_.push_back(event);
  return RecordStatus::Accepted;
}

LatencySeries FlowTracker::e2e_latencies(const std::string& instance_id,
                                         const std::string& path_id,
                                         const std::string& root_op,
                                         const std::string& leaf_op,
                                         int trim_head, int trim_tail) const {
  std::map<std::uint64_t, double> root_receive;
  std::map<std::uint64_t, double> leaf_emit;
  for (const auto& e : events_) {
    if (e.instance_id != instance_id || e.path_id != path_id) continue;
    if (e.operator_name == root_op && e.kind == TrailEventKind::Receive) {
      root_receive[e.message_id] = e.sim_time_ms;
    }
    if (e.operator_name == leaf_op && e.kind == TrailEventKind::Emit) {
      leaf_emit[e.message_id] = e.sim_time_ms;
    }
  }

  std::vector<LatencyRecord> all;
  all.reserve(root_receive.size());
  for (const auto& [msg, t0] : root_receive) {
    auto it = leaf_emit.find(msg);
    if (it == leaf_emit.end()) {
      throw TrackingError(TrackError::IncompleteTrail,
                          instance_id + "/" + path_id + ": message " + std::to_string(msg) +
                              " has no leaf emit");
    }
    // Timestamps carry microsecond granularity; snapping the difference back
    // onto that grid keeps equal intervals bit-identical regardless of the
    // absolute times they were observed at.
    const double e2e = std::llround((it->second - t0) * 1000.0) / 1000.0;
    all.push_back({instance_id, path_id, msg, e2e});
  }

  const auto total = static_cast<long>(all.size());
  if (total - trim_head - trim_tail <= 0) {
    throw TrackingError(TrackError::EmptySeries,
                        instance_id + "/" + path_id + ": trim " + std::to_string(trim_head) +
                            "/" + std::to_string(trim_tail) + " exceeds " +
                            std::to_string(total) + " messages");
  }

  LatencySeries series;
  series.instance_id = instance_id;
  series.path_id = path_id;
  series.trim_head = trim_head;
  series.trim_tail = trim_tail;
  series.records.assign(all.begin() + trim_head, all.end() - trim_tail);
  return series;
}

void FlowTracker::write_trails_csv(std::ostream& out) const {
  out << "instance_id,path_id,message_id,operator,kind,sim_time_ms\n";
  for (const auto& e : events_) {
    out << e.instance_id << ',' << e.path_id << ',' << e.message_id << ','
        << e.operator_name << ',' << to_string(e.kind) << ','
        << format_double(e.sim_time_ms) << '\n';
  }
}

void FlowTracker::write_latencies_csv(std::ostream& out,
                                      const std::vector<LatencySeries>& series) {
  out << "instance_id,path_id,message_id,e2e_ms\n";
  for (const auto& s : series) {
    for (const auto& r : s.records) {
      out << r.instance_id << ',' << r.path_id << ',' << r.message_id << ','
          << format_double(r.e2e_ms) << '\n';
    }
  }
}

}  // namespace pipesim
