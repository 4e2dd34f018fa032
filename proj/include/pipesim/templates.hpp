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

#ifndef PIPESIM_TEMPLATES_HPP
#define PIPESIM_TEMPLATES_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pipesim/graph.hpp"

namespace pipesim {

/// Per-template tuning: operator demands and the per-message payload used for
/// inter-device transfer costs. The shipped defaults are the versioned
/// calibration the default experiment suite runs with.
struct TemplateCalibration {
  std::uint64_t payload_bytes = 1'000'000;
  std::map<std::string, WorkloadDemand> operators;
};

struct Calibration {
  std::map<std::string, TemplateCalibration> templates;

  static Calibration defaults();

  /// Overlays non-default entries from `other` onto this calibration.
  void merge(const Calibration& other);
};

/// Known application templates, in catalog order.
std::vector<std::string> template_names();

bool is_known_template(const std::string& name);

/// Builds a validated operator graph for `template_name`, owned by
/// `instance_id`, with demands taken from the calibration.
OperatorGraph make_template(const std::string& template_name, const std::string& instance_id,
                            const Calibration& calibration);

std::uint64_t template_payload_bytes(const std::string& template_name,
                                     const Calibration& calibration);

/// One catalog entry for list-templates output.
struct TemplateInfo {
  std::string name;
  int operator_count = 0;
  int path_count = 0;
  std::vector<OperatorSpec> operators;  // in topological order
};

std::vector<TemplateInfo> template_catalog(const Calibration& calibration);

}  // namespace pipesim

#endif  // PIPESIM_TEMPLATES_HPP
