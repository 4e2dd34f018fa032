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

#ifndef PIPESIM_CONFIG_HPP
#define PIPESIM_CONFIG_HPP

#include <string>

#include "pipesim/experiment.hpp"

namespace pipesim {

/// Parses an experiment configuration from YAML text. Every key is validated
/// against the schema; unknown keys are errors. Omitted fields keep their
/// defaults (including the shipped calibration).
ExperimentConfig parse_config_yaml(const std::string& yaml_text);

ExperimentConfig parse_config_yaml_file(const std::string& path);

/// Parses a calibration overlay file: a map of template name to
/// {payload_bytes, operators: {name: demand...}} that is merged over the
/// defaults.
Calibration parse_calibration_yaml_file(const std::string& path);

}  // namespace pipesim

#endif  // PIPESIM_CONFIG_HPP
