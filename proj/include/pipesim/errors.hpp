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

#ifndef PIPESIM_ERRORS_HPP
#define PIPESIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pipesim {

/// Structured failure reasons for graph construction and validation.
enum class GraphError {
  CycleDetected,
  DanglingPort,
  DuplicateInputEdge,
  DisconnectedGraph,
  DuplicateName,
  InvalidOperator,
};

class GraphValidationError : public std::runtime_error {
 public:
  GraphValidationError(GraphError code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  GraphError code() const { return code_; }

 private:
  GraphError code_;
};

/// Failure reasons raised by the simulation engine.
enum class SimError {
  OutOfMemory,
  NoPartition,
  NotGraphicsCapable,
  WrongContextKind,
  SameDevice,
  EmptyWindow,
  EngineStopped,
  PartitionDenied,
  UnknownDevice,
  UnknownContext,
};

class SimulationError : public std::runtime_error {
 public:
  SimulationError(SimError code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  SimError code() const { return code_; }

 private:
  SimError code_;
};

/// Failure reasons for flow-tracking analysis.
enum class TrackError {
  DuplicateEvent,
  IncompleteTrail,
  EmptySeries,
};

class TrackingError : public std::runtime_error {
 public:
  TrackingError(TrackError code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  TrackError code() const { return code_; }

 private:
  TrackError code_;
};

/// Partition lifecycle failures (admission denials are returned, not thrown).
enum class PartitionError {
  PartitionBusy,
  UnknownPartition,
  GraphicsOnComputeOnlyDevice,
};

class PartitionOpError : public std::runtime_error {
 public:
  PartitionOpError(PartitionError code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  PartitionError code() const { return code_; }

 private:
  PartitionError code_;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class MetricsError : public std::runtime_error {
 public:
  explicit MetricsError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pipesim

#endif  // PIPESIM_ERRORS_HPP
