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

#include "pipesim/config.hpp"

#include <yaml-cpp/yaml.h>

#include <set>
#include <string>

#include "pipesim/errors.hpp"

namespace pipesim {

namespace {

void expect_keys(const YAML::Node& node, const std::set<std::string>& allowed,
                 const std::string& where) {
  if (!node.IsMap()) throw ConfigError(where + ": expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
}

template <typename T>
void read(const YAML::Node& node, const char* key, T& out) {
  if (node[key]) out = node[key].as<T>();
}

DeviceSpec parse_device(const YAML::Node& node, const std::string& where) {
  expect_keys(node, {"sm_count", "memory_capacity_bytes", "graphics_capable"}, where);
  DeviceSpec d;
  read(node, "sm_count", d.sm_count);
  read(node, "memory_capacity_bytes", d.memory_capacity);
  read(node, "graphics_capable", d.graphics_capable);
  return d;
}

AppEntry parse_app(const YAML::Node& node, const std::string& where) {
  expect_keys(node, {"template", "instances"}, where);
  AppEntry a;
  if (!node["template"]) throw ConfigError(where + ": 'template' is required");
  a.template_name = node["template"].as<std::string>();
  read(node, "instances", a.instances);
  return a;
}

PlacementPolicy parse_policy(const YAML::Node& node) {
  expect_keys(node,
              {"kind", "compute_device", "graphics_device", "thread_pct", "mem_limit_bytes",
               "pin_cpu"},
              "policy");
  PlacementPolicy p;
  if (node["kind"]) {
    const auto name = node["kind"].as<std::string>();
    auto kind = parse_policy_kind(name);
    if (!kind) throw ConfigError("policy: unknown kind '" + name + "'");
    p.kind = *kind;
    if (p.kind == PolicyKind::IsolatedMultiGpuMpsPin) p.pin_cpu = true;
  }
  read(node, "compute_device", p.compute_device);
  read(node, "graphics_device", p.graphics_device);
  read(node, "thread_pct", p.thread_pct);
  read(node, "mem_limit_bytes", p.mem_limit_bytes);
  read(node, "pin_cpu", p.pin_cpu);
  return p;
}

ContentionConfig parse_contention(const YAML::Node& node) {
  expect_keys(node,
              {"ctx_switch_compute_compute_ms", "ctx_switch_compute_graphics_ms",
               "time_slice_quantum_ms", "jitter_sigma", "transfer_bandwidth_bytes_per_ms",
               "transfer_latency_ms", "cpu_affinity_jitter_multiplier",
               "source_tick_jitter_ms", "opportunistic_sms"},
              "contention");
  ContentionConfig c;
  read(node, "ctx_switch_compute_compute_ms", c.ctx_switch_compute_compute_ms);
  read(node, "ctx_switch_compute_graphics_ms", c.ctx_switch_compute_graphics_ms);
  read(node, "time_slice_quantum_ms", c.time_slice_quantum_ms);
  read(node, "jitter_sigma", c.jitter_sigma);
  read(node, "transfer_bandwidth_bytes_per_ms", c.transfer_bandwidth_bytes_per_ms);
  read(node, "transfer_latency_ms", c.transfer_latency_ms);
  read(node, "cpu_affinity_jitter_multiplier", c.cpu_affinity_jitter_multiplier);
  read(node, "source_tick_jitter_ms", c.source_tick_jitter_ms);
  read(node, "opportunistic_sms", c.opportunistic_sms);
  return c;
}

WorkloadDemand parse_demand(const YAML::Node& node, const std::string& where) {
  expect_keys(node,
              {"sm_demand", "base_duration_ms", "memory_bytes", "is_graphics",
               "parallel_streams"},
              where);
  WorkloadDemand w;
  read(node, "sm_demand", w.sm_demand);
  read(node, "base_duration_ms", w.base_duration_ms);
  read(node, "memory_bytes", w.memory_bytes);
  read(node, "is_graphics", w.is_graphics);
  read(node, "parallel_streams", w.parallel_streams);
  return w;
}

Calibration parse_calibration(const YAML::Node& node) {
  Calibration overlay;
  if (!node.IsMap()) throw ConfigError("calibration: expected a mapping of templates");
  for (const auto& kv : node) {
    const auto tpl_name = kv.first.as<std::string>();
    if (!is_known_template(tpl_name)) {
      throw ConfigError("calibration: unknown template '" + tpl_name + "'");
    }
    expect_keys(kv.second, {"payload_bytes", "operators"}, "calibration." + tpl_name);
    TemplateCalibration tpl;
    tpl.payload_bytes = 0;  // 0 means "keep default" when merging
    read(kv.second, "payload_bytes", tpl.payload_bytes);
    if (kv.second["operators"]) {
      for (const auto& op_kv : kv.second["operators"]) {
        const auto op_name = op_kv.first.as<std::string>();
        tpl.operators[op_name] =
            parse_demand(op_kv.second, "calibration." + tpl_name + "." + op_name);
      }
    }
    overlay.templates[tpl_name] = std::move(tpl);
  }
  return overlay;
}

ExperimentConfig parse_config_node(const YAML::Node& root) {
  expect_keys(root,
              {"devices", "apps", "policy", "messages_per_run", "trim", "repetitions",
               "frame_period_ms", "source_phase", "seed", "contention", "output_dir",
               "dump_event_log", "calibration"},
              "config");
  ExperimentConfig cfg;

  if (root["devices"]) {
    if (!root["devices"].IsSequence()) throw ConfigError("devices: expected a sequence");
    cfg.devices.clear();
    int index = 0;
    for (const auto& d : root["devices"]) {
      auto spec = parse_device(d, "devices[" + std::to_string(index) + "]");
      spec.device_id = index++;
      cfg.devices.push_back(spec);
    }
  } else {
    cfg.devices = {DeviceSpec{}};
  }

  if (!root["apps"]) throw ConfigError("config: 'apps' is required");
  if (!root["apps"].IsSequence()) throw ConfigError("apps: expected a sequence");
  int index = 0;
  for (const auto& a : root["apps"]) {
    cfg.apps.push_back(parse_app(a, "apps[" + std::to_string(index++) + "]"));
  }

  if (root["policy"]) cfg.policy = parse_policy(root["policy"]);
  read(root, "messages_per_run", cfg.messages_per_run);
  if (root["trim"]) {
    expect_keys(root["trim"], {"head", "tail"}, "trim");
    read(root["trim"], "head", cfg.trim.head);
    read(root["trim"], "tail", cfg.trim.tail);
  }
  read(root, "repetitions", cfg.repetitions);
  read(root, "frame_period_ms", cfg.frame_period_ms);
  if (root["source_phase"]) {
    const auto phase = root["source_phase"].as<std::string>();
    if (phase == "staggered") {
      cfg.source_phase = SourcePhase::Staggered;
    } else if (phase == "random") {
      cfg.source_phase = SourcePhase::Random;
    } else {
      throw ConfigError("config: source_phase must be 'staggered' or 'random'");
    }
  }
  read(root, "seed", cfg.seed);
  if (root["contention"]) cfg.contention = parse_contention(root["contention"]);
  read(root, "output_dir", cfg.output_dir);
  read(root, "dump_event_log", cfg.dump_event_log);
  if (root["calibration"]) cfg.calibration.merge(parse_calibration(root["calibration"]));

  cfg.validate();
  return cfg;
}

}  // namespace

ExperimentConfig parse_config_yaml(const std::string& yaml_text) {
  try {
    return parse_config_node(YAML::Load(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("yaml parse error: ") + e.what());
  }
}

ExperimentConfig parse_config_yaml_file(const std::string& path) {
  try {
    return parse_config_node(YAML::LoadFile(path));
  } catch (const YAML::BadFile&) {
    throw ConfigError("cannot open config file " + path);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("yaml parse error in ") + path + ": " + e.what());
  }
}

Calibration parse_calibration_yaml_file(const std::string& path) {
  try {
    return parse_calibration(YAML::LoadFile(path));
  } catch (const YAML::BadFile&) {
    throw ConfigError("cannot open calibration file " + path);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("yaml parse error in ") + path + ": " + e.what());
  }
}

}  // namespace pipesim
