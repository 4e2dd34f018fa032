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

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "pipesim/config.hpp"
#include "pipesim/csvio.hpp"
#include "pipesim/errors.hpp"
#include "pipesim/experiment.hpp"
#include "pipesim/templates.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string calibration_path;
  std::string output;
  std::uint64_t seed = 0;
  int instances = 0;
  std::string policy;
  int repetitions = 0;
  int messages = 0;
  bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "experiment config file (YAML)")->required();
  cmd->add_option("--seed", flags.seed, "override the experiment seed");
  cmd->add_option("--instances", flags.instances,
                  "override the instance count of the first app entry");
  cmd->add_option("--policy", flags.policy,
                  "override the placement policy (SingleGpu, SingleGpuMps, IMG, IMG-MPS, "
                  "IMG-MPS-Pin)");
  cmd->add_option("--repetitions", flags.repetitions, "override the repetition count");
  cmd->add_option("--messages", flags.messages, "override messages per run");
  cmd->add_option("--output", flags.output, "override the output directory");
  cmd->add_option("--calibration", flags.calibration_path,
                  "calibration overlay file merged over the defaults");
}

pipesim::ExperimentConfig load_config(const CommonFlags& flags, CLI::App* cmd) {
  auto cfg = pipesim::parse_config_yaml_file(flags.config_path);
  if (!flags.calibration_path.empty()) {
    cfg.calibration.merge(pipesim::parse_calibration_yaml_file(flags.calibration_path));
  }
  if (cmd->count("--seed")) cfg.seed = flags.seed;
  if (cmd->count("--instances")) cfg.apps.front().instances = flags.instances;
  if (cmd->count("--policy")) {
    auto kind = pipesim::parse_policy_kind(flags.policy);
    if (!kind) throw pipesim::ConfigError("unknown policy '" + flags.policy + "'");
    cfg.policy.kind = *kind;
    cfg.policy.pin_cpu = (*kind == pipesim::PolicyKind::IsolatedMultiGpuMpsPin);
  }
  if (cmd->count("--repetitions")) cfg.repetitions = flags.repetitions;
  if (cmd->count("--messages")) cfg.messages_per_run = flags.messages;
  if (cmd->count("--output")) cfg.output_dir = flags.output;
  cfg.validate();
  return cfg;
}

void print_report_summary(const pipesim::ExperimentReport& report) {
  std::cout << pipesim::report_text(report);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pipesim: deterministic simulator for concurrent streaming-AI pipelines "
               "sharing GPUs"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  auto* run_cmd = app.add_subcommand("run", "run one experiment and write raw CSVs + report");
  add_common(run_cmd, run_flags);

  CommonFlags sweep_flags;
  std::vector<double> sweep_values{15.0, 20.0, 25.0};
  auto* sweep_cmd =
      app.add_subcommand("sweep", "run the experiment once per thread-percentage value");
  add_common(sweep_cmd, sweep_flags);
  sweep_cmd->add_option("--values", sweep_values, "thread percentages to sweep")
      ->delimiter(',');

  std::string cmp_a, cmp_b, cmp_out;
  auto* cmp_cmd = app.add_subcommand(
      "compare", "compare two run output directories (deltas + rank tests)");
  cmp_cmd->add_option("--a", cmp_a, "baseline run output directory")->required();
  cmp_cmd->add_option("--b", cmp_b, "candidate run output directory")->required();
  cmp_cmd->add_option("--output", cmp_out, "comparison CSV path (default: stdout)");

  auto* list_cmd = app.add_subcommand("list-templates", "print the application catalog");

  std::string report_dir;
  auto* report_cmd = app.add_subcommand(
      "report", "regenerate summary.csv and report.txt from raw CSVs");
  report_cmd->add_option("--output-dir", report_dir, "run output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      auto cfg = load_config(run_flags, run_cmd);
      auto report = pipesim::run(cfg);
      print_report_summary(report);
      if (!cfg.output_dir.empty()) {
        std::cout << "raw CSVs under " << cfg.output_dir << "\n";
      }
    } else if (*sweep_cmd) {
      auto cfg = load_config(sweep_flags, sweep_cmd);
      auto rows = pipesim::sweep_thread_pct(cfg, sweep_values);
      std::ostringstream csv;
      pipesim::write_sweep_csv(csv, rows);
      std::cout << csv.str();
      if (!cfg.output_dir.empty()) {
        std::ofstream out(cfg.output_dir + "/sweep.csv");
        out << csv.str();
      }
    } else if (*cmp_cmd) {
      auto a = pipesim::load_report_from_dir(cmp_a);
      auto b = pipesim::load_report_from_dir(cmp_b);
      auto rows = pipesim::compare(a, b);
      if (cmp_out.empty()) {
        pipesim::write_comparison_csv(std::cout, rows);
      } else {
        std::ofstream out(cmp_out);
        pipesim::write_comparison_csv(out, rows);
      }
    } else if (*list_cmd) {
      const auto catalog = pipesim::template_catalog(pipesim::Calibration::defaults());
      for (const auto& info : catalog) {
        std::cout << info.name << ": " << info.operator_count << " operators, "
                  << info.path_count << (info.path_count == 1 ? " path\n" : " paths\n");
        for (const auto& op : info.operators) {
          std::cout << "  " << op.name << " (" << pipesim::to_string(op.kind) << ")";
          if (op.workload.sm_demand > 0) {
            std::cout << " sm_demand=" << op.workload.sm_demand;
          }
          std::cout << " base_ms=" << pipesim::format_double(op.workload.base_duration_ms);
          if (op.workload.parallel_streams > 1) {
            std::cout << " parallel_streams=" << op.workload.parallel_streams;
          }
          if (op.workload.is_graphics) std::cout << " graphics";
          std::cout << "\n";
        }
      }
    } else if (*report_cmd) {
      pipesim::regenerate_report(report_dir);
      std::cout << "regenerated " << report_dir << "/summary.csv and report.txt\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
