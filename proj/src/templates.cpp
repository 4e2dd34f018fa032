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

#include "pipesim/templates.hpp"

#include <algorithm>

#include "pipesim/errors.hpp"

namespace pipesim {

namespace {

WorkloadDemand host(double ms) {
  WorkloadDemand w;
  w.base_duration_ms = ms;
  return w;
}

WorkloadDemand kernel(int sms, double ms, std::uint64_t mem, int streams = 1) {
  WorkloadDemand w;
  w.sm_demand = sms;
  w.base_duration_ms = ms;
  w.memory_bytes = mem;
  w.parallel_streams = streams;
  return w;
}

WorkloadDemand render(double ms, std::uint64_t mem) {
  WorkloadDemand w;
  w.base_duration_ms = ms;
  w.memory_bytes = mem;
  w.is_graphics = true;
  return w;
}

constexpr std::uint64_t MB = 1'000'000ULL;

}  // namespace

Calibration Calibration::defaults() {
  Calibration c;

  {
    TemplateCalibration t;
    t.payload_bytes = 1'200'000;
    t.operators["replayer"] = host(1.0);
    t.operators["format_converter"] = kernel(6, 1.8, 256 * MB);
    t.operators["lstm_inferer"] = kernel(8, 7.0, 900 * MB);
    t.operators["tool_tracking_postprocessor"] = kernel(6, 1.8, 128 * MB);
    t.operators["holoviz"] = render(2.4, 512 * MB);
    c.templates["endoscopy_tool_tracking"] = std::move(t);
  }
  {
    TemplateCalibration t;
    t.payload_bytes = 1 * MB;
    t.operators["replayer"] = host(1.0);
    t.operators["format_converter"] = kernel(6, 1.5, 256 * MB);
    t.operators["segmentation_inferer"] = kernel(8, 5.5, 700 * MB);
    t.operators["segmentation_postprocessor"] = kernel(6, 1.5, 128 * MB);
    t.operators["holoviz"] = render(2.0, 512 * MB);
    c.templates["ultrasound_segmentation"] = std::move(t);
  }
  {
    TemplateCalibration t;
    t.payload_bytes = 1 * MB;
    t.operators["replayer"] = host(1.0);
    t.operators["format_converter_aortic"] = kernel(5, 1.6, 128 * MB);
    t.operators["format_converter_bmode"] = kernel(5, 1.6, 128 * MB);
    t.operators["format_converter_plax"] = kernel(5, 1.6, 128 * MB);
    t.operators["format_converter_viz"] = kernel(5, 1.6, 128 * MB);
    t.operators["multi_ai_inference"] = kernel(5, 9.0, 500 * MB, 3);
    t.operators["inference_processor"] = kernel(6, 2.0, 128 * MB);
    t.operators["holoviz"] = render(2.5, 512 * MB);
    c.templates["multi_ai_ultrasound"] = std::move(t);
  }
  return c;
}

void Calibration::merge(const Calibration& other) {
  for (const auto& [name, tpl] : other.templates) {
    auto& mine = templates[name];
    if (tpl.payload_bytes != 0) mine.payload_bytes = tpl.payload_bytes;
    for (const auto& [op, demand] : tpl.operators) {
      mine.operators[op] = demand;
    }
  }
}

std::vector<std::string> template_names() {
  return {"endoscopy_tool_tracking", "ultrasound_segmentation", "multi_ai_ultrasound"};
}

bool is_known_template(const std::string& name) {
  const auto names = template_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

namespace {

const TemplateCalibration& tpl_calibration(const std::string& template_name,
                                           const Calibration& calibration) {
  auto it = calibration.templates.find(template_name);
  if (it == calibration.templates.end()) {
    throw ConfigError("no calibration for template " + template_name);
  }
  return it->second;
}

WorkloadDemand demand_for(const TemplateCalibration& t, const std::string& op) {
  auto it = t.operators.find(op);
  if (it == t.operators.end()) throw ConfigError("calibration is missing operator " + op);
  return it->second;
}

OperatorGraph make_endoscopy(const std::string& instance_id, const TemplateCalibration& t) {
  std::vector<OperatorSpec> ops = {
      {"replayer", OperatorKind::Source, {}, {"output"}, demand_for(t, "replayer")},
      {"format_converter", OperatorKind::Compute, {"source_video"}, {"tensor"},
       demand_for(t, "format_converter")},
      {"lstm_inferer", OperatorKind::Inference, {"source"}, {"tensor"},
       demand_for(t, "lstm_inferer")},
      {"tool_tracking_postprocessor", OperatorKind::Compute, {"in"}, {"out"},
       demand_for(t, "tool_tracking_postprocessor")},
      {"holoviz", OperatorKind::Graphics, {"receivers"}, {}, demand_for(t, "holoviz")},
  };
  std::vector<FlowEdge> edges = {
      {"replayer", "output", "format_converter", "source_video"},
      {"format_converter", "tensor", "lstm_inferer", "source"},
      {"lstm_inferer", "tensor", "tool_tracking_postprocessor", "in"},
      {"tool_tracking_postprocessor", "out", "holoviz", "receivers"},
  };
  return OperatorGraph::build(std::move(ops), std::move(edges), instance_id);
}

OperatorGraph make_ultrasound(const std::string& instance_id, const TemplateCalibration& t) {
  std::vector<OperatorSpec> ops = {
      {"replayer", OperatorKind::Source, {}, {"output"}, demand_for(t, "replayer")},
      {"format_converter", OperatorKind::Compute, {"source_video"}, {"tensor"},
       demand_for(t, "format_converter")},
      {"segmentation_inferer", OperatorKind::Inference, {"source"}, {"tensor"},
       demand_for(t, "segmentation_inferer")},
      {"segmentation_postprocessor", OperatorKind::Compute, {"in"}, {"out"},
       demand_for(t, "segmentation_postprocessor")},
      {"holoviz", OperatorKind::Graphics, {"receivers"}, {}, demand_for(t, "holoviz")},
  };
  std::vector<FlowEdge> edges = {
      {"replayer", "output", "format_converter", "source_video"},
      {"format_converter", "tensor", "segmentation_inferer", "source"},
      {"segmentation_inferer", "tensor", "segmentation_postprocessor", "in"},
      {"segmentation_postprocessor", "out", "holoviz", "receivers"},
  };
  return OperatorGraph::build(std::move(ops), std::move(edges), instance_id);
}

// Three model branches fan out of the replayer into one inference operator
// that launches a CUDA stream per model; a fourth converter branch carries
// the raw frames straight to the visualizer, so the graph has several
// root-to-leaf paths.
OperatorGraph make_multi_ai(const std::string& instance_id, const TemplateCalibration& t) {
  std::vector<OperatorSpec> ops = {
      {"replayer", OperatorKind::Source, {}, {"output"}, demand_for(t, "replayer")},
      {"format_converter_aortic", OperatorKind::Compute, {"source_video"}, {"tensor"},
       demand_for(t, "format_converter_aortic")},
      {"format_converter_bmode", OperatorKind::Compute, {"source_video"}, {"tensor"},
       demand_for(t, "format_converter_bmode")},
      {"format_converter_plax", OperatorKind::Compute, {"source_video"}, {"tensor"},
       demand_for(t, "format_converter_plax")},
      {"format_converter_viz", OperatorKind::Compute, {"source_video"}, {"tensor"},
       demand_for(t, "format_converter_viz")},
      {"multi_ai_inference", OperatorKind::Inference, {"in_aortic", "in_bmode", "in_plax"},
       {"tensors"}, demand_for(t, "multi_ai_inference")},
      {"inference_processor", OperatorKind::Compute, {"in"}, {"out"},
       demand_for(t, "inference_processor")},
      {"holoviz", OperatorKind::Graphics, {"receivers", "video"}, {},
       demand_for(t, "holoviz")},
  };
  std::vector<FlowEdge> edges = {
      {"replayer", "output", "format_converter_aortic", "source_video"},
      {"replayer", "output", "format_converter_bmode", "source_video"},
      {"replayer", "output", "format_converter_plax", "source_video"},
      {"replayer", "output", "format_converter_viz", "source_video"},
      {"format_converter_aortic", "tensor", "multi_ai_inference", "in_aortic"},
      {"format_converter_bmode", "tensor", "multi_ai_inference", "in_bmode"},
      {"format_converter_plax", "tensor", "multi_ai_inference", "in_plax"},
      {"format_converter_viz", "tensor", "holoviz", "video"},
      {"multi_ai_inference", "tensors", "inference_processor", "in"},
      {"inference_processor", "out", "holoviz", "receivers"},
  };
  return OperatorGraph::build(std::move(ops), std::move(edges), instance_id);
}

}  // namespace

OperatorGraph make_template(const std::string& template_name, const std::string& instance_id,
                            const Calibration& calibration) {
  const auto& t = tpl_calibration(template_name, calibration);
  if (template_name == "endoscopy_tool_tracking") return make_endoscopy(instance_id, t);
  if (template_name == "ultrasound_segmentation") return make_ultrasound(instance_id, t);
  if (template_name == "multi_ai_ultrasound") return make_multi_ai(instance_id, t);
  throw ConfigError("unknown template " + template_name);
}

std::uint64_t template_payload_bytes(const std::string& template_name,
                                     const Calibration& calibration) {
  return tpl_calibration(template_name, calibration).payload_bytes;
}

std::vector<TemplateInfo> template_catalog(const Calibration& calibration) {
  std::vector<TemplateInfo> out;
  for (const auto& name : template_names()) {
    auto graph = make_template(name, "catalog", calibration);
    TemplateInfo info;
    info.name = name;
    info.operator_count = static_cast<int>(graph.operators().size());
    info.path_count = static_cast<int>(graph.paths().size());
    for (const auto& op_name : graph.topological_order()) {
      info.operators.push_back(graph.op(op_name));
    }
    out.push_back(std::move(info));
  }
  return out;
}

}  // namespace pipesim
