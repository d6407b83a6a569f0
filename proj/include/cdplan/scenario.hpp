/*
 Copyright 2026 The cdplan Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "cdplan/acquisition.hpp"
#include "cdplan/astar.hpp"
#include "cdplan/deformation.hpp"
#include "cdplan/geometry.hpp"
#include "cdplan/optimal_control.hpp"

namespace cdplan {

struct Scenario {
  std::string name;
  Vec3 workspace_min = Vec3::Zero();
  Vec3 workspace_max = Vec3::Zero();
  /// Node (1,1,1) sits at workspace_min.
  Grid grid;
  ObstacleMesh obstacles;
  ValidityOptions validity;

  ReferenceFormation formation;
  CommGraph graph;

  Vec3 start = Vec3::Zero();  // initial ball center
  Vec3 goal = Vec3::Zero();   // final ball center
  /// sigma2 = 1 / sigma1, s = goal.
  DeformationParams final_params;

  /// delta is taken from the file or derived from d_min, 1 / sigma1, epsilon.
  SafetyConstants safety;
  bool delta_derived = false;

  TimingOptions timing;
  SolverOptions solver;
  SimulationOptions simulation;
};

struct LoadOptions {
  /// Angles in the file are degrees.
  bool degrees = false;
  /// Skip the free-set checks on the endpoints.
  bool check_endpoints = true;
};

/// Parse and validate a scenario document. Throws ParseError, SchemaError
/// (message starts with the JSON pointer of the offending field) or
/// InfeasibleScenario.
Scenario parse_scenario(std::string_view text, const LoadOptions& options = {});
Scenario load_scenario(const std::filesystem::path& path, const LoadOptions& options = {});

Plant parse_plant(std::string_view name);
std::string_view plant_name(Plant plant);

}  // namespace cdplan
