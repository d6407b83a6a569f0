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

#include <optional>
#include <string>
#include <vector>

#include "cdplan/acquisition.hpp"
#include "cdplan/astar.hpp"
#include "cdplan/deformation.hpp"
#include "cdplan/optimal_control.hpp"
#include "cdplan/scenario.hpp"
#include "cdplan/trajectory.hpp"

namespace cdplan {

/// One row per checked constraint: pass iff margin >= -kMarginSlack.
struct SafetyRow {
  std::string name;
  std::string description;
  double value = 0.0;
  double limit = 0.0;
  double margin = 0.0;
  bool pass = false;
};

/// Rounding slack on margins that are zero by construction.
inline constexpr double kMarginSlack = 1e-9;

struct SegmentDiagnostics {
  double boundary_error_start = 0.0;
  double boundary_error_end = 0.0;
  double max_constraint_residual = 0.0;
  double stationarity_residual = 0.0;
  double effort = 0.0;
};

struct RunReport {
  std::string scenario_name;
  PathResult path;
  std::vector<Vec3> waypoints;
  std::vector<double> betas;
  std::vector<LeaderStack> configs;
  std::vector<DeformationParams> config_params;
  LeaderPlan plan;
  std::vector<SegmentDiagnostics> diagnostics;
  std::optional<LeaderTrajectory> trajectory;
  DeviationReport deviation;
  std::vector<SafetyRow> safety;
  double delta = 0.0;
  double sigma_max = 0.0;
  /// Value of the solver's conserved form at the start configuration.
  double conserved_form = 0.0;
  /// Printed quadratic form at the start configuration.
  double area_form_start = 0.0;
  /// Min over samples of (ball-center distance to obstacles) - r_max.
  double obstacle_clearance = 0.0;
  /// Max distance of the ball center from the compressed A* polyline.
  double max_path_offset = 0.0;

  bool all_pass() const;
};

struct AstarStage {
  PathResult path;
  std::vector<Vec3> waypoints;
  std::size_t evaluated_nodes = 0;
};

/// Step 1: A* between the endpoints and waypoint compression.
AstarStage run_astar(const Scenario& s);

/// Steps 1-3 and the acquisition run. Errors carry the stage label
/// ("astar", "deformation", "optimal-control", "acquisition").
RunReport run_pipeline(const Scenario& s);

/// Re-run the acquisition on a given trajectory and fill the deviation-based
/// safety rows (c2 and the deviation bound).
RunReport simulate_only(const Scenario& s, const LeaderTrajectory& trajectory);

}  // namespace cdplan
