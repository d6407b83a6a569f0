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
#include <vector>

#include "cdplan/astar.hpp"
#include "cdplan/pipeline.hpp"
#include "cdplan/trajectory.hpp"

namespace cdplan {

inline constexpr int kReportSchemaVersion = 1;

struct EmitOptions {
  bool csv = true;
  bool json = true;
};

/// Canonical JSON (sorted keys, shortest round-trip numbers).
std::string report_json(const RunReport& report);
std::string astar_json(const AstarStage& stage);
std::string params_json(const DeformationParams& params, bool degrees);

/// Columns: t, x1..x3, y1..y3, dx1..dx3, dy1..dy3, u1..u6, gamma, z.
std::string trajectory_csv(const LeaderTrajectory& trajectory);
/// Columns: t, agent1..agentN (distance to the desired position, m).
std::string deviations_csv(const DeviationReport& deviation);
LeaderTrajectory parse_trajectory_csv(const std::string& text);
LeaderTrajectory load_trajectory_csv(const std::filesystem::path& path);

/// Writes trajectory.csv, deviations.csv and report.json into `outdir`
/// (created if needed) and returns the written paths. Throws IoError.
std::vector<std::filesystem::path> emit(const RunReport& report,
                                        const std::filesystem::path& outdir,
                                        const EmitOptions& options = {});

}  // namespace cdplan
