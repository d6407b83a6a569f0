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

#include "cdplan/errors.hpp"

namespace cdplan {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDegenerateTriangle: return "DegenerateTriangle";
    case ErrorCode::kDegenerateTetrahedron: return "DegenerateTetrahedron";
    case ErrorCode::kInvalidEndpoint: return "InvalidEndpoint";
    case ErrorCode::kNoPath: return "NoPath";
    case ErrorCode::kNonPlanar: return "NonPlanar";
    case ErrorCode::kSingularJacobian: return "SingularJacobian";
    case ErrorCode::kInfeasibleSafety: return "InfeasibleSafety";
    case ErrorCode::kZeroLengthPath: return "ZeroLengthPath";
    case ErrorCode::kDegenerateConstraint: return "DegenerateConstraint";
    case ErrorCode::kStepSizeTooCoarse: return "StepSizeTooCoarse";
    case ErrorCode::kSingularTransition: return "SingularTransition";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kNotInteriorFollower: return "NotInteriorFollower";
    case ErrorCode::kSingularCommunication: return "SingularCommunication";
    case ErrorCode::kAttitudeSingularity: return "AttitudeSingularity";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kInfeasibleScenario: return "InfeasibleScenario";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

namespace {

std::string format_message(ErrorCode code, const std::string& what,
                           const std::string& stage) {
  std::string msg;
  if (!stage.empty()) msg += "[" + stage + "] ";
  msg += std::string(to_string(code)) + ": " + what;
  return msg;
}

}  // namespace

PlanningError::PlanningError(ErrorCode code, const std::string& what, std::string stage)
    : std::runtime_error(format_message(code, what, stage)),
      code_(code),
      stage_(std::move(stage)),
      detail_(what) {}

PlanningError PlanningError::with_stage(std::string stage) const {
  return PlanningError(code_, detail_, std::move(stage));
}

}  // namespace cdplan
