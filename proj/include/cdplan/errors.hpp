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

#include <stdexcept>
#include <string>
#include <string_view>

namespace cdplan {

enum class ErrorCode {
  kDegenerateTriangle,
  kDegenerateTetrahedron,
  kInvalidEndpoint,
  kNoPath,
  kNonPlanar,
  kSingularJacobian,
  kInfeasibleSafety,
  kZeroLengthPath,
  kDegenerateConstraint,
  kStepSizeTooCoarse,
  kSingularTransition,
  kNoConvergence,
  kInfeasible,
  kNotInteriorFollower,
  kSingularCommunication,
  kAttitudeSingularity,
  kParseError,
  kSchemaError,
  kInfeasibleScenario,
  kIoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library. `stage()` names the pipeline stage
/// ("astar", "deformation", ...) when the error crossed a stage boundary.
class PlanningError : public std::runtime_error {
 public:
  PlanningError(ErrorCode code, const std::string& what, std::string stage = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& stage() const noexcept { return stage_; }

  /// Copy of this error tagged with a pipeline stage.
  PlanningError with_stage(std::string stage) const;

 private:
  ErrorCode code_;
  std::string stage_;
  std::string detail_;
};

}  // namespace cdplan
