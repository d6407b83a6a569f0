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

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cdplan/geometry.hpp"

namespace cdplan {

/// Stacked leader positions ordered (x1, x2, x3, y1, y2, y3, z1, z2, z3).
using LeaderStack = Eigen::Matrix<double, 9, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

LeaderStack leader_stack(const Vec3& p1, const Vec3& p2, const Vec3& p3);
std::array<Vec3, 3> leader_positions(const LeaderStack& y);

/// Reference (undeformed) planar formation. Agents 0, 1, 2 are the leaders.
struct ReferenceFormation {
  std::vector<Vec3> positions;

  std::size_t size() const { return positions.size(); }
  std::size_t follower_count() const { return positions.size() - 3; }
  /// Minimum pairwise distance between reference positions.
  double min_separation() const;
  /// Throws SchemaError (fewer than 3 agents, z != 0, duplicates) or
  /// DegenerateTriangle (collinear leaders).
  void validate() const;
};

struct DeformationParams {
  double sigma1 = 1.0;
  double sigma2 = 1.0;
  double theta_d = 0.0;  // shear angle, rad
  double theta_r = 0.0;  // rotation angle, rad
  Vec3 s = Vec3::Zero();
};

struct SafetyConstants {
  double epsilon = 0.0;  // agent bounding radius, m
  double delta = 0.0;    // tracking deviation bound, m
  double d_min = 0.0;    // minimum reference separation, m
  double r_max = 0.0;    // containment ball radius, m
  double A_s = 0.0;      // conserved leader-triangle form
};

/// Planar homogeneous transformation p = Q p0 + s with Q = diag(Q_xy, 1).
struct PlanarAffine {
  Eigen::Matrix2d q_xy = Eigen::Matrix2d::Identity();
  Vec3 s = Vec3::Zero();

  Vec3 apply(const Vec3& p0) const;
};

/// Inverse of the 6x6 matrix mapping [Q11 Q12 Q21 Q22 sx sy] to the leaders'
/// planar coordinates. Throws DegenerateTriangle.
Matrix6d build_gamma(const ReferenceFormation& ref);

/// Recover Q_xy and s from a leader stack. s_z is the mean leader altitude.
/// Throws NonPlanar if the leader altitudes differ by more than 1e-9.
PlanarAffine leaders_to_params(const LeaderStack& y, const ReferenceFormation& ref);

/// Q_xy = R(theta_r) R(theta_d) diag(sigma1, sigma2) R(theta_d)^T with
/// sigma1 >= sigma2 > 0. theta_d is 0 when Q_xy^T Q_xy is isotropic.
/// Throws SingularJacobian for |det| <= 1e-12 or an orientation-reversing Q_xy.
DeformationParams polar_decompose(const Eigen::Matrix2d& q_xy);

Eigen::Matrix2d compose_jacobian(const DeformationParams& params);
Eigen::Matrix2d rotation2d(double angle);

/// Largest admissible sigma1: d_min / (2 (delta + epsilon)).
double safety_sigma_max(const SafetyConstants& consts);

/// Deviation bound 0.5 (d_min sigma_min - 2 epsilon). Throws InfeasibleSafety
/// when it is not positive.
double safety_delta(double d_min, double sigma_min, double epsilon);

/// sigma1 = beta sigma1_start + (1 - beta) sigma1_end, theta_{d,r} scaled by
/// (1 - beta), sigma2 = 1 / sigma1.
DeformationParams interpolate_params(double beta, const DeformationParams& end_params,
                                     double start_sigma1);

/// Cumulative arc-length fraction at each waypoint. Throws ZeroLengthPath.
std::vector<double> beta_schedule(std::span<const Vec3> waypoints);

/// Leader configuration at each waypoint. The deformation grows from the
/// identity at the first waypoint to `end_params` at the last.
std::vector<LeaderStack> intermediate_leader_configs(std::span<const Vec3> waypoints,
                                                     const DeformationParams& end_params,
                                                     const ReferenceFormation& ref);

/// Leader stack obtained by applying `params` (with translation `center`) to
/// the reference formation.
LeaderStack deformed_leaders(const DeformationParams& params, const Vec3& center,
                             const ReferenceFormation& ref);

/// H with y_F = H y_L; rows are barycentric weights of each follower.
Eigen::MatrixXd shape_matrix(const ReferenceFormation& ref);

/// Desired position of every agent for a leader stack.
std::vector<Vec3> formation_positions(const LeaderStack& y, const ReferenceFormation& ref);

/// Signed area of the leading triangle (positive when counter-clockwise).
double triangle_signed_area(const LeaderStack& y);

}  // namespace cdplan
