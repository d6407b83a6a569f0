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

#include "cdplan/deformation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cdplan/errors.hpp"

namespace cdplan {

LeaderStack leader_stack(const Vec3& p1, const Vec3& p2, const Vec3& p3) {
  LeaderStack y;
  y << p1.x(), p2.x(), p3.x(), p1.y(), p2.y(), p3.y(), p1.z(), p2.z(), p3.z();
  return y;
}

std::array<Vec3, 3> leader_positions(const LeaderStack& y) {
  return {Vec3(y[0], y[3], y[6]), Vec3(y[1], y[4], y[7]), Vec3(y[2], y[5], y[8])};
}

double ReferenceFormation::min_separation() const {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (std::size_t j = i + 1; j < positions.size(); ++j) {
      best = std::min(best, (positions[i] - positions[j]).norm());
    }
  }
  return best;
}

void ReferenceFormation::validate() const {
  if (positions.size() < 3) {
    throw PlanningError(ErrorCode::kSchemaError, "formation needs at least 3 agents");
  }
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (!positions[i].allFinite() || positions[i].z() != 0.0) {
      throw PlanningError(ErrorCode::kSchemaError,
                          "reference position " + std::to_string(i + 1) +
                              " must be finite with z = 0");
    }
  }
  if (!(min_separation() > 0.0)) {
    throw PlanningError(ErrorCode::kSchemaError, "reference positions must be distinct");
  }
  build_gamma(*this);
}

Vec3 PlanarAffine::apply(const Vec3& p0) const {
  const Eigen::Vector2d xy = q_xy * p0.head<2>();
  return Vec3(xy.x() + s.x(), xy.y() + s.y(), p0.z() + s.z());
}

Matrix6d build_gamma(const ReferenceFormation& ref) {
  const auto& p = ref.positions;
  Eigen::Matrix3d tri;
  tri << p[0].x(), p[0].y(), 1.0, p[1].x(), p[1].y(), 1.0, p[2].x(), p[2].y(), 1.0;
  if (std::abs(tri.determinant()) <= kDegeneracyTol) {
    throw PlanningError(ErrorCode::kDegenerateTriangle,
                        "leader reference positions are collinear");
  }
  Matrix6d m = Matrix6d::Zero();
  for (int i = 0; i < 3; ++i) {
    m(i, 0) = p[i].x();
    m(i, 1) = p[i].y();
    m(i, 4) = 1.0;
    m(3 + i, 2) = p[i].x();
    m(3 + i, 3) = p[i].y();
    m(3 + i, 5) = 1.0;
  }
  return m.inverse();
}

PlanarAffine leaders_to_params(const LeaderStack& y, const ReferenceFormation& ref) {
  const double z_lo = y.tail<3>().minCoeff();
  const double z_hi = y.tail<3>().maxCoeff();
  if (z_hi - z_lo > 1e-9) {
    throw PlanningError(ErrorCode::kNonPlanar,
                        "leader altitudes differ by " + std::to_string(z_hi - z_lo) + " m");
  }
  const Eigen::Matrix<double, 6, 1> v = build_gamma(ref) * y.head<6>();
  PlanarAffine out;
  out.q_xy << v[0], v[1], v[2], v[3];
  out.s = Vec3(v[4], v[5], y.tail<3>().mean());
  return out;
}

Eigen::Matrix2d rotation2d(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

DeformationParams polar_decompose(const Eigen::Matrix2d& q_xy) {
  const double det = q_xy.determinant();
  if (std::abs(det) <= kDegeneracyTol) {
    throw PlanningError(ErrorCode::kSingularJacobian, "Jacobian determinant is zero");
  }
  if (det < 0.0) {
    throw PlanningError(ErrorCode::kSingularJacobian,
                        "Jacobian reverses orientation (leaders flipped through alignment)");
  }
  // U^2 = Q^T Q = [[a2, b2], [b2, c2]]
  const Eigen::Matrix2d u2 = q_xy.transpose() * q_xy;
  const double a2 = u2(0, 0);
  const double b2 = u2(0, 1);
  const double c2 = u2(1, 1);
  const double mean = 0.5 * (a2 + c2);
  const double spread = std::sqrt(0.25 * (a2 - c2) * (a2 - c2) + b2 * b2);

  DeformationParams out;
  out.sigma1 = std::sqrt(mean + spread);
  out.sigma2 = std::sqrt(std::max(mean - spread, 0.0));
  out.theta_d = spread <= 1e-14 * mean ? 0.0 : 0.5 * std::atan2(2.0 * b2, a2 - c2);

  const Eigen::Matrix2d rd = rotation2d(out.theta_d);
  const Eigen::Matrix2d u_inv =
      rd * Eigen::Vector2d(1.0 / out.sigma1, 1.0 / out.sigma2).asDiagonal() * rd.transpose();
  const Eigen::Matrix2d r = q_xy * u_inv;
  out.theta_r = std::atan2(r(1, 0), r(0, 0));
  return out;
}

Eigen::Matrix2d compose_jacobian(const DeformationParams& params) {
  const Eigen::Matrix2d rd = rotation2d(params.theta_d);
  const Eigen::Matrix2d u =
      rd * Eigen::Vector2d(params.sigma1, params.sigma2).asDiagonal() * rd.transpose();
  return rotation2d(params.theta_r) * u;
}

double safety_sigma_max(const SafetyConstants& consts) {
  return consts.d_min / (2.0 * (consts.delta + consts.epsilon));
}

double safety_delta(double d_min, double sigma_min, double epsilon) {
  const double delta = 0.5 * (d_min * sigma_min - 2.0 * epsilon);
  if (!(delta > 0.0)) {
    throw PlanningError(ErrorCode::kInfeasibleSafety,
                        "d_min * sigma_min must exceed 2 epsilon");
  }
  return delta;
}

DeformationParams interpolate_params(double beta, const DeformationParams& end_params,
                                     double start_sigma1) {
  DeformationParams out;
  out.sigma1 = beta * start_sigma1 + (1.0 - beta) * end_params.sigma1;
  out.sigma2 = 1.0 / out.sigma1;
  out.theta_d = (1.0 - beta) * end_params.theta_d;
  out.theta_r = (1.0 - beta) * end_params.theta_r;
  out.s = end_params.s;
  return out;
}

std::vector<double> beta_schedule(std::span<const Vec3> waypoints) {
  if (waypoints.size() < 2) {
    throw PlanningError(ErrorCode::kZeroLengthPath, "need at least two waypoints");
  }
  std::vector<double> cumulative(waypoints.size(), 0.0);
  for (std::size_t k = 1; k < waypoints.size(); ++k) {
    const double len = (waypoints[k] - waypoints[k - 1]).norm();
    if (!(len > 0.0)) {
      throw PlanningError(ErrorCode::kZeroLengthPath,
                          "waypoints " + std::to_string(k - 1) + " and " + std::to_string(k) +
                              " coincide");
    }
    cumulative[k] = cumulative[k - 1] + len;
  }
  const double total = cumulative.back();
  for (double& c : cumulative) c /= total;
  cumulative.back() = 1.0;
  return cumulative;
}

LeaderStack deformed_leaders(const DeformationParams& params, const Vec3& center,
                             const ReferenceFormation& ref) {
  const PlanarAffine map{compose_jacobian(params), center};
  return leader_stack(map.apply(ref.positions[0]), map.apply(ref.positions[1]),
                      map.apply(ref.positions[2]));
}

std::vector<LeaderStack> intermediate_leader_configs(std::span<const Vec3> waypoints,
                                                     const DeformationParams& end_params,
                                                     const ReferenceFormation& ref) {
  const std::vector<double> betas = beta_schedule(waypoints);
  std::vector<LeaderStack> configs;
  configs.reserve(waypoints.size());
  for (std::size_t k = 0; k < waypoints.size(); ++k) {
    // The interpolation reaches the start deformation (identity) at argument 1.
    const DeformationParams pk = interpolate_params(1.0 - betas[k], end_params, 1.0);
    configs.push_back(deformed_leaders(pk, waypoints[k], ref));
  }
  return configs;
}

Eigen::MatrixXd shape_matrix(const ReferenceFormation& ref) {
  const auto& p = ref.positions;
  const Eigen::Index nf = static_cast<Eigen::Index>(ref.follower_count());
  Eigen::MatrixXd rows(nf, 3);
  for (Eigen::Index f = 0; f < nf; ++f) {
    rows.row(f) = omega2(p[0], p[1], p[2], p[3 + f]).transpose();
  }
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3 * nf, 9);
  for (int c = 0; c < 3; ++c) h.block(c * nf, 3 * c, nf, 3) = rows;
  return h;
}

std::vector<Vec3> formation_positions(const LeaderStack& y, const ReferenceFormation& ref) {
  const auto& p = ref.positions;
  const auto leaders = leader_positions(y);
  std::vector<Vec3> out;
  out.reserve(p.size());
  for (const auto& pi : p) {
    const Eigen::Vector3d w = omega2(p[0], p[1], p[2], pi);
    out.push_back(w[0] * leaders[0] + w[1] * leaders[1] + w[2] * leaders[2]);
  }
  return out;
}

double triangle_signed_area(const LeaderStack& y) {
  return 0.5 * (y[0] * (y[4] - y[5]) + y[1] * (y[5] - y[3]) + y[2] * (y[3] - y[4]));
}

}  // namespace cdplan
