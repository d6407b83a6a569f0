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
#include <vector>

#include <Eigen/Dense>

namespace cdplan {

using Vec3 = Eigen::Vector3d;

/// Determinants at or below this magnitude (scenario units) are degenerate.
inline constexpr double kDegeneracyTol = 1e-12;
/// Slack used by the containment predicates; boundary contact is a violation.
inline constexpr double kContainmentTol = 1e-12;

struct ContainmentBall {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
};

struct Tetrahedron {
  std::array<Vec3, 4> vertices;
};

/// One obstacle-enclosing polytope made of tetrahedral cells.
struct Polytope {
  int id = 0;
  std::vector<Tetrahedron> cells;
};

struct ObstacleMesh {
  std::vector<Polytope> polytopes;

  bool empty() const;
  std::size_t cell_count() const;
};

/// Barycentric weights of `pi_0` with respect to the planar triangle
/// (p1_0, p2_0, p3_0). Only x and y are used. Throws DegenerateTriangle.
Eigen::Vector3d omega2(const Vec3& p1_0, const Vec3& p2_0, const Vec3& p3_0,
                       const Vec3& pi_0);

/// Barycentric weights of `pf` with respect to tetrahedron i-j-k-l.
/// Throws DegenerateTetrahedron.
Eigen::Vector4d omega3(const Vec3& pi, const Vec3& pj, const Vec3& pk, const Vec3& pl,
                       const Vec3& pf);

/// Throws DegenerateTetrahedron if the homogeneous vertex matrix is singular.
void check_tetrahedron(const Tetrahedron& t);

/// Closed containment: faces and vertices count as inside.
bool point_in_tetrahedron(const Tetrahedron& t, const Vec3& p);

/// Euclidean distance from `p` to the solid tetrahedron (0 when inside).
double distance_to_tetrahedron(const Tetrahedron& t, const Vec3& p);

/// True iff every mesh vertex lies strictly outside the ball.
bool ball_excludes_vertices(const ContainmentBall& ball, const ObstacleMesh& mesh);

/// Deterministic, near-uniform points on the sphere bounding `ball`.
std::vector<Vec3> fibonacci_sphere(const ContainmentBall& ball, int count);

struct ValidityOptions {
  /// Boundary samples used for the sampled sphere-in-cell check.
  int boundary_samples = 256;
  /// Also require dist(center, cell) > radius, which closes the sampling gap.
  bool exact_distance_check = true;
};

/// Whether `d` is a valid containment-ball center: no mesh vertex inside the
/// ball, no boundary point inside a cell, and the center outside every cell.
bool is_valid_center(const Vec3& d, double r_max, const ObstacleMesh& mesh,
                     const ValidityOptions& options = {});

}  // namespace cdplan
