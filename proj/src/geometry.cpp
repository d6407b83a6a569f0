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

#include "cdplan/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cdplan/errors.hpp"

namespace cdplan {

bool ObstacleMesh::empty() const { return cell_count() == 0; }

std::size_t ObstacleMesh::cell_count() const {
  std::size_t n = 0;
  for (const auto& poly : polytopes) n += poly.cells.size();
  return n;
}

Eigen::Vector3d omega2(const Vec3& p1_0, const Vec3& p2_0, const Vec3& p3_0,
                       const Vec3& pi_0) {
  Eigen::Matrix3d m;
  m << p1_0.x(), p2_0.x(), p3_0.x(),
       p1_0.y(), p2_0.y(), p3_0.y(),
       1.0, 1.0, 1.0;
  if (std::abs(m.determinant()) <= kDegeneracyTol) {
    throw PlanningError(ErrorCode::kDegenerateTriangle,
                        "leader reference positions are collinear");
  }
  return m.partialPivLu().solve(Eigen::Vector3d(pi_0.x(), pi_0.y(), 1.0));
}

namespace {

Eigen::Matrix4d homogeneous_vertices(const Vec3& pi, const Vec3& pj, const Vec3& pk,
                                     const Vec3& pl) {
  Eigen::Matrix4d m;
  m.topRows<3>() << pi, pj, pk, pl;
  m.row(3).setOnes();
  return m;
}

// Closest point on triangle abc to p (Ericson, Real-Time Collision Detection 5.1.5).
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + ab * (d1 / (d1 - d3));

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + ac * (d2 / (d2 - d6));

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
  }
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

// Conservative bounding sphere of a cell: centroid plus farthest vertex.
ContainmentBall bounding_sphere(const Tetrahedron& t) {
  Vec3 c = Vec3::Zero();
  for (const auto& v : t.vertices) c += v;
  c /= 4.0;
  double r = 0.0;
  for (const auto& v : t.vertices) r = std::max(r, (v - c).norm());
  return {c, r};
}

}  // namespace

Eigen::Vector4d omega3(const Vec3& pi, const Vec3& pj, const Vec3& pk, const Vec3& pl,
                       const Vec3& pf) {
  const Eigen::Matrix4d m = homogeneous_vertices(pi, pj, pk, pl);
  if (std::abs(m.determinant()) <= kDegeneracyTol) {
    throw PlanningError(ErrorCode::kDegenerateTetrahedron,
                        "tetrahedron vertices are coplanar");
  }
  Eigen::Vector4d rhs;
  rhs << pf, 1.0;
  return m.partialPivLu().solve(rhs);
}

void check_tetrahedron(const Tetrahedron& t) {
  const auto& v = t.vertices;
  if (std::abs(homogeneous_vertices(v[0], v[1], v[2], v[3]).determinant()) <=
      kDegeneracyTol) {
    throw PlanningError(ErrorCode::kDegenerateTetrahedron,
                        "tetrahedron vertices are coplanar");
  }
}

bool point_in_tetrahedron(const Tetrahedron& t, const Vec3& p) {
  const auto& v = t.vertices;
  const Eigen::Vector4d w = omega3(v[0], v[1], v[2], v[3], p);
  return (w.array() >= -kContainmentTol).all();
}

double distance_to_tetrahedron(const Tetrahedron& t, const Vec3& p) {
  if (point_in_tetrahedron(t, p)) return 0.0;
  const auto& v = t.vertices;
  static constexpr int kFaces[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
  double best = std::numeric_limits<double>::infinity();
  for (const auto& f : kFaces) {
    const Vec3 q = closest_point_on_triangle(p, v[f[0]], v[f[1]], v[f[2]]);
    best = std::min(best, (q - p).norm());
  }
  return best;
}

bool ball_excludes_vertices(const ContainmentBall& ball, const ObstacleMesh& mesh) {
  for (const auto& poly : mesh.polytopes) {
    for (const auto& cell : poly.cells) {
      for (const auto& v : cell.vertices) {
        if ((v - ball.center).norm() <= ball.radius + kContainmentTol) return false;
      }
    }
  }
  return true;
}

std::vector<Vec3> fibonacci_sphere(const ContainmentBall& ball, int count) {
  std::vector<Vec3> pts;
  pts.reserve(static_cast<std::size_t>(std::max(count, 0)));
  const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / count;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * i;
    pts.emplace_back(ball.center +
                     ball.radius * Vec3(rho * std::cos(phi), rho * std::sin(phi), z));
  }
  return pts;
}

bool is_valid_center(const Vec3& d, double r_max, const ObstacleMesh& mesh,
                     const ValidityOptions& options) {
  const ContainmentBall ball{d, r_max};
  if (!ball_excludes_vertices(ball, mesh)) return false;

  std::vector<Vec3> boundary;  // built lazily, most cells are far away
  for (const auto& poly : mesh.polytopes) {
    for (const auto& cell : poly.cells) {
      const ContainmentBall bound = bounding_sphere(cell);
      // A cell that cannot reach the ball cannot violate any condition.
      if ((bound.center - d).norm() > bound.radius + r_max + 1e-9) continue;

      if (point_in_tetrahedron(cell, d)) return false;
      if (options.exact_distance_check &&
          distance_to_tetrahedron(cell, d) <= r_max + kContainmentTol) {
        return false;
      }
      if (boundary.empty() && options.boundary_samples > 0) {
        boundary = fibonacci_sphere(ball, options.boundary_samples);
      }
      for (const auto& r : boundary) {
        if (point_in_tetrahedron(cell, r)) return false;
      }
    }
  }
  return true;
}

}  // namespace cdplan
