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

// Independent reference implementations used by the unit and acceptance tests.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cdplan/astar.hpp"
#include "cdplan/deformation.hpp"
#include "cdplan/geometry.hpp"
#include "cdplan/optimal_control.hpp"
#include "cdplan/scenario.hpp"

namespace oracle {

using cdplan::GridIndex;
using cdplan::Vec3;

inline std::string scenario_path(const std::string& name) {
  return std::string(CDPLAN_SCENARIO_DIR) + "/" + name;
}

/// Blocked-node table over a grid, filled at random with probability `p`.
struct BlockedGrid {
  cdplan::Grid grid;
  std::vector<char> blocked;

  bool free(const GridIndex& i) const { return !blocked[grid.flat(i)]; }
};

inline BlockedGrid random_blocked_grid(std::mt19937_64& rng, std::array<int, 3> counts,
                                       double p) {
  BlockedGrid g;
  g.grid.counts = counts;
  g.blocked.resize(g.grid.node_count());
  std::bernoulli_distribution coin(p);
  for (auto& b : g.blocked) b = coin(rng) ? 1 : 0;
  return g;
}

/// Per-axis-mask move counts: mask bit a set when the move changes axis a.
using MoveCounts = std::array<long, 8>;

inline MoveCounts move_counts(const std::vector<GridIndex>& path) {
  MoveCounts c{};
  for (std::size_t k = 1; k < path.size(); ++k) {
    const int mask = (path[k].x != path[k - 1].x ? 1 : 0) | (path[k].y != path[k - 1].y ? 2 : 0) |
                     (path[k].z != path[k - 1].z ? 4 : 0);
    ++c[mask];
  }
  return c;
}

/// Path length evaluated in a fixed order, so equal move multisets give
/// bitwise-equal costs.
inline double canonical_cost(const std::vector<GridIndex>& path, const Vec3& deltas) {
  const MoveCounts c = move_counts(path);
  double cost = 0.0;
  for (int mask = 1; mask < 8; ++mask) {
    Vec3 step = Vec3::Zero();
    for (int a = 0; a < 3; ++a) {
      if (mask & (1 << a)) step[a] = deltas[a];
    }
    cost += static_cast<double>(c[mask]) * step.norm();
  }
  return cost;
}

/// Plain Dijkstra over the 26-neighbourhood with its own neighbour scan.
inline std::optional<std::vector<GridIndex>> dijkstra(const GridIndex& start,
                                                      const GridIndex& goal,
                                                      const cdplan::Grid& grid,
                                                      const std::function<bool(const GridIndex&)>& free) {
  const std::size_t n = grid.node_count();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<long> prev(n, -1);
  std::vector<GridIndex> node_of(n);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[grid.flat(start)] = 0.0;
  node_of[grid.flat(start)] = start;
  pq.push({0.0, grid.flat(start)});
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    const GridIndex ui = node_of[u];
    if (ui == goal) break;
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dz = -1; dz <= 1; ++dz) {
          if (!dx && !dy && !dz) continue;
          const GridIndex v{ui.x + dx, ui.y + dy, ui.z + dz};
          if (v.x < 1 || v.y < 1 || v.z < 1 || v.x > grid.counts[0] || v.y > grid.counts[1] ||
              v.z > grid.counts[2] || !free(v)) {
            continue;
          }
          const double w = Vec3(dx * grid.deltas.x(), dy * grid.deltas.y(), dz * grid.deltas.z()).norm();
          const std::size_t vi = grid.flat(v);
          if (d + w < dist[vi]) {
            dist[vi] = d + w;
            prev[vi] = static_cast<long>(u);
            node_of[vi] = v;
            pq.push({dist[vi], vi});
          }
        }
      }
    }
  }
  if (!std::isfinite(dist[grid.flat(goal)])) return std::nullopt;
  std::vector<GridIndex> path;
  for (long u = static_cast<long>(grid.flat(goal)); u != -1; u = prev[u]) path.push_back(node_of[u]);
  std::reverse(path.begin(), path.end());
  return path;
}

/// Orientation-based closed point-in-tetrahedron test.
inline bool inside_by_volumes(const cdplan::Tetrahedron& t, const Vec3& p) {
  const auto& v = t.vertices;
  auto vol = [](const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
    return (b - a).cross(c - a).dot(d - a);
  };
  const double total = vol(v[0], v[1], v[2], v[3]);
  const double s = total > 0 ? 1.0 : -1.0;
  const double eps = 1e-12 * std::abs(total);
  return s * vol(p, v[1], v[2], v[3]) >= -eps && s * vol(v[0], p, v[2], v[3]) >= -eps &&
         s * vol(v[0], v[1], p, v[3]) >= -eps && s * vol(v[0], v[1], v[2], p) >= -eps;
}

/// Validity by dense boundary sampling: vertices outside, center outside every
/// cell, and none of `samples` random boundary points inside a cell.
inline bool sampled_valid_center(const Vec3& d, double r, const cdplan::ObstacleMesh& mesh,
                                 int samples, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  std::vector<Vec3> boundary(static_cast<std::size_t>(samples));
  for (auto& b : boundary) {
    const Vec3 g(n01(rng), n01(rng), n01(rng));
    b = d + r * g.normalized();
  }
  for (const auto& poly : mesh.polytopes) {
    for (const auto& cell : poly.cells) {
      for (const auto& v : cell.vertices) {
        if ((v - d).norm() <= r) return false;
      }
      if (inside_by_volumes(cell, d)) return false;
      for (const auto& b : boundary) {
        if (inside_by_volumes(cell, b)) return false;
      }
    }
  }
  return true;
}

/// Rest-to-rest minimum of 0.5 * integral |u|^2 for a double integrator.
inline double cubic_lq_effort(const Eigen::VectorXd& displacement, double duration) {
  return 6.0 * displacement.squaredNorm() / std::pow(duration, 3);
}

/// Direct transcription of the area-constrained minimum-effort problem:
/// nodes q_0..q_N, accelerations by central differences with mirrored ghost
/// nodes (zero end rates), trapezoidal cost, q_j^T M q_j = A at interior
/// nodes. Solved by Newton iterations on the KKT system.
inline double collocation_effort(const cdplan::Vector6d& q0, const cdplan::Vector6d& q1,
                                 double duration, const cdplan::Matrix6d& m, int nodes = 60) {
  const int n = nodes;
  const double h = duration / n;
  const int nv = 6 * (n - 1);  // interior nodes are free
  const int nc = n - 1;
  const double area = q0.dot(m * q0);

  // Linear map from z to stacked accelerations (with constants).
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(6 * (n + 1), nv);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(6 * (n + 1));
  auto add = [&](int row_node, int j, double coef) {
    int jj = j < 0 ? -j : (j > n ? 2 * n - j : j);
    if (jj == 0) {
      b.segment<6>(6 * row_node) += coef * q0;
    } else if (jj == n) {
      b.segment<6>(6 * row_node) += coef * q1;
    } else {
      a.block<6, 6>(6 * row_node, 6 * (jj - 1)) += coef * Eigen::Matrix<double, 6, 6>::Identity();
    }
  };
  for (int j = 0; j <= n; ++j) {
    add(j, j - 1, 1.0 / (h * h));
    add(j, j, -2.0 / (h * h));
    add(j, j + 1, 1.0 / (h * h));
  }
  Eigen::VectorXd wts = Eigen::VectorXd::Constant(6 * (n + 1), h);
  wts.head<6>().setConstant(0.5 * h);
  wts.tail<6>().setConstant(0.5 * h);
  const Eigen::MatrixXd hess_cost = a.transpose() * wts.asDiagonal() * a;
  const Eigen::VectorXd lin_cost = a.transpose() * wts.asDiagonal() * b;

  // Start from the straight-line interpolation rescaled onto the constraint.
  Eigen::VectorXd z(nv);
  for (int j = 1; j < n; ++j) {
    const double s = static_cast<double>(j) / n;
    cdplan::Vector6d q = (1 - s) * q0 + s * q1;
    z.segment<6>(6 * (j - 1)) = q * std::sqrt(std::abs(area / q.dot(m * q)));
  }
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(nc);
  for (int it = 0; it < 100; ++it) {
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(nv + nc, nv + nc);
    Eigen::VectorXd rhs(nv + nc);
    Eigen::VectorXd grad = hess_cost * z + lin_cost;
    kkt.topLeftCorner(nv, nv) = hess_cost;
    for (int j = 1; j < n; ++j) {
      const cdplan::Vector6d q = z.segment<6>(6 * (j - 1));
      const cdplan::Vector6d dc = 2.0 * m * q;
      grad.segment<6>(6 * (j - 1)) += mu[j - 1] * dc;
      kkt.block<6, 6>(6 * (j - 1), 6 * (j - 1)) += 2.0 * mu[j - 1] * m;
      kkt.block<6, 1>(6 * (j - 1), nv + j - 1) = dc;
      kkt.block<1, 6>(nv + j - 1, 6 * (j - 1)) = dc.transpose();
      rhs[nv + j - 1] = -(q.dot(m * q) - area);
    }
    rhs.head(nv) = -grad;
    const Eigen::VectorXd step = kkt.fullPivLu().solve(rhs);
    z += step.head(nv);
    mu += step.tail(nc);
    if (step.cwiseAbs().maxCoeff() < 1e-11 * (1.0 + z.cwiseAbs().maxCoeff())) break;
  }
  const Eigen::VectorXd acc = a * z + b;
  return 0.5 * acc.dot(wts.asDiagonal() * acc);
}

/// Eight-agent team from the city-scale fixture.
inline cdplan::Scenario team_scenario() {
  cdplan::LoadOptions opt;
  opt.check_endpoints = false;
  return cdplan::load_scenario(scenario_path("city_scale.json"), opt);
}

}  // namespace oracle
