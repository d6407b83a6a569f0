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

#include "cdplan/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "cdplan/errors.hpp"

namespace cdplan {

void CommGraph::validate() const {
  if (n < 3 || in_neighbors.size() != n || weights.size() != n) {
    throw PlanningError(ErrorCode::kSchemaError, "graph size does not match agent count");
  }
  for (std::size_t i = 3; i < n; ++i) {
    double sum = 0.0;
    for (int k = 0; k < 3; ++k) {
      const std::size_t j = in_neighbors[i][k];
      if (j >= n || j == i) {
        throw PlanningError(ErrorCode::kSchemaError,
                            "follower " + std::to_string(i + 1) + " has an invalid in-neighbour");
      }
      if (!(weights[i][k] > 0.0)) {
        throw PlanningError(ErrorCode::kSchemaError,
                            "follower " + std::to_string(i + 1) + " has a non-positive weight");
      }
      sum += weights[i][k];
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw PlanningError(ErrorCode::kSchemaError,
                          "weights of follower " + std::to_string(i + 1) + " do not sum to 1");
    }
  }
}

CommGraph compute_weights(const ReferenceFormation& ref,
                          std::span<const std::array<std::size_t, 3>> follower_neighbors) {
  const std::size_t n = ref.size();
  if (follower_neighbors.size() + 3 != n) {
    throw PlanningError(ErrorCode::kSchemaError, "one neighbour triple per follower is required");
  }
  CommGraph g;
  g.n = n;
  g.in_neighbors.assign(n, {0, 0, 0});
  g.weights.assign(n, {0.0, 0.0, 0.0});
  const auto& p = ref.positions;
  for (std::size_t i = 3; i < n; ++i) {
    const auto& nb = follower_neighbors[i - 3];
    for (const std::size_t j : nb) {
      if (j >= n || j == i) {
        throw PlanningError(ErrorCode::kSchemaError,
                            "follower " + std::to_string(i + 1) + " has an invalid in-neighbour");
      }
    }
    const Eigen::Vector3d w = omega2(p[nb[0]], p[nb[1]], p[nb[2]], p[i]);
    if (w.minCoeff() <= 0.0) {
      throw PlanningError(ErrorCode::kNotInteriorFollower,
                          "follower " + std::to_string(i + 1) +
                              " is not strictly inside its in-neighbour triangle");
    }
    g.in_neighbors[i] = nb;
    g.weights[i] = {w[0], w[1], w[2]};
  }
  return g;
}

CommMatrices build_W_and_WL(const CommGraph& graph) {
  const auto n = static_cast<Eigen::Index>(graph.n);
  CommMatrices out;
  out.w = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 3; i < n; ++i) {
    for (int k = 0; k < 3; ++k) {
      out.w(i, static_cast<Eigen::Index>(graph.in_neighbors[i][k])) += graph.weights[i][k];
    }
    out.w(i, i) -= 1.0;
  }
  Eigen::MatrixXd k = out.w;
  k.topLeftCorner(3, 3) += Eigen::Matrix3d::Identity();
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(k);
  if (!lu.isInvertible() || std::abs(lu.determinant()) <= 1e-12) {
    throw PlanningError(ErrorCode::kSingularCommunication,
                        "followers are not all reachable from the leaders");
  }
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, 3);
  rhs.topRows(3).setIdentity();
  out.w_l = lu.solve(rhs);
  return out;
}

Vec3 local_desired_position(std::size_t i, std::span<const Vec3, 3> neighbor_positions,
                            const CommGraph& graph) {
  const auto& w = graph.weights[i];
  return w[0] * neighbor_positions[0] + w[1] * neighbor_positions[1] +
         w[2] * neighbor_positions[2];
}

std::vector<Vec3> desired_positions(const Eigen::MatrixXd& w_l, const LeaderStack& y) {
  Eigen::Matrix3d leaders;  // row i = leader i
  leaders << y[0], y[3], y[6], y[1], y[4], y[7], y[2], y[5], y[8];
  const Eigen::MatrixXd all = w_l * leaders;
  std::vector<Vec3> out(static_cast<std::size_t>(all.rows()));
  for (Eigen::Index i = 0; i < all.rows(); ++i) out[i] = all.row(i).transpose();
  return out;
}

Vec3 thrust_axis(const Vec3& e) {
  const double cf = std::cos(e[0]), sf = std::sin(e[0]);
  const double ct = std::cos(e[1]), st = std::sin(e[1]);
  const double cp = std::cos(e[2]), sp = std::sin(e[2]);
  return Vec3(cp * st * cf + sp * sf, sp * st * cf - cp * sf, ct * cf);
}

namespace {

struct QuadRate {
  Vec3 r, v, euler, omega;
};

QuadRate quad_rate(const QuadState& s, const QuadInput& u, const QuadParams& p) {
  const double phi = s.euler[0];
  const double theta = s.euler[1];
  if (std::abs(theta) >= std::numbers::pi / 2 - 1e-3) {
    throw PlanningError(ErrorCode::kAttitudeSingularity, "pitch reached the Euler singularity");
  }
  // Gamma maps Euler-angle rates to body rates.
  Eigen::Matrix3d gamma;
  gamma << 1, 0, -std::sin(theta),  //
      0, std::cos(phi), std::cos(theta) * std::sin(phi),  //
      0, -std::sin(phi), std::cos(phi) * std::cos(theta);
  const Vec3 j_omega = p.inertia.cwiseProduct(s.omega);
  QuadRate d;
  d.r = s.v;
  d.v = (u.thrust / p.mass) * thrust_axis(s.euler) - Vec3(0, 0, p.gravity);
  d.euler = gamma.partialPivLu().solve(s.omega);
  d.omega = (u.torque - s.omega.cross(j_omega)).cwiseQuotient(p.inertia);
  return d;
}

QuadState advance(const QuadState& s, const QuadRate& d, double h) {
  return {s.r + h * d.r, s.v + h * d.v, s.euler + h * d.euler, s.omega + h * d.omega};
}

}  // namespace

QuadState quad_dynamics_step(const QuadState& s, const QuadInput& u, double dt,
                             const QuadParams& params) {
  const QuadRate k1 = quad_rate(s, u, params);
  const QuadRate k2 = quad_rate(advance(s, k1, 0.5 * dt), u, params);
  const QuadRate k3 = quad_rate(advance(s, k2, 0.5 * dt), u, params);
  const QuadRate k4 = quad_rate(advance(s, k3, dt), u, params);
  QuadState out = s;
  out.r += dt / 6.0 * (k1.r + 2.0 * k2.r + 2.0 * k3.r + k4.r);
  out.v += dt / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
  out.euler += dt / 6.0 * (k1.euler + 2.0 * k2.euler + 2.0 * k3.euler + k4.euler);
  out.omega += dt / 6.0 * (k1.omega + 2.0 * k2.omega + 2.0 * k3.omega + k4.omega);
  if (std::abs(out.euler[1]) >= std::numbers::pi / 2 - 1e-3) {
    throw PlanningError(ErrorCode::kAttitudeSingularity, "pitch reached the Euler singularity");
  }
  return out;
}

QuadInput tracking_controller(const QuadState& s, const Vec3& target, const Vec3& target_rate,
                              const Vec3& target_acc, const QuadParams& params,
                              const TrackingGains& gains) {
  Vec3 a = target_acc + gains.kd * (target_rate - s.v) + gains.kp * (target - s.r) +
           Vec3(0, 0, params.gravity);
  // Keep the commanded direction inside the tilt envelope.
  const double horiz = a.head<2>().norm();
  const double max_horiz = std::max(a.z(), 0.0) * std::tan(gains.max_tilt);
  if (horiz > max_horiz && horiz > 0.0) a.head<2>() *= max_horiz / horiz;

  QuadInput u;
  u.thrust = params.mass * a.norm();
  const Vec3 k = a.norm() > 0.0 ? Vec3(a / a.norm()) : Vec3(0, 0, 1);
  const Vec3 desired(std::atan2(-k.y(), std::hypot(k.x(), k.z())), std::atan2(k.x(), k.z()), 0.0);
  const Vec3 e_att = desired - s.euler;
  u.torque = params.inertia.cwiseProduct(gains.kp_att * e_att - gains.kd_att * s.omega);
  return u;
}

DeviationReport simulate_acquisition(const LeaderTrajectory& trajectory,
                                     const ReferenceFormation& ref, const CommGraph& graph,
                                     const SimulationOptions& options) {
  const CommMatrices cm = build_W_and_WL(graph);
  const std::size_t n = graph.n;
  const double t0 = trajectory.t_begin();
  const double t1 = trajectory.t_end();
  const double dt = 1.0 / options.control_rate;
  const auto ticks = static_cast<std::size_t>(std::ceil((t1 - t0) / dt - 1e-9));
  if (ref.size() != n) {
    throw PlanningError(ErrorCode::kSchemaError, "formation and graph sizes differ");
  }

  std::vector<QuadState> agents(n);
  {
    const auto p0 = desired_positions(cm.w_l, trajectory.position(t0));
    const auto v0 = desired_positions(cm.w_l, trajectory.velocity(t0));
    for (std::size_t i = 0; i < n; ++i) {
      agents[i].r = options.initial_positions ? (*options.initial_positions)[i] : p0[i];
      agents[i].v = v0[i];
    }
  }
  std::vector<Vec3> applied(n, Vec3::Zero());

  DeviationReport rep;
  rep.deviation.assign(n, {});
  rep.agent_max.assign(n, 0.0);
  rep.min_separation = std::numeric_limits<double>::infinity();
  const int substeps =
      std::max(1, static_cast<int>(std::lround(options.physics_rate / options.control_rate)));

  for (std::size_t j = 0; j <= ticks; ++j) {
    const double t = std::min(t0 + static_cast<double>(j) * dt, t1);
    const LeaderStack y = trajectory.position(t);
    const auto p = desired_positions(cm.w_l, y);

    if (options.plant == Plant::kIdeal) {
      for (std::size_t i = 0; i < n; ++i) agents[i].r = p[i];
    }
    const bool record = j % static_cast<std::size_t>(std::max(1, options.record_every)) == 0 ||
                        j == ticks;
    if (record) rep.times.push_back(t);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = (agents[i].r - p[i]).norm();
      rep.agent_max[i] = std::max(rep.agent_max[i], d);
      if (record) rep.deviation[i].push_back(d);
      for (std::size_t k = i + 1; k < n; ++k) {
        rep.min_separation = std::min(rep.min_separation, (agents[i].r - agents[k].r).norm());
      }
      if (options.center) {
        rep.max_center_distance =
            std::max(rep.max_center_distance, (p[i] - options.center(t)).norm());
      }
    }
    rep.max_leader_z_spread = std::max(
        rep.max_leader_z_spread, y.tail<3>().maxCoeff() - y.tail<3>().minCoeff());
    if (j == ticks || options.plant == Plant::kIdeal) continue;

    const LeaderStack yd = trajectory.velocity(t);
    const LeaderStack ya = trajectory.acceleration(t);
    const auto leader_rate = leader_positions(yd);
    const auto leader_acc = leader_positions(ya);
    const auto leader_pos = leader_positions(y);
    std::vector<Vec3> target(n), rate(n), acc(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (CommGraph::is_leader(i)) {
        target[i] = leader_pos[i];
        rate[i] = leader_rate[i];
        acc[i] = leader_acc[i];
        continue;
      }
      const auto& nb = graph.in_neighbors[i];
      const auto& w = graph.weights[i];
      target[i] = Vec3::Zero();
      rate[i] = Vec3::Zero();
      acc[i] = Vec3::Zero();
      for (int k = 0; k < 3; ++k) {
        target[i] += w[k] * agents[nb[k]].r;
        rate[i] += w[k] * agents[nb[k]].v;
        acc[i] += w[k] * applied[nb[k]];
      }
    }
    const double step = std::min(dt, t1 - t);
    for (std::size_t i = 0; i < n; ++i) {
      if (options.plant == Plant::kDoubleIntegrator) {
        const Vec3 a = acc[i] + options.gains.kd * (rate[i] - agents[i].v) +
                       options.gains.kp * (target[i] - agents[i].r);
        agents[i].r += step * agents[i].v + 0.5 * step * step * a;
        agents[i].v += step * a;
        applied[i] = a;
        continue;
      }
      const QuadInput u = tracking_controller(agents[i], target[i], rate[i], acc[i],
                                              options.quad, options.gains);
      applied[i] = (u.thrust / options.quad.mass) * thrust_axis(agents[i].euler) -
                   Vec3(0, 0, options.quad.gravity);
      try {
        for (int s = 0; s < substeps; ++s) {
          agents[i] = quad_dynamics_step(agents[i], u, step / substeps, options.quad);
        }
      } catch (const PlanningError&) {
        rep.diverged = true;
      }
      if (rep.diverged) break;
    }
    if (rep.diverged) break;
  }
  rep.max_deviation = rep.diverged ? std::numeric_limits<double>::infinity()
                                   : *std::max_element(rep.agent_max.begin(), rep.agent_max.end());
  rep.violated = !(rep.max_deviation <= options.delta);
  rep.final_positions.reserve(n);
  for (const auto& a : agents) rep.final_positions.push_back(a.r);
  return rep;
}

}  // namespace cdplan
