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
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cdplan/deformation.hpp"
#include "cdplan/trajectory.hpp"

namespace cdplan {

/// Leader-follower communication graph. Agents 0..2 are leaders; every
/// follower averages three in-neighbours.
struct CommGraph {
  std::size_t n = 0;
  /// Indexed by agent; leader entries are unused.
  std::vector<std::array<std::size_t, 3>> in_neighbors;
  std::vector<std::array<double, 3>> weights;

  static bool is_leader(std::size_t i) { return i < 3; }
  /// Throws SchemaError on malformed neighbour lists or weights.
  void validate() const;
};

/// Weights are the barycentric coordinates of each follower's reference
/// position in its in-neighbour triangle. `follower_neighbors[f]` lists the
/// in-neighbours of agent f + 3. Throws NotInteriorFollower.
CommGraph compute_weights(const ReferenceFormation& ref,
                          std::span<const std::array<std::size_t, 3>> follower_neighbors);

struct CommMatrices {
  /// N x N: follower rows hold w_ij and -1 on the diagonal, leader rows are 0.
  Eigen::MatrixXd w;
  /// N x 3 map from leader positions to all desired positions.
  Eigen::MatrixXd w_l;
};

/// W_L = K^{-1} [I3; 0] with K = W + diag(I3, 0), i.e. leaders pinned and
/// followers at their weighted neighbour average. Throws SingularCommunication.
CommMatrices build_W_and_WL(const CommGraph& graph);

/// Weighted in-neighbour average for a follower.
Vec3 local_desired_position(std::size_t i, std::span<const Vec3, 3> neighbor_positions,
                            const CommGraph& graph);

/// Desired positions of all agents for a leader stack.
std::vector<Vec3> desired_positions(const Eigen::MatrixXd& w_l, const LeaderStack& y);

struct QuadState {
  Vec3 r = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 euler = Vec3::Zero();  // roll, pitch, yaw (ZYX), rad
  Vec3 omega = Vec3::Zero();  // body rates, rad/s
};

struct QuadParams {
  double mass = 1.0;
  Vec3 inertia = Vec3(0.0082, 0.0082, 0.0148);
  double gravity = 9.81;
};

struct QuadInput {
  double thrust = 0.0;
  Vec3 torque = Vec3::Zero();
};

/// Body z axis for ZYX Euler angles.
Vec3 thrust_axis(const Vec3& euler);

/// One RK4 step of the rigid-body quadcopter model. Throws
/// AttitudeSingularity when |pitch| reaches pi/2 - 1e-3.
QuadState quad_dynamics_step(const QuadState& s, const QuadInput& u, double dt,
                             const QuadParams& params = {});

struct TrackingGains {
  double kp = 4.0;
  double kd = 4.0;
  double kp_att = 60.0;
  double kd_att = 15.0;
  double max_tilt = 0.7;  // rad
};

/// Cascaded position/attitude tracking law. The commanded acceleration sets
/// thrust and the desired tilt (yaw held at zero); attitude errors are closed
/// with a PD torque.
QuadInput tracking_controller(const QuadState& s, const Vec3& target, const Vec3& target_rate,
                              const Vec3& target_acc, const QuadParams& params = {},
                              const TrackingGains& gains = {});

enum class Plant { kIdeal, kDoubleIntegrator, kQuadcopter };

struct SimulationOptions {
  Plant plant = Plant::kDoubleIntegrator;
  double control_rate = 100.0;  // Hz
  double physics_rate = 1000.0;  // Hz, quadcopter only
  double delta = 1.0;
  double epsilon = 0.0;
  TrackingGains gains;
  QuadParams quad;
  /// Keep every n-th control tick in the deviation series.
  int record_every = 1;
  /// Start positions (default: desired positions at t_begin).
  std::optional<std::vector<Vec3>> initial_positions;
  /// Containment-ball center; when set, max desired distance from it is reported.
  std::function<Vec3(double)> center;
};

struct DeviationReport {
  std::vector<double> times;
  /// deviation[i][j]: agent i at times[j].
  std::vector<std::vector<double>> deviation;
  std::vector<double> agent_max;
  double max_deviation = 0.0;
  bool violated = false;
  /// Smallest actual pairwise distance over the run.
  double min_separation = 0.0;
  /// Largest distance of a desired position from the ball center.
  double max_center_distance = 0.0;
  /// Largest altitude spread of the leaders' desired positions.
  double max_leader_z_spread = 0.0;
  /// Plant became numerically unusable (attitude singularity).
  bool diverged = false;
  /// Actual positions at the final tick.
  std::vector<Vec3> final_positions;
};

DeviationReport simulate_acquisition(const LeaderTrajectory& trajectory,
                                     const ReferenceFormation& ref, const CommGraph& graph,
                                     const SimulationOptions& options);

}  // namespace cdplan
