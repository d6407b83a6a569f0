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

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cdplan/deformation.hpp"

namespace cdplan {

using Vector6d = Eigen::Matrix<double, 6, 1>;
/// (x1, x2, x3, y1, y2, y3) followed by their rates.
using LeaderState = Eigen::Matrix<double, 12, 1>;
using Matrix12d = Eigen::Matrix<double, 12, 12>;
using Matrix24d = Eigen::Matrix<double, 24, 24>;
using Vector24d = Eigen::Matrix<double, 24, 1>;

/// Quintic blend 6s^5 - 15s^4 + 10s^3 with s = (t - t_k) / (t_k1 - t_k),
/// clamped outside [t_k, t_k1].
double smoothstep(double t, double t_k, double t_k1);
double smoothstep_rate(double t, double t_k, double t_k1);
double smoothstep_accel(double t, double t_k, double t_k1);

/// Shared leader altitude on segment k of the schedule.
double z_trajectory(double t, std::size_t k, std::span<const double> times,
                    std::span<const double> d_z);

/// 6x6 matrix P of the leader-triangle quadratic form.
Matrix6d area_matrix();
/// Psi = O^T P^T P O acting on a 9-vector leader stack.
Eigen::Matrix<double, 9, 9> area_psi();
/// y^T Psi y, equal to 1/16 of the sum of squared pairwise planar coordinate
/// differences of the leaders.
double area_form(const LeaderStack& y);

/// Quadratic form A(q) = q^T M q conserved by the segment solver, with M
/// symmetric. `printed()` uses M = P^T P, `signed_area()` uses the symmetric
/// part of P, for which q^T M q is the signed area of the leading triangle.
struct ConstraintModel {
  Matrix6d m = Matrix6d::Zero();

  static ConstraintModel printed();
  static ConstraintModel signed_area();

  double form(const Vector6d& q) const { return q.dot(m * q); }
  Matrix12d gamma_xx() const;
  Eigen::Matrix<double, 12, 6> gamma_xu() const;
};

LeaderState leader_state(const LeaderStack& y, const Vector6d& rates = Vector6d::Zero());
Vector6d planar_positions(const LeaderStack& y);

/// Second time derivative of A along q'' = u: 2 q'^T M q' + 2 q^T M u.
double constraint_value(const LeaderState& x, const Vector6d& u,
                        const ConstraintModel& model = ConstraintModel::printed());

/// Multiplier making the optimal input satisfy the constraint.
/// Throws DegenerateConstraint when 4 x^T Gxu Gxu^T x <= 1e-12.
double gamma_multiplier(const LeaderState& x, const LeaderState& lambda,
                        const ConstraintModel& model = ConstraintModel::printed());

/// u = -B^T lambda - 2 gamma Gxu^T x
Vector6d optimal_input(const LeaderState& x, const LeaderState& lambda, double gamma,
                       const ConstraintModel& model = ConstraintModel::printed());

Matrix24d assemble_system(double gamma,
                          const ConstraintModel& model = ConstraintModel::printed());

using GammaFn = std::function<double(double)>;

/// Phi(t, t_k) from Phi' = A(gamma(t)) Phi by fixed-step RK4.
Matrix24d integrate_stm(double t_k, double t, const GammaFn& gamma, int steps = 200,
                        const ConstraintModel& model = ConstraintModel::printed());

struct SolverOptions {
  int samples = 200;  // RK4 steps and gamma grid intervals per segment
  int max_iterations = 50;
  double damping = 0.5;
  double eps_gamma = 1e-6;
  /// Relative step-doubling error above which StepSizeTooCoarse is raised.
  double stm_tolerance = 1e-6;
  double boundary_tolerance = 1e-6;
  ConstraintModel model = ConstraintModel::signed_area();
};

struct SegmentSolution {
  std::vector<double> times;
  std::vector<LeaderState> states;
  std::vector<LeaderState> costates;
  std::vector<Vector6d> inputs;
  std::vector<double> multiplier;
  int iterations = 0;
  /// Last max |gamma' - gamma| relative to max |gamma'|, after removing its
  /// best linear fit.
  double gamma_error = 0.0;
  /// Last max |gamma' - gamma| relative to max |gamma'|.
  double gamma_error_raw = 0.0;
  double transition_condition = 0.0;

  double t_begin() const { return times.front(); }
  double t_end() const { return times.back(); }
  /// 0.5 * integral of u^T u (composite Simpson).
  double effort() const;
  /// Max over samples of |constraint_value(x, u)|.
  double max_constraint_residual(const ConstraintModel& model) const;
  /// Max over interior samples of |lambda' + A_L^T lambda + gamma dc/dx|
  /// with lambda' from fourth-order central differences.
  double stationarity_residual(const ConstraintModel& model) const;
};

/// Minimum-effort leader motion between two boundary states under the
/// conserved quadratic form. Throws SingularTransition, NoConvergence,
/// StepSizeTooCoarse.
SegmentSolution solve_segment(const LeaderState& x_k, const LeaderState& x_k1, double t_k,
                              double t_k1, const SolverOptions& options = {});

/// The same solution mapped onto [t_k, t_k1]. Exact for this problem family:
/// rates scale by c, inputs and gamma by c^2, costates by c^2 and c^3.
SegmentSolution rescale_segment(const SegmentSolution& seg, double t_k, double t_k1);

struct TimingResult {
  double t_u = 0.0;
  std::vector<double> segment_times;
  double max_deviation = 0.0;
  int probes = 0;
};

struct TimingOptions {
  double t_s = 0.0;
  double T_min = 1.0;
  double T_max = 1000.0;
  double eps_T = 1.0;
};

/// t_k = (1 - beta_k) t_s + beta_k t_u
std::vector<double> segment_times(std::span<const double> betas, double t_s, double t_u);

/// Bisection on t_u against deviation(t_u) <= delta. Returns the smallest
/// accepted t_u once T_max - T_min < eps_T. Throws Infeasible if T_max fails.
TimingResult bisect_travel_time(const std::function<double(double)>& deviation, double delta,
                                const TimingOptions& options);

struct LeaderPlan {
  std::vector<SegmentSolution> segments;
  TimingResult timing;
};

/// Travel-time assignment: segments are solved once on the T_max schedule and
/// rescaled for every probe; `deviation` returns e_T for a candidate plan.
LeaderPlan assign_travel_time(std::span<const LeaderState> waypoint_states,
                              std::span<const double> betas,
                              const std::function<double(const std::vector<SegmentSolution>&)>&
                                  deviation,
                              double delta, const TimingOptions& timing,
                              const SolverOptions& solver = {});

}  // namespace cdplan
