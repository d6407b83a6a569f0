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

#include "cdplan/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cdplan/errors.hpp"

namespace cdplan {

namespace {

template <typename F>
auto staged(const char* stage, F&& f) {
  try {
    return f();
  } catch (const PlanningError& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(stage);
  }
}

SafetyRow row(std::string name, std::string description, double value, double limit,
              double margin) {
  return {std::move(name), std::move(description), value, limit, margin,
          margin >= -kMarginSlack};
}

LeaderStack sample_stack(const LeaderSample& s) {
  LeaderStack y;
  y << s.x.head<6>(), s.z, s.z, s.z;
  return y;
}

double max_sigma1(const LeaderTrajectory& traj, const ReferenceFormation& ref) {
  double worst = 0.0;
  for (const auto& s : traj.samples()) {
    const PlanarAffine a = leaders_to_params(sample_stack(s), ref);
    worst = std::max(worst, polar_decompose(a.q_xy).sigma1);
  }
  return worst;
}

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double u = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + u * ab)).norm();
}

// Ball center: the translation of the desired affine map.
Vec3 ball_center(const LeaderTrajectory& traj, const ReferenceFormation& ref, double t) {
  return leaders_to_params(traj.position(t), ref).s;
}

// Smallest distance from the ball centers along the trajectory samples to any
// obstacle cell.
double min_obstacle_distance(const Scenario& s, const LeaderTrajectory& traj) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& smp : traj.samples()) {
    const Vec3 d = leaders_to_params(sample_stack(smp), s.formation).s;
    for (const auto& poly : s.obstacles.polytopes) {
      for (const auto& cell : poly.cells) best = std::min(best, distance_to_tetrahedron(cell, d));
    }
  }
  return best;
}

void deviation_rows(const Scenario& s, const LeaderTrajectory& traj, RunReport& r) {
  const double min_sep = r.deviation.min_separation;
  r.safety.push_back(row("c2", "min pairwise distance of actual positions exceeds 2 epsilon",
                         min_sep, 2.0 * s.safety.epsilon, min_sep - 2.0 * s.safety.epsilon));
  const double spread = r.deviation.max_leader_z_spread;
  r.safety.push_back(
      row("c3", "leaders share the altitude d_z(t)", spread, 1e-9, 1e-9 - spread));
  const double reach = r.deviation.max_center_distance;
  r.obstacle_clearance = min_obstacle_distance(s, traj) - s.safety.r_max;
  r.safety.push_back(row("c4",
                         "desired positions inside the containment ball, ball clear of obstacles",
                         reach, s.safety.r_max,
                         std::min(s.safety.r_max - reach, r.obstacle_clearance)));
}

}  // namespace

bool RunReport::all_pass() const {
  return !deviation.violated &&
         std::all_of(safety.begin(), safety.end(), [](const SafetyRow& r) { return r.pass; });
}

AstarStage run_astar(const Scenario& s) {
  return staged("astar", [&] {
    const FreeSet free(s.grid, s.safety.r_max, s.obstacles, s.validity);
    const auto start = s.grid.lattice_index(s.start);
    const auto goal = s.grid.lattice_index(s.goal);
    if (!start || !goal) {
      throw PlanningError(ErrorCode::kInvalidEndpoint, "endpoints are not grid nodes");
    }
    AstarStage out;
    out.path = astar(*start, *goal, s.grid, free.passability());
    out.waypoints = compress_waypoints(out.path);
    out.evaluated_nodes = free.evaluated();
    return out;
  });
}

RunReport run_pipeline(const Scenario& s) {
  RunReport r;
  r.scenario_name = s.name;
  r.delta = s.safety.delta;
  r.sigma_max = safety_sigma_max(s.safety);
  r.area_form_start = s.safety.A_s;

  AstarStage a = run_astar(s);
  r.path = std::move(a.path);
  r.waypoints = std::move(a.waypoints);
  if (r.waypoints.size() < 2) {
    throw PlanningError(ErrorCode::kZeroLengthPath, "start and goal coincide", "deformation");
  }

  staged("deformation", [&] {
    r.betas = beta_schedule(r.waypoints);
    r.configs = intermediate_leader_configs(r.waypoints, s.final_params, s.formation);
    for (const auto& y : r.configs) {
      DeformationParams p = polar_decompose(leaders_to_params(y, s.formation).q_xy);
      p.s = leaders_to_params(y, s.formation).s;
      r.config_params.push_back(p);
    }
    return 0;
  });

  std::vector<LeaderState> states;
  std::vector<double> z;
  for (const auto& y : r.configs) {
    states.push_back(leader_state(y));
    z.push_back(y[6]);
  }
  const ConstraintModel& model = s.solver.model;
  r.conserved_form = model.form(states.front().head<6>());

  const auto simulate = [&](const std::vector<SegmentSolution>& segs) {
    SimulationOptions opt = s.simulation;
    opt.record_every = std::numeric_limits<int>::max();
    const LeaderTrajectory traj = LeaderTrajectory::from_segments(segs, z);
    return simulate_acquisition(traj, s.formation, s.graph, opt).max_deviation;
  };

  staged("optimal-control", [&] {
    for (std::size_t k = 0; k < states.size(); ++k) {
      const double f = model.form(states[k].head<6>());
      if (std::abs(f - r.conserved_form) > 1e-6 * std::max(1.0, std::abs(r.conserved_form))) {
        std::ostringstream msg;
        msg << "waypoint configuration " << k << " changes the conserved area form ("
            << f << " vs " << r.conserved_form << ")";
        throw PlanningError(ErrorCode::kInfeasibleScenario, msg.str());
      }
    }
    r.plan = assign_travel_time(states, r.betas, simulate, s.safety.delta, s.timing, s.solver);
    for (std::size_t k = 0; k < r.plan.segments.size(); ++k) {
      const auto& seg = r.plan.segments[k];
      SegmentDiagnostics d;
      d.boundary_error_start = (seg.states.front() - states[k]).cwiseAbs().maxCoeff();
      d.boundary_error_end = (seg.states.back() - states[k + 1]).cwiseAbs().maxCoeff();
      d.max_constraint_residual = seg.max_constraint_residual(model);
      d.stationarity_residual = seg.stationarity_residual(model);
      d.effort = seg.effort();
      r.diagnostics.push_back(d);
    }
    return 0;
  });

  staged("acquisition", [&] {
    r.trajectory = LeaderTrajectory::from_segments(r.plan.segments, z);
    SimulationOptions opt = s.simulation;
    const LeaderTrajectory& traj = *r.trajectory;
    opt.center = [&](double t) { return ball_center(traj, s.formation, t); };
    r.deviation = simulate_acquisition(traj, s.formation, s.graph, opt);
    for (const auto& smp : traj.samples()) {
      const Vec3 d = leaders_to_params(sample_stack(smp), s.formation).s;
      double off = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k + 1 < r.waypoints.size(); ++k) {
        off = std::min(off, point_segment_distance(d, r.waypoints[k], r.waypoints[k + 1]));
      }
      r.max_path_offset = std::max(r.max_path_offset, off);
    }
    return 0;
  });

  double drift = 0.0;
  for (const auto& smp : r.trajectory->samples()) {
    drift = std::max(drift, std::abs(model.form(smp.x.head<6>()) - r.conserved_form));
  }
  const double limit = 1e-4 * std::abs(r.conserved_form);
  r.safety.push_back(row("c1", "leader-triangle form stays at A_s (relative 1e-4)", drift,
                         limit, limit - drift));
  deviation_rows(s, *r.trajectory, r);
  const double sigma = staged("acquisition", [&] { return max_sigma1(*r.trajectory, s.formation); });
  r.safety.push_back(row("sigma_bound", "largest deformation eigenvalue within d_min/(2(delta+epsilon))",
                         sigma, r.sigma_max, r.sigma_max - sigma));
  return r;
}

RunReport simulate_only(const Scenario& s, const LeaderTrajectory& trajectory) {
  RunReport r;
  r.scenario_name = s.name;
  r.delta = s.safety.delta;
  r.sigma_max = safety_sigma_max(s.safety);
  r.area_form_start = s.safety.A_s;
  staged("acquisition", [&] {
    SimulationOptions opt = s.simulation;
    opt.center = [&](double t) { return ball_center(trajectory, s.formation, t); };
    r.deviation = simulate_acquisition(trajectory, s.formation, s.graph, opt);
    return 0;
  });
  deviation_rows(s, trajectory, r);
  return r;
}

}  // namespace cdplan
