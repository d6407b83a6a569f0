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

#include <numbers>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "cdplan/errors.hpp"
#include "cdplan/optimal_control.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cdplan;

namespace {

ReferenceFormation desk_formation() {
  cdplan::LoadOptions opt;
  opt.check_endpoints = false;
  return load_scenario(oracle::scenario_path("desk_scale.json"), opt).formation;
}

/// 1/16 of the sum of squared pairwise planar coordinate differences.
double pairwise_form(const LeaderStack& y) {
  double sum = 0.0;
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < 3; ++i) {
      for (int j = i + 1; j < 3; ++j) {
        const double d = y[3 * c + i] - y[3 * c + j];
        sum += d * d;
      }
    }
  }
  return sum / 16.0;
}

LeaderState config_state(const DeformationParams& p, const Vec3& center,
                         const ReferenceFormation& ref) {
  return leader_state(deformed_leaders(p, center, ref));
}

DeformationParams unimodular(double sigma1, double theta_d, double theta_r = 0.0) {
  DeformationParams p;
  p.sigma1 = sigma1;
  p.sigma2 = 1.0 / sigma1;
  p.theta_d = theta_d;
  p.theta_r = theta_r;
  return p;
}

}  // namespace

TEST_CASE("smoothstep examples") {
  CHECK(smoothstep(2.0, 2.0, 6.0) == 0.0);
  CHECK(smoothstep(6.0, 2.0, 6.0) == 1.0);
  CHECK(smoothstep(4.0, 2.0, 6.0) == doctest::Approx(0.5).epsilon(1e-15));
  for (double t : {2.0, 6.0}) {
    CHECK(std::abs(smoothstep_rate(t, 2.0, 6.0)) < 1e-15);
    CHECK(std::abs(smoothstep_accel(t, 2.0, 6.0)) < 1e-15);
  }
  // Derivatives agree with central differences.
  const double h = 1e-5;
  for (double t = 2.3; t < 6.0; t += 0.37) {
    const double fd1 = (smoothstep(t + h, 2, 6) - smoothstep(t - h, 2, 6)) / (2 * h);
    const double fd2 =
        (smoothstep_rate(t + h, 2, 6) - smoothstep_rate(t - h, 2, 6)) / (2 * h);
    CHECK(std::abs(fd1 - smoothstep_rate(t, 2, 6)) < 1e-8);
    CHECK(std::abs(fd2 - smoothstep_accel(t, 2, 6)) < 1e-8);
    CHECK(smoothstep(t, 2, 6) >= 0.0);
    CHECK(smoothstep(t, 2, 6) <= 1.0);
  }
}

TEST_CASE("z_trajectory examples") {
  const std::vector<double> times{0.0, 10.0, 25.0};
  const std::vector<double> dz{43.0, 50.0, 50.0};
  CHECK(z_trajectory(0.0, 0, times, dz) == 43.0);
  CHECK(z_trajectory(5.0, 0, times, dz) == doctest::Approx(46.5).epsilon(1e-15));
  CHECK(z_trajectory(12.0, 1, times, dz) == 50.0);
  CHECK(z_trajectory(20.0, 1, times, dz) == 50.0);

  // Second derivative matches from both sides of the joint.
  const std::vector<double> dz2{43.0, 50.0, 36.0};
  const double h = 1e-3;
  auto z = [&](double t) { return z_trajectory(t, t < 10.0 ? 0 : 1, times, dz2); };
  // Second-order one-sided stencils.
  auto one_sided = [&](double sgn) {
    return (2 * z(10.0) - 5 * z(10.0 + sgn * h) + 4 * z(10.0 + 2 * sgn * h) -
            z(10.0 + 3 * sgn * h)) /
           (h * h);
  };
  CHECK(std::abs(one_sided(-1.0) - one_sided(1.0)) < 1e-6);
}

TEST_CASE("area_form examples") {
  CHECK(area_form(leader_stack(Vec3(2, 3, 4), Vec3(2, 3, 4), Vec3(2, 3, 4))) == 0.0);
  const LeaderStack y = leader_stack(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0));
  CHECK(area_form(y) == doctest::Approx(pairwise_form(y)).epsilon(1e-15));
  CHECK(area_form(y) == doctest::Approx(0.25).epsilon(1e-15));

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int trial = 0; trial < 200; ++trial) {
    LeaderStack r;
    for (int i = 0; i < 9; ++i) r[i] = u(rng);
    const Vec3 s(u(rng), u(rng), u(rng));
    LeaderStack shifted = r;
    for (int c = 0; c < 3; ++c) shifted.segment<3>(3 * c).array() += s[c];
    CHECK(area_form(r) == doctest::Approx(pairwise_form(r)).epsilon(1e-12));
    CHECK(area_form(shifted) == doctest::Approx(area_form(r)).epsilon(1e-10));
  }
}

TEST_CASE("signed-area model gives the triangle area") {
  const auto m = ConstraintModel::signed_area();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int trial = 0; trial < 100; ++trial) {
    LeaderStack y;
    for (int i = 0; i < 9; ++i) y[i] = u(rng);
    CHECK(m.form(planar_positions(y)) ==
          doctest::Approx(triangle_signed_area(y)).epsilon(1e-12));
  }
  CHECK((m.m - m.m.transpose()).norm() == 0.0);
  const auto p = ConstraintModel::printed();
  CHECK((p.m - area_matrix().transpose() * area_matrix()).norm() == 0.0);
}

TEST_CASE("constraint_value examples and finite differences") {
  for (const auto& model : {ConstraintModel::printed(), ConstraintModel::signed_area()}) {
    LeaderState x = LeaderState::Zero();
    x.head<6>() << 0, 3, 1, 0, 0, 2;
    CHECK(constraint_value(x, Vector6d::Zero(), model) == 0.0);
    x.tail<6>() << 1.5, 1.5, 1.5, -0.7, -0.7, -0.7;
    CHECK(std::abs(constraint_value(x, Vector6d::Zero(), model)) < 1e-14);

    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int trial = 0; trial < 100; ++trial) {
      Vector6d q, v, acc;
      for (int i = 0; i < 6; ++i) {
        q[i] = u(rng);
        v[i] = u(rng);
        acc[i] = u(rng);
      }
      auto a = [&](double t) {
        const Vector6d qt = q + v * t + 0.5 * acc * t * t;
        return model.form(qt);
      };
      // A(t) is quartic, so one Richardson step removes the truncation error.
      auto d2 = [&](double h) { return (a(h) - 2 * a(0) + a(-h)) / (h * h); };
      const double fd = (4 * d2(5e-3) - d2(1e-2)) / 3;
      LeaderState xs;
      xs << q, v;
      const double c = constraint_value(xs, acc, model);
      CHECK(std::abs(fd - c) <= 1e-6 * std::max(1.0, std::abs(c)));
    }
  }
}

TEST_CASE("gamma_multiplier examples") {
  const auto model = ConstraintModel::signed_area();
  LeaderState x = leader_state(leader_stack(Vec3(0, 0, 0), Vec3(2, 0, 0), Vec3(0, 2, 0)));
  CHECK(gamma_multiplier(x, LeaderState::Zero(), model) == 0.0);

  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-2, 2);
  for (const auto& m : {ConstraintModel::printed(), model}) {
    for (int trial = 0; trial < 100; ++trial) {
      LeaderState xs, lam;
      for (int i = 0; i < 12; ++i) {
        xs[i] = u(rng);
        lam[i] = u(rng);
      }
      double g = 0.0;
      try {
        g = gamma_multiplier(xs, lam, m);
      } catch (const PlanningError&) {
        continue;
      }
      const Vector6d uu = optimal_input(xs, lam, g, m);
      CHECK(std::abs(constraint_value(xs, uu, m)) < 1e-9 * (1 + lam.norm() * xs.norm()));
    }
  }

  const LeaderState same = leader_state(leader_stack(Vec3(1, 1, 0), Vec3(1, 1, 0), Vec3(1, 1, 0)));
  try {
    gamma_multiplier(same, LeaderState::Ones(), model);
    FAIL("expected DegenerateConstraint");
  } catch (const PlanningError& e) {
    CHECK(e.code() == ErrorCode::kDegenerateConstraint);
  }
}

TEST_CASE("assemble_system structure") {
  const Matrix24d a0 = assemble_system(0.0);
  Matrix12d al = Matrix12d::Zero();
  al.topRightCorner<6, 6>().setIdentity();
  Eigen::Matrix<double, 12, 6> bl = Eigen::Matrix<double, 12, 6>::Zero();
  bl.bottomRows<6>().setIdentity();
  CHECK((a0.topLeftCorner<12, 12>() - al).norm() == 0.0);
  CHECK((a0.topRightCorner<12, 12>() + bl * bl.transpose()).norm() == 0.0);
  CHECK(a0.bottomLeftCorner<12, 12>().norm() == 0.0);
  CHECK((a0.bottomRightCorner<12, 12>() + a0.topLeftCorner<12, 12>().transpose()).norm() == 0.0);

  const auto model = ConstraintModel::signed_area();
  const Matrix24d a1 = assemble_system(0.7, model);
  CHECK((a1 - a0).norm() > 0.0);
}

TEST_CASE("integrate_stm against the matrix exponential") {
  const Matrix24d id = integrate_stm(3.0, 3.0, [](double) { return 0.0; });
  CHECK((id - Matrix24d::Identity()).norm() == 0.0);

  for (double g : {0.0, 0.05, -0.1}) {
    const auto model = ConstraintModel::signed_area();
    const Matrix24d a = assemble_system(g, model);
    const Matrix24d ref = (a * 2.0).exp();
    const Matrix24d phi = integrate_stm(1.0, 3.0, [g](double) { return g; }, 200, model);
    CHECK((phi - ref).cwiseAbs().maxCoeff() < 1e-8 * std::max(1.0, ref.cwiseAbs().maxCoeff()));
  }

  const GammaFn wavy = [](double t) { return 0.05 * std::sin(t); };
  const Matrix24d p20 = integrate_stm(0.0, 2.0, wavy, 400);
  const Matrix24d p21 = integrate_stm(1.0, 2.0, wavy, 200);
  const Matrix24d p10 = integrate_stm(0.0, 1.0, wavy, 200);
  CHECK((p20 - p21 * p10).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("stationary segment") {
  const auto ref = desk_formation();
  const LeaderState x = config_state(unimodular(1.1, 0.3), Vec3(5, 5, 5), ref);
  const SegmentSolution seg = solve_segment(x, x, 0.0, 10.0);
  for (std::size_t j = 0; j < seg.times.size(); ++j) {
    CHECK(seg.inputs[j].norm() < 1e-12);
    CHECK(std::abs(seg.multiplier[j]) < 1e-12);
    CHECK((seg.states[j] - x).norm() < 1e-12);
  }
}

TEST_CASE("translation segment matches the cubic minimum-effort solution") {
  const auto ref = desk_formation();
  const auto p = unimodular(1.15, -0.5, 0.2);
  const LeaderState a = config_state(p, Vec3(10, 20, 5), ref);
  const LeaderState b = config_state(p, Vec3(40, 5, 5), ref);
  const double t0 = 3.0, t1 = 15.0, tt = t1 - t0;
  const SegmentSolution seg = solve_segment(a, b, t0, t1);
  const Vector6d disp = b.head<6>() - a.head<6>();
  const double expected = oracle::cubic_lq_effort(disp, tt);
  CHECK(std::abs(seg.effort() - expected) <= 1e-6 * expected);
  for (std::size_t j = 0; j < seg.times.size(); ++j) {
    CHECK(std::abs(seg.multiplier[j]) < 1e-9);
    const double s = (seg.times[j] - t0) / tt;
    const Vector6d cubic = a.head<6>() + (3 * s * s - 2 * s * s * s) * disp;
    CHECK((seg.states[j].head<6>() - cubic).norm() < 1e-6);
  }
}

TEST_CASE("shape-changing segment against direct collocation") {
  const auto ref = desk_formation();
  const LeaderState a = config_state(unimodular(1.0, 0.0), Vec3(10, 10, 5), ref);
  const LeaderState b = config_state(unimodular(1.2, -0.6, 0.4), Vec3(25, 18, 5), ref);
  SolverOptions opt;
  const SegmentSolution seg = solve_segment(a, b, 0.0, 12.0, opt);
  CHECK(seg.iterations <= opt.max_iterations);
  CHECK(seg.gamma_error < opt.eps_gamma);
  CHECK((seg.states.front() - a).norm() < 1e-6);
  CHECK((seg.states.back() - b).norm() < 1e-6);
  CHECK(seg.max_constraint_residual(opt.model) < 1e-5);
  CHECK(seg.stationarity_residual(opt.model) < 1e-5);
  const double area = opt.model.form(a.head<6>());
  for (const auto& x : seg.states) CHECK(std::abs(opt.model.form(x.head<6>()) - area) < 1e-4 * area);

  const double direct = oracle::collocation_effort(a.head<6>(), b.head<6>(), 12.0, opt.model.m);
  MESSAGE("solver effort " << seg.effort() << ", collocation " << direct);
  CHECK(std::abs(seg.effort() - direct) < 0.05 * direct);
}

TEST_CASE("printed-form segment conserves the printed form") {
  // Equilateral leaders: the printed form depends on sigma1^2 + sigma2^2 only.
  const double r = 6.0;
  ReferenceFormation ref{{Vec3(0, r, 0), Vec3(-r * std::sqrt(3.0) / 2, -r / 2, 0),
                          Vec3(r * std::sqrt(3.0) / 2, -r / 2, 0)}};
  DeformationParams p;
  p.sigma1 = 1.1;
  p.sigma2 = std::sqrt(2.0 - 1.21);
  p.theta_d = 0.5;
  const LeaderState a = config_state(DeformationParams{}, Vec3(0, 0, 5), ref);
  const LeaderState b = config_state(p, Vec3(12, 4, 5), ref);
  SolverOptions opt;
  opt.model = ConstraintModel::printed();
  CHECK(area_form(deformed_leaders(p, Vec3::Zero(), ref)) ==
        doctest::Approx(area_form(deformed_leaders({}, Vec3::Zero(), ref))).epsilon(1e-12));
  const SegmentSolution seg = solve_segment(a, b, 0.0, 8.0, opt);
  const double a_s = opt.model.form(a.head<6>());
  for (const auto& x : seg.states) CHECK(std::abs(opt.model.form(x.head<6>()) - a_s) < 1e-4 * a_s);
  CHECK((seg.states.back() - b).norm() < 1e-6);
}

TEST_CASE("solver errors") {
  const auto ref = desk_formation();
  const LeaderState a = config_state(unimodular(1.0, 0.0), Vec3(10, 10, 5), ref);
  const LeaderState b = config_state(unimodular(1.2, -0.6, 0.4), Vec3(25, 18, 5), ref);
  SolverOptions opt;
  opt.max_iterations = 2;
  try {
    solve_segment(a, b, 0.0, 12.0, opt);
    FAIL("expected NoConvergence");
  } catch (const PlanningError& e) {
    CHECK(e.code() == ErrorCode::kNoConvergence);
  }
}

TEST_CASE("rescaled segments equal direct solves") {
  const auto ref = desk_formation();
  const LeaderState a = config_state(unimodular(1.0, 0.0), Vec3(10, 10, 5), ref);
  const LeaderState b = config_state(unimodular(1.15, -0.6, 0.2), Vec3(22, 18, 5), ref);
  const SegmentSolution base = solve_segment(a, b, 0.0, 40.0);
  const SegmentSolution scaled = rescale_segment(base, 5.0, 15.0);
  const SegmentSolution direct = solve_segment(a, b, 5.0, 15.0);
  REQUIRE(scaled.times.size() == direct.times.size());
  CHECK(scaled.times.front() == 5.0);
  CHECK(scaled.times.back() == 15.0);
  for (std::size_t j = 0; j < direct.times.size(); ++j) {
    CHECK((scaled.states[j] - direct.states[j]).norm() < 1e-5);
    CHECK((scaled.inputs[j] - direct.inputs[j]).norm() < 1e-4);
  }
  CHECK(scaled.effort() == doctest::Approx(direct.effort()).epsilon(1e-4));
  CHECK(scaled.effort() == doctest::Approx(base.effort() * 64.0).epsilon(1e-12));
}

TEST_CASE("segment_times and bisection") {
  const std::vector<double> betas{0.0, 0.25, 1.0};
  const auto t = segment_times(betas, 2.0, 10.0);
  CHECK(t == std::vector<double>{2.0, 4.0, 10.0});

  TimingOptions opt;
  opt.T_min = 10.0;
  opt.T_max = 100.0;
  opt.eps_T = 0.5;
  auto zero = bisect_travel_time([](double) { return 0.0; }, 1.0, opt);
  CHECK(zero.t_u >= opt.T_min);
  CHECK(zero.t_u <= opt.T_min + opt.eps_T);

  const double t_star = 37.3;
  auto crossing = bisect_travel_time([&](double tu) { return t_star / tu; }, 1.0, opt);
  CHECK(crossing.t_u >= t_star);
  CHECK(crossing.t_u - t_star < opt.eps_T);
  CHECK(crossing.max_deviation <= 1.0);

  try {
    bisect_travel_time([](double) { return 2.0; }, 1.0, opt);
    FAIL("expected Infeasible");
  } catch (const PlanningError& e) {
    CHECK(e.code() == ErrorCode::kInfeasible);
  }
}

TEST_CASE("assign_travel_time uses the bisection result") {
  const auto ref = desk_formation();
  const std::vector<LeaderState> states{config_state(unimodular(1.0, 0.0), Vec3(0, 0, 5), ref),
                                        config_state(unimodular(1.1, -0.3), Vec3(20, 0, 5), ref),
                                        config_state(unimodular(1.2, -0.6), Vec3(20, 30, 5), ref)};
  const std::vector<double> betas{0.0, 0.4, 1.0};
  TimingOptions timing;
  timing.T_min = 5.0;
  timing.T_max = 200.0;
  timing.eps_T = 0.25;
  // Synthetic deviation: peak input magnitude in units of a 1 m/s^2 budget.
  auto dev = [](const std::vector<SegmentSolution>& segs) {
    double peak = 0.0;
    for (const auto& s : segs)
      for (const auto& u : s.inputs) peak = std::max(peak, u.cwiseAbs().maxCoeff());
    return peak;
  };
  const LeaderPlan plan = assign_travel_time(states, betas, dev, 1.0, timing);
  CHECK(plan.timing.t_u > timing.T_min);
  CHECK(dev(plan.segments) <= 1.0);
  const auto times = segment_times(betas, 0.0, plan.timing.t_u);
  CHECK(plan.timing.segment_times == times);
  for (std::size_t k = 0; k < plan.segments.size(); ++k) {
    CHECK(plan.segments[k].t_begin() == times[k]);
    CHECK(plan.segments[k].t_end() == times[k + 1]);
  }
  // Input scales as 1/t_u^2, so the crossing is known in closed form.
  const double peak = dev(plan.segments);
  const double t_star = plan.timing.t_u * std::sqrt(peak);
  CHECK(plan.timing.t_u - t_star < timing.eps_T);
}
