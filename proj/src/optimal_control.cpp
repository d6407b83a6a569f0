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

#include "cdplan/optimal_control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "cdplan/errors.hpp"

namespace cdplan {

namespace {

// Constant, linear and quadratic parts of A(gamma).
struct SystemParts {
  Matrix24d a0;
  Matrix24d a1;
  Matrix24d a2;

  explicit SystemParts(const ConstraintModel& model) {
    Matrix12d al = Matrix12d::Zero();
    al.topRightCorner<6, 6>().setIdentity();
    Eigen::Matrix<double, 12, 6> bl = Eigen::Matrix<double, 12, 6>::Zero();
    bl.bottomRows<6>().setIdentity();
    const Matrix12d gxx = model.gamma_xx();
    const Eigen::Matrix<double, 12, 6> gxu = model.gamma_xu();

    a0.setZero();
    a0.topLeftCorner<12, 12>() = al;
    a0.topRightCorner<12, 12>() = -bl * bl.transpose();
    a0.bottomRightCorner<12, 12>() = -al.transpose();

    a1.setZero();
    a1.topLeftCorner<12, 12>() = -2.0 * bl * gxu.transpose();
    a1.bottomLeftCorner<12, 12>() = -2.0 * gxx;
    a1.bottomRightCorner<12, 12>() = 2.0 * gxu * bl.transpose();

    a2.setZero();
    a2.bottomLeftCorner<12, 12>() = 4.0 * gxu * gxu.transpose();
  }

  Matrix24d at(double g) const { return a0 + g * a1 + (g * g) * a2; }
};

// RK4 on Phi' = A(gamma) Phi over a uniform grid; gamma(t) is linear between
// grid values, so the midpoint value is the average of the neighbours.
std::vector<Matrix24d> stm_samples(const SystemParts& parts, std::span<const double> g,
                                   double h, int stride) {
  const std::size_t n = g.size() - 1;
  std::vector<Matrix24d> out;
  out.reserve(n / stride + 1);
  Matrix24d phi = Matrix24d::Identity();
  out.push_back(phi);
  const double step = h * stride;
  for (std::size_t j = 0; j + stride <= n; j += stride) {
    const double g_mid = stride == 2 ? g[j + 1] : 0.5 * (g[j] + g[j + 1]);
    const Matrix24d a_lo = parts.at(g[j]);
    const Matrix24d a_mid = parts.at(g_mid);
    const Matrix24d a_hi = parts.at(g[j + stride]);
    const Matrix24d k1 = a_lo * phi;
    const Matrix24d k2 = a_mid * (phi + 0.5 * step * k1);
    const Matrix24d k3 = a_mid * (phi + 0.5 * step * k2);
    const Matrix24d k4 = a_hi * (phi + step * k3);
    phi += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    out.push_back(phi);
  }
  return out;
}

// max |d - (a + b t)| for the least-squares line through (t, d).
double detrended_max(std::span<const double> t, std::span<const double> d) {
  const double n = static_cast<double>(t.size());
  double st = 0.0, sd = 0.0, stt = 0.0, std_ = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    st += t[i];
    sd += d[i];
    stt += t[i] * t[i];
    std_ += t[i] * d[i];
  }
  const double den = n * stt - st * st;
  const double b = den > 0.0 ? (n * std_ - st * sd) / den : 0.0;
  const double a = (sd - b * st) / n;
  double worst = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    worst = std::max(worst, std::abs(d[i] - a - b * t[i]));
  }
  return worst;
}

}  // namespace

double smoothstep(double t, double t_k, double t_k1) {
  const double s = std::clamp((t - t_k) / (t_k1 - t_k), 0.0, 1.0);
  return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

double smoothstep_rate(double t, double t_k, double t_k1) {
  const double span = t_k1 - t_k;
  const double s = std::clamp((t - t_k) / span, 0.0, 1.0);
  return 30.0 * s * s * (1.0 - s) * (1.0 - s) / span;
}

double smoothstep_accel(double t, double t_k, double t_k1) {
  const double span = t_k1 - t_k;
  const double s = std::clamp((t - t_k) / span, 0.0, 1.0);
  return 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s) / (span * span);
}

double z_trajectory(double t, std::size_t k, std::span<const double> times,
                    std::span<const double> d_z) {
  const double blend = smoothstep(t, times[k], times[k + 1]);
  return d_z[k] * (1.0 - blend) + d_z[k + 1] * blend;
}

Matrix6d area_matrix() {
  Matrix6d p;
  p << 0, 0, 0, 0, 1, -1,  //
      0, 0, 0, -1, 0, 1,   //
      0, 0, 0, 1, -1, 0,   //
      0, -1, 1, 0, 0, 0,   //
      1, 0, -1, 0, 0, 0,   //
      -1, 1, 0, 0, 0, 0;
  return 0.25 * p;
}

Eigen::Matrix<double, 9, 9> area_psi() {
  Eigen::Matrix<double, 6, 9> o = Eigen::Matrix<double, 6, 9>::Zero();
  o.leftCols<6>().setIdentity();
  const Matrix6d p = area_matrix();
  return o.transpose() * p.transpose() * p * o;
}

double area_form(const LeaderStack& y) { return y.dot(area_psi() * y); }

ConstraintModel ConstraintModel::printed() {
  const Matrix6d p = area_matrix();
  return ConstraintModel{p.transpose() * p};
}

ConstraintModel ConstraintModel::signed_area() {
  const Matrix6d p = area_matrix();
  return ConstraintModel{0.5 * (p + p.transpose())};
}

Matrix12d ConstraintModel::gamma_xx() const {
  Matrix12d g = Matrix12d::Zero();
  g.bottomRightCorner<6, 6>() = 2.0 * m;
  return g;
}

Eigen::Matrix<double, 12, 6> ConstraintModel::gamma_xu() const {
  Eigen::Matrix<double, 12, 6> g = Eigen::Matrix<double, 12, 6>::Zero();
  g.topRows<6>() = m;
  return g;
}

LeaderState leader_state(const LeaderStack& y, const Vector6d& rates) {
  LeaderState x;
  x << y.head<6>(), rates;
  return x;
}

Vector6d planar_positions(const LeaderStack& y) { return y.head<6>(); }

double constraint_value(const LeaderState& x, const Vector6d& u, const ConstraintModel& model) {
  const auto q = x.head<6>();
  const auto qd = x.tail<6>();
  return 2.0 * qd.dot(model.m * qd) + 2.0 * q.dot(model.m * u);
}

double gamma_multiplier(const LeaderState& x, const LeaderState& lambda,
                        const ConstraintModel& model) {
  const auto q = x.head<6>();
  const auto qd = x.tail<6>();
  const Vector6d mq = model.m * q;
  const double den = 4.0 * mq.squaredNorm();
  if (den <= 1e-12) {
    throw PlanningError(ErrorCode::kDegenerateConstraint,
                        "constraint gradient vanishes (coincident leaders)");
  }
  // x^T Gxx x - 2 x^T Gxu B^T lambda
  const double num = 2.0 * qd.dot(model.m * qd) - 2.0 * mq.dot(lambda.tail<6>());
  return num / den;
}

Vector6d optimal_input(const LeaderState& x, const LeaderState& lambda, double gamma,
                       const ConstraintModel& model) {
  return -lambda.tail<6>() - 2.0 * gamma * (model.m * x.head<6>());
}

Matrix24d assemble_system(double gamma, const ConstraintModel& model) {
  return SystemParts(model).at(gamma);
}

Matrix24d integrate_stm(double t_k, double t, const GammaFn& gamma, int steps,
                        const ConstraintModel& model) {
  if (t == t_k) return Matrix24d::Identity();
  const SystemParts parts(model);
  const double h = (t - t_k) / steps;
  Matrix24d phi = Matrix24d::Identity();
  for (int j = 0; j < steps; ++j) {
    const double tj = t_k + j * h;
    const Matrix24d a_lo = parts.at(gamma(tj));
    const Matrix24d a_mid = parts.at(gamma(tj + 0.5 * h));
    const Matrix24d a_hi = parts.at(gamma(tj + h));
    const Matrix24d k1 = a_lo * phi;
    const Matrix24d k2 = a_mid * (phi + 0.5 * h * k1);
    const Matrix24d k3 = a_mid * (phi + 0.5 * h * k2);
    const Matrix24d k4 = a_hi * (phi + h * k3);
    phi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return phi;
}

double SegmentSolution::effort() const {
  const std::size_t n = times.size() - 1;
  if (n == 0) return 0.0;
  const double h = (times.back() - times.front()) / static_cast<double>(n);
  auto f = [&](std::size_t j) { return 0.5 * inputs[j].squaredNorm(); };
  if (n % 2 != 0) {
    double sum = 0.5 * (f(0) + f(n));
    for (std::size_t j = 1; j < n; ++j) sum += f(j);
    return sum * h;
  }
  double sum = f(0) + f(n);
  for (std::size_t j = 1; j < n; ++j) sum += (j % 2 == 1 ? 4.0 : 2.0) * f(j);
  return sum * h / 3.0;
}

double SegmentSolution::max_constraint_residual(const ConstraintModel& model) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < states.size(); ++j) {
    worst = std::max(worst, std::abs(constraint_value(states[j], inputs[j], model)));
  }
  return worst;
}

double SegmentSolution::stationarity_residual(const ConstraintModel& model) const {
  const std::size_t n = times.size();
  if (n < 5) return 0.0;
  const double h = (times.back() - times.front()) / static_cast<double>(n - 1);
  const Matrix12d gxx = model.gamma_xx();
  const Eigen::Matrix<double, 12, 6> gxu = model.gamma_xu();
  double worst = 0.0;
  for (std::size_t j = 2; j + 2 < n; ++j) {
    const LeaderState rate =
        (costates[j - 2] - 8.0 * costates[j - 1] + 8.0 * costates[j + 1] - costates[j + 2]) /
        (12.0 * h);
    LeaderState al_t_lambda = LeaderState::Zero();  // A_L^T lambda
    al_t_lambda.tail<6>() = costates[j].head<6>();
    const LeaderState r = rate + al_t_lambda +
                          multiplier[j] * (2.0 * gxx * states[j] + 2.0 * gxu * inputs[j]);
    worst = std::max(worst, r.cwiseAbs().maxCoeff());
  }
  return worst;
}

SegmentSolution solve_segment(const LeaderState& x_k, const LeaderState& x_k1, double t_k,
                              double t_k1, const SolverOptions& options) {
  if (!(t_k1 > t_k)) {
    throw PlanningError(ErrorCode::kSchemaError, "segment end time must exceed start time");
  }
  if (options.samples < 2 || options.samples % 2 != 0) {
    throw PlanningError(ErrorCode::kSchemaError, "samples per segment must be even and >= 2");
  }
  const int n = options.samples;
  const double h = (t_k1 - t_k) / n;
  const SystemParts parts(options.model);

  SegmentSolution out;
  out.times.resize(n + 1);
  for (int j = 0; j <= n; ++j) out.times[j] = t_k + j * h;
  out.times.back() = t_k1;

  std::vector<double> gamma(n + 1, 0.0);
  std::vector<double> gamma_new(n + 1, 0.0);
  std::vector<double> diff(n + 1, 0.0);
  std::vector<Vector24d> z(n + 1);

  for (int it = 1; it <= options.max_iterations; ++it) {
    const std::vector<Matrix24d> phi = stm_samples(parts, gamma, h, 1);
    const Matrix12d phi11 = phi.back().topLeftCorner<12, 12>();
    const Matrix12d phi12 = phi.back().topRightCorner<12, 12>();

    const Eigen::JacobiSVD<Matrix12d> svd(phi12, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cond = sv(11) > 0.0 ? sv(0) / sv(11) : std::numeric_limits<double>::infinity();
    if (!(cond < 1e14)) {
      std::ostringstream msg;
      msg << "transition partition Phi12 is rank-deficient (condition number " << cond << ")";
      throw PlanningError(ErrorCode::kSingularTransition, msg.str());
    }
    const LeaderState lambda0 = svd.solve(x_k1 - phi11 * x_k);

    Vector24d z0;
    z0 << x_k, lambda0;
    for (int j = 0; j <= n; ++j) {
      z[j] = phi[j] * z0;
      const LeaderState xj = z[j].head<12>();
      const LeaderState lj = z[j].tail<12>();
      try {
        gamma_new[j] = gamma_multiplier(xj, lj, options.model);
      } catch (const PlanningError&) {
        gamma_new[j] = 0.0;
      }
      diff[j] = gamma_new[j] - gamma[j];
    }
    // gamma scales with 1 / duration^2, so the error is taken relative to
    // max |gamma'|. gamma' vanishes for translations; the floor is 1e-9 of the
    // multiplier whose input term 2 gamma M q would match the costate input.
    double g_scale = 0.0;
    double e_abs = 0.0;
    double lv_max = 0.0;
    double mq_max = 0.0;
    for (int j = 0; j <= n; ++j) {
      g_scale = std::max(g_scale, std::abs(gamma_new[j]));
      e_abs = std::max(e_abs, std::abs(diff[j]));
      lv_max = std::max(lv_max, z[j].tail<6>().norm());
      mq_max = std::max(mq_max, (options.model.m * z[j].head<6>()).norm());
    }
    if (mq_max > 0.0) g_scale = std::max(g_scale, 1e-9 * lv_max / (2.0 * mq_max));
    g_scale = std::max(g_scale, std::numeric_limits<double>::min());
    out.gamma_error_raw = e_abs / g_scale;
    out.gamma_error = detrended_max(out.times, diff) / g_scale;
    out.iterations = it;
    out.transition_condition = cond;

    // The linear part of gamma' - gamma tracks the O(h^2) discretization
    // error of the boundary solve and does not shrink with iteration.
    if (out.gamma_error < options.eps_gamma) {
      // Step-doubling estimate of the RK4 error on the accepted gamma.
      const std::vector<Matrix24d> coarse = stm_samples(parts, gamma, h, 2);
      const double scale = std::max(1.0, phi.back().norm());
      const double err = (phi.back() - coarse.back()).norm() / 15.0 / scale;
      if (err > options.stm_tolerance) {
        std::ostringstream msg;
        msg << "RK4 step-doubling error " << err << " exceeds " << options.stm_tolerance;
        throw PlanningError(ErrorCode::kStepSizeTooCoarse, msg.str());
      }
      out.states.resize(n + 1);
      out.costates.resize(n + 1);
      out.inputs.resize(n + 1);
      // The reported multiplier is the one defined by the returned (x, lambda).
      out.multiplier = gamma_new;
      for (int j = 0; j <= n; ++j) {
        out.states[j] = z[j].head<12>();
        out.costates[j] = z[j].tail<12>();
        out.inputs[j] =
            optimal_input(out.states[j], out.costates[j], gamma_new[j], options.model);
      }
      return out;
    }
    for (int j = 0; j <= n; ++j) {
      gamma[j] = (1.0 - options.damping) * gamma[j] + options.damping * gamma_new[j];
    }
  }
  std::ostringstream msg;
  msg << "multiplier iteration did not reach " << options.eps_gamma << " in "
      << options.max_iterations << " iterations (last relative error "
      << out.gamma_error << ")";
  throw PlanningError(ErrorCode::kNoConvergence, msg.str());
}

SegmentSolution rescale_segment(const SegmentSolution& seg, double t_k, double t_k1) {
  const double c = (seg.t_end() - seg.t_begin()) / (t_k1 - t_k);
  const double c2 = c * c;
  const double c3 = c2 * c;
  SegmentSolution out = seg;
  const std::size_t n = seg.times.size() - 1;
  for (std::size_t j = 0; j <= n; ++j) {
    out.times[j] = t_k + (seg.times[j] - seg.t_begin()) / c;
    out.states[j].tail<6>() *= c;
    out.costates[j].head<6>() *= c3;
    out.costates[j].tail<6>() *= c2;
    out.inputs[j] *= c2;
    out.multiplier[j] *= c2;
  }
  out.times.back() = t_k1;
  return out;
}

std::vector<double> segment_times(std::span<const double> betas, double t_s, double t_u) {
  std::vector<double> out;
  out.reserve(betas.size());
  for (const double b : betas) out.push_back((1.0 - b) * t_s + b * t_u);
  return out;
}

TimingResult bisect_travel_time(const std::function<double(double)>& deviation, double delta,
                                const TimingOptions& options) {
  if (!(options.T_min < options.T_max) || !(options.eps_T > 0.0)) {
    throw PlanningError(ErrorCode::kSchemaError, "need T_min < T_max and eps_T > 0");
  }
  TimingResult out;
  double e_hi = deviation(options.T_max);
  out.probes = 1;
  if (!(e_hi <= delta)) {
    std::ostringstream msg;
    msg << "deviation " << e_hi << " m exceeds delta " << delta << " m at T_max "
        << options.T_max << " s";
    throw PlanningError(ErrorCode::kInfeasible, msg.str());
  }
  double lo = options.T_min;
  double hi = options.T_max;
  while (hi - lo >= options.eps_T) {
    const double mid = 0.5 * (lo + hi);
    const double e = deviation(mid);
    ++out.probes;
    if (e <= delta) {
      hi = mid;
      e_hi = e;
    } else {
      lo = mid;
    }
  }
  out.t_u = hi;
  out.max_deviation = e_hi;
  return out;
}

LeaderPlan assign_travel_time(
    std::span<const LeaderState> waypoint_states, std::span<const double> betas,
    const std::function<double(const std::vector<SegmentSolution>&)>& deviation, double delta,
    const TimingOptions& timing, const SolverOptions& solver) {
  if (waypoint_states.size() != betas.size() || betas.size() < 2) {
    throw PlanningError(ErrorCode::kSchemaError, "waypoint states and betas must match");
  }
  const std::vector<double> base_times = segment_times(betas, timing.t_s, timing.T_max);
  std::vector<SegmentSolution> base;
  base.reserve(betas.size() - 1);
  for (std::size_t k = 0; k + 1 < betas.size(); ++k) {
    base.push_back(solve_segment(waypoint_states[k], waypoint_states[k + 1], base_times[k],
                                 base_times[k + 1], solver));
  }
  auto plan_for = [&](double t_u) {
    const std::vector<double> times = segment_times(betas, timing.t_s, t_u);
    std::vector<SegmentSolution> segs;
    segs.reserve(base.size());
    for (std::size_t k = 0; k < base.size(); ++k) {
      segs.push_back(rescale_segment(base[k], times[k], times[k + 1]));
    }
    return segs;
  };
  LeaderPlan out;
  out.timing = bisect_travel_time([&](double t_u) { return deviation(plan_for(t_u)); }, delta,
                                  timing);
  out.timing.segment_times = segment_times(betas, timing.t_s, out.timing.t_u);
  out.segments = plan_for(out.timing.t_u);
  return out;
}

}  // namespace cdplan
