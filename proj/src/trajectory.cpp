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

#include "cdplan/trajectory.hpp"

#include <algorithm>
#include <array>
#include <utility>

#include "cdplan/errors.hpp"

namespace cdplan {

namespace {

std::size_t segment_of(std::span<const double> times, double t) {
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t idx =
      it == times.begin() ? 0 : static_cast<std::size_t>(it - times.begin()) - 1;
  return std::min(idx, times.size() - 2);
}

LeaderStack stack_of(const Vector6d& xy, double z) {
  LeaderStack y;
  y << xy, z, z, z;
  return y;
}

// Cubic Hermite basis on s in [0, 1] and its first two derivatives in s.
struct Hermite {
  double h00, h10, h01, h11;
};

Hermite hermite(double s, int order) {
  const double s2 = s * s;
  const double s3 = s2 * s;
  switch (order) {
    case 0:
      return {2 * s3 - 3 * s2 + 1, s3 - 2 * s2 + s, -2 * s3 + 3 * s2, s3 - s2};
    case 1:
      return {6 * s2 - 6 * s, 3 * s2 - 4 * s + 1, -6 * s2 + 6 * s, 3 * s2 - 2 * s};
    default:
      return {12 * s - 6, 6 * s - 4, -12 * s + 6, 6 * s - 2};
  }
}

// Quintic Hermite basis (value, rate, acceleration at s = 0, then at s = 1).
std::array<double, 6> quintic_hermite(double s, int order) {
  const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
  switch (order) {
    case 0:
      return {1 - 10 * s3 + 15 * s4 - 6 * s5, s - 6 * s3 + 8 * s4 - 3 * s5,
              0.5 * (s2 - 3 * s3 + 3 * s4 - s5), 10 * s3 - 15 * s4 + 6 * s5,
              -4 * s3 + 7 * s4 - 3 * s5, 0.5 * (s3 - 2 * s4 + s5)};
    case 1:
      return {-30 * s2 + 60 * s3 - 30 * s4, 1 - 18 * s2 + 32 * s3 - 15 * s4,
              0.5 * (2 * s - 9 * s2 + 12 * s3 - 5 * s4), 30 * s2 - 60 * s3 + 30 * s4,
              -12 * s2 + 28 * s3 - 15 * s4, 0.5 * (3 * s2 - 8 * s3 + 5 * s4)};
    default:
      return {-60 * s + 180 * s2 - 120 * s3, -36 * s + 96 * s2 - 60 * s3,
              0.5 * (2 - 18 * s + 36 * s2 - 20 * s3), 60 * s - 180 * s2 + 120 * s3,
              -24 * s + 84 * s2 - 60 * s3, 0.5 * (6 * s - 24 * s2 + 20 * s3)};
  }
}

}  // namespace

LeaderTrajectory LeaderTrajectory::from_segments(std::span<const SegmentSolution> segments,
                                                 std::span<const double> waypoint_z) {
  if (segments.empty() || waypoint_z.size() != segments.size() + 1) {
    throw PlanningError(ErrorCode::kSchemaError, "one altitude per segment knot is required");
  }
  LeaderTrajectory out;
  out.knots_.push_back(segments.front().t_begin());
  for (const auto& seg : segments) out.knots_.push_back(seg.t_end());
  out.knot_z_.assign(waypoint_z.begin(), waypoint_z.end());
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const auto& seg = segments[k];
    // Joint samples are shared with the previous segment.
    for (std::size_t j = k == 0 ? 0 : 1; j < seg.times.size(); ++j) {
      LeaderSample s;
      s.t = seg.times[j];
      s.x = seg.states[j];
      s.u = seg.inputs[j];
      s.gamma = seg.multiplier[j];
      out.samples_.push_back(s);
    }
  }
  for (auto& s : out.samples_) s.z = out.z_at(s.t, 0);
  return out;
}

LeaderTrajectory LeaderTrajectory::from_samples(std::vector<LeaderSample> samples) {
  if (samples.size() < 2) {
    throw PlanningError(ErrorCode::kSchemaError, "trajectory needs at least two samples");
  }
  for (std::size_t j = 1; j < samples.size(); ++j) {
    if (!(samples[j].t > samples[j - 1].t)) {
      throw PlanningError(ErrorCode::kSchemaError, "trajectory times must increase strictly");
    }
  }
  LeaderTrajectory out;
  out.samples_ = std::move(samples);
  // Altitude rates from a quartic through the five nearest samples. Segments
  // are sampled uniformly, so a change of spacing marks a knot, where the
  // altitude is only C2; windows do not straddle knots.
  const std::size_t n = out.samples_.size();
  auto spacing = [&](std::size_t j) { return out.samples_[j + 1].t - out.samples_[j].t; };
  std::vector<std::size_t> knots{0};
  for (std::size_t j = 1; j + 1 < n; ++j) {
    if (std::abs(spacing(j) - spacing(j - 1)) > 1e-6 * spacing(j)) knots.push_back(j);
  }
  knots.push_back(n - 1);
  out.z_rate_.resize(n);
  out.z_accel_.resize(n);
  std::size_t m = 0;
  for (std::size_t i = 0; i < n; ++i) {
    // A knot sample is fitted from the segment that starts there.
    while (m + 2 < knots.size() && i >= knots[m + 1]) ++m;
    std::size_t a = knots[m];
    std::size_t b = knots[m + 1];
    if (b - a + 1 < 5) {
      a = 0;
      b = n - 1;
    }
    const std::size_t width = std::min<std::size_t>(5, b - a + 1);
    const std::size_t lo =
        std::clamp(i >= width / 2 ? i - width / 2 : 0, a, b + 1 - width);
    const double t0 = out.samples_[i].t;
    const double scale = out.samples_[lo + width - 1].t - out.samples_[lo].t;
    Eigen::MatrixXd v(width, width);
    Eigen::VectorXd zs(width);
    for (std::size_t r = 0; r < width; ++r) {
      const double x = (out.samples_[lo + r].t - t0) / scale;
      double p = 1.0;
      for (std::size_t c = 0; c < width; ++c, p *= x) v(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = p;
      zs[static_cast<Eigen::Index>(r)] = out.samples_[lo + r].z;
    }
    const Eigen::VectorXd coef = v.colPivHouseholderQr().solve(zs);
    out.z_rate_[i] = width > 1 ? coef[1] / scale : 0.0;
    out.z_accel_[i] = width > 2 ? 2.0 * coef[2] / (scale * scale) : 0.0;
  }
  return out;
}

LeaderTrajectory LeaderTrajectory::hold(const LeaderStack& y, double t0, double t1) {
  LeaderSample a;
  a.t = t0;
  a.x = leader_state(y);
  a.z = y[6];
  LeaderSample b = a;
  b.t = t1;
  LeaderTrajectory out;
  out.samples_ = {a, b};
  out.knots_ = {t0, t1};
  out.knot_z_ = {a.z, a.z};
  return out;
}

std::size_t LeaderTrajectory::interval(double t) const {
  const auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                                   [](double v, const LeaderSample& s) { return v < s.t; });
  const std::size_t idx =
      it == samples_.begin() ? 0 : static_cast<std::size_t>(it - samples_.begin()) - 1;
  return std::min(idx, samples_.size() - 2);
}

double LeaderTrajectory::z_at(double t, int order) const {
  if (!knots_.empty()) {
    const std::size_t k = segment_of(knots_, t);
    const double dz = knot_z_[k + 1] - knot_z_[k];
    switch (order) {
      case 0:
        return z_trajectory(t, k, knots_, knot_z_);
      case 1:
        return dz * smoothstep_rate(t, knots_[k], knots_[k + 1]);
      default:
        return dz * smoothstep_accel(t, knots_[k], knots_[k + 1]);
    }
  }
  // Sampled altitude: quintic Hermite on the estimated rates.
  const std::size_t j = interval(t);
  const double h = samples_[j + 1].t - samples_[j].t;
  const double s = std::clamp((t - samples_[j].t) / h, 0.0, 1.0);
  const std::array<double, 6> b = quintic_hermite(s, order);
  const double v = b[0] * samples_[j].z + b[1] * h * z_rate_[j] + b[2] * h * h * z_accel_[j] +
                   b[3] * samples_[j + 1].z + b[4] * h * z_rate_[j + 1] +
                   b[5] * h * h * z_accel_[j + 1];
  return order == 0 ? v : (order == 1 ? v / h : v / (h * h));
}

LeaderStack LeaderTrajectory::position(double t) const {
  const std::size_t j = interval(t);
  const auto& a = samples_[j];
  const auto& b = samples_[j + 1];
  const double h = b.t - a.t;
  const double s = std::clamp((t - a.t) / h, 0.0, 1.0);
  const Hermite w = hermite(s, 0);
  const Vector6d xy = w.h00 * a.x.head<6>() + w.h10 * h * a.x.tail<6>() +
                      w.h01 * b.x.head<6>() + w.h11 * h * b.x.tail<6>();
  return stack_of(xy, z_at(t, 0));
}

LeaderStack LeaderTrajectory::velocity(double t) const {
  const std::size_t j = interval(t);
  const auto& a = samples_[j];
  const auto& b = samples_[j + 1];
  const double h = b.t - a.t;
  const double s = std::clamp((t - a.t) / h, 0.0, 1.0);
  const Hermite w = hermite(s, 1);
  const Vector6d xy = (w.h00 * a.x.head<6>() + w.h01 * b.x.head<6>()) / h +
                      w.h10 * a.x.tail<6>() + w.h11 * b.x.tail<6>();
  return stack_of(xy, z_at(t, 1));
}

LeaderStack LeaderTrajectory::acceleration(double t) const {
  const std::size_t j = interval(t);
  const auto& a = samples_[j];
  const auto& b = samples_[j + 1];
  const double s = std::clamp((t - a.t) / (b.t - a.t), 0.0, 1.0);
  return stack_of((1.0 - s) * a.u + s * b.u, z_at(t, 2));
}

}  // namespace cdplan
