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

#include <span>
#include <vector>

#include "cdplan/optimal_control.hpp"

namespace cdplan {

struct LeaderSample {
  double t = 0.0;
  LeaderState x = LeaderState::Zero();
  Vector6d u = Vector6d::Zero();
  double gamma = 0.0;
  double z = 0.0;
};

/// Continuous leader trajectory over [t_begin, t_end]. Planar positions use
/// cubic Hermite interpolation of the samples, accelerations interpolate u
/// linearly, and the shared altitude follows the quintic blend between
/// waypoint altitudes.
class LeaderTrajectory {
 public:
  /// Concatenate solved segments; `waypoint_z` holds one altitude per knot.
  static LeaderTrajectory from_segments(std::span<const SegmentSolution> segments,
                                        std::span<const double> waypoint_z);
  /// Rebuild from exported samples. Altitude rates are fitted to the samples.
  static LeaderTrajectory from_samples(std::vector<LeaderSample> samples);
  /// Leaders held at `y` over [t0, t1].
  static LeaderTrajectory hold(const LeaderStack& y, double t0, double t1);

  double t_begin() const { return samples_.front().t; }
  double t_end() const { return samples_.back().t; }
  const std::vector<LeaderSample>& samples() const { return samples_; }
  const std::vector<double>& knot_times() const { return knots_; }

  LeaderStack position(double t) const;
  LeaderStack velocity(double t) const;
  LeaderStack acceleration(double t) const;

 private:
  std::size_t interval(double t) const;
  double z_at(double t, int order) const;

  std::vector<LeaderSample> samples_;
  std::vector<double> knots_;
  std::vector<double> knot_z_;
  // Altitude rate and acceleration per sample (sampled trajectories only).
  std::vector<double> z_rate_;
  std::vector<double> z_accel_;
};

}  // namespace cdplan
