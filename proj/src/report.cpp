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

#include "cdplan/report.hpp"

#include <charconv>
#include <fstream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cdplan/errors.hpp"

namespace cdplan {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json vec(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

template <typename Derived>
json vec(const Eigen::MatrixBase<Derived>& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

// Non-finite values are not representable in JSON.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json params(const DeformationParams& p, double angle_scale = 1.0) {
  return {{"sigma1", p.sigma1},
          {"sigma2", p.sigma2},
          {"theta_d", p.theta_d * angle_scale},
          {"theta_r", p.theta_r * angle_scale},
          {"s", vec(p.s)}};
}

json path_json(const PathResult& path, const std::vector<Vec3>& waypoints) {
  json nodes = json::array();
  for (const auto& n : path.nodes) nodes.push_back({n.x, n.y, n.z});
  json wps = json::array();
  for (const auto& w : waypoints) wps.push_back(vec(w));
  return {{"cost", path.cost}, {"nodes", nodes}, {"waypoints", wps}};
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << content) || !out.flush()) {
    throw PlanningError(ErrorCode::kIoError, "cannot write " + path.string());
  }
}

}  // namespace

std::string report_json(const RunReport& r) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["scenario"] = r.scenario_name;
  j["astar"] = path_json(r.path, r.waypoints);
  j["betas"] = r.betas;

  json configs = json::array();
  for (std::size_t k = 0; k < r.configs.size(); ++k) {
    configs.push_back({{"leaders", vec(r.configs[k])}, {"params", params(r.config_params[k])}});
  }
  j["intermediate_configs"] = configs;

  json segs = json::array();
  for (std::size_t k = 0; k < r.plan.segments.size(); ++k) {
    const auto& seg = r.plan.segments[k];
    json s = {{"t_begin", seg.t_begin()},
              {"t_end", seg.t_end()},
              {"iterations", seg.iterations},
              {"gamma_error", seg.gamma_error},
              {"gamma_error_raw", seg.gamma_error_raw},
              {"transition_condition", seg.transition_condition}};
    if (k < r.diagnostics.size()) {
      const auto& d = r.diagnostics[k];
      s["boundary_error_start"] = d.boundary_error_start;
      s["boundary_error_end"] = d.boundary_error_end;
      s["max_constraint_residual"] = d.max_constraint_residual;
      s["stationarity_residual"] = d.stationarity_residual;
      s["effort"] = d.effort;
    }
    segs.push_back(s);
  }
  j["segments"] = segs;
  j["timing"] = {{"t_u", r.plan.timing.t_u},
                 {"segment_times", r.plan.timing.segment_times},
                 {"max_deviation", num(r.plan.timing.max_deviation)},
                 {"probes", r.plan.timing.probes}};
  j["deviation"] = {{"max_deviation", num(r.deviation.max_deviation)},
                    {"agent_max", r.deviation.agent_max},
                    {"violated", r.deviation.violated},
                    {"diverged", r.deviation.diverged},
                    {"min_separation", num(r.deviation.min_separation)},
                    {"max_center_distance", r.deviation.max_center_distance}};
  json rows = json::array();
  for (const auto& s : r.safety) {
    rows.push_back({{"name", s.name},
                    {"description", s.description},
                    {"value", num(s.value)},
                    {"limit", num(s.limit)},
                    {"margin", num(s.margin)},
                    {"pass", s.pass}});
  }
  j["safety"] = rows;
  j["constants"] = {{"delta", r.delta},
                    {"sigma_max", r.sigma_max},
                    {"conserved_form", r.conserved_form},
                    {"area_form_start", r.area_form_start},
                    {"obstacle_clearance", num(r.obstacle_clearance)},
                    {"max_path_offset", r.max_path_offset}};
  j["ok"] = r.all_pass();
  return j.dump(2) + "\n";
}

std::string astar_json(const AstarStage& stage) {
  json j = path_json(stage.path, stage.waypoints);
  j["schema_version"] = kReportSchemaVersion;
  j["evaluated_nodes"] = stage.evaluated_nodes;
  return j.dump(2) + "\n";
}

std::string params_json(const DeformationParams& p, bool degrees) {
  json j = params(p, degrees ? 180.0 / std::numbers::pi : 1.0);
  j["angle_unit"] = degrees ? "deg" : "rad";
  return j.dump(2) + "\n";
}

std::string trajectory_csv(const LeaderTrajectory& trajectory) {
  std::string out = "t,x1,x2,x3,y1,y2,y3,dx1,dx2,dx3,dy1,dy2,dy3,u1,u2,u3,u4,u5,u6,gamma,z\n";
  for (const auto& s : trajectory.samples()) {
    out += fmt(s.t);
    for (int i = 0; i < 12; ++i) out += "," + fmt(s.x[i]);
    for (int i = 0; i < 6; ++i) out += "," + fmt(s.u[i]);
    out += "," + fmt(s.gamma) + "," + fmt(s.z) + "\n";
  }
  return out;
}

std::string deviations_csv(const DeviationReport& d) {
  std::string out = "t";
  for (std::size_t i = 0; i < d.deviation.size(); ++i) out += ",agent" + std::to_string(i + 1);
  out += "\n";
  for (std::size_t j = 0; j < d.times.size(); ++j) {
    out += fmt(d.times[j]);
    for (const auto& series : d.deviation) out += "," + fmt(series[j]);
    out += "\n";
  }
  return out;
}

LeaderTrajectory parse_trajectory_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,", 0) != 0) {
    throw PlanningError(ErrorCode::kParseError, "trajectory CSV header missing");
  }
  std::vector<LeaderSample> samples;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> v;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p <= end) {
      double x = 0.0;
      const auto res = std::from_chars(p, end, x);
      if (res.ec != std::errc()) {
        throw PlanningError(ErrorCode::kParseError,
                            "trajectory CSV line " + std::to_string(line_no) + ": bad number");
      }
      v.push_back(x);
      p = res.ptr;
      if (p == end) break;
      if (*p != ',') {
        throw PlanningError(ErrorCode::kParseError,
                            "trajectory CSV line " + std::to_string(line_no) + ": expected ','");
      }
      ++p;
    }
    if (v.size() != 21) {
      throw PlanningError(ErrorCode::kParseError, "trajectory CSV line " +
                                                      std::to_string(line_no) +
                                                      ": expected 21 columns");
    }
    LeaderSample s;
    s.t = v[0];
    for (int i = 0; i < 12; ++i) s.x[i] = v[1 + i];
    for (int i = 0; i < 6; ++i) s.u[i] = v[13 + i];
    s.gamma = v[19];
    s.z = v[20];
    samples.push_back(s);
  }
  return LeaderTrajectory::from_samples(std::move(samples));
}

LeaderTrajectory load_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PlanningError(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_trajectory_csv(text.str());
}

std::vector<std::filesystem::path> emit(const RunReport& report,
                                        const std::filesystem::path& outdir,
                                        const EmitOptions& options) {
  std::error_code ec;
  std::filesystem::create_directories(outdir, ec);
  if (ec) throw PlanningError(ErrorCode::kIoError, "cannot create " + outdir.string());
  std::vector<std::filesystem::path> written;
  if (options.csv) {
    if (report.trajectory) {
      written.push_back(outdir / "trajectory.csv");
      write_file(written.back(), trajectory_csv(*report.trajectory));
    }
    written.push_back(outdir / "deviations.csv");
    write_file(written.back(), deviations_csv(report.deviation));
  }
  if (options.json) {
    written.push_back(outdir / "report.json");
    write_file(written.back(), report_json(report));
  }
  return written;
}

}  // namespace cdplan
