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

#include "cdplan/scenario.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cdplan/errors.hpp"

namespace cdplan {

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw PlanningError(ErrorCode::kSchemaError, path + ": " + what);
}

const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) schema_error(path, "must be an object");
  const auto it = obj.find(key);
  if (it == obj.end()) schema_error(path + "/" + key, "missing required field");
  return *it;
}

const json* optional_field(const json& obj, const std::string& key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) schema_error(path, "must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) schema_error(path, "must be finite");
  return v;
}

double positive(const json& j, const std::string& path) {
  const double v = number(j, path);
  if (!(v > 0.0)) schema_error(path, "must be positive");
  return v;
}

double number_or(const json& obj, const std::string& key, const std::string& path,
                 double fallback) {
  const json* j = optional_field(obj, key);
  return j ? number(*j, path + "/" + key) : fallback;
}

double positive_or(const json& obj, const std::string& key, const std::string& path,
                   double fallback) {
  const json* j = optional_field(obj, key);
  return j ? positive(*j, path + "/" + key) : fallback;
}

int integer_or(const json& obj, const std::string& key, const std::string& path, int fallback,
               int min_value) {
  const json* j = optional_field(obj, key);
  if (!j) return fallback;
  if (!j->is_number_integer()) schema_error(path + "/" + key, "must be an integer");
  const int v = j->get<int>();
  if (v < min_value) {
    schema_error(path + "/" + key, "must be >= " + std::to_string(min_value));
  }
  return v;
}

Vec3 vec3(const json& j, const std::string& path, bool allow_planar = false) {
  if (!j.is_array() || !(j.size() == 3 || (allow_planar && j.size() == 2))) {
    schema_error(path, allow_planar ? "must be [x, y] or [x, y, z]" : "must be [x, y, z]");
  }
  Vec3 v = Vec3::Zero();
  for (std::size_t a = 0; a < j.size(); ++a) v[a] = number(j[a], path + "/" + std::to_string(a));
  return v;
}

std::size_t agent_id(const json& j, std::size_t n, const std::string& path) {
  if (!j.is_number_integer()) schema_error(path, "must be an agent id");
  const auto id = j.get<long long>();
  if (id < 1 || static_cast<std::size_t>(id) > n) {
    schema_error(path, "agent id out of range 1.." + std::to_string(n));
  }
  return static_cast<std::size_t>(id - 1);
}

void parse_grid(const json& root, Scenario& s) {
  const json& ws = field(root, "workspace", "");
  s.workspace_min = vec3(field(ws, "min", "/workspace"), "/workspace/min");
  s.workspace_max = vec3(field(ws, "max", "/workspace"), "/workspace/max");
  const json& deltas = field(ws, "deltas", "/workspace");
  const Vec3 d = vec3(deltas, "/workspace/deltas");
  for (int a = 0; a < 3; ++a) {
    if (!(d[a] > 0.0)) schema_error("/workspace/deltas/" + std::to_string(a), "must be positive");
    if (!(s.workspace_max[a] >= s.workspace_min[a])) {
      schema_error("/workspace/max/" + std::to_string(a), "must not be below workspace min");
    }
  }
  s.grid.deltas = d;
  s.grid.origin = s.workspace_min - d;
  for (int a = 0; a < 3; ++a) {
    s.grid.counts[a] =
        static_cast<int>(std::floor((s.workspace_max[a] - s.workspace_min[a]) / d[a] + 1e-9)) + 1;
  }
  s.grid.validate();
}

void parse_obstacles(const json& root, Scenario& s) {
  const json& obs = field(root, "obstacles", "");
  if (!obs.is_array()) schema_error("/obstacles", "must be an array of polytopes");
  for (std::size_t p = 0; p < obs.size(); ++p) {
    const std::string pp = "/obstacles/" + std::to_string(p);
    Polytope poly;
    poly.id = integer_or(obs[p], "id", pp, static_cast<int>(p + 1), 0);
    const json& cells = field(obs[p], "tetrahedra", pp);
    if (!cells.is_array() || cells.empty()) {
      schema_error(pp + "/tetrahedra", "must be a non-empty array");
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string cp = pp + "/tetrahedra/" + std::to_string(c);
      if (!cells[c].is_array() || cells[c].size() != 4) schema_error(cp, "must list 4 vertices");
      Tetrahedron t;
      for (std::size_t v = 0; v < 4; ++v) {
        const std::string vp = cp + "/" + std::to_string(v);
        t.vertices[v] = vec3(cells[c][v], vp);
        if (!s.grid.lattice_index(t.vertices[v])) schema_error(vp, "vertex is not on the grid");
      }
      try {
        check_tetrahedron(t);
      } catch (const PlanningError& e) {
        schema_error(cp, e.what());
      }
      poly.cells.push_back(t);
    }
    s.obstacles.polytopes.push_back(std::move(poly));
  }
}

void parse_formation(const json& root, Scenario& s) {
  const json& f = field(root, "formation", "");
  const json& refs = field(f, "reference_positions", "/formation");
  if (!refs.is_array() || refs.size() < 3) {
    schema_error("/formation/reference_positions", "must list at least 3 positions");
  }
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const std::string ip = "/formation/reference_positions/" + std::to_string(i);
    const Vec3 p = vec3(refs[i], ip, true);
    if (p.z() != 0.0) schema_error(ip, "reference positions lie in the plane z = 0");
    s.formation.positions.push_back(p);
  }
  try {
    s.formation.validate();
  } catch (const PlanningError& e) {
    if (e.code() == ErrorCode::kSchemaError) {
      schema_error("/formation/reference_positions", e.what());
    }
    throw;
  }
  const std::size_t n = s.formation.size();
  const json& nb = field(f, "in_neighbors", "/formation");
  if (!nb.is_object()) schema_error("/formation/in_neighbors", "must map follower ids to ids");
  std::vector<std::array<std::size_t, 3>> triples(n - 3);
  for (std::size_t i = 3; i < n; ++i) {
    const std::string key = std::to_string(i + 1);
    const std::string ip = "/formation/in_neighbors/" + key;
    const json& row = field(nb, key, "/formation/in_neighbors");
    if (!row.is_array() || row.size() != 3) schema_error(ip, "must list 3 in-neighbours");
    for (std::size_t k = 0; k < 3; ++k) {
      triples[i - 3][k] = agent_id(row[k], n, ip + "/" + std::to_string(k));
    }
  }
  for (const auto& [key, value] : nb.items()) {
    const std::string ip = "/formation/in_neighbors/" + key;
    std::size_t id = 0;
    try {
      id = std::stoul(key);
    } catch (...) {
      schema_error(ip, "key must be a follower id");
    }
    if (id < 4 || id > n) schema_error(ip, "only followers 4.." + std::to_string(n) + " have in-neighbours");
    (void)value;
  }
  s.graph = compute_weights(s.formation, triples);
  if (const json* w = optional_field(f, "weights")) {
    for (std::size_t i = 3; i < n; ++i) {
      const std::string key = std::to_string(i + 1);
      const json* row = optional_field(*w, key);
      if (!row) continue;
      const std::string wp = "/formation/weights/" + key;
      if (!row->is_array() || row->size() != 3) schema_error(wp, "must list 3 weights");
      for (std::size_t k = 0; k < 3; ++k) {
        const double given = positive((*row)[k], wp + "/" + std::to_string(k));
        if (std::abs(given - s.graph.weights[i][k]) > 1e-6) {
          std::ostringstream msg;
          msg << "weight " << given << " is inconsistent with the reference positions (expected "
              << s.graph.weights[i][k] << ")";
          schema_error(wp + "/" + std::to_string(k), msg.str());
        }
      }
    }
  }
}

}  // namespace

Plant parse_plant(std::string_view name) {
  if (name == "ideal") return Plant::kIdeal;
  if (name == "double_integrator") return Plant::kDoubleIntegrator;
  if (name == "quadcopter") return Plant::kQuadcopter;
  throw PlanningError(ErrorCode::kSchemaError,
                      "unknown plant '" + std::string(name) +
                          "' (ideal, double_integrator, quadcopter)");
}

std::string_view plant_name(Plant plant) {
  switch (plant) {
    case Plant::kIdeal:
      return "ideal";
    case Plant::kDoubleIntegrator:
      return "double_integrator";
    case Plant::kQuadcopter:
      return "quadcopter";
  }
  return "unknown";
}

Scenario parse_scenario(std::string_view text, const LoadOptions& options) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw PlanningError(ErrorCode::kParseError, e.what());
  }
  if (!root.is_object()) schema_error("", "scenario must be a JSON object");
  if (const json* v = optional_field(root, "schema_version")) {
    if (!v->is_number_integer() || v->get<int>() != 1) {
      schema_error("/schema_version", "only version 1 is supported");
    }
  }
  const double angle_unit = options.degrees ? std::numbers::pi / 180.0 : 1.0;

  Scenario s;
  if (const json* name = optional_field(root, "name")) {
    if (!name->is_string()) schema_error("/name", "must be a string");
    s.name = name->get<std::string>();
  }
  parse_grid(root, s);
  parse_obstacles(root, s);
  parse_formation(root, s);

  s.start = vec3(field(root, "start", ""), "/start");
  s.goal = vec3(field(root, "goal", ""), "/goal");
  for (const auto& [key, p] : {std::pair{"/start", s.start}, std::pair{"/goal", s.goal}}) {
    const auto idx = s.grid.lattice_index(p);
    if (!idx || !s.grid.contains(*idx)) schema_error(key, "must be a grid node in the workspace");
  }

  const json& fd = field(root, "final_deformation", "");
  s.final_params.sigma1 = positive(field(fd, "sigma1", "/final_deformation"),
                                   "/final_deformation/sigma1");
  if (s.final_params.sigma1 < 1.0) {
    schema_error("/final_deformation/sigma1", "must be >= 1 (sigma2 = 1 / sigma1)");
  }
  s.final_params.sigma2 = 1.0 / s.final_params.sigma1;
  s.final_params.theta_d = angle_unit * number_or(fd, "theta_d", "/final_deformation", 0.0);
  s.final_params.theta_r = angle_unit * number_or(fd, "theta_r", "/final_deformation", 0.0);
  s.final_params.s = s.goal;

  const json& sf = field(root, "safety", "");
  s.safety.epsilon = number(field(sf, "epsilon", "/safety"), "/safety/epsilon");
  if (s.safety.epsilon < 0.0) schema_error("/safety/epsilon", "must be non-negative");
  s.safety.r_max = positive(field(sf, "r_max", "/safety"), "/safety/r_max");
  s.safety.d_min = s.formation.min_separation();
  if (const json* d = optional_field(sf, "delta")) {
    s.safety.delta = positive(*d, "/safety/delta");
  } else {
    s.safety.delta = safety_delta(s.safety.d_min, s.final_params.sigma2, s.safety.epsilon);
    s.delta_derived = true;
  }
  const LeaderStack y0 = deformed_leaders(DeformationParams{}, s.start, s.formation);
  s.safety.A_s = area_form(y0);

  const double sigma_max = safety_sigma_max(s.safety);
  if (s.final_params.sigma1 > sigma_max * (1.0 + 1e-9)) {
    std::ostringstream msg;
    msg << "/final_deformation/sigma1: " << s.final_params.sigma1
        << " exceeds the safety bound " << sigma_max;
    throw PlanningError(ErrorCode::kInfeasibleScenario, msg.str());
  }

  if (const json* t = optional_field(root, "timing")) {
    s.timing.t_s = number_or(*t, "t_s", "/timing", s.timing.t_s);
    s.timing.T_min = positive_or(*t, "T_min", "/timing", s.timing.T_min);
    s.timing.T_max = positive_or(*t, "T_max", "/timing", s.timing.T_max);
    s.timing.eps_T = positive_or(*t, "eps_T", "/timing", s.timing.eps_T);
    if (!(s.timing.T_min < s.timing.T_max)) schema_error("/timing/T_max", "must exceed T_min");
  }
  if (const json* so = optional_field(root, "solver")) {
    s.solver.samples = integer_or(*so, "samples", "/solver", s.solver.samples, 2);
    if (s.solver.samples % 2 != 0) schema_error("/solver/samples", "must be even");
    s.solver.max_iterations =
        integer_or(*so, "max_iterations", "/solver", s.solver.max_iterations, 1);
    s.solver.damping = positive_or(*so, "damping", "/solver", s.solver.damping);
    if (s.solver.damping > 1.0) schema_error("/solver/damping", "must be in (0, 1]");
    s.solver.eps_gamma = positive_or(*so, "eps_gamma", "/solver", s.solver.eps_gamma);
    if (const json* form = optional_field(*so, "area_form")) {
      const std::string v = form->is_string() ? form->get<std::string>() : "";
      if (v == "signed") {
        s.solver.model = ConstraintModel::signed_area();
      } else if (v == "printed") {
        s.solver.model = ConstraintModel::printed();
      } else {
        schema_error("/solver/area_form", "must be \"signed\" or \"printed\"");
      }
    }
  }
  s.simulation.delta = s.safety.delta;
  s.simulation.epsilon = s.safety.epsilon;
  if (const json* sim = optional_field(root, "simulation")) {
    if (const json* p = optional_field(*sim, "plant")) {
      if (!p->is_string()) schema_error("/simulation/plant", "must be a string");
      try {
        s.simulation.plant = parse_plant(p->get<std::string>());
      } catch (const PlanningError& e) {
        schema_error("/simulation/plant", e.what());
      }
    }
    s.simulation.control_rate =
        positive_or(*sim, "control_rate", "/simulation", s.simulation.control_rate);
    s.simulation.physics_rate =
        positive_or(*sim, "physics_rate", "/simulation", s.simulation.physics_rate);
    s.simulation.record_every =
        integer_or(*sim, "record_every", "/simulation", s.simulation.record_every, 1);
    s.simulation.quad.mass = positive_or(*sim, "mass", "/simulation", s.simulation.quad.mass);
    if (const json* in = optional_field(*sim, "inertia")) {
      s.simulation.quad.inertia = vec3(*in, "/simulation/inertia");
      if (s.simulation.quad.inertia.minCoeff() <= 0.0) {
        schema_error("/simulation/inertia", "must be positive");
      }
    }
    if (const json* g = optional_field(*sim, "gains")) {
      auto& k = s.simulation.gains;
      k.kp = positive_or(*g, "kp", "/simulation/gains", k.kp);
      k.kd = positive_or(*g, "kd", "/simulation/gains", k.kd);
      k.kp_att = positive_or(*g, "kp_att", "/simulation/gains", k.kp_att);
      k.kd_att = positive_or(*g, "kd_att", "/simulation/gains", k.kd_att);
      k.max_tilt = positive_or(*g, "max_tilt", "/simulation/gains", k.max_tilt);
    }
  }
  if (const json* v = optional_field(root, "validity")) {
    s.validity.boundary_samples =
        integer_or(*v, "boundary_samples", "/validity", s.validity.boundary_samples, 0);
  }

  if (options.check_endpoints) {
    for (const auto& [key, p] : {std::pair{"/start", s.start}, std::pair{"/goal", s.goal}}) {
      if (!is_valid_center(p, s.safety.r_max, s.obstacles, s.validity)) {
        throw PlanningError(ErrorCode::kInfeasibleScenario,
                            std::string(key) + ": containment ball is not obstacle-free");
      }
    }
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw PlanningError(ErrorCode::kIoError, "cannot open scenario file " + path.string());
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str(), options);
}

}  // namespace cdplan
