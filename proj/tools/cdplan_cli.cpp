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

// cdplan: continuum-deformation planning for leader-follower quadcopter teams.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cdplan/errors.hpp"
#include "cdplan/pipeline.hpp"
#include "cdplan/report.hpp"
#include "cdplan/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolated = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitInput = 4;

int exit_code(cdplan::ErrorCode code) {
  using cdplan::ErrorCode;
  switch (code) {
    case ErrorCode::kParseError:
    case ErrorCode::kSchemaError:
    case ErrorCode::kIoError:
    case ErrorCode::kDegenerateTriangle:
    case ErrorCode::kDegenerateTetrahedron:
    case ErrorCode::kNonPlanar:
    case ErrorCode::kSingularJacobian:
    case ErrorCode::kNotInteriorFollower:
    case ErrorCode::kSingularCommunication:
      return kExitInput;
    default:
      return kExitInfeasible;
  }
}

std::filesystem::path output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("CDPLAN_OUTDIR"); env && *env) return env;
  return ".";
}

struct Common {
  std::string scenario;
  std::string outdir;
  std::string plant;
  bool degrees = false;
  bool json_only = false;
};

cdplan::Scenario load(const Common& c, bool check_endpoints = true) {
  cdplan::LoadOptions opt;
  opt.degrees = c.degrees;
  opt.check_endpoints = check_endpoints;
  cdplan::Scenario s = cdplan::load_scenario(c.scenario, opt);
  if (!c.plant.empty()) s.simulation.plant = cdplan::parse_plant(c.plant);
  return s;
}

void print_rows(const cdplan::RunReport& r) {
  for (const auto& row : r.safety) {
    std::cout << (row.pass ? "  ok   " : "  FAIL ") << row.name << "  margin " << row.margin
              << "  (" << row.description << ")\n";
  }
  std::cout << "  max deviation " << r.deviation.max_deviation << " m, delta " << r.delta
            << " m" << (r.deviation.violated ? "  VIOLATED" : "") << "\n";
}

int finish(const cdplan::RunReport& r, const Common& c) {
  cdplan::EmitOptions emit;
  emit.csv = !c.json_only;
  for (const auto& p : cdplan::emit(r, output_dir(c.outdir), emit)) {
    std::cout << "wrote " << p.string() << "\n";
  }
  print_rows(r);
  return r.all_pass() ? kExitOk : kExitViolated;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuum-deformation planner for leader-follower quadcopter teams"};
  app.require_subcommand(1);

  Common c;
  double tol_gamma = 0.0;
  double tol_t = 0.0;
  std::string trajectory;
  std::vector<double> stack;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("scenario", c.scenario, "Scenario JSON file")->required();
    sub->add_flag("--degrees", c.degrees, "Angles in the scenario are degrees");
  };
  auto add_output = [&](CLI::App* sub) {
    sub->add_option("--outdir", c.outdir, "Output directory (default $CDPLAN_OUTDIR or .)");
    sub->add_option("--plant", c.plant, "ideal | double_integrator | quadcopter");
    sub->add_flag("--json-only", c.json_only, "Write report.json only");
  };

  CLI::App* plan = app.add_subcommand("plan", "Run the full pipeline");
  add_common(plan);
  add_output(plan);
  plan->add_option("--tol-gamma", tol_gamma, "Multiplier iteration tolerance (relative)");
  plan->add_option("--tol-T", tol_t, "Travel-time bisection tolerance, s");

  CLI::App* astar_only = app.add_subcommand("astar-only", "Print the A* path and waypoints");
  add_common(astar_only);

  CLI::App* decompose =
      app.add_subcommand("decompose", "Print the deformation parameters of a leader stack");
  add_common(decompose);
  decompose->add_option("--stack", stack, "x1 x2 x3 y1 y2 y3 z1 z2 z3")->expected(9)->required();

  CLI::App* simulate =
      app.add_subcommand("simulate", "Re-run the acquisition on an exported trajectory");
  add_common(simulate);
  add_output(simulate);
  simulate->add_option("trajectory", trajectory, "trajectory.csv from a previous plan")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try {
    if (plan->parsed()) {
      cdplan::Scenario s = load(c);
      if (tol_gamma > 0.0) s.solver.eps_gamma = tol_gamma;
      if (tol_t > 0.0) s.timing.eps_T = tol_t;
      const cdplan::RunReport r = cdplan::run_pipeline(s);
      std::cout << "t_u = " << r.plan.timing.t_u << " s over " << r.plan.segments.size()
                << " segments\n";
      return finish(r, c);
    }
    if (astar_only->parsed()) {
      const cdplan::AstarStage a = cdplan::run_astar(load(c));
      std::cout << cdplan::astar_json(a);
      return kExitOk;
    }
    if (decompose->parsed()) {
      const cdplan::Scenario s = load(c, false);
      cdplan::LeaderStack y;
      for (int i = 0; i < 9; ++i) y[i] = stack[static_cast<std::size_t>(i)];
      const cdplan::PlanarAffine a = cdplan::leaders_to_params(y, s.formation);
      cdplan::DeformationParams p = cdplan::polar_decompose(a.q_xy);
      p.s = a.s;
      std::cout << cdplan::params_json(p, c.degrees);
      return kExitOk;
    }
    if (simulate->parsed()) {
      const cdplan::Scenario s = load(c, false);
      const cdplan::RunReport r =
          cdplan::simulate_only(s, cdplan::load_trajectory_csv(trajectory));
      return finish(r, c);
    }
  } catch (const cdplan::PlanningError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}
