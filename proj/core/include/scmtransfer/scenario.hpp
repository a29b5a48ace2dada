#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scmtransfer/mpc.hpp"
#include "scmtransfer/primitives.hpp"
#include "scmtransfer/transfer.hpp"
#include "scmtransfer/vehicle.hpp"

namespace scmt {

// Full closed-loop scenario description; loadable from a JSON document
// with nested sections (teacher, learner, path, obstacles, transfer,
// planner, mpc).
struct Scenario {
  std::string name = "scenario";
  std::string mode = "mpc";  // "mpc" | "primitive"
  std::uint64_t seed = 1;
  double max_sim_time = 300.0;
  double goal_tolerance = 0.15;
  double control_dt = 0.1;

  double start_x = 0.0;
  double start_y = 0.0;
  double start_theta = 0.0;

  CommandBounds teacher_bounds{0.05, 0.6, -M_PI / 4.0, M_PI / 4.0};
  LearnerSpec learner;

  std::vector<Point2> path;
  std::vector<Obstacle> obstacles;

  // transfer policy
  std::string policy = "scm";  // "scm" | "direct"
  double toggle_off_at = -1.0;  // seconds; negative = never
  int grid_rows = 11;
  int grid_cols = 11;
  int k_min = 5;

  // primitive planner
  PlannerConfig planner;
  int lattice_n_v = 11;
  int lattice_n_omega = 11;
  double lattice_v_exponent = 1.5;
  double lattice_omega_exponent = 2.0;
  int calibration_grid = 0;     // n x n learner commands executed up front
  int calibration_repeats = 10;

  // mpc teacher
  MpcConfig mpc;
  int explore_steps = 10;        // cold-start window with tightened spacing
  double explore_spacing = 0.5;
};

Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& s, const std::string& path);
Scenario scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const Scenario& s);

// Built-in presets: "mpc_table2", "primitive_table1", "mpc_poly7", "toggle".
Scenario preset_scenario(const std::string& name);

// Two-lobe sinusoid waypoint path.
std::vector<Point2> make_s_path(double length, double amplitude, double wavelength,
                                int samples);

}  // namespace scmt
