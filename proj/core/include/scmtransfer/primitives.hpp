#pragma once

#include <vector>

#include "scmtransfer/geometry.hpp"
#include "scmtransfer/transfer.hpp"
#include "scmtransfer/vehicle.hpp"

namespace scmt {

// A fixed command held for a duration plus the resulting origin-frame
// teacher state sequence (first pose is the identity).
struct MotionPrimitive {
  Command command;
  double duration = 1.0;
  std::vector<Pose> states;

  double path_length() const;
};

struct PrimitiveLibrary {
  std::vector<MotionPrimitive> primitives;
  std::vector<Command> command_grid;
};

struct PlannerConfig {
  double k_d = 1.0;
  double k_theta = 1.0;
  int horizon = 2;            // primitives per local plan
  double eta = 0.1;           // clearance fraction for the replan threshold
  double eps_bar = 0.5;       // m, max deviation allowed in open space
  double fov_radius = 3.0;    // m
  double dt = 0.1;            // s
  double duration = 1.0;      // s per primitive
};

// Uniform or power-spaced command lattice within the given bounds.
// Exponent 1 gives uniform spacing; larger exponents concentrate samples
// toward v_min and omega = center.
std::vector<Command> make_command_lattice(const CommandBounds& bounds, int n_v, int n_omega,
                                          double v_exponent = 1.0,
                                          double omega_exponent = 1.0);

PrimitiveLibrary generate_library(const std::vector<Command>& grid, double dt,
                                  double duration);

// Keeps exactly the primitives whose command lies inside the limits (hull
// when present, teacher box otherwise). Throws EmptyLibrary when nothing
// survives.
PrimitiveLibrary prune_library(const PrimitiveLibrary& lib, const LearnerLimits& limits);

// Classic dynamic-programming DTW over Euclidean (x, y) distances.
double dtw_distance(const std::vector<Point2>& a, const std::vector<Point2>& b);

struct PrimitiveChoice {
  int index = -1;
  double cost = 0.0;
};

// Transforms each primitive into the current pose frame and scores it
// against the matching desired-path segment: k_d * DTW + k_theta * |end
// heading error|; lowest index wins ties.
PrimitiveChoice select_primitive(const PrimitiveLibrary& lib,
                                 const std::vector<Point2>& desired_path, double path_pos,
                                 const Pose& current, const PlannerConfig& cfg);

struct Obstacle {
  Point2 center;
  double radius = 0.1;
};

// Event trigger: deviation from the local plan exceeds eta * clearance
// (obstacles in view) or eps_bar (free space).
bool replan_trigger(const Pose& current, const std::vector<Point2>& local_plan,
                    const std::vector<Obstacle>& obstacles, const PlannerConfig& cfg);

Pose transform_to_frame(const Pose& frame, const Pose& local);

}  // namespace scmt
