#pragma once

#include <array>
#include <optional>
#include <vector>

#include "scmtransfer/primitives.hpp"
#include "scmtransfer/transfer.hpp"
#include "scmtransfer/vehicle.hpp"

namespace scmt {

using Mat3 = std::array<std::array<double, 3>, 3>;
using Mat2 = std::array<std::array<double, 2>, 2>;

Mat3 diag3(double a, double b, double c);
Mat2 diag2(double a, double b);

struct MpcConfig {
  int horizon = 10;                     // N
  Mat3 Q = diag3(10.0, 10.0, 1.0);      // state error weight
  Mat2 R = diag2(1.0, 1.0);             // command error weight
  double eps_u_v = 0.2;                 // max per-step change, m/s
  double eps_u_omega = 0.3;             // max per-step change, rad/s
  double dt = 0.1;
  CommandBounds command_constraints;    // refreshed from LearnerLimits
  double constraint_margin = 0.03;      // fraction of the box range kept in reserve
  double state_xy_bound = 1e9;          // workspace box half-width
  double obstacle_margin = 0.05;        // inflation for the penalty, m
  double obstacle_penalty = 100.0;      // initial penalty weight
  int max_iterations = 200;
  int max_escalations = 5;
};

struct ReferencePlan {
  std::vector<Pose> states;      // horizon + 1 poses; states[0] anchors the
                                 // current path position, states[k] is the
                                 // reference for the k-th predicted state
  std::vector<Command> commands; // horizon - 1 reference commands
};

// References along the path from the point nearest the current pose,
// spaced spacing_scale * v_max * dt in arc length, headings tangent,
// saturating at the goal.
ReferencePlan sample_references(const std::vector<Point2>& path, const Pose& current,
                                const MpcConfig& cfg, double spacing_scale = 1.0);

struct MpcDiagnostics {
  double cost = 0.0;
  int iterations = 0;
  int escalations = 0;
  double min_clearance = 0.0;
  double box_margin = 0.0;  // distance of u_0 to the command box edges
};

// Direct single shooting with projected descent and a quadratic obstacle
// penalty; hard constraints (command box, slew) hold exactly by
// projection, obstacle clearance is verified on the returned rollout.
// Throws Infeasible after penalty escalations fail.
std::vector<Command> solve_ocp(const Pose& x0, const ReferencePlan& ref,
                               const std::vector<Obstacle>& obstacles, const MpcConfig& cfg,
                               const std::vector<Command>& warm_start,
                               std::optional<Command> prev_applied,
                               MpcDiagnostics* diag = nullptr);

double ocp_cost(const Pose& x0, const ReferencePlan& ref, const std::vector<Command>& u,
                const MpcConfig& cfg);

// Analytic gradient of the penalty-augmented cost (adjoint sweep);
// exposed for the finite-difference contract check.
std::vector<std::array<double, 2>> ocp_cost_gradient(const Pose& x0, const ReferencePlan& ref,
                                                     const std::vector<Command>& u,
                                                     const std::vector<Obstacle>& obstacles,
                                                     const MpcConfig& cfg,
                                                     double penalty_weight,
                                                     double* cost_out = nullptr);

struct MpcStepResult {
  Command command;                 // u_0
  std::vector<Command> sequence;   // full solution, next warm start
  MpcDiagnostics diag;
};

// One receding-horizon step: refreshes the command constraints from the
// learner limits, warm-starts from the shifted previous solution.
MpcStepResult mpc_step(const Pose& state, const std::vector<Point2>& path,
                       const std::vector<Obstacle>& obstacles, MpcConfig cfg,
                       const LearnerLimits& limits,
                       const std::vector<Command>& prev_solution,
                       std::optional<Command> prev_applied, double spacing_scale = 1.0);

}  // namespace scmt
