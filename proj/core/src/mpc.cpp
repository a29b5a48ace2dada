#include "scmtransfer/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace scmt {

Mat3 diag3(double a, double b, double c) {
  return {{{a, 0.0, 0.0}, {0.0, b, 0.0}, {0.0, 0.0, c}}};
}
Mat2 diag2(double a, double b) { return {{{a, 0.0}, {0.0, b}}}; }

ReferencePlan sample_references(const std::vector<Point2>& path, const Pose& current,
                                const MpcConfig& cfg, double spacing_scale) {
  ReferencePlan plan;
  const double total = polyline_length(path);
  const auto [near_pt, s0] = nearest_on_polyline(path, {current.x, current.y});
  (void)near_pt;
  const double spacing = std::max(1e-9, spacing_scale) * cfg.command_constraints.v_max * cfg.dt;
  // states[0] anchors the current position on the path; states[k] is the
  // tracking reference for the k-th predicted state.
  for (int k = 0; k <= cfg.horizon; ++k) {
    const double s = std::min(s0 + k * spacing, total);
    const Point2 p = point_at_arclength(path, s);
    const Point2 t = tangent_at_arclength(path, s);
    plan.states.push_back({p.x, p.y, std::atan2(t.y, t.x)});
  }
  plan.commands.assign(std::max(0, cfg.horizon - 1), Command{0.0, 0.0});
  return plan;
}

namespace {

struct Rollout {
  std::vector<double> x, y, theta;  // unwrapped theta, size N+1
};

Rollout roll(const Pose& x0, const std::vector<Command>& u, double dt) {
  Rollout r;
  const std::size_t n = u.size();
  r.x.resize(n + 1);
  r.y.resize(n + 1);
  r.theta.resize(n + 1);
  r.x[0] = x0.x;
  r.y[0] = x0.y;
  r.theta[0] = x0.theta;
  for (std::size_t k = 0; k < n; ++k) {
    r.x[k + 1] = r.x[k] + dt * u[k].v * std::cos(r.theta[k]);
    r.y[k + 1] = r.y[k] + dt * u[k].v * std::sin(r.theta[k]);
    r.theta[k + 1] = r.theta[k] + dt * u[k].omega;
  }
  return r;
}

const Pose& ref_state(const ReferencePlan& ref, std::size_t k) {
  return ref.states[std::min(k, ref.states.size() - 1)];
}

Command ref_command(const ReferencePlan& ref, std::size_t k) {
  if (ref.commands.empty()) return {0.0, 0.0};
  return ref.commands[std::min(k, ref.commands.size() - 1)];
}

// Stage cost pieces; theta error wrapped.
double quad_form3(const Mat3& Q, double ex, double ey, double et) {
  const double r0 = Q[0][0] * ex + Q[0][1] * ey + Q[0][2] * et;
  const double r1 = Q[1][0] * ex + Q[1][1] * ey + Q[1][2] * et;
  const double r2 = Q[2][0] * ex + Q[2][1] * ey + Q[2][2] * et;
  return ex * r0 + ey * r1 + et * r2;
}

double augmented_cost(const Pose& x0, const ReferencePlan& ref, const std::vector<Command>& u,
                      const std::vector<Obstacle>& obstacles, const MpcConfig& cfg,
                      double penalty_weight, double* tracking_out) {
  const Rollout r = roll(x0, u, cfg.dt);
  double track = 0.0, pen = 0.0;
  for (std::size_t k = 1; k < r.x.size(); ++k) {
    const Pose& xr = ref_state(ref, k);
    const double et = wrap_angle(r.theta[k] - xr.theta);
    track += quad_form3(cfg.Q, r.x[k] - xr.x, r.y[k] - xr.y, et);
    for (const auto& obs : obstacles) {
      const double d = std::hypot(r.x[k] - obs.center.x, r.y[k] - obs.center.y);
      const double viol = obs.radius + cfg.obstacle_margin - d;
      if (viol > 0.0) pen += viol * viol;
    }
    const double bx = std::max(0.0, std::abs(r.x[k]) - cfg.state_xy_bound);
    const double by = std::max(0.0, std::abs(r.y[k]) - cfg.state_xy_bound);
    pen += bx * bx + by * by;
  }
  for (std::size_t k = 0; k < u.size(); ++k) {
    const Command ur = ref_command(ref, k);
    const double ev = u[k].v - ur.v;
    const double ew = u[k].omega - ur.omega;
    track += cfg.R[0][0] * ev * ev + (cfg.R[0][1] + cfg.R[1][0]) * ev * ew +
             cfg.R[1][1] * ew * ew;
  }
  if (tracking_out) *tracking_out = track;
  return track + penalty_weight * pen;
}

double min_clearance(const Pose& x0, const std::vector<Command>& u,
                     const std::vector<Obstacle>& obstacles, double dt) {
  if (obstacles.empty()) return std::numeric_limits<double>::infinity();
  const Rollout r = roll(x0, u, dt);
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < r.x.size(); ++k) {
    for (const auto& obs : obstacles) {
      const double d = std::hypot(r.x[k] - obs.center.x, r.y[k] - obs.center.y) - obs.radius;
      worst = std::min(worst, d);
    }
  }
  return worst;
}

// Feasible-set retraction: command box first, then the slew chain.
void retract(std::vector<Command>& u, const MpcConfig& cfg, std::optional<Command> prev) {
  const CommandBounds& b = cfg.command_constraints;
  Command anchor{};
  bool have_anchor = false;
  if (prev) {
    anchor = clamp_command(*prev, b);
    have_anchor = true;
  }
  for (auto& uk : u) {
    uk = clamp_command(uk, b);
    if (have_anchor) {
      uk.v = std::clamp(uk.v, anchor.v - cfg.eps_u_v, anchor.v + cfg.eps_u_v);
      uk.omega = std::clamp(uk.omega, anchor.omega - cfg.eps_u_omega,
                            anchor.omega + cfg.eps_u_omega);
    }
    anchor = uk;
    have_anchor = true;
  }
}

}  // namespace

double ocp_cost(const Pose& x0, const ReferencePlan& ref, const std::vector<Command>& u,
                const MpcConfig& cfg) {
  double track = 0.0;
  augmented_cost(x0, ref, u, {}, cfg, 0.0, &track);
  return track;
}

std::vector<std::array<double, 2>> ocp_cost_gradient(const Pose& x0, const ReferencePlan& ref,
                                                     const std::vector<Command>& u,
                                                     const std::vector<Obstacle>& obstacles,
                                                     const MpcConfig& cfg,
                                                     double penalty_weight, double* cost_out) {
  const std::size_t n = u.size();
  const Rollout r = roll(x0, u, cfg.dt);
  if (cost_out)
    *cost_out = augmented_cost(x0, ref, u, obstacles, cfg, penalty_weight, nullptr);

  // Stage gradients wrt states (k = 1..N).
  std::vector<std::array<double, 3>> gx(n + 1, {0.0, 0.0, 0.0});
  for (std::size_t k = 1; k <= n; ++k) {
    const Pose& xr = ref_state(ref, k);
    const double ex = r.x[k] - xr.x;
    const double ey = r.y[k] - xr.y;
    const double et = wrap_angle(r.theta[k] - xr.theta);
    gx[k][0] = 2.0 * (cfg.Q[0][0] * ex + cfg.Q[0][1] * ey + cfg.Q[0][2] * et);
    gx[k][1] = 2.0 * (cfg.Q[1][0] * ex + cfg.Q[1][1] * ey + cfg.Q[1][2] * et);
    gx[k][2] = 2.0 * (cfg.Q[2][0] * ex + cfg.Q[2][1] * ey + cfg.Q[2][2] * et);
    for (const auto& obs : obstacles) {
      const double dx = r.x[k] - obs.center.x;
      const double dy = r.y[k] - obs.center.y;
      const double d = std::hypot(dx, dy);
      const double viol = obs.radius + cfg.obstacle_margin - d;
      if (viol > 0.0 && d > 1e-12) {
        gx[k][0] += penalty_weight * 2.0 * viol * (-dx / d);
        gx[k][1] += penalty_weight * 2.0 * viol * (-dy / d);
      }
    }
    const double bx = std::abs(r.x[k]) - cfg.state_xy_bound;
    if (bx > 0.0) gx[k][0] += penalty_weight * 2.0 * bx * (r.x[k] > 0 ? 1.0 : -1.0);
    const double by = std::abs(r.y[k]) - cfg.state_xy_bound;
    if (by > 0.0) gx[k][1] += penalty_weight * 2.0 * by * (r.y[k] > 0 ? 1.0 : -1.0);
  }

  // Adjoint sweep.
  std::vector<std::array<double, 2>> grad(n, {0.0, 0.0});
  std::array<double, 3> lam = gx[n];
  for (std::size_t k = n; k-- > 0;) {
    const double c = std::cos(r.theta[k]);
    const double s = std::sin(r.theta[k]);
    const Command ur = ref_command(ref, k);
    const double ev = u[k].v - ur.v;
    const double ew = u[k].omega - ur.omega;
    grad[k][0] = 2.0 * (cfg.R[0][0] * ev + cfg.R[0][1] * ew) + cfg.dt * (c * lam[0] + s * lam[1]);
    grad[k][1] = 2.0 * (cfg.R[1][0] * ev + cfg.R[1][1] * ew) + cfg.dt * lam[2];
    if (k > 0) {
      // lam_k = g_k + A_k^T lam_{k+1}
      std::array<double, 3> next;
      next[0] = gx[k][0] + lam[0];
      next[1] = gx[k][1] + lam[1];
      next[2] = gx[k][2] + lam[2] +
                cfg.dt * u[k].v * (-std::sin(r.theta[k]) * lam[0] + std::cos(r.theta[k]) * lam[1]);
      lam = next;
    }
  }
  return grad;
}

std::vector<Command> solve_ocp(const Pose& x0, const ReferencePlan& ref,
                               const std::vector<Obstacle>& obstacles, const MpcConfig& cfg,
                               const std::vector<Command>& warm_start,
                               std::optional<Command> prev_applied, MpcDiagnostics* diag) {
  const int n = std::max(1, cfg.horizon);
  std::vector<Command> u = warm_start;
  u.resize(n, u.empty() ? Command{0.0, 0.0} : u.back());
  retract(u, cfg, prev_applied);

  double penalty = cfg.obstacle_penalty;
  int iterations = 0;
  for (int esc = 0; esc <= cfg.max_escalations; ++esc) {
    double cost = augmented_cost(x0, ref, u, obstacles, cfg, penalty, nullptr);
    double alpha = 0.1;
    for (int it = 0; it < cfg.max_iterations; ++it) {
      ++iterations;
      const auto grad = ocp_cost_gradient(x0, ref, u, obstacles, cfg, penalty, nullptr);
      double gnorm = 0.0;
      for (const auto& g : grad) gnorm += g[0] * g[0] + g[1] * g[1];
      gnorm = std::sqrt(gnorm);
      if (gnorm < 1e-10) break;

      bool accepted = false;
      for (int ls = 0; ls < 30; ++ls) {
        std::vector<Command> trial = u;
        for (int k = 0; k < n; ++k) {
          trial[k].v -= alpha * grad[k][0];
          trial[k].omega -= alpha * grad[k][1];
        }
        retract(trial, cfg, prev_applied);
        const double trial_cost = augmented_cost(x0, ref, trial, obstacles, cfg, penalty, nullptr);
        if (trial_cost < cost - 1e-14) {
          u = std::move(trial);
          const double drop = cost - trial_cost;
          cost = trial_cost;
          accepted = true;
          alpha = std::min(alpha * 1.3, 10.0);
          if (drop < 1e-12 * std::max(1.0, cost)) it = cfg.max_iterations;  // stagnated
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) break;
    }

    const double clearance = min_clearance(x0, u, obstacles, cfg.dt);
    if (clearance > 0.0) {
      if (diag) {
        diag->cost = ocp_cost(x0, ref, u, cfg);
        diag->iterations = iterations;
        diag->escalations = esc;
        diag->min_clearance = clearance;
        const CommandBounds& b = cfg.command_constraints;
        diag->box_margin = std::min({u[0].v - b.v_min, b.v_max - u[0].v,
                                     u[0].omega - b.omega_min, b.omega_max - u[0].omega});
      }
      return u;
    }
    penalty *= 2.0;
  }
  throw Infeasible("obstacle clearance unsatisfied after penalty escalations");
}

MpcStepResult mpc_step(const Pose& state, const std::vector<Point2>& path,
                       const std::vector<Obstacle>& obstacles, MpcConfig cfg,
                       const LearnerLimits& limits,
                       const std::vector<Command>& prev_solution,
                       std::optional<Command> prev_applied, double spacing_scale) {
  // Operate a small margin inside the learned box: saturated demands then
  // stay inside the command-pair hull where mapping regions exist.
  const double mv = cfg.constraint_margin * (limits.teacher_box.v_max - limits.teacher_box.v_min);
  const double mw =
      cfg.constraint_margin * (limits.teacher_box.omega_max - limits.teacher_box.omega_min);
  cfg.command_constraints = {limits.teacher_box.v_min + mv, limits.teacher_box.v_max - mv,
                             limits.teacher_box.omega_min + mw,
                             limits.teacher_box.omega_max - mw};
  const ReferencePlan ref = [&] {
    ReferencePlan plan = sample_references(path, state, cfg, spacing_scale);
    if (!prev_solution.empty()) {
      // Warm-started command references: previous solution shifted one step.
      for (std::size_t k = 0; k + 1 < prev_solution.size() && k < plan.commands.size(); ++k)
        plan.commands[k] = prev_solution[k + 1];
    }
    return plan;
  }();

  std::vector<Command> warm;
  if (!prev_solution.empty()) {
    warm.assign(prev_solution.begin() + 1, prev_solution.end());
    warm.push_back(prev_solution.back());
  }

  MpcStepResult result;
  result.sequence = solve_ocp(state, ref, obstacles, cfg, warm, prev_applied, &result.diag);
  result.command = result.sequence.front();
  return result;
}

}  // namespace scmt
