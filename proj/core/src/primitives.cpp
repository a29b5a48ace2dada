#include "scmtransfer/primitives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace scmt {

double MotionPrimitive::path_length() const {
  double len = 0.0;
  for (std::size_t i = 0; i + 1 < states.size(); ++i)
    len += std::hypot(states[i + 1].x - states[i].x, states[i + 1].y - states[i].y);
  return len;
}

std::vector<Command> make_command_lattice(const CommandBounds& bounds, int n_v, int n_omega,
                                          double v_exponent, double omega_exponent) {
  std::vector<double> vs, ws;
  for (int i = 0; i < n_v; ++i) {
    const double t = n_v > 1 ? static_cast<double>(i) / (n_v - 1) : 0.0;
    vs.push_back(bounds.v_min + std::pow(t, v_exponent) * (bounds.v_max - bounds.v_min));
  }
  // Omega is spaced symmetrically about the center of its range.
  const double wc = 0.5 * (bounds.omega_min + bounds.omega_max);
  const double wr = 0.5 * (bounds.omega_max - bounds.omega_min);
  for (int i = 0; i < n_omega; ++i) {
    const double t = n_omega > 1 ? 2.0 * i / (n_omega - 1) - 1.0 : 0.0;
    const double mag = std::pow(std::abs(t), omega_exponent);
    ws.push_back(wc + std::copysign(mag, t) * wr);
  }
  std::vector<Command> grid;
  grid.reserve(vs.size() * ws.size());
  for (double v : vs)
    for (double w : ws) grid.push_back({v, w});
  return grid;
}

PrimitiveLibrary generate_library(const std::vector<Command>& grid, double dt,
                                  double duration) {
  PrimitiveLibrary lib;
  lib.command_grid = grid;
  const int steps = std::max(1, static_cast<int>(std::llround(duration / dt)));
  for (const Command& u : grid) {
    MotionPrimitive prim;
    prim.command = u;
    prim.duration = duration;
    prim.states.reserve(steps + 1);
    Pose p{};
    prim.states.push_back(p);
    for (int k = 0; k < steps; ++k) {
      p = step_teacher(p, u, dt);
      prim.states.push_back(p);
    }
    lib.primitives.push_back(std::move(prim));
  }
  return lib;
}

PrimitiveLibrary prune_library(const PrimitiveLibrary& lib, const LearnerLimits& limits) {
  PrimitiveLibrary out;
  for (const auto& prim : lib.primitives) {
    bool keep;
    if (limits.hull) {
      keep = point_in_polygon(*limits.hull, {prim.command.v, prim.command.omega});
    } else {
      keep = limits.teacher_box.contains(prim.command);
    }
    if (keep) {
      out.primitives.push_back(prim);
      out.command_grid.push_back(prim.command);
    }
  }
  if (out.primitives.empty()) throw EmptyLibrary("no primitive survives the learner limits");
  return out;
}

double dtw_distance(const std::vector<Point2>& a, const std::vector<Point2>& b) {
  const std::size_t n = a.size(), m = b.size();
  if (n == 0 || m == 0) throw DegenerateInput("dtw needs non-empty sequences");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(m + 1, inf), cur(m + 1, inf);
  prev[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = inf;
    for (std::size_t j = 1; j <= m; ++j) {
      const double d = dist(a[i - 1], b[j - 1]);
      cur[j] = d + std::min({prev[j], cur[j - 1], prev[j - 1]});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

Pose transform_to_frame(const Pose& frame, const Pose& local) {
  const double c = std::cos(frame.theta), s = std::sin(frame.theta);
  Pose out;
  out.x = frame.x + c * local.x - s * local.y;
  out.y = frame.y + s * local.x + c * local.y;
  out.theta = wrap_angle(frame.theta + local.theta);
  return out;
}

PrimitiveChoice select_primitive(const PrimitiveLibrary& lib,
                                 const std::vector<Point2>& desired_path, double path_pos,
                                 const Pose& current, const PlannerConfig& cfg) {
  if (lib.primitives.empty()) throw EmptyLibrary("cannot plan from an empty library");

  PrimitiveChoice best;
  best.cost = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(lib.primitives.size()); ++i) {
    const auto& prim = lib.primitives[i];
    std::vector<Point2> world;
    world.reserve(prim.states.size());
    for (const auto& st : prim.states) {
      const Pose w = transform_to_frame(current, st);
      world.push_back({w.x, w.y});
    }
    // Desired segment: same arc length as the primitive, from the current
    // path position.
    const std::vector<Point2> segment =
        sub_polyline(desired_path, path_pos, std::max(prim.path_length(), 1e-9));
    const double e_d = dtw_distance(segment, world);

    const Pose end_world = transform_to_frame(current, prim.states.back());
    const Point2 tangent = tangent_at_arclength(
        desired_path, std::min(path_pos + prim.path_length(), polyline_length(desired_path)));
    const double theta_path = std::atan2(tangent.y, tangent.x);
    const double e_theta = std::abs(wrap_angle(end_world.theta - theta_path));

    const double cost = cfg.k_d * e_d + cfg.k_theta * e_theta;
    if (cost < best.cost) {
      best.cost = cost;
      best.index = i;
    }
  }
  return best;
}

bool replan_trigger(const Pose& current, const std::vector<Point2>& local_plan,
                    const std::vector<Obstacle>& obstacles, const PlannerConfig& cfg) {
  if (local_plan.empty()) return true;
  const Point2 pos{current.x, current.y};
  const double deviation = local_plan.size() == 1
                               ? dist(pos, local_plan.front())
                               : dist(pos, nearest_on_polyline(local_plan, pos).first);

  double clearance = std::numeric_limits<double>::infinity();
  for (const auto& obs : obstacles) {
    const double d = dist(pos, obs.center);
    if (d <= cfg.fov_radius) clearance = std::min(clearance, d);
  }
  const double eps = std::isfinite(clearance) ? cfg.eta * clearance : cfg.eps_bar;
  return deviation > eps;
}

}  // namespace scmt
