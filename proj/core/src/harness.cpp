#include "scmtransfer/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace scmt {

using json = nlohmann::ordered_json;

namespace {

constexpr const char* kTrajectoryHeader =
    "t,x,y,theta,v_teacher,omega_teacher,v_learner,omega_learner,mode,deviation";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double path_deviation(const std::vector<Point2>& path, const Pose& pose) {
  return dist({pose.x, pose.y}, nearest_on_polyline(path, {pose.x, pose.y}).first);
}

bool in_collision(const std::vector<Obstacle>& obstacles, const Pose& pose) {
  for (const auto& obs : obstacles)
    if (dist({pose.x, pose.y}, obs.center) <= obs.radius) return true;
  return false;
}

Command slew_toward(const Command& prev, const Command& target, const MpcConfig& cfg) {
  return {std::clamp(target.v, prev.v - cfg.eps_u_v, prev.v + cfg.eps_u_v),
          std::clamp(target.omega, prev.omega - cfg.eps_u_omega,
                     prev.omega + cfg.eps_u_omega)};
}

struct EdgeEvidence {
  double sum_teacher_v = 0.0, sum_teacher_omega = 0.0;
  double sum_learner_v = 0.0, sum_learner_omega = 0.0;
  int count = 0;
};

struct LoopState {
  PairStore store;
  LearnerLimits limits;
  std::vector<LimitsEvent> events;
  bool limits_changed = false;
  // Running means of observations whose executed command was pinned at a
  // learner-domain edge: v_min, v_max, omega_min, omega_max.
  std::array<EdgeEvidence, 4> edge_evidence{};
};

// Records one observed transition and applies the limit-update policy:
// pinned (clamped) observations accumulate per-edge boundary evidence
// that sets box edges directly; refined pairs outside the box trigger a
// proportional recalculation.
void observe(LoopState& ls, const Command& executed, const Pose& p0, const Pose& p1,
             double dt, double noise_sigma, double t_now) {
  const auto res = ls.store.record_observation(executed, p0, p1, dt, noise_sigma);
  if (!res.accepted) return;

  const auto apply_update = [&](const CommandPair& pair, bool boundary) {
    const LimitsUpdate upd =
        update_limits(ls.limits, pair, boundary, ls.store.refined_pairs());
    for (const auto& e : upd.edges)
      ls.events.push_back({t_now, e.edge, e.rule, e.old_value, e.new_value});
    if (upd.changed) ls.limits_changed = true;
  };

  const CommandBounds& lb = ls.store.learner_bounds();
  const double vr = lb.v_max - lb.v_min;
  const double wr = lb.omega_max - lb.omega_min;
  const bool pinned[4] = {std::abs(executed.v - lb.v_min) <= 1e-9 * vr,
                          std::abs(executed.v - lb.v_max) <= 1e-9 * vr,
                          std::abs(executed.omega - lb.omega_min) <= 1e-9 * wr,
                          std::abs(executed.omega - lb.omega_max) <= 1e-9 * wr};
  for (int e = 0; e < 4; ++e) {
    if (!pinned[e]) continue;
    EdgeEvidence& acc = ls.edge_evidence[e];
    acc.sum_teacher_v += res.teacher_equiv.v;
    acc.sum_teacher_omega += res.teacher_equiv.omega;
    acc.sum_learner_v += executed.v;
    acc.sum_learner_omega += executed.omega;
    acc.count += 1;
    if (acc.count < ls.store.k_min()) continue;
    CommandPair pair;
    const double inv = 1.0 / acc.count;
    pair.teacher_equiv = {acc.sum_teacher_v * inv, acc.sum_teacher_omega * inv};
    pair.learner_cmd = {acc.sum_learner_v * inv, acc.sum_learner_omega * inv};
    // The pinned channel of the mean is exact; restate it to cancel any
    // rounding in the sum.
    if (e == 0) pair.learner_cmd.v = lb.v_min;
    if (e == 1) pair.learner_cmd.v = lb.v_max;
    if (e == 2) pair.learner_cmd.omega = lb.omega_min;
    if (e == 3) pair.learner_cmd.omega = lb.omega_max;
    pair.support_count = acc.count;
    apply_update(pair, true);
  }

  if (!res.refined) return;
  const CommandBounds& box = ls.limits.teacher_box;
  const double bvr = box.v_max - box.v_min;
  const double bwr = box.omega_max - box.omega_min;
  const bool v_outside = res.refined->teacher_equiv.v < box.v_min - 1e-9 * bvr ||
                         res.refined->teacher_equiv.v > box.v_max + 1e-9 * bvr;
  const bool omega_outside =
      res.refined->teacher_equiv.omega < box.omega_min - 1e-9 * bwr ||
      res.refined->teacher_equiv.omega > box.omega_max + 1e-9 * bwr;
  const bool boundary =
      on_learner_boundary(res.refined->learner_cmd, ls.store.learner_bounds(), 1e-9);
  if (boundary) {
    apply_update(*res.refined, true);
    return;
  }
  if (!v_outside && !omega_outside) return;
  // Outlier trigger: recalculate only the channels that sit outside the
  // box; the others are neutralized to their consistency point so the
  // proportional rule leaves them untouched.
  CommandPair trigger = *res.refined;
  const CommandBounds& lb2 = ls.store.learner_bounds();
  if (!v_outside) {
    const double t = (trigger.learner_cmd.v - lb2.v_min) / (lb2.v_max - lb2.v_min);
    trigger.teacher_equiv.v = box.v_min + t * bvr;
  }
  if (!omega_outside) {
    const double t =
        (trigger.learner_cmd.omega - lb2.omega_min) / (lb2.omega_max - lb2.omega_min);
    trigger.teacher_equiv.omega = box.omega_min + t * bwr;
  }
  apply_update(trigger, false);
}

RunMetrics finalize_metrics(const std::vector<StepRecord>& records, double dt,
                            bool goal_reached, bool collision, int dropped) {
  RunMetrics m;
  m.goal_reached = goal_reached;
  m.collision = collision;
  m.steps = static_cast<int>(records.size());
  m.dropped_observations = dropped;
  double sum = 0.0;
  for (const auto& r : records) {
    m.max_deviation = std::max(m.max_deviation, r.deviation);
    sum += r.deviation;
    if (r.mode == "MAPPED") ++m.mapped_count;
    else if (r.mode == "DIRECT") ++m.direct_count;
    else if (r.mode == "PERTURBED") ++m.perturbed_count;
    else ++m.baseline_count;
  }
  m.mean_deviation = records.empty() ? 0.0 : sum / records.size();
  m.completion_time = records.empty() ? 0.0 : records.back().t;
  (void)dt;
  return m;
}

// Shared MPC-mode loop. In ideal mode the plant is the teacher itself and
// the command box is pinned to the ground-truth learner limits.
RunResult run_mpc_loop(const Scenario& s, bool ideal) {
  Rng rng(s.seed);
  RunResult result{.metrics = {},
                   .trajectory = {},
                   .store = PairStore(s.grid_rows, s.grid_cols, s.k_min, s.learner.bounds,
                                      s.teacher_bounds),
                   .limits = LearnerLimits::cold_start(s.teacher_bounds, s.learner.bounds),
                   .limits_history = {}};
  LoopState ls{result.store, result.limits, {}, false};
  if (ideal) ls.limits.teacher_box = effective_command_box(s.learner);

  Pose pose{s.start_x, s.start_y, s.start_theta};
  std::vector<Command> warm;
  std::optional<Command> prev_applied;
  bool goal_reached = false, collision = false;
  double t = 0.0;
  int step_index = 0;
  const Point2 goal = s.path.back();

  while (t < s.max_sim_time) {
    const bool transfer_active = !ideal && s.policy == "scm" &&
                                 (s.toggle_off_at < 0.0 || t < s.toggle_off_at);
    const double spacing =
        (transfer_active && step_index < s.explore_steps) ? s.explore_spacing : 1.0;

    // With the framework off (baseline or post-toggle) the controller has
    // no learned constraints and plans over the teacher's own bounds.
    const bool framework_constraints = ideal || transfer_active;
    const LearnerLimits mpc_limits =
        framework_constraints ? ls.limits
                              : LearnerLimits::cold_start(s.teacher_bounds, s.learner.bounds);
    Command w_teacher;
    std::vector<Command> sequence;
    try {
      MpcStepResult mpc = mpc_step(pose, s.path, s.obstacles, s.mpc, mpc_limits, warm,
                                   prev_applied, spacing);
      w_teacher = mpc.command;
      sequence = std::move(mpc.sequence);
    } catch (const Infeasible&) {
      // Stop the vehicle within the slew budget.
      const Command prev = prev_applied.value_or(Command{0.0, 0.0});
      w_teacher = slew_toward(prev, {0.0, 0.0}, s.mpc);
      sequence.clear();
    }

    TransferOutcome outcome;
    std::string mode;
    if (transfer_active) {
      outcome = transfer(ls.store, ls.limits, w_teacher);
      mode = to_string(outcome.mode);
    } else {
      outcome.learner_cmd = w_teacher;
      mode = ideal ? "DIRECT" : "BASELINE";
    }

    const Pose p0 = pose;
    Command executed;
    if (ideal) {
      executed = w_teacher;
      pose = step_teacher(pose, executed, s.control_dt);
    } else {
      executed = clamp_command(outcome.learner_cmd, s.learner.bounds);
      pose = step_learner(pose, executed, s.learner, rng);
    }

    if (transfer_active)
      observe(ls, executed, p0, pose, s.control_dt, s.learner.noise_sigma, t + s.control_dt);

    t += s.control_dt;
    ++step_index;
    const double deviation = path_deviation(s.path, pose);
    result.trajectory.push_back(
        {t, pose, w_teacher, executed, mode, deviation});

    if (in_collision(s.obstacles, pose)) {
      collision = true;
      break;
    }
    if (dist({pose.x, pose.y}, goal) <= s.goal_tolerance) {
      goal_reached = true;
      break;
    }
    warm = std::move(sequence);
    prev_applied = w_teacher;
  }

  result.store = std::move(ls.store);
  result.limits = std::move(ls.limits);
  result.limits_history = std::move(ls.events);
  result.metrics = finalize_metrics(result.trajectory, s.control_dt, goal_reached, collision,
                                    result.store.dropped_observations());
  return result;
}

// Primitive-mode loop: calibration pairs, library pruning, greedy
// two-primitive local plans and event-triggered replanning.
RunResult run_primitive_loop(const Scenario& s) {
  Rng rng(s.seed);
  RunResult result{.metrics = {},
                   .trajectory = {},
                   .store = PairStore(s.grid_rows, s.grid_cols, s.k_min, s.learner.bounds,
                                      s.teacher_bounds),
                   .limits = LearnerLimits::cold_start(s.teacher_bounds, s.learner.bounds),
                   .limits_history = {}};
  LoopState ls{result.store, result.limits, {}, false};

  // Up-front calibration: an n x n grid of learner commands, each executed
  // repeatedly from rest.
  if (s.calibration_grid > 1) {
    const int n = s.calibration_grid;
    for (int i = 0; i < n; ++i) {
      for (int jj = 0; jj < n; ++jj) {
        const Command cmd{
            s.learner.bounds.v_min +
                (s.learner.bounds.v_max - s.learner.bounds.v_min) * i / (n - 1),
            s.learner.bounds.omega_min +
                (s.learner.bounds.omega_max - s.learner.bounds.omega_min) * jj / (n - 1)};
        for (int r = 0; r < s.calibration_repeats; ++r) {
          const Pose p0{};
          const Pose p1 = step_learner(p0, cmd, s.learner, rng);
          observe(ls, cmd, p0, p1, s.control_dt, s.learner.noise_sigma, 0.0);
        }
      }
    }
  }

  const std::vector<Command> lattice =
      make_command_lattice(s.teacher_bounds, s.lattice_n_v, s.lattice_n_omega,
                           s.lattice_v_exponent, s.lattice_omega_exponent);
  const PrimitiveLibrary library = generate_library(lattice, s.control_dt, s.planner.duration);
  PrimitiveLibrary pruned = prune_library(library, ls.limits);

  Pose pose{s.start_x, s.start_y, s.start_theta};
  bool goal_reached = false, collision = false;
  double t = 0.0;
  const Point2 goal = s.path.back();
  const int steps_per_primitive =
      std::max(1, static_cast<int>(std::llround(s.planner.duration / s.control_dt)));

  struct PlanSlot {
    Command teacher_cmd;
    Command learner_cmd;
    std::string mode;
  };
  std::vector<PlanSlot> plan;
  std::vector<Point2> plan_polyline;
  std::size_t slot = 0;
  int step_in_slot = 0;
  bool need_plan = true;

  while (t < s.max_sim_time) {
    const bool transfer_active =
        s.policy == "scm" && (s.toggle_off_at < 0.0 || t < s.toggle_off_at);

    if (ls.limits_changed) {
      try {
        pruned = prune_library(library, ls.limits);
      } catch (const EmptyLibrary&) {
        // Keep the previous library rather than stall the vehicle.
      }
      ls.limits_changed = false;
      need_plan = true;
    }

    if (need_plan) {
      plan.clear();
      plan_polyline.clear();
      Pose virt = pose;
      double pos = nearest_on_polyline(s.path, {pose.x, pose.y}).second;
      for (int h = 0; h < s.planner.horizon; ++h) {
        const PrimitiveChoice choice =
            select_primitive(pruned, s.path, pos, virt, s.planner);
        if (choice.index < 0) break;
        const MotionPrimitive& prim = pruned.primitives[choice.index];
        PlanSlot ps;
        ps.teacher_cmd = prim.command;
        if (transfer_active) {
          const TransferOutcome outcome = transfer(ls.store, ls.limits, prim.command);
          ps.learner_cmd = outcome.learner_cmd;
          ps.mode = to_string(outcome.mode);
        } else {
          ps.learner_cmd = prim.command;
          ps.mode = "BASELINE";
        }
        plan.push_back(ps);
        for (const auto& st : prim.states) {
          const Pose w = transform_to_frame(virt, st);
          plan_polyline.push_back({w.x, w.y});
        }
        virt = transform_to_frame(virt, prim.states.back());
        pos += prim.path_length();
      }
      slot = 0;
      step_in_slot = 0;
      need_plan = plan.empty();
      if (need_plan) break;  // nothing executable
    }

    const PlanSlot& active = plan[slot];
    const Command executed = clamp_command(active.learner_cmd, s.learner.bounds);
    const Pose p0 = pose;
    pose = step_learner(pose, executed, s.learner, rng);
    if (transfer_active)
      observe(ls, executed, p0, pose, s.control_dt, s.learner.noise_sigma, t + s.control_dt);

    t += s.control_dt;
    const double deviation = path_deviation(s.path, pose);
    result.trajectory.push_back({t, pose, active.teacher_cmd, executed, active.mode, deviation});

    if (in_collision(s.obstacles, pose)) {
      collision = true;
      break;
    }
    if (dist({pose.x, pose.y}, goal) <= s.goal_tolerance) {
      goal_reached = true;
      break;
    }

    if (++step_in_slot >= steps_per_primitive) {
      step_in_slot = 0;
      if (++slot >= plan.size()) need_plan = true;
    }
    if (replan_trigger(pose, plan_polyline, s.obstacles, s.planner)) need_plan = true;
  }

  result.store = std::move(ls.store);
  result.limits = std::move(ls.limits);
  result.limits_history = std::move(ls.events);
  result.metrics = finalize_metrics(result.trajectory, s.control_dt, goal_reached, collision,
                                    result.store.dropped_observations());
  return result;
}

}  // namespace

RunResult run_scenario(const Scenario& s) {
  if (!s.teacher_bounds.valid() || !s.learner.bounds.valid())
    throw ConfigError("invalid command bounds");
  if (s.path.size() < 2) throw ConfigError("scenario path missing");
  if (s.mode == "mpc") return run_mpc_loop(s, false);
  if (s.mode == "primitive") return run_primitive_loop(s);
  throw ConfigError("unknown scenario mode: " + s.mode);
}

RunResult run_ideal_teacher(const Scenario& s) { return run_mpc_loop(s, true); }

std::vector<GridErrorCell> run_grid_error_map(const Scenario& s, const PairStore& store,
                                              const LearnerLimits& limits, int resolution) {
  if (resolution < 2) throw ConfigError("grid resolution must be >= 2");
  std::vector<GridErrorCell> cells;
  cells.reserve(static_cast<std::size_t>(resolution) * resolution);
  LearnerSpec clean = s.learner;
  clean.noise_sigma = 0.0;
  clean.heading_noise_sigma = 0.0;
  Rng rng(1);

  for (int i = 0; i < resolution; ++i) {
    for (int jj = 0; jj < resolution; ++jj) {
      const Point2 n{(jj + 0.5) / resolution, (i + 0.5) / resolution};
      const Command w_teacher = denormalize_command(n, limits.teacher_box);
      GridErrorCell cell;
      cell.teacher_cmd = w_teacher;

      const TransferOutcome outcome = transfer(store, limits, w_teacher);
      cell.mode = to_string(outcome.mode);

      const Pose origin{};
      const Pose teacher_end = step_teacher(origin, w_teacher, s.control_dt);
      const Pose base_end = step_learner(origin, w_teacher, clean, rng);
      const Pose scm_end =
          step_learner(origin, clamp_command(outcome.learner_cmd, clean.bounds), clean, rng);

      cell.pos_err_baseline =
          std::hypot(base_end.x - teacher_end.x, base_end.y - teacher_end.y);
      cell.orient_err_baseline = std::abs(wrap_angle(base_end.theta - teacher_end.theta));
      cell.pos_err_scm = std::hypot(scm_end.x - teacher_end.x, scm_end.y - teacher_end.y);
      cell.orient_err_scm = std::abs(wrap_angle(scm_end.theta - teacher_end.theta));
      cells.push_back(cell);
    }
  }
  return cells;
}

// ---------------------------------------------------------------------------
// Export / import
// ---------------------------------------------------------------------------

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

json limits_to_json(const LearnerLimits& limits) {
  json j;
  j["teacher_box"] = {{"v_min", limits.teacher_box.v_min},
                      {"v_max", limits.teacher_box.v_max},
                      {"omega_min", limits.teacher_box.omega_min},
                      {"omega_max", limits.teacher_box.omega_max}};
  j["teacher_bounds"] = {{"v_min", limits.teacher_bounds.v_min},
                         {"v_max", limits.teacher_bounds.v_max},
                         {"omega_min", limits.teacher_bounds.omega_min},
                         {"omega_max", limits.teacher_bounds.omega_max}};
  j["learner_bounds"] = {{"v_min", limits.learner_bounds.v_min},
                         {"v_max", limits.learner_bounds.v_max},
                         {"omega_min", limits.learner_bounds.omega_min},
                         {"omega_max", limits.learner_bounds.omega_max}};
  json be = json::array();
  for (const auto& p : limits.boundary_equivalents) be.push_back({p.x, p.y});
  j["boundary_equivalents"] = be;
  return j;
}

CommandBounds bounds_from(const json& j) {
  return {j.at("v_min").get<double>(), j.at("v_max").get<double>(),
          j.at("omega_min").get<double>(), j.at("omega_max").get<double>()};
}

LearnerLimits limits_from_json(const json& j) {
  LearnerLimits limits;
  limits.teacher_box = bounds_from(j.at("teacher_box"));
  limits.teacher_bounds = bounds_from(j.at("teacher_bounds"));
  limits.learner_bounds = bounds_from(j.at("learner_bounds"));
  for (const auto& p : j.at("boundary_equivalents"))
    limits.boundary_equivalents.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  if (limits.boundary_equivalents.size() >= 3) {
    try {
      limits.hull = convex_hull(limits.boundary_equivalents);
    } catch (const DegenerateInput&) {
      limits.hull.reset();
    }
  }
  return limits;
}

}  // namespace

void save_pairs_snapshot(const PairStore& store, const LearnerLimits& limits,
                         const std::string& path) {
  json j;
  j["grid_rows"] = store.grid_rows();
  j["grid_cols"] = store.grid_cols();
  j["k_min"] = store.k_min();
  j["learner_bounds"] = {{"v_min", store.learner_bounds().v_min},
                         {"v_max", store.learner_bounds().v_max},
                         {"omega_min", store.learner_bounds().omega_min},
                         {"omega_max", store.learner_bounds().omega_max}};
  j["teacher_bounds"] = {{"v_min", store.teacher_bounds().v_min},
                         {"v_max", store.teacher_bounds().v_max},
                         {"omega_min", store.teacher_bounds().omega_min},
                         {"omega_max", store.teacher_bounds().omega_max}};
  json cells = json::array();
  for (int i = 0; i < static_cast<int>(store.cells().size()); ++i) {
    const auto& c = store.cells()[i];
    if (c.count == 0) continue;
    cells.push_back({{"cell", i},
                     {"count", c.count},
                     {"sum_teacher_v", c.sum_teacher_v},
                     {"sum_teacher_omega", c.sum_teacher_omega},
                     {"sum_learner_v", c.sum_learner_v},
                     {"sum_learner_omega", c.sum_learner_omega}});
  }
  j["cells"] = cells;
  json pairs = json::array();
  for (const auto& p : store.refined_pairs()) {
    pairs.push_back({{"teacher_v", p.teacher_equiv.v},
                     {"teacher_omega", p.teacher_equiv.omega},
                     {"learner_v", p.learner_cmd.v},
                     {"learner_omega", p.learner_cmd.omega},
                     {"support_count", p.support_count}});
  }
  j["refined_pairs"] = pairs;
  j["limits"] = limits_to_json(limits);
  write_file(path, j.dump(2) + "\n");
}

PairsSnapshot load_pairs_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open pairs snapshot: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("pairs snapshot parse failure: ") + e.what());
  }
  PairsSnapshot snap{
      PairStore(j.at("grid_rows").get<int>(), j.at("grid_cols").get<int>(),
                j.at("k_min").get<int>(), bounds_from(j.at("learner_bounds")),
                bounds_from(j.at("teacher_bounds"))),
      limits_from_json(j.at("limits"))};
  for (const auto& c : j.at("cells")) {
    PairStore::Cell cell;
    cell.count = c.at("count").get<int>();
    cell.sum_teacher_v = c.at("sum_teacher_v").get<double>();
    cell.sum_teacher_omega = c.at("sum_teacher_omega").get<double>();
    cell.sum_learner_v = c.at("sum_learner_v").get<double>();
    cell.sum_learner_omega = c.at("sum_learner_omega").get<double>();
    snap.store.restore_cell(c.at("cell").get<int>(), cell);
  }
  return snap;
}

void export_run(const RunResult& run, const Scenario& s, const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + out_dir);

  std::ostringstream traj;
  traj << kTrajectoryHeader << "\n";
  for (const auto& r : run.trajectory) {
    traj << fmt(r.t) << ',' << fmt(r.pose.x) << ',' << fmt(r.pose.y) << ','
         << fmt(r.pose.theta) << ',' << fmt(r.teacher_cmd.v) << ','
         << fmt(r.teacher_cmd.omega) << ',' << fmt(r.learner_cmd.v) << ','
         << fmt(r.learner_cmd.omega) << ',' << r.mode << ',' << fmt(r.deviation) << "\n";
  }
  write_file(out_dir + "/trajectory.csv", traj.str());

  save_pairs_snapshot(run.store, run.limits, out_dir + "/pairs.json");

  std::ostringstream hist;
  hist << "t,edge,rule,old_value,new_value\n";
  for (const auto& e : run.limits_history)
    hist << fmt(e.t) << ',' << e.edge << ',' << e.rule << ',' << fmt(e.old_value) << ','
         << fmt(e.new_value) << "\n";
  write_file(out_dir + "/limits_history.csv", hist.str());

  json m;
  m["scenario"] = s.name;
  m["seed"] = s.seed;
  m["max_deviation"] = run.metrics.max_deviation;
  m["mean_deviation"] = run.metrics.mean_deviation;
  m["completion_time"] = run.metrics.completion_time;
  m["goal_reached"] = run.metrics.goal_reached;
  m["collision"] = run.metrics.collision;
  m["steps"] = run.metrics.steps;
  m["mapped_count"] = run.metrics.mapped_count;
  m["direct_count"] = run.metrics.direct_count;
  m["perturbed_count"] = run.metrics.perturbed_count;
  m["baseline_count"] = run.metrics.baseline_count;
  m["dropped_observations"] = run.metrics.dropped_observations;
  write_file(out_dir + "/metrics.json", m.dump(2) + "\n");
}

void export_grid_error_map(const std::vector<GridErrorCell>& cells,
                           const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + out_dir);
  std::ostringstream out;
  out << "v,omega,mode,pos_err_scm,orient_err_scm,pos_err_baseline,orient_err_baseline\n";
  for (const auto& c : cells) {
    out << fmt(c.teacher_cmd.v) << ',' << fmt(c.teacher_cmd.omega) << ',' << c.mode << ','
        << fmt(c.pos_err_scm) << ',' << fmt(c.orient_err_scm) << ','
        << fmt(c.pos_err_baseline) << ',' << fmt(c.orient_err_baseline) << "\n";
  }
  write_file(out_dir + "/grid_error_map.csv", out.str());
}

RunMetrics metrics_from_trajectory(const std::vector<StepRecord>& records, double control_dt,
                                   const Scenario* scenario) {
  bool goal = false, hit = false;
  if (scenario) {
    for (const auto& r : records) {
      if (in_collision(scenario->obstacles, r.pose)) hit = true;
    }
    if (!records.empty() && !hit) {
      goal = dist({records.back().pose.x, records.back().pose.y}, scenario->path.back()) <=
             scenario->goal_tolerance;
    }
  }
  int dropped = 0;
  return finalize_metrics(records, control_dt, goal, hit, dropped);
}

std::vector<StepRecord> read_trajectory_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trajectory file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty trajectory file: " + path);
  if (line != kTrajectoryHeader) throw ConfigError("unexpected trajectory header");
  std::vector<StepRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 10) throw ConfigError("malformed trajectory row");
    StepRecord r;
    r.t = std::stod(fields[0]);
    r.pose = {std::stod(fields[1]), std::stod(fields[2]), std::stod(fields[3])};
    r.teacher_cmd = {std::stod(fields[4]), std::stod(fields[5])};
    r.learner_cmd = {std::stod(fields[6]), std::stod(fields[7])};
    r.mode = fields[8];
    r.deviation = std::stod(fields[9]);
    records.push_back(r);
  }
  return records;
}

}  // namespace scmt
