// Command line surface: closed-loop simulation, exhaustive grid error
// maps, SCM numerics self-test and metrics replay.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "scmtransfer/harness.hpp"
#include "scmtransfer/scm.hpp"

namespace {

using nlohmann::ordered_json;

scmt::Polygon2 random_convex_quad(scmt::Rng& rng) {
  // Rejection-sampled convex quadrilateral with a minimum interior angle.
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::array<double, 4> ang;
    for (auto& a : ang) a = 2.0 * M_PI * rng.uniform();
    std::sort(ang.begin(), ang.end());
    bool spaced = true;
    for (int k = 0; k < 4; ++k) {
      const double gap = (k < 3 ? ang[k + 1] - ang[k] : 2.0 * M_PI - ang[3] + ang[0]);
      if (gap < 0.3) spaced = false;
    }
    if (!spaced) continue;
    std::vector<scmt::Point2> v;
    for (int k = 0; k < 4; ++k) {
      const double r = 0.5 + rng.uniform();
      v.push_back({r * std::cos(ang[k]), r * std::sin(ang[k])});
    }
    scmt::Polygon2 poly{v};
    bool convex = true;
    for (int k = 0; k < 4; ++k) {
      if (scmt::orientation(v[k], v[(k + 1) % 4], v[(k + 2) % 4]) <= 0) convex = false;
      const double a = scmt::interior_angle_fraction(poly, k);
      if (a < 0.12 || a > 0.95) convex = false;
    }
    if (!convex) continue;
    return poly;
  }
  throw scmt::Error("random quad generation failed");
}

int run_selftest(int trials) {
  scmt::Rng rng(7);
  double max_side_residual = 0.0;
  double max_roundtrip = 0.0;
  double max_orth_deg = 0.0;
  double max_iso = 0.0;
  int failures = 0;
  for (int t = 0; t < trials; ++t) {
    try {
      const scmt::Polygon2 poly = random_convex_quad(rng);
      const scmt::ScmMap map = scmt::build_rectangle_map(poly);
      max_side_residual = std::max(max_side_residual, map.strip_params.side_residual);
      const double diam = scmt::diameter(poly);
      const scmt::Point2 c = scmt::centroid(poly);
      for (int i = 0; i < 20; ++i) {
        // Interior samples by shrinking vertices toward the centroid.
        const double a = rng.uniform(), b = rng.uniform() * (1.0 - a);
        const scmt::Point2 w{
            c.x + 0.7 * (a * (poly.vertices[0].x - c.x) + b * (poly.vertices[2].x - c.x)),
            c.y + 0.7 * (a * (poly.vertices[0].y - c.y) + b * (poly.vertices[2].y - c.y))};
        if (!scmt::point_in_polygon(poly, w)) continue;
        const scmt::Complex z = scmt::polygon_to_strip(map.strip_params, w);
        const scmt::Point2 back = scmt::strip_to_polygon(map.strip_params, z);
        max_roundtrip = std::max(max_roundtrip, scmt::dist(w, back) / diam);
      }
      // Conformality probe at the map's center image.
      const scmt::Complex zc{0.5 * map.strip_params.strip_length, 0.5};
      const scmt::Point2 wc = scmt::strip_to_polygon(map.strip_params, zc);
      const double h = 1e-5 * diam;
      const auto q0 = scmt::strip_to_rect(scmt::polygon_to_strip(map.strip_params, wc),
                                          map.rectangle);
      const auto qx = scmt::strip_to_rect(
          scmt::polygon_to_strip(map.strip_params, {wc.x + h, wc.y}), map.rectangle);
      const auto qy = scmt::strip_to_rect(
          scmt::polygon_to_strip(map.strip_params, {wc.x, wc.y + h}), map.rectangle);
      const scmt::Complex dx = qx - q0, dy = qy - q0;
      const double ang =
          std::abs(std::arg(dy / dx)) * 180.0 / M_PI;  // 90 for a conformal map
      max_orth_deg = std::max(max_orth_deg, std::abs(ang - 90.0));
      max_iso = std::max(max_iso, std::abs(std::abs(dy) / std::abs(dx) - 1.0));
    } catch (const scmt::Error&) {
      ++failures;
    }
  }
  ordered_json out;
  out["trials"] = trials;
  out["failures"] = failures;
  out["max_side_residual"] = max_side_residual;
  out["max_roundtrip_rel"] = max_roundtrip;
  out["max_orthogonality_err_deg"] = max_orth_deg;
  out["max_isotropy_err"] = max_iso;
  std::cout << out.dump(2) << "\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Teacher-to-learner command transfer via Schwarz-Christoffel maps"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run a closed-loop scenario");
  std::string sim_config, sim_out = "out";
  std::optional<std::uint64_t> sim_seed;
  std::string sim_policy;
  double sim_toggle = -1.0;
  bool sim_ideal = false;
  sim->add_option("--config", sim_config, "Scenario JSON file")->required();
  sim->add_option("--seed", sim_seed, "Override the scenario seed");
  sim->add_option("--out", sim_out, "Output directory");
  sim->add_option("--policy", sim_policy, "scm | direct");
  sim->add_option("--toggle-off-at", sim_toggle, "Deactivate transfer at this sim time (s)");
  sim->add_flag("--ideal-teacher", sim_ideal,
                "Run the teacher plant under the ground-truth learner limits");

  // grid-error-map
  auto* grid = app.add_subcommand("grid-error-map", "Exhaustive command-grid comparison");
  std::string grid_config, grid_pairs, grid_out = "out";
  int grid_res = 31;
  grid->add_option("--config", grid_config, "Scenario JSON file")->required();
  grid->add_option("--pairs", grid_pairs, "Pairs snapshot JSON")->required();
  grid->add_option("--resolution", grid_res, "Grid resolution per axis");
  grid->add_option("--out", grid_out, "Output directory");

  // scm-selftest
  auto* self = app.add_subcommand("scm-selftest", "SCM numerics residual statistics");
  int self_trials = 100;
  self->add_option("--trials", self_trials, "Number of random quadrilaterals");

  // replay-metrics
  auto* replay = app.add_subcommand("replay-metrics", "Recompute metrics from a trajectory");
  std::string replay_traj, replay_config;
  replay->add_option("--trajectory", replay_traj, "trajectory.csv file")->required();
  replay->add_option("--config", replay_config,
                     "Scenario JSON (enables collision/goal recheck)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      scmt::Scenario s = scmt::load_scenario(sim_config);
      if (sim_seed) s.seed = *sim_seed;
      if (!sim_policy.empty()) {
        if (sim_policy != "scm" && sim_policy != "direct")
          throw scmt::ConfigError("policy must be scm or direct");
        s.policy = sim_policy;
      }
      if (sim_toggle >= 0.0) s.toggle_off_at = sim_toggle;
      const scmt::RunResult run =
          sim_ideal ? scmt::run_ideal_teacher(s) : scmt::run_scenario(s);
      scmt::export_run(run, s, sim_out);
      ordered_json summary;
      summary["goal_reached"] = run.metrics.goal_reached;
      summary["collision"] = run.metrics.collision;
      summary["completion_time"] = run.metrics.completion_time;
      summary["max_deviation"] = run.metrics.max_deviation;
      summary["out_dir"] = sim_out;
      std::cout << summary.dump(2) << "\n";
      return 0;
    }
    if (*grid) {
      const scmt::Scenario s = scmt::load_scenario(grid_config);
      const scmt::PairsSnapshot snap = scmt::load_pairs_snapshot(grid_pairs);
      const auto cells = scmt::run_grid_error_map(s, snap.store, snap.limits, grid_res);
      scmt::export_grid_error_map(cells, grid_out);
      std::cout << "wrote " << cells.size() << " cells to " << grid_out
                << "/grid_error_map.csv\n";
      return 0;
    }
    if (*self) return run_selftest(self_trials);
    if (*replay) {
      const auto records = scmt::read_trajectory_file(replay_traj);
      std::optional<scmt::Scenario> s;
      if (!replay_config.empty()) s = scmt::load_scenario(replay_config);
      const double dt = records.size() > 1 ? records[1].t - records[0].t : 0.1;
      const scmt::RunMetrics m =
          scmt::metrics_from_trajectory(records, dt, s ? &*s : nullptr);
      ordered_json out;
      out["max_deviation"] = m.max_deviation;
      out["mean_deviation"] = m.mean_deviation;
      out["completion_time"] = m.completion_time;
      out["steps"] = m.steps;
      out["mapped_count"] = m.mapped_count;
      out["direct_count"] = m.direct_count;
      out["perturbed_count"] = m.perturbed_count;
      out["baseline_count"] = m.baseline_count;
      if (s) {
        out["goal_reached"] = m.goal_reached;
        out["collision"] = m.collision;
      }
      std::cout << out.dump(2) << "\n";
      return 0;
    }
  } catch (const scmt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const scmt::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
