#include "scmtransfer/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace scmt {

using json = nlohmann::ordered_json;

namespace {

json bounds_to_json(const CommandBounds& b) {
  return {{"v_min", b.v_min}, {"v_max", b.v_max}, {"omega_min", b.omega_min},
          {"omega_max", b.omega_max}};
}

CommandBounds bounds_from_json(const json& j) {
  CommandBounds b;
  b.v_min = j.at("v_min").get<double>();
  b.v_max = j.at("v_max").get<double>();
  b.omega_min = j.at("omega_min").get<double>();
  b.omega_max = j.at("omega_max").get<double>();
  if (!b.valid()) throw ConfigError("invalid command bounds");
  return b;
}

json warp_to_json(const Warp& w) {
  json j;
  switch (w.kind) {
    case Warp::Kind::Identity: j["type"] = "identity"; break;
    case Warp::Kind::Cubic: j["type"] = "cubic"; break;
    case Warp::Kind::ShiftedCubic: j["type"] = "shifted_cubic"; break;
    case Warp::Kind::Poly7: j["type"] = "poly7"; break;
    case Warp::Kind::Affine: j["type"] = "affine"; break;
    case Warp::Kind::Table: j["type"] = "table"; break;
  }
  if (!w.coeffs.empty()) j["coeffs"] = w.coeffs;
  return j;
}

Warp warp_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  std::vector<double> coeffs;
  if (j.contains("coeffs")) coeffs = j.at("coeffs").get<std::vector<double>>();
  if (type == "identity") return Warp::identity();
  if (type == "cubic") return Warp::cubic();
  if (type == "shifted_cubic") return Warp::shifted_cubic();
  if (type == "poly7") {
    if (coeffs.size() != 7) throw ConfigError("poly7 warp needs 7 coefficients");
    return Warp::poly7(coeffs);
  }
  if (type == "affine") {
    if (coeffs.size() != 2) throw ConfigError("affine warp needs 2 coefficients");
    return Warp::affine(coeffs[0], coeffs[1]);
  }
  if (type == "table") {
    if (coeffs.size() < 2) throw ConfigError("table warp needs >= 2 knot values");
    return Warp::table(coeffs);
  }
  throw ConfigError("unknown warp type: " + type);
}

}  // namespace

std::vector<Point2> make_s_path(double length, double amplitude, double wavelength,
                                int samples) {
  std::vector<Point2> pts;
  pts.reserve(samples);
  for (int i = 0; i < samples; ++i) {
    const double x = length * i / (samples - 1);
    pts.push_back({x, amplitude * std::sin(2.0 * M_PI * x / wavelength)});
  }
  return pts;
}

std::string scenario_to_json_text(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["mode"] = s.mode;
  j["seed"] = s.seed;
  j["max_sim_time"] = s.max_sim_time;
  j["goal_tolerance"] = s.goal_tolerance;
  j["control_dt"] = s.control_dt;
  j["start"] = {{"x", s.start_x}, {"y", s.start_y}, {"theta", s.start_theta}};
  j["teacher"] = {{"bounds", bounds_to_json(s.teacher_bounds)}};
  j["learner"] = {{"bounds", bounds_to_json(s.learner.bounds)},
                  {"warp_v", warp_to_json(s.learner.warp_v)},
                  {"warp_omega", warp_to_json(s.learner.warp_omega)},
                  {"noise_sigma", s.learner.noise_sigma},
                  {"heading_noise_sigma", s.learner.heading_noise_sigma},
                  {"dt", s.learner.dt}};
  json waypoints = json::array();
  for (const auto& p : s.path) waypoints.push_back({p.x, p.y});
  j["path"] = {{"waypoints", waypoints}};
  json obstacles = json::array();
  for (const auto& o : s.obstacles)
    obstacles.push_back({{"x", o.center.x}, {"y", o.center.y}, {"radius", o.radius}});
  j["obstacles"] = obstacles;
  j["transfer"] = {{"policy", s.policy},
                   {"toggle_off_at", s.toggle_off_at},
                   {"grid_rows", s.grid_rows},
                   {"grid_cols", s.grid_cols},
                   {"k_min", s.k_min}};
  j["planner"] = {{"k_d", s.planner.k_d},
                  {"k_theta", s.planner.k_theta},
                  {"horizon", s.planner.horizon},
                  {"eta", s.planner.eta},
                  {"eps_bar", s.planner.eps_bar},
                  {"fov_radius", s.planner.fov_radius},
                  {"duration", s.planner.duration},
                  {"lattice_n_v", s.lattice_n_v},
                  {"lattice_n_omega", s.lattice_n_omega},
                  {"lattice_v_exponent", s.lattice_v_exponent},
                  {"lattice_omega_exponent", s.lattice_omega_exponent},
                  {"calibration_grid", s.calibration_grid},
                  {"calibration_repeats", s.calibration_repeats}};
  j["mpc"] = {{"horizon", s.mpc.horizon},
              {"q_diag", {s.mpc.Q[0][0], s.mpc.Q[1][1], s.mpc.Q[2][2]}},
              {"r_diag", {s.mpc.R[0][0], s.mpc.R[1][1]}},
              {"eps_u_v", s.mpc.eps_u_v},
              {"eps_u_omega", s.mpc.eps_u_omega},
              {"obstacle_margin", s.mpc.obstacle_margin},
              {"obstacle_penalty", s.mpc.obstacle_penalty},
              {"max_iterations", s.mpc.max_iterations},
              {"explore_steps", s.explore_steps},
              {"explore_spacing", s.explore_spacing}};
  return j.dump(2) + "\n";
}

Scenario scenario_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("scenario parse failure: ") + e.what());
  }
  try {
    Scenario s;
    s.name = j.value("name", s.name);
    s.mode = j.value("mode", s.mode);
    if (s.mode != "mpc" && s.mode != "primitive")
      throw ConfigError("mode must be 'mpc' or 'primitive'");
    s.seed = j.value("seed", s.seed);
    s.max_sim_time = j.value("max_sim_time", s.max_sim_time);
    s.goal_tolerance = j.value("goal_tolerance", s.goal_tolerance);
    s.control_dt = j.value("control_dt", s.control_dt);
    if (j.contains("start")) {
      s.start_x = j["start"].value("x", 0.0);
      s.start_y = j["start"].value("y", 0.0);
      s.start_theta = j["start"].value("theta", 0.0);
    }
    if (j.contains("teacher")) s.teacher_bounds = bounds_from_json(j["teacher"].at("bounds"));
    if (j.contains("learner")) {
      const json& l = j["learner"];
      s.learner.bounds = bounds_from_json(l.at("bounds"));
      if (l.contains("warp_v")) s.learner.warp_v = warp_from_json(l["warp_v"]);
      if (l.contains("warp_omega")) s.learner.warp_omega = warp_from_json(l["warp_omega"]);
      s.learner.noise_sigma = l.value("noise_sigma", 0.0);
      s.learner.heading_noise_sigma = l.value("heading_noise_sigma", 0.0);
      s.learner.dt = l.value("dt", s.control_dt);
    }
    if (j.contains("path")) {
      const json& p = j["path"];
      if (p.contains("waypoints")) {
        for (const auto& w : p["waypoints"])
          s.path.push_back({w.at(0).get<double>(), w.at(1).get<double>()});
      } else if (p.contains("s_curve")) {
        const json& c = p["s_curve"];
        s.path = make_s_path(c.value("length", 12.0), c.value("amplitude", 1.5),
                             c.value("wavelength", 12.0), c.value("samples", 121));
      }
    }
    if (s.path.size() < 2) throw ConfigError("path needs at least 2 waypoints");
    if (j.contains("obstacles")) {
      for (const auto& o : j["obstacles"]) {
        Obstacle obs;
        obs.center = {o.at("x").get<double>(), o.at("y").get<double>()};
        obs.radius = o.at("radius").get<double>();
        if (obs.radius <= 0.0) throw ConfigError("obstacle radius must be positive");
        s.obstacles.push_back(obs);
      }
    }
    if (j.contains("transfer")) {
      const json& t = j["transfer"];
      s.policy = t.value("policy", s.policy);
      if (s.policy != "scm" && s.policy != "direct")
        throw ConfigError("policy must be 'scm' or 'direct'");
      s.toggle_off_at = t.value("toggle_off_at", s.toggle_off_at);
      s.grid_rows = t.value("grid_rows", s.grid_rows);
      s.grid_cols = t.value("grid_cols", s.grid_cols);
      s.k_min = t.value("k_min", s.k_min);
      if (s.grid_rows < 1 || s.grid_cols < 1 || s.k_min < 1)
        throw ConfigError("grid dimensions and k_min must be positive");
    }
    if (j.contains("planner")) {
      const json& p = j["planner"];
      s.planner.k_d = p.value("k_d", s.planner.k_d);
      s.planner.k_theta = p.value("k_theta", s.planner.k_theta);
      s.planner.horizon = p.value("horizon", s.planner.horizon);
      s.planner.eta = p.value("eta", s.planner.eta);
      s.planner.eps_bar = p.value("eps_bar", s.planner.eps_bar);
      s.planner.fov_radius = p.value("fov_radius", s.planner.fov_radius);
      s.planner.duration = p.value("duration", s.planner.duration);
      s.lattice_n_v = p.value("lattice_n_v", s.lattice_n_v);
      s.lattice_n_omega = p.value("lattice_n_omega", s.lattice_n_omega);
      s.lattice_v_exponent = p.value("lattice_v_exponent", s.lattice_v_exponent);
      s.lattice_omega_exponent = p.value("lattice_omega_exponent", s.lattice_omega_exponent);
      s.calibration_grid = p.value("calibration_grid", s.calibration_grid);
      s.calibration_repeats = p.value("calibration_repeats", s.calibration_repeats);
    }
    if (j.contains("mpc")) {
      const json& m = j["mpc"];
      s.mpc.horizon = m.value("horizon", s.mpc.horizon);
      if (s.mpc.horizon < 2) throw ConfigError("mpc horizon must be >= 2");
      if (m.contains("q_diag")) {
        const auto q = m["q_diag"].get<std::vector<double>>();
        if (q.size() != 3) throw ConfigError("q_diag needs 3 entries");
        s.mpc.Q = diag3(q[0], q[1], q[2]);
      }
      if (m.contains("r_diag")) {
        const auto r = m["r_diag"].get<std::vector<double>>();
        if (r.size() != 2) throw ConfigError("r_diag needs 2 entries");
        s.mpc.R = diag2(r[0], r[1]);
      }
      s.mpc.eps_u_v = m.value("eps_u_v", s.mpc.eps_u_v);
      s.mpc.eps_u_omega = m.value("eps_u_omega", s.mpc.eps_u_omega);
      s.mpc.obstacle_margin = m.value("obstacle_margin", s.mpc.obstacle_margin);
      s.mpc.obstacle_penalty = m.value("obstacle_penalty", s.mpc.obstacle_penalty);
      s.mpc.max_iterations = m.value("max_iterations", s.mpc.max_iterations);
      s.explore_steps = m.value("explore_steps", s.explore_steps);
      s.explore_spacing = m.value("explore_spacing", s.explore_spacing);
    }
    s.mpc.dt = s.control_dt;
    s.planner.dt = s.control_dt;
    s.learner.dt = s.control_dt;
    return s;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("scenario field error: ") + e.what());
  }
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return scenario_from_json_text(ss.str());
}

void save_scenario(const Scenario& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write scenario file: " + path);
  out << scenario_to_json_text(s);
  if (!out) throw IoError("failed writing scenario file: " + path);
}

Scenario preset_scenario(const std::string& name) {
  Scenario s;
  s.name = name;
  if (name == "mpc_table2") {
    // MPC case study: warped learner, limits learned from scratch.
    s.mode = "mpc";
    s.teacher_bounds = {0.05, 0.6, -M_PI / 4.0, M_PI / 4.0};
    s.learner.bounds = {0.05, 0.3, -M_PI / 16.0, M_PI / 12.0};
    s.learner.warp_v = Warp::cubic();
    s.learner.warp_omega = Warp::shifted_cubic();
    s.learner.noise_sigma = 0.001;
    // Three-part course: a straight warm-up while pairs accumulate, a
    // moderate swell, then a tight S-dip whose bends demand turn rates at
    // the learner's limits, flanked by obstacles on the outside of the
    // bends where an understeering vehicle drifts.
    s.path.clear();
    for (double x = 0.0; x <= 4.0 + 1e-9; x += 0.08) s.path.push_back({x, 0.0});
    for (double x = 4.08; x <= 10.0 + 1e-9; x += 0.08)
      s.path.push_back({x, 0.8 * (1.0 - std::cos(2.0 * M_PI * (x - 4.0) / 12.0))});
    for (double x = 10.08; x <= 16.0 + 1e-9; x += 0.08)
      s.path.push_back({x, 1.6 - 0.9 * (1.0 - std::cos(2.0 * M_PI * (x - 10.0) / 7.0))});
    s.obstacles = {{{7.0, 1.7}, 0.3}, {{12.0, -0.35}, 0.3}, {{14.6, 1.2}, 0.3}};
    s.start_x = 0.0;
    s.start_y = 0.35;
    s.start_theta = 0.6;
    s.k_min = 5;
    s.explore_steps = 150;
    s.max_sim_time = 240.0;
    return s;
  }
  if (name == "primitive_table1") {
    // Motion-primitive case study with up-front calibration pairs.
    s.mode = "primitive";
    s.teacher_bounds = {0.0, 3.0, -M_PI / 3.0, M_PI / 3.0};
    s.learner.bounds = {0.0, 1.0, -M_PI / 8.0, M_PI / 8.0};
    s.learner.noise_sigma = 0.005;
    s.path = make_s_path(16.0, 2.0, 16.0, 161);
    s.obstacles = {{{4.0, 2.8}, 0.5}, {{8.0, -1.2}, 0.5}, {{12.0, -2.8}, 0.5}};
    s.start_x = 0.0;
    s.start_y = -0.4;
    s.start_theta = M_PI / 6.0;
    s.k_min = 5;
    s.calibration_grid = 5;
    s.calibration_repeats = 10;
    s.planner.eps_bar = 0.5;
    s.planner.eta = 0.25;
    s.max_sim_time = 240.0;
    return s;
  }
  if (name == "mpc_poly7") {
    // Warp set used to alter the learner in the physical experiments.
    s = preset_scenario("mpc_table2");
    s.name = name;
    s.learner.bounds = {0.05, 0.2, -M_PI / 8.0, M_PI / 8.0};
    s.learner.warp_v = Warp::cubic();
    s.learner.warp_omega =
        Warp::poly7({31.42, -109.91, 144.65, -86.98, 24.77, -5.08, 2.12});
    s.k_min = 5;
    s.max_sim_time = 400.0;
    return s;
  }
  if (name == "toggle") {
    // Cluttered ablation fixture. The learner's steering response is
    // heavily biased (strong gain low in the range, saturating high), and
    // the teacher runs a soft tracking controller that prefers smooth
    // commands. Directly applied commands then drift off the path, while
    // mapped commands restore the model and track.
    s = preset_scenario("mpc_table2");
    s.name = name;
    s.learner.warp_omega =
        Warp::table({0.0, 0.10, 0.25, 0.45, 0.62, 0.75, 0.84, 0.90, 0.95, 0.98, 1.0});
    s.mpc.Q = diag3(2.0, 2.0, 0.2);
    s.mpc.R = diag2(2.0, 2.0);
    s.start_x = 0.0;
    s.start_y = 0.0;
    s.start_theta = 0.0;
    s.k_min = 3;
    s.max_sim_time = 240.0;
    s.toggle_off_at = 30.0;
    return s;
  }
  throw ConfigError("unknown preset: " + name);
}

}  // namespace scmt
