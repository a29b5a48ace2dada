#include <cmath>

#include "doctest.h"
#include "scmtransfer/mpc.hpp"

using namespace scmt;

namespace {

std::vector<Point2> straight_path(double length, int samples) {
  std::vector<Point2> pts;
  for (int i = 0; i < samples; ++i) pts.push_back({length * i / (samples - 1), 0.0});
  return pts;
}

MpcConfig test_config() {
  MpcConfig cfg;
  cfg.command_constraints = {0.05, 0.6, -M_PI / 4.0, M_PI / 4.0};
  return cfg;
}

bool satisfies_constraints(const std::vector<Command>& u, const MpcConfig& cfg,
                           std::optional<Command> prev) {
  const CommandBounds& b = cfg.command_constraints;
  Command anchor = prev ? clamp_command(*prev, b) : Command{};
  bool have = prev.has_value();
  for (const auto& uk : u) {
    if (!b.contains(uk)) return false;
    if (have) {
      if (std::abs(uk.v - anchor.v) > cfg.eps_u_v + 1e-12) return false;
      if (std::abs(uk.omega - anchor.omega) > cfg.eps_u_omega + 1e-12) return false;
    }
    anchor = uk;
    have = true;
  }
  return true;
}

}  // namespace

TEST_CASE("sample_references: straight path spacing and saturation") {
  MpcConfig cfg = test_config();
  const auto path = straight_path(10.0, 101);
  const ReferencePlan plan = sample_references(path, {0.0, 0.0, 0.0}, cfg, 1.0);
  REQUIRE(static_cast<int>(plan.states.size()) == cfg.horizon + 1);
  for (std::size_t k = 0; k + 1 < plan.states.size(); ++k) {
    const double gap = std::hypot(plan.states[k + 1].x - plan.states[k].x,
                                  plan.states[k + 1].y - plan.states[k].y);
    CHECK(gap == doctest::Approx(cfg.command_constraints.v_max * cfg.dt).epsilon(1e-9));
    CHECK(plan.states[k].theta == doctest::Approx(0.0).scale(1.0));
  }

  // Current pose at the goal: references saturate there.
  const ReferencePlan at_goal = sample_references(path, {10.0, 0.0, 0.0}, cfg, 1.0);
  for (const auto& st : at_goal.states) {
    CHECK(st.x == doctest::Approx(10.0));
    CHECK(st.y == doctest::Approx(0.0).scale(1.0));
  }

  // Tighter exploration spacing halves the gaps.
  const ReferencePlan tight = sample_references(path, {0.0, 0.0, 0.0}, cfg, 0.5);
  const double gap = std::hypot(tight.states[1].x - tight.states[0].x,
                                tight.states[1].y - tight.states[0].y);
  CHECK(gap == doctest::Approx(0.5 * cfg.command_constraints.v_max * cfg.dt).epsilon(1e-9));
}

TEST_CASE("sample_references: arc path headings are tangents") {
  MpcConfig cfg = test_config();
  std::vector<Point2> arc;
  for (int i = 0; i <= 200; ++i) {
    const double a = 0.5 * M_PI * i / 200.0;
    arc.push_back({2.0 * std::sin(a), 2.0 * (1.0 - std::cos(a))});
  }
  const ReferencePlan plan = sample_references(arc, {0.0, 0.0, 0.0}, cfg, 1.0);
  for (std::size_t k = 0; k + 1 < plan.states.size(); ++k) {
    // Chord spacing never exceeds the arc spacing.
    const double chord = std::hypot(plan.states[k + 1].x - plan.states[k].x,
                                    plan.states[k + 1].y - plan.states[k].y);
    CHECK(chord <= cfg.command_constraints.v_max * cfg.dt + 1e-9);
    // Heading matches the local tangent of the circle x^2 + (y-2)^2 = 4.
    const double expected = std::atan2(plan.states[k].x, 2.0 - plan.states[k].y);
    CHECK(std::abs(wrap_angle(plan.states[k].theta - expected)) < 2e-2);
  }
}

TEST_CASE("solve_ocp: straight-line fixture recovers (v_max, 0)") {
  MpcConfig cfg = test_config();
  const auto path = straight_path(10.0, 101);
  ReferencePlan ref = sample_references(path, {0.0, 0.0, 0.0}, cfg, 1.0);
  for (auto& c : ref.commands) c = {cfg.command_constraints.v_max, 0.0};

  std::vector<Command> warm(cfg.horizon, {cfg.command_constraints.v_max, 0.0});
  MpcDiagnostics diag;
  const auto u = solve_ocp({0, 0, 0}, ref, {}, cfg, warm, std::nullopt, &diag);
  for (const auto& uk : u) {
    CHECK(std::abs(uk.v - cfg.command_constraints.v_max) <= 1e-3);
    CHECK(std::abs(uk.omega) <= 1e-3);
  }
  CHECK(satisfies_constraints(u, cfg, std::nullopt));
}

TEST_CASE("solve_ocp: zero-cost warm start is a fixed point") {
  MpcConfig cfg = test_config();
  const auto path = straight_path(10.0, 101);
  ReferencePlan ref = sample_references(path, {0.0, 0.0, 0.0}, cfg, 1.0);
  // Make the references exactly reachable: rollout of constant v_max.
  std::vector<Command> warm(cfg.horizon, {cfg.command_constraints.v_max, 0.0});
  Pose p{0, 0, 0};
  for (int k = 0; k < cfg.horizon; ++k) {
    p = step_teacher(p, warm[k], cfg.dt);
    ref.states[k + 1] = p;  // states[k] is the reference for predicted x_k
  }
  for (auto& c : ref.commands) c = {cfg.command_constraints.v_max, 0.0};

  const double j0 = ocp_cost({0, 0, 0}, ref, warm, cfg);
  CHECK(j0 == doctest::Approx(0.0).scale(1.0));
  const auto u = solve_ocp({0, 0, 0}, ref, {}, cfg, warm, std::nullopt, nullptr);
  for (int k = 0; k < cfg.horizon; ++k) {
    CHECK(u[k].v == doctest::Approx(warm[k].v));
    CHECK(u[k].omega == doctest::Approx(warm[k].omega));
  }
}

TEST_CASE("solve_ocp: obstacle on the reference line is avoided") {
  MpcConfig cfg = test_config();
  cfg.horizon = 15;
  const auto path = straight_path(10.0, 101);
  const ReferencePlan ref = sample_references(path, {0.0, 0.0, 0.0}, cfg, 1.0);
  const std::vector<Obstacle> obstacles{{{0.35, 0.03}, 0.2}};
  MpcDiagnostics diag;
  const auto u = solve_ocp({0, 0, 0}, ref, obstacles, cfg, {}, std::nullopt, &diag);
  CHECK(diag.min_clearance > 0.0);
  // Verify on the rollout.
  Pose p{0, 0, 0};
  for (const auto& uk : u) {
    p = step_teacher(p, uk, cfg.dt);
    CHECK(std::hypot(p.x - 0.35, p.y - 0.03) > 0.2);
  }
}

TEST_CASE("solve_ocp: infeasible when boxed in") {
  MpcConfig cfg = test_config();
  const auto path = straight_path(10.0, 101);
  const ReferencePlan ref = sample_references(path, {0.0, 0.0, 0.0}, cfg, 1.0);
  // The start pose is already inside the inflated obstacle.
  const std::vector<Obstacle> obstacles{{{0.0, 0.0}, 0.5}};
  CHECK_THROWS_AS(solve_ocp({0, 0, 0}, ref, obstacles, cfg, {}, std::nullopt, nullptr),
                  Infeasible);
}

TEST_CASE("solve_ocp: monotone improvement over a feasible warm start") {
  MpcConfig cfg = test_config();
  const auto path = straight_path(10.0, 101);
  const ReferencePlan ref = sample_references(path, {0.2, 0.3, 0.4}, cfg, 1.0);
  std::vector<Command> warm(cfg.horizon, {0.3, 0.1});
  const double j_warm = ocp_cost({0.2, 0.3, 0.4}, ref, warm, cfg);
  const auto u = solve_ocp({0.2, 0.3, 0.4}, ref, {}, cfg, warm, std::nullopt, nullptr);
  const double j_out = ocp_cost({0.2, 0.3, 0.4}, ref, u, cfg);
  CHECK(j_out <= j_warm + 1e-9);
}

TEST_CASE("solve_ocp: Q = 0 returns the projected command reference") {
  MpcConfig cfg = test_config();
  cfg.Q = diag3(0.0, 0.0, 0.0);
  const auto path = straight_path(10.0, 101);
  ReferencePlan ref = sample_references(path, {0, 0, 0}, cfg, 1.0);
  for (auto& c : ref.commands) c = {0.9, 0.1};  // v beyond the box
  const auto u = solve_ocp({0, 0, 0}, ref, {}, cfg, {}, std::nullopt, nullptr);
  for (const auto& uk : u) {
    CHECK(uk.v == doctest::Approx(cfg.command_constraints.v_max).epsilon(1e-6));
    CHECK(uk.omega == doctest::Approx(0.1).epsilon(1e-4));
  }
}

TEST_CASE("analytic gradient matches central finite differences") {
  MpcConfig cfg = test_config();
  cfg.horizon = 6;
  Rng rng(5);
  const auto path = straight_path(5.0, 51);
  const ReferencePlan ref = sample_references(path, {0.1, -0.2, 0.3}, cfg, 1.0);
  const std::vector<Obstacle> obstacles{{{0.5, 0.2}, 0.3}};
  std::vector<Command> u;
  for (int k = 0; k < cfg.horizon; ++k)
    u.push_back({0.1 + 0.4 * rng.uniform(), 0.5 * (2.0 * rng.uniform() - 1.0)});
  const Pose x0{0.1, -0.2, 0.3};
  const double penalty = 50.0;

  const auto grad = ocp_cost_gradient(x0, ref, u, obstacles, cfg, penalty, nullptr);
  const double h = 1e-6;
  for (int k = 0; k < cfg.horizon; ++k) {
    for (int c = 0; c < 2; ++c) {
      auto up = u, um = u;
      if (c == 0) {
        up[k].v += h;
        um[k].v -= h;
      } else {
        up[k].omega += h;
        um[k].omega -= h;
      }
      double jp, jm;
      ocp_cost_gradient(x0, ref, up, obstacles, cfg, penalty, &jp);
      ocp_cost_gradient(x0, ref, um, obstacles, cfg, penalty, &jm);
      const double fd = (jp - jm) / (2.0 * h);
      const double an = grad[k][c];
      CHECK(std::abs(an - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("mpc_step: constraints refreshed from shrunken limits") {
  MpcConfig cfg = test_config();
  const auto path = straight_path(10.0, 101);
  LearnerLimits limits = LearnerLimits::cold_start(cfg.command_constraints,
                                                   {0.0, 1.0, -1.0, 1.0});
  limits.teacher_box = {0.05, 0.22, -0.1, 0.15};
  const MpcStepResult r =
      mpc_step({0, 0, 0}, path, {}, cfg, limits, {}, std::nullopt, 1.0);
  for (const auto& uk : r.sequence) CHECK(limits.teacher_box.contains(uk, 1e-12));
}

TEST_CASE("mpc_step: stationary start on the path drives forward") {
  MpcConfig cfg = test_config();
  const auto path = straight_path(10.0, 101);
  const LearnerLimits limits =
      LearnerLimits::cold_start(cfg.command_constraints, {0.0, 1.0, -1.0, 1.0});
  const MpcStepResult r =
      mpc_step({0, 0, 0}, path, {}, cfg, limits, {}, Command{0.05, 0.0}, 1.0);
  CHECK(r.command.v > 0.05);
  CHECK(std::abs(r.command.omega) < 0.2);

  // Rollout cost beats the do-nothing alternative.
  const ReferencePlan ref = sample_references(path, {0, 0, 0}, cfg, 1.0);
  const std::vector<Command> zero(cfg.horizon, {0.05, 0.0});
  CHECK(ocp_cost({0, 0, 0}, ref, r.sequence, cfg) < ocp_cost({0, 0, 0}, ref, zero, cfg));
}

TEST_CASE("mpc_step: deterministic for identical inputs") {
  MpcConfig cfg = test_config();
  const auto path = straight_path(10.0, 101);
  const LearnerLimits limits =
      LearnerLimits::cold_start(cfg.command_constraints, {0.0, 1.0, -1.0, 1.0});
  std::vector<Command> warm(cfg.horizon, {0.2, 0.05});
  const MpcStepResult a =
      mpc_step({0.3, 0.1, 0.2}, path, {}, cfg, limits, warm, Command{0.2, 0.0}, 1.0);
  const MpcStepResult b =
      mpc_step({0.3, 0.1, 0.2}, path, {}, cfg, limits, warm, Command{0.2, 0.0}, 1.0);
  CHECK(a.command.v == b.command.v);
  CHECK(a.command.omega == b.command.omega);
  for (std::size_t k = 0; k < a.sequence.size(); ++k) {
    CHECK(a.sequence[k].v == b.sequence[k].v);
    CHECK(a.sequence[k].omega == b.sequence[k].omega);
  }
}

TEST_CASE("solve_ocp sequences always satisfy box and slew exactly") {
  MpcConfig cfg = test_config();
  Rng rng(6);
  const auto path = straight_path(8.0, 81);
  for (int trial = 0; trial < 10; ++trial) {
    const Pose x0{rng.uniform(), rng.uniform() - 0.5, rng.uniform()};
    const ReferencePlan ref = sample_references(path, x0, cfg, 1.0);
    const Command prev{0.05 + 0.5 * rng.uniform(), 0.5 * (2.0 * rng.uniform() - 1.0)};
    std::vector<Command> warm;
    for (int k = 0; k < cfg.horizon; ++k)
      warm.push_back({rng.uniform(), rng.uniform() - 0.5});
    const auto u = solve_ocp(x0, ref, {}, cfg, warm, prev, nullptr);
    CHECK(satisfies_constraints(u, cfg, prev));
  }
}
