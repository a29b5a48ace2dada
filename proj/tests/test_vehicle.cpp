#include <cmath>

#include "doctest.h"
#include "scmtransfer/vehicle.hpp"

using namespace scmt;

TEST_CASE("step_teacher basics") {
  const Pose a = step_teacher({0, 0, 0}, {1.0, 0.0}, 1.0);
  CHECK(a.x == doctest::Approx(1.0));
  CHECK(a.y == doctest::Approx(0.0).scale(1.0));
  CHECK(a.theta == doctest::Approx(0.0).scale(1.0));

  const Pose b = step_teacher({0, 0, 0}, {0.0, M_PI}, 1.0);
  CHECK(b.theta == doctest::Approx(M_PI));  // wrapped to (-pi, pi]

  const Pose c = step_teacher({0, 0, M_PI / 2}, {2.0, 0.1}, 0.5);
  CHECK(c.x == doctest::Approx(0.0).scale(1.0));
  CHECK(c.y == doctest::Approx(1.0));
  CHECK(c.theta == doctest::Approx(M_PI / 2 + 0.05));
}

TEST_CASE("wrap_angle") {
  CHECK(wrap_angle(3.0 * M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_angle(-3.0 * M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_angle(0.3) == doctest::Approx(0.3));
  CHECK(wrap_angle(-0.3) == doctest::Approx(-0.3));
}

TEST_CASE("learner warps: worked values") {
  // Cubic v warp with the continuous-study simulated learner bounds:
  // v = 0.175 -> n = 0.5 -> h = 0.125 -> 0.05 + 0.125 * 0.25 = 0.08125.
  LearnerSpec spec;
  spec.bounds = {0.05, 0.3, -M_PI / 16.0, M_PI / 12.0};
  spec.warp_v = Warp::cubic();
  spec.warp_omega = Warp::shifted_cubic();
  const Command eff = effective_learner_command({0.175, 0.0}, spec);
  CHECK(eff.v == doctest::Approx(0.08125).epsilon(1e-12));

  // Shifted cubic has a fixed point at n = 0.5.
  const double w_mid = 0.5 * (spec.bounds.omega_min + spec.bounds.omega_max);
  const Command eff2 = effective_learner_command({0.3, w_mid}, spec);
  CHECK(eff2.omega == doctest::Approx(w_mid).epsilon(1e-12));

  // Upper bound is a fixed point of the cubic warp.
  const Command eff3 = effective_learner_command({0.3, 0.0}, spec);
  CHECK(eff3.v == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("endpoint preservation for the endpoint-exact warps") {
  for (const Warp& w : {Warp::identity(), Warp::cubic(), Warp::shifted_cubic()}) {
    CHECK(std::abs(w(0.0) - 0.0) <= 1e-9);
    CHECK(std::abs(w(1.0) - 1.0) <= 1e-9);
  }
  // Affine half-scaling maps endpoints to the half-range.
  const Warp aff = Warp::affine(0.5, 0.0);
  CHECK(aff(1.0) == doctest::Approx(0.5));
}

TEST_CASE("poly7 warp is clamped into [0,1]") {
  const Warp w = Warp::poly7({31.42, -109.91, 144.65, -86.98, 24.77, -5.08, 2.12});
  CHECK(w(0.0) == doctest::Approx(0.0).scale(1.0));
  CHECK(w(1.0) == doctest::Approx(0.99).epsilon(1e-2));
  LearnerSpec spec;
  spec.bounds = {0.0, 1.0, 0.0, 1.0};
  spec.warp_omega = w;
  for (double n = 0.0; n <= 1.0; n += 0.05) {
    const Command eff = effective_learner_command({0.5, n}, spec);
    CHECK(eff.omega >= 0.0);
    CHECK(eff.omega <= 1.0);
  }
}

TEST_CASE("identity warps and zero noise reduce to the teacher step") {
  LearnerSpec spec;
  spec.bounds = {0.0, 2.0, -1.0, 1.0};
  spec.dt = 0.1;
  Rng rng(1);
  const Pose p{0.4, -0.2, 0.7};
  const Command u{1.2, -0.5};
  const Pose a = step_learner(p, u, spec, rng);
  const Pose b = step_teacher(p, u, 0.1);
  CHECK(a.x == doctest::Approx(b.x).epsilon(1e-15));
  CHECK(a.y == doctest::Approx(b.y).epsilon(1e-15));
  CHECK(a.theta == doctest::Approx(b.theta).epsilon(1e-15));
}

TEST_CASE("commands outside the learner bounds are clamped before warping") {
  LearnerSpec spec;
  spec.bounds = {0.0, 1.0, -0.5, 0.5};
  const Command eff = effective_learner_command({3.0, -2.0}, spec);
  CHECK(eff.v == doctest::Approx(1.0));
  CHECK(eff.omega == doctest::Approx(-0.5));
}

TEST_CASE("noise statistics over 10000 steps") {
  LearnerSpec spec;
  spec.bounds = {0.0, 1.0, -1.0, 1.0};
  spec.noise_sigma = 0.1;
  spec.dt = 0.1;
  Rng rng(42);
  double sum = 0.0, sum2 = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const Pose p{0, 0, 0};
    const Pose q = step_learner(p, {0.0, 0.0}, spec, rng);
    sum += q.x;
    sum2 += q.x * q.x;
  }
  const double stddev = std::sqrt(sum2 / n - (sum / n) * (sum / n));
  CHECK(std::abs(stddev - spec.noise_sigma) <= 0.05 * spec.noise_sigma);
}

TEST_CASE("inverse_teacher_command recovers commands") {
  const Command a = inverse_teacher_command({0, 0, 0}, {0.5, 0, 0}, 1.0);
  CHECK(a.v == doctest::Approx(0.5));
  CHECK(a.omega == doctest::Approx(0.0).scale(1.0));

  const Command b = inverse_teacher_command({0, 0, 0}, {0, 0, 0.1}, 0.1);
  CHECK(b.v == doctest::Approx(0.0).scale(1.0));
  CHECK(b.omega == doctest::Approx(1.0));

  // Exact inverse of the forward step, including negative v and wraps.
  Rng rng(9);
  for (int i = 0; i < 200; ++i) {
    const Pose p0{rng.uniform(), rng.uniform(), (2.0 * rng.uniform() - 1.0) * M_PI};
    const Command u{2.0 * rng.uniform() - 0.5, 2.0 * rng.uniform() - 1.0};
    const double dt = 0.05 + rng.uniform();
    const Pose p1 = step_teacher(p0, u, dt);
    const Command rec = inverse_teacher_command(p0, p1, dt);
    CHECK(rec.v == doctest::Approx(u.v).epsilon(1e-12));
    CHECK(rec.omega == doctest::Approx(u.omega).epsilon(1e-12));
  }
}

TEST_CASE("inverse_teacher_command rejects lateral motion") {
  CHECK_THROWS_AS(inverse_teacher_command({0, 0, 0}, {0.0, 0.5, 0.0}, 1.0),
                  InconsistentMotion);
  // With a noise allowance the same motion passes.
  const Command u = inverse_teacher_command({0, 0, 0}, {0.0, 0.5, 0.0}, 1.0, 0.2);
  CHECK(u.v == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("effective_command_box finds the ground-truth image") {
  LearnerSpec spec;
  spec.bounds = {0.05, 0.3, -M_PI / 16.0, M_PI / 12.0};
  spec.warp_v = Warp::cubic();
  spec.warp_omega = Warp::shifted_cubic();
  const CommandBounds box = effective_command_box(spec);
  // Endpoint-exact warps: the box equals the learner bounds.
  CHECK(box.v_min == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(box.v_max == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(box.omega_min == doctest::Approx(-M_PI / 16.0).epsilon(1e-6));
  CHECK(box.omega_max == doctest::Approx(M_PI / 12.0).epsilon(1e-6));

  // Affine half-scaling shrinks the box.
  LearnerSpec half;
  half.bounds = {0.0, 1.0, -1.0, 1.0};
  half.warp_v = Warp::affine(0.5, 0.0);
  half.warp_omega = Warp::affine(0.5, 0.25);
  const CommandBounds hb = effective_command_box(half);
  CHECK(hb.v_max == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(hb.omega_min == doctest::Approx(-0.5).epsilon(1e-6));
  CHECK(hb.omega_max == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("rng determinism") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
}
