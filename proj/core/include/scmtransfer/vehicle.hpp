#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "scmtransfer/errors.hpp"

namespace scmt {

double wrap_angle(double theta);  // to (-pi, pi]

struct Pose {
  double x = 0.0;      // m
  double y = 0.0;      // m
  double theta = 0.0;  // rad, wrapped
};

struct Command {
  double v = 0.0;      // m/s
  double omega = 0.0;  // rad/s
};

struct CommandBounds {
  double v_min = 0.0;
  double v_max = 1.0;
  double omega_min = -1.0;
  double omega_max = 1.0;

  bool valid() const { return v_min < v_max && omega_min < omega_max; }
  bool contains(const Command& u, double tol = 0.0) const {
    return u.v >= v_min - tol && u.v <= v_max + tol && u.omega >= omega_min - tol &&
           u.omega <= omega_max + tol;
  }
};

Command clamp_command(const Command& u, const CommandBounds& b);

// Channel warp applied to the min-max normalized command, h: [0,1] -> [0,1].
struct Warp {
  enum class Kind { Identity, Cubic, ShiftedCubic, Poly7, Affine, Table };
  Kind kind = Kind::Identity;
  // Affine: h(n) = coeffs[0] * n + coeffs[1].
  // Poly7: h(n) = sum_k coeffs[k] * n^(7-k), coeffs has 7 entries (no constant term).
  // Table: values at uniform knots over [0, 1], linearly interpolated.
  std::vector<double> coeffs;

  double operator()(double n) const;

  static Warp identity() { return {Kind::Identity, {}}; }
  static Warp cubic() { return {Kind::Cubic, {}}; }
  static Warp shifted_cubic() { return {Kind::ShiftedCubic, {}}; }
  static Warp poly7(std::vector<double> c) { return {Kind::Poly7, std::move(c)}; }
  static Warp affine(double a, double b) { return {Kind::Affine, {a, b}}; }
  static Warp table(std::vector<double> values) { return {Kind::Table, std::move(values)}; }
};

struct LearnerSpec {
  CommandBounds bounds;
  Warp warp_v = Warp::identity();
  Warp warp_omega = Warp::identity();
  double noise_sigma = 0.0;          // per-axis position noise, m
  double heading_noise_sigma = 0.0;  // off by default
  double dt = 0.1;                   // s
};

// Deterministic random stream (xorshift + Box-Muller).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 1);
  double uniform();   // [0, 1)
  double gaussian();  // standard normal

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Discrete unicycle step: x += dt v cos(theta), y += dt v sin(theta),
// theta += dt omega, wrapped.
Pose step_teacher(const Pose& p, const Command& u, double dt);

// Effective learner command after clamping to the input bounds and the
// normalize -> warp -> denormalize channel distortion.
Command effective_learner_command(const Command& u, const LearnerSpec& spec);

Pose step_learner(const Pose& p, const Command& u, const LearnerSpec& spec, Rng& rng);

// Exact inverse of the teacher step. Throws InconsistentMotion when the
// lateral residual exceeds 3 sigma + 1e-9.
Command inverse_teacher_command(const Pose& p0, const Pose& p1, double dt,
                                double noise_sigma = 0.0);

// Image of the learner's command box in the teacher command domain (the
// ground-truth learner limits; a simulation-only convenience).
CommandBounds effective_command_box(const LearnerSpec& spec, int samples = 2048);

}  // namespace scmt
