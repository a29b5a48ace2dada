#include "scmtransfer/vehicle.hpp"

#include <algorithm>
#include <cmath>

namespace scmt {

double wrap_angle(double theta) {
  double t = std::fmod(theta, 2.0 * M_PI);
  if (t <= -M_PI) t += 2.0 * M_PI;
  if (t > M_PI) t -= 2.0 * M_PI;
  return t;
}

Command clamp_command(const Command& u, const CommandBounds& b) {
  return {std::clamp(u.v, b.v_min, b.v_max), std::clamp(u.omega, b.omega_min, b.omega_max)};
}

double Warp::operator()(double n) const {
  switch (kind) {
    case Kind::Identity:
      return n;
    case Kind::Cubic:
      return n * n * n;
    case Kind::ShiftedCubic: {
      const double d = n - 0.5;
      return 4.0 * d * d * d + 0.5;
    }
    case Kind::Poly7: {
      double acc = 0.0;
      for (double c : coeffs) acc = acc * n + c;
      return acc * n;  // no constant term
    }
    case Kind::Affine:
      return coeffs[0] * n + coeffs[1];
    case Kind::Table: {
      if (coeffs.size() < 2) return n;
      const double x = std::clamp(n, 0.0, 1.0) * (coeffs.size() - 1);
      const std::size_t i = std::min(static_cast<std::size_t>(x), coeffs.size() - 2);
      const double f = x - static_cast<double>(i);
      return coeffs[i] + f * (coeffs[i + 1] - coeffs[i]);
    }
  }
  return n;
}

Rng::Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

double Rng::uniform() {
  // xorshift64*
  state_ ^= state_ >> 12;
  state_ ^= state_ << 25;
  state_ ^= state_ >> 27;
  const std::uint64_t r = state_ * 0x2545F4914F6CDD1DULL;
  return static_cast<double>(r >> 11) * (1.0 / 9007199254740992.0);
}

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 1e-300) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

Pose step_teacher(const Pose& p, const Command& u, double dt) {
  Pose out;
  out.x = p.x + dt * u.v * std::cos(p.theta);
  out.y = p.y + dt * u.v * std::sin(p.theta);
  out.theta = wrap_angle(p.theta + dt * u.omega);
  return out;
}

namespace {

double warp_channel(double value, double lo, double hi, const Warp& w) {
  const double n = (value - lo) / (hi - lo);
  const double h = std::clamp(w(n), 0.0, 1.0);
  return lo + h * (hi - lo);
}

}  // namespace

Command effective_learner_command(const Command& u, const LearnerSpec& spec) {
  const Command c = clamp_command(u, spec.bounds);
  return {warp_channel(c.v, spec.bounds.v_min, spec.bounds.v_max, spec.warp_v),
          warp_channel(c.omega, spec.bounds.omega_min, spec.bounds.omega_max,
                       spec.warp_omega)};
}

Pose step_learner(const Pose& p, const Command& u, const LearnerSpec& spec, Rng& rng) {
  const Command eff = effective_learner_command(u, spec);
  Pose out = step_teacher(p, eff, spec.dt);
  if (spec.noise_sigma > 0.0) {
    out.x += spec.noise_sigma * rng.gaussian();
    out.y += spec.noise_sigma * rng.gaussian();
  }
  if (spec.heading_noise_sigma > 0.0)
    out.theta = wrap_angle(out.theta + spec.heading_noise_sigma * rng.gaussian());
  return out;
}

Command inverse_teacher_command(const Pose& p0, const Pose& p1, double dt,
                                double noise_sigma) {
  const double dx = p1.x - p0.x;
  const double dy = p1.y - p0.y;
  const double c = std::cos(p0.theta);
  const double s = std::sin(p0.theta);
  const double lateral = std::abs(-dx * s + dy * c);
  if (lateral > 3.0 * noise_sigma + 1e-9)
    throw InconsistentMotion("lateral residual incompatible with a unicycle step");
  Command u;
  u.v = (dx * c + dy * s) / dt;
  u.omega = wrap_angle(p1.theta - p0.theta) / dt;
  return u;
}

CommandBounds effective_command_box(const LearnerSpec& spec, int samples) {
  CommandBounds out;
  double v_lo = std::numeric_limits<double>::infinity(), v_hi = -v_lo;
  double w_lo = v_lo, w_hi = -v_lo;
  for (int i = 0; i <= samples; ++i) {
    const double n = static_cast<double>(i) / samples;
    const double v = warp_channel(spec.bounds.v_min + n * (spec.bounds.v_max - spec.bounds.v_min),
                                  spec.bounds.v_min, spec.bounds.v_max, spec.warp_v);
    const double w =
        warp_channel(spec.bounds.omega_min + n * (spec.bounds.omega_max - spec.bounds.omega_min),
                     spec.bounds.omega_min, spec.bounds.omega_max, spec.warp_omega);
    v_lo = std::min(v_lo, v);
    v_hi = std::max(v_hi, v);
    w_lo = std::min(w_lo, w);
    w_hi = std::max(w_hi, w);
  }
  out.v_min = v_lo;
  out.v_max = v_hi;
  out.omega_min = w_lo;
  out.omega_max = w_hi;
  return out;
}

}  // namespace scmt
