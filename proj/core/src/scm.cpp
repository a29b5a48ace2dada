#include "scmtransfer/scm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scmtransfer/elliptic.hpp"
#include "scmtransfer/quadrature.hpp"

namespace scmt {

namespace {

constexpr int kNodesPerPanel = 12;
constexpr int kMaxPanels = 30;
constexpr int kSolverBudget = 200;
constexpr int kNewtonBudget = 100;
constexpr int kNewtonRestarts = 8;

Complex to_complex(Point2 p) { return {p.x, p.y}; }
Point2 to_point(Complex z) { return {z.real(), z.imag()}; }

// Keep exact-real values on the +0i side so principal logs agree with the
// limit from the strip interior.
Complex as_uhp(Complex v) {
  if (v.imag() == 0.0) return {v.real(), +0.0};
  return v;
}

// The SC integrand on the strip is prod_k (+-sinh(pi (z - z_k)/2))^beta_k
// with the sign flipped for prevertices on Im = 1, which keeps every
// factor inside the closed upper half-plane.
struct StripIntegrand {
  std::array<Complex, 4> z{};
  std::array<double, 4> beta{};
  std::array<QuadratureRule, 4> gj{};  // weight (1+t)^beta_k
  QuadratureRule gl;

  void build_rules() {
    for (int k = 0; k < 4; ++k) gj[k] = gauss_jacobi(kNodesPerPanel, 0.0, beta[k]);
    gl = gauss_jacobi(kNodesPerPanel, 0.0, 0.0);
  }

  bool on_top(int k) const { return z[k].imag() > 0.5; }

  Complex factor_value(Complex zeta, int k) const {
    Complex s = std::sinh(0.5 * M_PI * (zeta - z[k]));
    if (on_top(k)) s = -s;
    return as_uhp(s);
  }

  Complex log_deriv(Complex zeta) const {
    Complex acc{0.0, 0.0};
    for (int k = 0; k < 4; ++k) acc += beta[k] * std::log(factor_value(zeta, k));
    return acc;
  }

  Complex deriv(Complex zeta) const { return std::exp(log_deriv(zeta)); }

  Complex gl_panel(Complex za, Complex zb) const {
    const Complex d = zb - za;
    Complex sum{0.0, 0.0};
    for (int i = 0; i < kNodesPerPanel; ++i) {
      const Complex zeta = za + 0.5 * (1.0 + gl.nodes[i]) * d;
      sum += gl.weights[i] * deriv(zeta);
    }
    return 0.5 * d * sum;
  }

  // Panel starting at prevertex j; the Jacobi weight carries |zeta - z_j|^beta_j
  // and the remaining bounded phase factor stays in the evaluated product.
  Complex gj_panel(Complex za, Complex zb, int j) const {
    const Complex d = zb - za;
    const double half = 0.5 * std::abs(d);
    Complex sum{0.0, 0.0};
    for (int i = 0; i < kNodesPerPanel; ++i) {
      const Complex zeta = za + 0.5 * (1.0 + gj[j].nodes[i]) * d;
      Complex acc{0.0, 0.0};
      for (int k = 0; k < 4; ++k) {
        if (k == j) {
          const Complex h = factor_value(zeta, k) / std::abs(zeta - z[j]);
          acc += beta[k] * std::log(h);
        } else {
          acc += beta[k] * std::log(factor_value(zeta, k));
        }
      }
      sum += gj[j].weights[i] * std::exp(acc);
    }
    return 0.5 * d * std::pow(half, beta[j]) * sum;
  }

  // Compound quadrature from za to zb; sing_a is the prevertex index at za
  // (-1 when the start is regular). Panel lengths obey the half-distance
  // rule so endpoint singularities never touch a plain Gauss panel.
  Complex integrate(Complex za, Complex zb, int sing_a) const {
    if (za == zb) return {0.0, 0.0};
    Complex total{0.0, 0.0};
    Complex zl = za;
    int panels = 0;
    if (sing_a >= 0) {
      double dmin = std::numeric_limits<double>::infinity();
      for (int k = 0; k < 4; ++k)
        if (k != sing_a) dmin = std::min(dmin, std::abs(z[k] - za));
      const double rem = std::abs(zb - za);
      const double dist = std::min(1.0, 2.0 * dmin / rem);
      const Complex zr = za + dist * (zb - za);
      total += gj_panel(za, zr, sing_a);
      zl = zr;
      ++panels;
      if (dist >= 1.0) return total;
    }
    while (true) {
      const double rem = std::abs(zb - zl);
      if (rem == 0.0) break;
      double dmin = std::numeric_limits<double>::infinity();
      for (int k = 0; k < 4; ++k) dmin = std::min(dmin, std::abs(z[k] - zl));
      if (dmin == 0.0) throw QuadratureFailure("integration path hits a prevertex");
      const double dist = std::min(1.0, 2.0 * dmin / rem);
      const Complex zr = zl + dist * (zb - zl);
      total += gl_panel(zl, zr);
      zl = zr;
      if (++panels > kMaxPanels) throw QuadratureFailure("subdivision depth exceeded");
      if (dist >= 1.0) break;
    }
    return total;
  }

  // Integral between two prevertices, split at the midpoint.
  Complex integrate_between(int a, int b) const {
    const Complex mid = 0.5 * (z[a] + z[b]);
    return integrate(z[a], mid, a) - integrate(z[b], mid, b);
  }
};

StripIntegrand make_integrand(double L, const std::array<double, 4>& beta) {
  StripIntegrand W;
  W.z = {Complex{0.0, 0.0}, Complex{L, 0.0}, Complex{L, 1.0}, Complex{0.0, 1.0}};
  W.beta = beta;
  W.build_rules();
  return W;
}

struct SideIntegrals {
  std::array<Complex, 4> v{};  // side k -> k+1 unscaled image vectors
};

SideIntegrals side_integrals(const StripIntegrand& W) {
  SideIntegrals s;
  for (int k = 0; k < 4; ++k) s.v[k] = W.integrate_between(k, (k + 1) % 4);
  return s;
}

bool inside_strip(Complex z) { return z.imag() > 0.0 && z.imag() < 1.0; }

}  // namespace

Complex strip_map_derivative(const StripMapParams& params, Complex z) {
  std::array<double, 4> beta;
  for (int k = 0; k < 4; ++k) beta[k] = params.interior_angle_fractions[k] - 1.0;
  StripIntegrand W;
  W.z = params.prevertices;
  W.beta = beta;
  return params.scale_constant * W.deriv(z);
}

StripMapParams solve_strip_parameters(const Polygon2& poly, const std::array<int, 4>& corners) {
  if (poly.vertices.size() != 4)
    throw DegenerateInput("strip parameter problem requires a 4-vertex polygon");
  if (corners != std::array<int, 4>{0, 1, 2, 3})
    throw DegenerateInput("all four vertices must be designated as corners in order");
  if (!is_simple_polygon(poly)) throw DegenerateInput("polygon must be simple");
  if (signed_area(poly) <= 0.0) throw DegenerateInput("polygon must be counterclockwise");

  std::array<double, 4> alpha{};
  double alpha_sum = 0.0;
  for (int k = 0; k < 4; ++k) {
    alpha[k] = interior_angle_fraction(poly, k);
    alpha_sum += alpha[k];
  }
  // Closure needs the angle fractions to sum to exactly N - 2.
  for (int k = 0; k < 4; ++k) alpha[k] -= (alpha_sum - 2.0) / 4.0;
  std::array<double, 4> beta;
  for (int k = 0; k < 4; ++k) {
    if (alpha[k] <= 0.0 || alpha[k] >= 2.0)
      throw DegenerateInput("interior angle fraction outside (0, 2)");
    beta[k] = alpha[k] - 1.0;
  }

  std::array<double, 4> target{};
  for (int k = 0; k < 4; ++k)
    target[k] = dist(poly.vertices[k], poly.vertices[(k + 1) % 4]);

  const auto residual = [&](double psi, SideIntegrals* out_sides) {
    const double L = std::exp(psi);
    const StripIntegrand W = make_integrand(L, beta);
    const SideIntegrals s = side_integrals(W);
    if (out_sides) *out_sides = s;
    std::array<double, 3> r{};
    for (int j = 1; j < 4; ++j)
      r[j - 1] = std::abs(s.v[j]) / std::abs(s.v[0]) - target[j] / target[0];
    return r;
  };
  const auto rnorm = [](const std::array<double, 3>& r) {
    return std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
  };

  // Aspect-ratio seed for the prevertex gap.
  double psi = std::log(std::clamp((target[0] + target[2]) / (target[1] + target[3]),
                                   1e-3, 1e3));
  SideIntegrals sides;
  std::array<double, 3> r = residual(psi, &sides);

  bool converged = rnorm(r) < 1e-11;
  for (int it = 0; it < kSolverBudget && !converged; ++it) {
    const double h = 1e-6 * std::max(1.0, std::abs(psi));
    const std::array<double, 3> rp = residual(psi + h, nullptr);
    double jtj = 0.0, jtr = 0.0;
    for (int j = 0; j < 3; ++j) {
      const double jj = (rp[j] - r[j]) / h;
      jtj += jj * jj;
      jtr += jj * r[j];
    }
    if (jtj <= 0.0) break;
    const double step = -jtr / jtj;
    double lambda = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      SideIntegrals strial;
      const std::array<double, 3> rt = residual(psi + lambda * step, &strial);
      if (rnorm(rt) < rnorm(r)) {
        psi += lambda * step;
        r = rt;
        sides = strial;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) break;
    if (rnorm(r) < 1e-11) converged = true;
  }
  if (!converged && rnorm(r) > 1e-9)
    throw NonConvergence("strip parameter problem did not converge");

  const double L = std::exp(psi);
  StripMapParams params;
  params.target = poly;
  params.strip_length = L;
  params.prevertices = {Complex{0.0, 0.0}, Complex{L, 0.0}, Complex{L, 1.0},
                        Complex{0.0, 1.0}};
  for (int k = 0; k < 4; ++k) params.interior_angle_fractions[k] = alpha[k];
  params.crowding_warning = L < 1e-10;

  params.vertex_integrals[0] = {0.0, 0.0};
  for (int k = 1; k < 4; ++k)
    params.vertex_integrals[k] = params.vertex_integrals[k - 1] + sides.v[k - 1];

  const Complex w0 = to_complex(poly.vertices[0]);
  const Complex w1 = to_complex(poly.vertices[1]);
  params.scale_constant = (w1 - w0) / sides.v[0];
  params.offset_constant = w0;

  const double diam = diameter(poly);
  double vres = 0.0;
  for (int k = 0; k < 4; ++k) {
    const Complex mapped =
        params.offset_constant + params.scale_constant * params.vertex_integrals[k];
    vres = std::max(vres, std::abs(mapped - to_complex(poly.vertices[k])) / diam);
  }
  // Closure around the full boundary loop.
  vres = std::max(vres, std::abs(params.scale_constant *
                                 (params.vertex_integrals[3] + sides.v[3])) / diam);
  params.side_residual = vres;
  if (vres > 1e-8) throw NonConvergence("strip map vertex residual above tolerance");
  return params;
}

namespace {

StripIntegrand integrand_from_params(const StripMapParams& params) {
  std::array<double, 4> beta;
  for (int k = 0; k < 4; ++k) beta[k] = params.interior_angle_fractions[k] - 1.0;
  StripIntegrand W = make_integrand(params.strip_length, beta);
  return W;
}

Complex forward_eval(const StripMapParams& params, const StripIntegrand& W, Complex z) {
  int anchor = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 4; ++k) {
    const double d = std::abs(z - params.prevertices[k]);
    if (d < best) {
      best = d;
      anchor = k;
    }
  }
  const Complex I = params.vertex_integrals[anchor] +
                    W.integrate(params.prevertices[anchor], z, anchor);
  return params.offset_constant + params.scale_constant * I;
}

}  // namespace

Point2 strip_to_polygon(const StripMapParams& params, Complex z) {
  if (z.imag() < -1e-9 || z.imag() > 1.0 + 1e-9)
    throw OutOfDomain("strip point outside 0 <= Im z <= 1");
  z = {z.real(), std::clamp(z.imag(), 0.0, 1.0)};
  const StripIntegrand W = integrand_from_params(params);
  return to_point(forward_eval(params, W, z));
}

Complex polygon_to_strip(const StripMapParams& params, Point2 w) {
  const double diam = diameter(params.target);
  if (!point_in_polygon(params.target, w))
    throw OutsideSourcePolygon("point outside the source polygon");

  const StripIntegrand W = integrand_from_params(params);
  const double L = params.strip_length;
  const Complex z_center{0.5 * L, 0.5};
  const Complex w_target = to_complex(w);
  const Complex w_center = forward_eval(params, W, z_center);
  const double gate = 1e-7 * diam;
  const double tight = 1e-11 * diam;

  const auto clamp_strip = [&](Complex z) {
    return Complex{std::clamp(z.real(), -50.0 * std::max(1.0, L), 51.0 * std::max(1.0, L)),
                   std::clamp(z.imag(), 1e-12, 1.0 - 1e-12)};
  };

  const auto ode_march = [&](int steps) {
    Complex z = z_center;
    const Complex h = (w_target - w_center) / static_cast<double>(steps);
    for (int i = 0; i < steps; ++i) {
      const auto slope = [&](Complex zz) {
        const Complex d = params.scale_constant * W.deriv(clamp_strip(zz));
        if (std::abs(d) < 1e-280) return Complex{0.0, 0.0};
        return 1.0 / d;
      };
      const Complex k1 = slope(z);
      const Complex k2 = slope(z + 0.5 * h * k1);
      const Complex k3 = slope(z + 0.5 * h * k2);
      const Complex k4 = slope(z + h * k3);
      z = clamp_strip(z + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0);
    }
    return z;
  };

  const auto newton = [&](Complex z0) -> std::optional<Complex> {
    Complex z = clamp_strip(z0);
    Complex fz = forward_eval(params, W, z);
    double res = std::abs(fz - w_target);
    for (int it = 0; it < kNewtonBudget; ++it) {
      if (res <= tight) return z;
      const Complex d = params.scale_constant * W.deriv(z);
      if (std::abs(d) < 1e-280) break;
      const Complex step = (fz - w_target) / d;
      double lambda = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 30; ++ls) {
        const Complex zn = z - lambda * step;
        if (inside_strip(zn)) {
          const Complex fn = forward_eval(params, W, zn);
          const double rn = std::abs(fn - w_target);
          if (rn < res) {
            z = zn;
            fz = fn;
            res = rn;
            moved = true;
            break;
          }
        }
        lambda *= 0.5;
      }
      if (!moved) break;
    }
    if (res <= gate) return z;
    return std::nullopt;
  };

  // March seeds first, then a deterministic seed grid.
  for (int attempt = 0; attempt < kNewtonRestarts; ++attempt) {
    Complex seed;
    switch (attempt) {
      case 0: seed = ode_march(16); break;
      case 1: seed = ode_march(32); break;
      case 2: seed = ode_march(64); break;
      case 3: seed = z_center; break;
      case 4: seed = Complex{0.25 * L, 0.5}; break;
      case 5: seed = Complex{0.75 * L, 0.5}; break;
      case 6: seed = Complex{0.5 * L, 0.25}; break;
      default: seed = Complex{0.5 * L, 0.75}; break;
    }
    if (auto z = newton(seed)) return *z;
  }
  throw NonConvergence("strip map inversion failed the residual gate");
}

Complex rect_to_strip(Complex q, const RectangleDomain& rect) {
  const double W = rect.width;
  if (q.real() < -1e-9 || q.real() > W + 1e-9 || q.imag() < -1e-9 ||
      q.imag() > rect.height + 1e-9)
    throw OutOfDomain("rectangle point outside the domain");
  const double kp = elliptic_K(1.0 - rect.modulus_m);
  const Complex qc = kp * Complex{q.real() - 0.5 * W, q.imag()};
  const Complex s = as_uhp(jacobi_sn(qc, rect.modulus_m));
  return std::log(s) / M_PI;
}

Complex strip_to_rect(Complex z, const RectangleDomain& rect) {
  if (z.imag() < -1e-9 || z.imag() > 1.0 + 1e-9)
    throw OutOfDomain("strip point outside 0 <= Im z <= 1");
  z = {z.real(), std::clamp(z.imag(), 0.0, 1.0)};
  const double kp = elliptic_K(1.0 - rect.modulus_m);
  const Complex u = as_uhp(std::exp(M_PI * z));
  const Complex qc = jacobi_sn_inverse(u, rect.modulus_m);
  return Complex{qc.real() / kp + 0.5 * rect.width, qc.imag() / kp};
}

Complex rect_corner(const RectangleDomain& rect, int k) {
  switch (k & 3) {
    case 0: return {rect.width, 0.0};
    case 1: return {rect.width, rect.height};
    case 2: return {0.0, rect.height};
    default: return {0.0, 0.0};
  }
}

ScmMap build_rectangle_map(const Polygon2& poly) {
  ScmMap map;
  map.strip_params = solve_strip_parameters(poly);
  const double L = map.strip_params.strip_length;
  const double m = std::exp(-2.0 * M_PI * L);
  if (!(m > 0.0 && m < 1.0))
    throw NonConvergence("conformal modulus out of representable range");
  const double K = elliptic_K(m);
  const double Kp = elliptic_K(1.0 - m);
  map.rectangle.modulus_m = m;
  map.rectangle.height = 1.0;
  map.rectangle.width = 2.0 * K / Kp;
  map.corner_indices = {0, 1, 2, 3};
  return map;
}

Point2 transfer_point(const ScmMap& map_src, const ScmMap& map_dst, Point2 w_src) {
  const Complex z_src = polygon_to_strip(map_src.strip_params, w_src);
  const Complex q_src = strip_to_rect(z_src, map_src.rectangle);
  // Unit-square bridge: anisotropic normalization of each rectangle.
  const double sx = std::clamp(q_src.real() / map_src.rectangle.width, 0.0, 1.0);
  const double sy = std::clamp(q_src.imag() / map_src.rectangle.height, 0.0, 1.0);
  const Complex q_dst{sx * map_dst.rectangle.width, sy * map_dst.rectangle.height};
  const Complex z_dst = rect_to_strip(q_dst, map_dst.rectangle);
  return strip_to_polygon(map_dst.strip_params, z_dst);
}

}  // namespace scmt
