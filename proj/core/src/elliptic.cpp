#include "scmtransfer/elliptic.hpp"

#include <cmath>

namespace scmt {

double elliptic_K(double m) {
  if (!(m >= 0.0 && m < 1.0)) throw OutOfDomain("elliptic_K requires m in [0, 1)");
  double a = 1.0;
  double b = std::sqrt(1.0 - m);
  for (int i = 0; i < 64; ++i) {
    const double an = 0.5 * (a + b);
    const double bn = std::sqrt(a * b);
    a = an;
    b = bn;
    if (std::abs(a - b) <= 1e-17 * a) break;
  }
  return M_PI / (2.0 * a);
}

namespace {

// Descending Landen/Gauss transformation down to the sin() base case.
// Relative accuracy ~1e-15 for arguments with |Im u| <= K'(m)/2; callers
// reflect across the pole first.
template <typename T>
T sn_descend(T u, double m) {
  if (m < 4e-16) {
    const T sinu = std::sin(u);
    const T cosu = std::cos(u);
    return sinu + (m / 4.0) * (sinu * cosu - u) * cosu;
  }
  double kappa;
  if (m > 1e-3) {
    const double sq = std::sqrt(1.0 - m);
    kappa = (1.0 - sq) / (1.0 + sq);
  } else {
    // Series of (1-sqrt(1-m))/(1+sqrt(1-m)) in m/4, accurate for small m.
    const double x = m / 4.0;
    kappa = x * (1.0 + x * (2.0 + x * (5.0 + x * (14.0 + x * (42.0 + x * 132.0)))));
  }
  const double mu = kappa * kappa;
  const T s = sn_descend(u / (1.0 + kappa), mu);
  return (1.0 + kappa) * s / (1.0 + kappa * s * s);
}

}  // namespace

double jacobi_sn(double u, double m) {
  if (!(m >= 0.0 && m <= 1.0)) throw OutOfDomain("jacobi_sn requires m in [0, 1]");
  if (m == 0.0) return std::sin(u);
  if (m == 1.0) return std::tanh(u);
  return sn_descend(u, m);
}

Complex jacobi_sn(Complex u, double m) {
  if (!(m >= 0.0 && m <= 1.0)) throw OutOfDomain("jacobi_sn requires m in [0, 1]");
  if (m == 0.0) return std::sin(u);
  if (m == 1.0) return std::tanh(u);

  // Arguments beyond half the imaginary period are reflected through the
  // pole at iK' where the sin() base case loses all relative accuracy:
  // sn(iK' - v) = -1/(k sn(v)).
  int high = 0;
  if (u.imag() != 0.0) {
    const double kp = elliptic_K(1.0 - m);
    if (u.imag() > 0.5 * kp) {
      high = 1;
      u = Complex(0.0, kp) - u;
    } else if (u.imag() < -0.5 * kp) {
      high = 1;
      u = Complex(0.0, -kp) - u;
    }
  }
  Complex s = sn_descend(u, m);
  if (high) s = -1.0 / (std::sqrt(m) * s);
  return s;
}

Complex carlson_rf(Complex x, Complex y, Complex z) {
  // Carlson duplication; valid for arguments in the cut plane.
  Complex X = x, Y = y, Z = z;
  Complex A = (X + Y + Z) / 3.0;
  const Complex A0 = A;
  double q = std::max({std::abs(A - X), std::abs(A - Y), std::abs(A - Z)});
  q /= std::pow(3.0 * 1e-18, 1.0 / 6.0);
  double f = 1.0;
  for (int it = 0; it < 64 && q * f > std::abs(A); ++it) {
    const Complex sx = std::sqrt(X), sy = std::sqrt(Y), sz = std::sqrt(Z);
    const Complex lam = sx * sy + sy * sz + sz * sx;
    X = 0.25 * (X + lam);
    Y = 0.25 * (Y + lam);
    Z = 0.25 * (Z + lam);
    A = 0.25 * (A + lam);
    f *= 0.25;
  }
  const Complex Xr = (A0 - x) * f / A;
  const Complex Yr = (A0 - y) * f / A;
  const Complex Zr = -(Xr + Yr);
  const Complex E2 = Xr * Yr - Zr * Zr;
  const Complex E3 = Xr * Yr * Zr;
  return (1.0 - E2 / 10.0 + E3 / 14.0 + E2 * E2 / 24.0 - 3.0 * E2 * E3 / 44.0) /
         std::sqrt(A);
}

Complex jacobi_sn_inverse(Complex u, double m) {
  if (!(m >= 0.0 && m < 1.0)) throw OutOfDomain("jacobi_sn_inverse requires m in [0, 1)");
  // q = u * R_F(1 - u^2, 1 - m u^2, 1), the incomplete elliptic integral
  // of the first kind with sin(phi) = u.
  const Complex u2 = u * u;
  return u * carlson_rf(1.0 - u2, 1.0 - m * u2, 1.0);
}

}  // namespace scmt
