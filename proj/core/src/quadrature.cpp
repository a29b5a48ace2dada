#include "scmtransfer/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace scmt {

namespace {

// Eigenvalues of a symmetric tridiagonal matrix plus first components of
// the eigenvectors (Golub-Welsch), via implicit-shift QL.
void tridiag_eigen_first(std::vector<double>& d, std::vector<double>& e,
                         std::vector<double>& z) {
  const int n = static_cast<int>(d.size());
  e.push_back(0.0);
  z.assign(n, 0.0);
  if (n > 0) z[0] = 1.0;
  // z starts as the first row of the identity; QL rotations accumulate the
  // first row of the eigenvector matrix.
  std::vector<double> zrow = z;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= 1e-300 || std::abs(e[m]) <= 1e-16 * dd) break;
      }
      if (m != l) {
        if (iter++ == 60) throw std::runtime_error("tridiagonal QL failed to converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        bool underflow = false;
        for (int i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          f = zrow[i + 1];
          zrow[i + 1] = s * zrow[i] + c * f;
          zrow[i] = c * zrow[i] - s * f;
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  z = zrow;
}

}  // namespace

QuadratureRule gauss_jacobi(int n, double a, double b) {
  if (n < 1 || a <= -1.0 || b <= -1.0)
    throw std::invalid_argument("gauss_jacobi: invalid order or exponents");

  // Recurrence coefficients for the monic Jacobi polynomials.
  std::vector<double> diag(n), off(std::max(0, n - 1));
  const double apb = a + b;
  for (int k = 0; k < n; ++k) {
    if (k == 0) {
      diag[k] = (b - a) / (apb + 2.0);
    } else {
      const double den = (2.0 * k + apb) * (2.0 * k + apb + 2.0);
      diag[k] = (b * b - a * a) / den;
    }
  }
  for (int k = 1; k < n; ++k) {
    double bk;
    if (k == 1) {
      bk = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + apb) * (2.0 + apb) * (3.0 + apb));
    } else {
      const double t = 2.0 * k + apb;
      bk = 4.0 * k * (k + a) * (k + b) * (k + apb) / (t * t * (t + 1.0) * (t - 1.0));
    }
    off[k - 1] = std::sqrt(bk);
  }

  const double mu0 =
      std::pow(2.0, apb + 1.0) * std::exp(std::lgamma(a + 1.0) + std::lgamma(b + 1.0) -
                                          std::lgamma(apb + 2.0));

  std::vector<double> d = diag, e = off, z;
  tridiag_eigen_first(d, e, z);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) { return d[i] < d[j]; });

  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = d[order[i]];
    rule.weights[i] = mu0 * z[order[i]] * z[order[i]];
  }
  return rule;
}

}  // namespace scmt
