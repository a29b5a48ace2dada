#pragma once

#include <vector>

namespace scmt {

struct QuadratureRule {
  std::vector<double> nodes;    // ascending in (-1, 1)
  std::vector<double> weights;  // positive
};

// n-point Gauss-Jacobi rule for the weight (1-x)^a (1+x)^b on [-1, 1],
// a, b > -1. a = b = 0 gives Gauss-Legendre.
QuadratureRule gauss_jacobi(int n, double a, double b);

}  // namespace scmt
