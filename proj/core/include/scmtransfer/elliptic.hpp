#pragma once

#include <complex>

#include "scmtransfer/errors.hpp"

namespace scmt {

using Complex = std::complex<double>;

// Complete elliptic integral of the first kind K(m), parameter convention
// m = k^2. AGM evaluation, relative error ~1e-15. Throws OutOfDomain for
// m outside [0, 1).
double elliptic_K(double m);

// Jacobi elliptic sine sn(u | m) for m in [0, 1], via descending Landen
// transformation. The m = 0 and m = 1 limits are exact (sin, tanh).
double jacobi_sn(double u, double m);
Complex jacobi_sn(Complex u, double m);

// Principal inverse of sn on the fundamental half-rectangle: for u in the
// closed upper half-plane returns q with sn(q|m) = u, Re q in [-K, K],
// Im q in [0, K'].
Complex jacobi_sn_inverse(Complex u, double m);

// Carlson symmetric form R_F for complex arguments in the cut plane.
Complex carlson_rf(Complex x, Complex y, Complex z);

}  // namespace scmt
