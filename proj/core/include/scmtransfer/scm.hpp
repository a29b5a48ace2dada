#pragma once

#include <array>
#include <complex>
#include <vector>

#include "scmtransfer/geometry.hpp"

namespace scmt {

using Complex = std::complex<double>;

// Solved strip-to-polygon Schwarz-Christoffel map for a quadrilateral.
// Prevertices sit at 0 and strip_length on the line Im = 0 and at
// strip_length + i and i on the line Im = 1, so vertex k corresponds to
// prevertices[k] and the rectangle corner with the same index.
struct StripMapParams {
  std::array<Complex, 4> prevertices{};
  std::array<double, 4> interior_angle_fractions{};
  Complex scale_constant{1.0, 0.0};   // A in w = A * integral + C
  Complex offset_constant{0.0, 0.0};  // C
  Polygon2 target;
  double strip_length = 1.0;          // gap between the two bottom prevertices
  double side_residual = 0.0;         // max side mismatch / diameter
  bool crowding_warning = false;      // adjacent prevertex gap < 1e-10
  std::array<Complex, 4> vertex_integrals{};  // unscaled integral at each prevertex
};

struct RectangleDomain {
  double width = 1.0;   // conformal modulus of the quadrilateral
  double height = 1.0;  // normalized to 1
  double modulus_m = 0.5;
};

struct ScmMap {
  StripMapParams strip_params;
  RectangleDomain rectangle;
  std::array<int, 4> corner_indices{0, 1, 2, 3};
};

// Parameter problem for a 4-vertex CCW simple polygon with all vertices
// designated as rectangle corners. Damped Gauss-Newton over the log of
// the prevertex gap; throws NonConvergence past the iteration budget.
StripMapParams solve_strip_parameters(const Polygon2& poly,
                                      const std::array<int, 4>& corners = {0, 1, 2, 3});

// Forward strip map, compound Gauss-Jacobi evaluation of the SC integral.
Point2 strip_to_polygon(const StripMapParams& params, Complex z);

// Inverse map: ODE march from the conformal center plus Newton polish,
// with a hard residual gate. Throws NonConvergence rather than return an
// unverified point.
Complex polygon_to_strip(const StripMapParams& params, Point2 w);

// Strip <-> rectangle through z = log(sn(q|m))/pi. Rectangle coordinates
// are normalized: x in [0, width], y in [0, height].
Complex rect_to_strip(Complex q, const RectangleDomain& rect);
Complex strip_to_rect(Complex z, const RectangleDomain& rect);

// Rectangle corner positions (normalized coordinates) for corner index k.
Complex rect_corner(const RectangleDomain& rect, int k);

ScmMap build_rectangle_map(const Polygon2& poly);

// Teacher-to-learner point transfer: polygon -> rectangle -> unit square
// (anisotropic normalization) -> rectangle -> polygon.
Point2 transfer_point(const ScmMap& map_src, const ScmMap& map_dst, Point2 w_src);

// Derivative of the strip map (scale constant applied).
Complex strip_map_derivative(const StripMapParams& params, Complex z);

}  // namespace scmt
