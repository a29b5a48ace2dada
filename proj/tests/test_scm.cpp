#include <cmath>
#include <complex>

#include "doctest.h"
#include "scmtransfer/elliptic.hpp"
#include "scmtransfer/scm.hpp"
#include "test_util.hpp"

using namespace scmt;
using testutil::interior_point;
using testutil::random_convex_quad;

namespace {

const Polygon2 kUnitSquare{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};

}  // namespace

TEST_CASE("strip parameters: unit square is symmetric and hits side midpoints") {
  const StripMapParams params = solve_strip_parameters(kUnitSquare);
  CHECK(params.side_residual < 1e-8);
  // Aligned prevertex layout: 0 and L on the bottom, L+i and i on top, so
  // the configuration is symmetric about the strip midline by construction.
  const double L = params.strip_length;
  CHECK(params.prevertices[1].real() == doctest::Approx(L));
  CHECK(params.prevertices[2] == Complex{L, 1.0});

  // Midpoint between the bottom prevertices lands on the bottom side's
  // midpoint of the square.
  const Point2 mid = strip_to_polygon(params, {0.5 * L, 0.0});
  CHECK(mid.x == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(mid.y == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("strip parameters: prevertices map to vertices") {
  Rng rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const Polygon2 poly = random_convex_quad(rng);
    const StripMapParams params = solve_strip_parameters(poly);
    const double diam = diameter(poly);
    for (int k = 0; k < 4; ++k) {
      const Point2 w = strip_to_polygon(params, params.prevertices[k]);
      CHECK(dist(w, poly.vertices[k]) <= 1e-8 * diam);
    }
  }
}

TEST_CASE("strip parameters: 2x1 rectangle residual and modulus") {
  const Polygon2 rect{{{0, 0}, {2, 0}, {2, 1}, {0, 1}}};
  const ScmMap map = build_rectangle_map(rect);
  CHECK(map.strip_params.side_residual < 1e-8);
  // An axis-aligned rectangle is its own canonical domain up to
  // similarity: the conformal modulus equals side(1->2)/side(0->1).
  CHECK(map.rectangle.width == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(map.rectangle.height == 1.0);

  const ScmMap square_map = build_rectangle_map(kUnitSquare);
  CHECK(square_map.rectangle.width == doctest::Approx(1.0).epsilon(1e-6));

  // modulus_m consistent with the aspect ratio through the elliptic
  // integral ratio (Eq. (3) convention carries a factor 2).
  const double m = square_map.rectangle.modulus_m;
  CHECK(square_map.rectangle.width ==
        doctest::Approx(2.0 * elliptic_K(m) / elliptic_K(1.0 - m)).epsilon(1e-10));
}

TEST_CASE("strip parameters: random convex quadrilaterals converge") {
  Rng rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    const Polygon2 poly = random_convex_quad(rng);
    const StripMapParams params = solve_strip_parameters(poly);
    CHECK(params.side_residual < 1e-8);
  }
}

TEST_CASE("strip boundary maps to the polygon boundary, monotone along a side") {
  Rng rng(40);
  const Polygon2 poly = random_convex_quad(rng);
  const StripMapParams params = solve_strip_parameters(poly);
  const double L = params.strip_length;
  const Point2 a = poly.vertices[0], b = poly.vertices[1];
  const double side = dist(a, b);
  double prev_t = -1e-9;
  for (int i = 1; i < 40; ++i) {
    const Point2 w = strip_to_polygon(params, {L * i / 40.0, 0.0});
    // Lies on side 0->1 and advances monotonically toward vertex 1.
    const double along = ((w.x - a.x) * (b.x - a.x) + (w.y - a.y) * (b.y - a.y)) / (side * side);
    const double off = std::abs(-(w.x - a.x) * (b.y - a.y) + (w.y - a.y) * (b.x - a.x)) / side;
    CHECK(off <= 1e-7 * diameter(poly));
    CHECK(along > prev_t);
    prev_t = along;
  }
}

TEST_CASE("strip midline maps strictly inside the polygon") {
  Rng rng(41);
  const Polygon2 poly = random_convex_quad(rng);
  const StripMapParams params = solve_strip_parameters(poly);
  const double L = params.strip_length;
  for (int i = 0; i <= 20; ++i) {
    const Point2 w = strip_to_polygon(params, {L * (i / 20.0), 0.5});
    CHECK(point_in_polygon(poly, w));
    CHECK(distance_to_boundary(poly, w) > 0.0);
  }
}

TEST_CASE("strip <-> rectangle round trips, corners and center") {
  const ScmMap map =
      build_rectangle_map(Polygon2{{{0, 0}, {1.7, 0.1}, {1.9, 1.2}, {-0.2, 0.9}}});
  const RectangleDomain& rect = map.rectangle;
  const double L = map.strip_params.strip_length;

  // Corner correspondence.
  for (int k = 0; k < 4; ++k) {
    const Complex z = rect_to_strip(rect_corner(rect, k), rect);
    CHECK(std::abs(z - map.strip_params.prevertices[k]) <= 1e-8 * std::max(1.0, L));
  }
  // Rectangle center on the strip midline by symmetry.
  const Complex zc = rect_to_strip({0.5 * rect.width, 0.5}, rect);
  CHECK(zc.imag() == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(zc.real() == doctest::Approx(0.5 * L).epsilon(1e-9));

  Rng rng(55);
  for (int i = 0; i < 100; ++i) {
    const Complex q{rect.width * rng.uniform(), rng.uniform()};
    const Complex z = rect_to_strip(q, rect);
    const Complex back = strip_to_rect(z, rect);
    CHECK(std::abs(back - q) <= 1e-9 * std::max(1.0, rect.width));
  }
}

TEST_CASE("polygon inversion round trips and stays in the open strip") {
  Rng rng(60);
  for (int trial = 0; trial < 5; ++trial) {
    const Polygon2 poly = random_convex_quad(rng);
    const StripMapParams params = solve_strip_parameters(poly);
    const double diam = diameter(poly);
    for (int i = 0; i < 20; ++i) {
      const Point2 w = interior_point(poly, rng);
      const Complex z = polygon_to_strip(params, w);
      CHECK(z.imag() > 0.0);
      CHECK(z.imag() < 1.0);
      const Point2 back = strip_to_polygon(params, z);
      CHECK(dist(w, back) <= 1e-6 * diam);
    }
  }
}

TEST_CASE("near-corner inversion converges or throws, never silently wrong") {
  Rng rng(61);
  const Polygon2 poly = random_convex_quad(rng);
  const StripMapParams params = solve_strip_parameters(poly);
  const double diam = diameter(poly);
  const Point2 c = centroid(poly);
  for (int k = 0; k < 4; ++k) {
    const Point2 v = poly.vertices[k];
    const Point2 w{v.x + 1e-6 * diam * (c.x - v.x) / dist(c, v),
                   v.y + 1e-6 * diam * (c.y - v.y) / dist(c, v)};
    try {
      const Complex z = polygon_to_strip(params, w);
      const Point2 back = strip_to_polygon(params, z);
      CHECK(dist(w, back) <= 1e-6 * diam);
    } catch (const NonConvergence&) {
      // Acceptable: an honest failure instead of an unverified result.
    }
  }
}

TEST_CASE("inversion rejects exterior points") {
  const StripMapParams params = solve_strip_parameters(kUnitSquare);
  CHECK_THROWS_AS(polygon_to_strip(params, {2.0, 2.0}), OutsideSourcePolygon);
}

TEST_CASE("transfer_point: identical maps give the identity") {
  Rng rng(70);
  const Polygon2 poly = random_convex_quad(rng);
  const ScmMap map = build_rectangle_map(poly);
  for (int i = 0; i < 10; ++i) {
    const Point2 w = interior_point(poly, rng);
    const Point2 out = transfer_point(map, map, w);
    CHECK(dist(out, w) <= 1e-6 * diameter(poly));
  }
}

TEST_CASE("transfer_point: a uniformly scaled target reproduces the similarity") {
  Rng rng(71);
  const Polygon2 poly = random_convex_quad(rng);
  std::vector<Point2> scaled;
  for (const auto& v : poly.vertices) scaled.push_back({2.0 * v.x, 2.0 * v.y});
  const Polygon2 poly2 = make_polygon(scaled);
  const ScmMap map_src = build_rectangle_map(poly);
  const ScmMap map_dst = build_rectangle_map(poly2);
  for (int i = 0; i < 10; ++i) {
    const Point2 w = interior_point(poly, rng);
    const Point2 out = transfer_point(map_src, map_dst, w);
    CHECK(dist(out, {2.0 * w.x, 2.0 * w.y}) <= 1e-6 * diameter(poly2));
  }
}

TEST_CASE("transfer_point: near-vertex samples land near corresponding vertices") {
  Rng rng(72);
  const Polygon2 src = random_convex_quad(rng);
  const Polygon2 dst = random_convex_quad(rng);
  const ScmMap map_src = build_rectangle_map(src);
  const ScmMap map_dst = build_rectangle_map(dst);
  const Point2 c_src = centroid(src);
  for (int k = 0; k < 4; ++k) {
    const Point2 v = src.vertices[k];
    const Point2 w{v.x + 0.02 * (c_src.x - v.x), v.y + 0.02 * (c_src.y - v.y)};
    const Point2 out = transfer_point(map_src, map_dst, w);
    // The image sits in the neighborhood of the corresponding vertex.
    CHECK(dist(out, dst.vertices[k]) <= 0.25 * diameter(dst));
  }
}

TEST_CASE("conformality away from corners") {
  Rng rng(80);
  const Polygon2 poly = random_convex_quad(rng);
  const ScmMap map = build_rectangle_map(poly);
  const double diam = diameter(poly);
  const double h = 1e-5 * diam;
  int probes = 0;
  for (int i = 0; i < 40 && probes < 10; ++i) {
    const Point2 w = interior_point(poly, rng);
    bool far = true;
    for (const auto& v : poly.vertices)
      if (dist(w, v) < 0.05 * diam) far = false;
    if (!far) continue;
    ++probes;
    const auto q0 = strip_to_rect(polygon_to_strip(map.strip_params, w), map.rectangle);
    const auto qx =
        strip_to_rect(polygon_to_strip(map.strip_params, {w.x + h, w.y}), map.rectangle);
    const auto qy =
        strip_to_rect(polygon_to_strip(map.strip_params, {w.x, w.y + h}), map.rectangle);
    const Complex dx = qx - q0, dy = qy - q0;
    const double angle_deg = std::abs(std::arg(dy / dx)) * 180.0 / M_PI;
    CHECK(std::abs(angle_deg - 90.0) <= 0.05);
    CHECK(std::abs(std::abs(dy) / std::abs(dx) - 1.0) <= 1e-3);
  }
  CHECK(probes >= 5);
}

TEST_CASE("non-convex quadrilaterals are supported") {
  // One reflex vertex.
  const Polygon2 poly{{{0, 0}, {2, 0}, {0.6, 0.5}, {0, 2}}};
  REQUIRE(is_simple_polygon(poly));
  const StripMapParams params = solve_strip_parameters(poly);
  CHECK(params.side_residual < 1e-8);
  Rng rng(90);
  int ok = 0;
  for (int i = 0; i < 20; ++i) {
    const Point2 w = interior_point(poly, rng, 0.05);
    if (!point_in_polygon(poly, w)) continue;
    try {
      const Complex z = polygon_to_strip(params, w);
      const Point2 back = strip_to_polygon(params, z);
      CHECK(dist(w, back) <= 1e-6 * diameter(poly));
      ++ok;
    } catch (const NonConvergence&) {
    }
  }
  CHECK(ok >= 10);
}

TEST_CASE("solver rejects invalid inputs") {
  CHECK_THROWS_AS(solve_strip_parameters(Polygon2{{{0, 0}, {1, 1}, {1, 0}, {0, 1}}}),
                  DegenerateInput);  // bow-tie
  CHECK_THROWS_AS(solve_strip_parameters(Polygon2{{{0, 0}, {1, 0}, {1, 1}}}),
                  DegenerateInput);  // wrong vertex count
}

TEST_CASE("strip_to_polygon rejects points outside the strip") {
  const StripMapParams params = solve_strip_parameters(kUnitSquare);
  CHECK_THROWS_AS(strip_to_polygon(params, {0.0, 1.5}), OutOfDomain);
  CHECK_THROWS_AS(strip_to_polygon(params, {0.0, -0.5}), OutOfDomain);
}
