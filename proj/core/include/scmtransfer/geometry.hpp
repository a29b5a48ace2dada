#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "scmtransfer/errors.hpp"

namespace scmt {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
  friend bool operator==(Point2 a, Point2 b) { return a.x == b.x && a.y == b.y; }
};

double dot(Point2 a, Point2 b);
double cross(Point2 a, Point2 b);
double norm(Point2 p);
double dist(Point2 a, Point2 b);
bool finite(Point2 p);

// Counterclockwise simple polygon. Use make_polygon to validate the
// invariants (>= 3 vertices, CCW, consecutive vertices distinct).
struct Polygon2 {
  std::vector<Point2> vertices;
};

Polygon2 make_polygon(std::vector<Point2> vertices);
double signed_area(const Polygon2& poly);
double diameter(const Polygon2& poly);
Point2 centroid(const Polygon2& poly);
// Interior angle at vertex i divided by pi, in (0, 2).
double interior_angle_fraction(const Polygon2& poly, std::size_t i);
double distance_to_boundary(const Polygon2& poly, Point2 p);

// Sign of the area of triangle (a, b, c): +1 CCW, -1 CW, 0 within tolerance.
int orientation(Point2 a, Point2 b, Point2 c);
double orient2d(Point2 a, Point2 b, Point2 c);

struct Triangulation {
  std::vector<Point2> points;                    // merged input points
  std::vector<std::size_t> source_index;        // first input index per merged point
  std::vector<std::array<int, 3>> triangles;    // CCW vertex index triples
  std::vector<std::array<int, 3>> adjacency;    // neighbor across edge (v[k], v[k+1]); -1 hull
};

// Delaunay triangulation of the merged input points (duplicates within
// 1e-9 of the point-cloud scale are merged). Deterministic for a fixed
// input order. Throws DegenerateInput for < 3 effective points or an
// all-collinear set.
Triangulation delaunay_triangulate(const std::vector<Point2>& points);

// Index of a triangle containing p, boundary inclusive, lowest index on
// ties. nullopt if p lies outside the hull.
std::optional<int> locate_triangle(const Triangulation& tri, Point2 p);

// CCW convex hull with collinear boundary points excluded. Throws
// DegenerateInput when all points are collinear or fewer than 3 given.
Polygon2 convex_hull(const std::vector<Point2>& points);

bool is_simple_polygon(const Polygon2& poly);

// Boundary-inclusive containment for simple polygons.
bool point_in_polygon(const Polygon2& poly, Point2 p);

// Polyline helpers shared by the planners.
double polyline_length(const std::vector<Point2>& pts);
// Closest point on the polyline; returns (point, arc length at the point).
std::pair<Point2, double> nearest_on_polyline(const std::vector<Point2>& pts, Point2 p);
Point2 point_at_arclength(const std::vector<Point2>& pts, double s);
Point2 tangent_at_arclength(const std::vector<Point2>& pts, double s);
// Sub-polyline of the given arc length starting at arc position s0.
std::vector<Point2> sub_polyline(const std::vector<Point2>& pts, double s0, double length);

}  // namespace scmt
