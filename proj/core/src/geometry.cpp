#include "scmtransfer/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace scmt {

namespace {
constexpr double kOrientEps = 1e-12;
constexpr double kMergeEps = 1e-9;
}  // namespace

double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
double norm(Point2 p) { return std::hypot(p.x, p.y); }
double dist(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }
bool finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

double orient2d(Point2 a, Point2 b, Point2 c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

int orientation(Point2 a, Point2 b, Point2 c) {
  const double det = orient2d(a, b, c);
  const double scale = std::max({std::abs(b.x - a.x), std::abs(b.y - a.y),
                                 std::abs(c.x - a.x), std::abs(c.y - a.y), 1.0});
  if (std::abs(det) <= kOrientEps * scale * scale) return 0;
  return det > 0.0 ? 1 : -1;
}

double signed_area(const Polygon2& poly) {
  double a = 0.0;
  const auto& v = poly.vertices;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point2& p = v[i];
    const Point2& q = v[(i + 1) % v.size()];
    a += cross(p, q);
  }
  return 0.5 * a;
}

double diameter(const Polygon2& poly) {
  double d = 0.0;
  for (std::size_t i = 0; i < poly.vertices.size(); ++i)
    for (std::size_t j = i + 1; j < poly.vertices.size(); ++j)
      d = std::max(d, dist(poly.vertices[i], poly.vertices[j]));
  return d;
}

Point2 centroid(const Polygon2& poly) {
  Point2 c{0.0, 0.0};
  for (const auto& p : poly.vertices) c = c + p;
  return (1.0 / static_cast<double>(poly.vertices.size())) * c;
}

Polygon2 make_polygon(std::vector<Point2> vertices) {
  if (vertices.size() < 3) throw DegenerateInput("polygon needs >= 3 vertices");
  for (const auto& p : vertices)
    if (!finite(p)) throw DegenerateInput("polygon vertex not finite");
  Polygon2 poly{std::move(vertices)};
  const double diam = diameter(poly);
  const double tol = 1e-12 * std::max(1.0, diam);
  const auto& v = poly.vertices;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (dist(v[i], v[(i + 1) % v.size()]) <= tol)
      throw DegenerateInput("consecutive polygon vertices coincide");
  }
  if (signed_area(poly) <= 0.0) throw DegenerateInput("polygon must be counterclockwise");
  return poly;
}

double interior_angle_fraction(const Polygon2& poly, std::size_t i) {
  const auto& v = poly.vertices;
  const std::size_t n = v.size();
  const Point2 prev = v[(i + n - 1) % n];
  const Point2 cur = v[i];
  const Point2 next = v[(i + 1) % n];
  const Point2 e_in = cur - prev;
  const Point2 e_out = next - cur;
  // Exterior turn in (-pi, pi); interior angle = pi - turn.
  const double turn = std::atan2(cross(e_in, e_out), dot(e_in, e_out));
  return (M_PI - turn) / M_PI;
}

namespace {

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return dist(p, a);
  double t = dot(p - a, ab) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return dist(p, a + t * ab);
}

}  // namespace

double distance_to_boundary(const Polygon2& poly, Point2 p) {
  double d = std::numeric_limits<double>::infinity();
  const auto& v = poly.vertices;
  for (std::size_t i = 0; i < v.size(); ++i)
    d = std::min(d, point_segment_distance(p, v[i], v[(i + 1) % v.size()]));
  return d;
}

// ---------------------------------------------------------------------------
// Delaunay triangulation (Bowyer-Watson on normalized coordinates)
// ---------------------------------------------------------------------------

namespace {

struct BwTriangle {
  std::array<int, 3> v;
  bool alive = true;
};

// Strict in-circumcircle test for CCW triangle (a,b,c) and query d, with
// a magnitude-scaled error filter. Ties (cocircular within the filter)
// count as outside, so insertion order breaks them deterministically.
bool in_circumcircle(Point2 a, Point2 b, Point2 c, Point2 d) {
  const double adx = a.x - d.x, ady = a.y - d.y;
  const double bdx = b.x - d.x, bdy = b.y - d.y;
  const double cdx = c.x - d.x, cdy = c.y - d.y;
  const double ad2 = adx * adx + ady * ady;
  const double bd2 = bdx * bdx + bdy * bdy;
  const double cd2 = cdx * cdx + cdy * cdy;
  const double det = adx * (bdy * cd2 - cdy * bd2) - ady * (bdx * cd2 - cdx * bd2) +
                     ad2 * (bdx * cdy - cdx * bdy);
  const double perm = std::abs(adx) * (std::abs(bdy) * cd2 + std::abs(cdy) * bd2) +
                      std::abs(ady) * (std::abs(bdx) * cd2 + std::abs(cdx) * bd2) +
                      ad2 * (std::abs(bdx * cdy) + std::abs(cdx * bdy));
  return det > kOrientEps * perm;
}

}  // namespace

Triangulation delaunay_triangulate(const std::vector<Point2>& input) {
  for (const auto& p : input)
    if (!finite(p)) throw DegenerateInput("triangulation input not finite");

  // Merge duplicates (first occurrence wins) relative to cloud scale.
  double lox = std::numeric_limits<double>::infinity(), loy = lox;
  double hix = -lox, hiy = -lox;
  for (const auto& p : input) {
    lox = std::min(lox, p.x);
    loy = std::min(loy, p.y);
    hix = std::max(hix, p.x);
    hiy = std::max(hiy, p.y);
  }
  const double scale = std::max({hix - lox, hiy - loy, 1e-300});

  std::vector<Point2> pts;
  std::vector<std::size_t> src;
  for (std::size_t i = 0; i < input.size(); ++i) {
    bool dup = false;
    for (const auto& q : pts) {
      if (dist(input[i], q) <= kMergeEps * scale) {
        dup = true;
        break;
      }
    }
    if (!dup) {
      pts.push_back(input[i]);
      src.push_back(i);
    }
  }
  if (pts.size() < 3) throw DegenerateInput("triangulation needs >= 3 distinct points");

  bool all_collinear = true;
  for (std::size_t i = 2; i < pts.size() && all_collinear; ++i)
    if (orientation(pts[0], pts[1], pts[i]) != 0) all_collinear = false;
  if (all_collinear) throw DegenerateInput("triangulation input is collinear");

  // Work in normalized coordinates so the tolerance is scale free.
  std::vector<Point2> np(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    np[i] = {(pts[i].x - lox) / scale, (pts[i].y - loy) / scale};

  // Far super-triangle: decisions involving its vertices stay sign-robust
  // while data-scale circumcircles never reach it.
  const double big = 1e9;
  std::vector<Point2> work = np;
  const int s0 = static_cast<int>(work.size());
  work.push_back({-big, -big});
  work.push_back({3.0 * big, -big});
  work.push_back({-big, 3.0 * big});

  std::vector<BwTriangle> tris;
  tris.push_back({{s0, s0 + 1, s0 + 2}, true});

  for (int ip = 0; ip < static_cast<int>(np.size()); ++ip) {
    const Point2 p = work[ip];
    // Cavity: triangles whose circumcircle strictly contains p.
    std::vector<int> bad;
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
      if (!tris[t].alive) continue;
      const auto& v = tris[t].v;
      if (in_circumcircle(work[v[0]], work[v[1]], work[v[2]], p)) bad.push_back(t);
    }
    if (bad.empty()) {
      // p is on/near circumcircle boundaries everywhere it is covered;
      // fall back to every covering triangle (p on a shared edge must
      // open both neighbors or a T-junction forms).
      for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
        if (!tris[t].alive) continue;
        const auto& v = tris[t].v;
        if (orientation(work[v[0]], work[v[1]], p) >= 0 &&
            orientation(work[v[1]], work[v[2]], p) >= 0 &&
            orientation(work[v[2]], work[v[0]], p) >= 0) {
          bad.push_back(t);
        }
      }
      if (bad.empty()) throw DegenerateInput("triangulation insertion failed");
    }

    // Boundary edges of the cavity = edges appearing exactly once.
    std::map<std::pair<int, int>, std::pair<int, int>> edges;  // sorted -> directed
    for (int t : bad) {
      const auto& v = tris[t].v;
      for (int k = 0; k < 3; ++k) {
        const int a = v[k], b = v[(k + 1) % 3];
        const auto key = std::minmax(a, b);
        auto it = edges.find(key);
        if (it == edges.end())
          edges[key] = {a, b};
        else
          edges.erase(it);
      }
      tris[t].alive = false;
    }
    for (const auto& [key, dir] : edges) {
      (void)key;
      BwTriangle nt{{dir.first, dir.second, ip}, true};
      // Exact sign here: dropping a thin boundary triangle would punch a
      // hole in the cavity.
      if (orient2d(work[nt.v[0]], work[nt.v[1]], work[nt.v[2]]) <= 0.0) continue;
      tris.push_back(nt);
    }
  }

  Triangulation out;
  out.points = pts;
  out.source_index = src;
  for (const auto& t : tris) {
    if (!t.alive) continue;
    if (t.v[0] >= s0 || t.v[1] >= s0 || t.v[2] >= s0) continue;
    out.triangles.push_back(t.v);
  }
  if (out.triangles.empty()) throw DegenerateInput("triangulation produced no triangles");

  // Deterministic triangle order: lexicographic by sorted vertex indices.
  std::sort(out.triangles.begin(), out.triangles.end(),
            [](const std::array<int, 3>& a, const std::array<int, 3>& b) {
              auto sa = a, sb = b;
              std::sort(sa.begin(), sa.end());
              std::sort(sb.begin(), sb.end());
              return sa < sb;
            });

  out.adjacency.assign(out.triangles.size(), {-1, -1, -1});
  std::map<std::pair<int, int>, std::pair<int, int>> half;  // edge -> (tri, slot)
  for (int t = 0; t < static_cast<int>(out.triangles.size()); ++t) {
    for (int k = 0; k < 3; ++k) {
      const int a = out.triangles[t][k];
      const int b = out.triangles[t][(k + 1) % 3];
      const auto key = std::minmax(a, b);
      auto it = half.find(key);
      if (it == half.end()) {
        half[key] = {t, k};
      } else {
        out.adjacency[t][k] = it->second.first;
        out.adjacency[it->second.first][it->second.second] = t;
        half.erase(it);
      }
    }
  }
  return out;
}

std::optional<int> locate_triangle(const Triangulation& tri, Point2 p) {
  for (int t = 0; t < static_cast<int>(tri.triangles.size()); ++t) {
    const auto& v = tri.triangles[t];
    const Point2 a = tri.points[v[0]], b = tri.points[v[1]], c = tri.points[v[2]];
    if (orientation(a, b, p) >= 0 && orientation(b, c, p) >= 0 && orientation(c, a, p) >= 0)
      return t;
  }
  return std::nullopt;
}

Polygon2 convex_hull(const std::vector<Point2>& points) {
  if (points.size() < 3) throw DegenerateInput("hull needs >= 3 points");
  std::vector<Point2> pts = points;
  std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](Point2 a, Point2 b) { return a.x == b.x && a.y == b.y; }),
            pts.end());
  if (pts.size() < 3) throw DegenerateInput("hull needs >= 3 distinct points");

  const auto build = [&](const std::vector<Point2>& seq) {
    std::vector<Point2> chain;
    for (const auto& p : seq) {
      while (chain.size() >= 2 &&
             orientation(chain[chain.size() - 2], chain.back(), p) <= 0)
        chain.pop_back();
      chain.push_back(p);
    }
    return chain;
  };

  std::vector<Point2> lower = build(pts);
  std::vector<Point2> rev(pts.rbegin(), pts.rend());
  std::vector<Point2> upper = build(rev);

  std::vector<Point2> hull = lower;
  hull.insert(hull.end(), upper.begin() + 1, upper.end() - 1);
  if (hull.size() < 3) throw DegenerateInput("hull degenerate (collinear points)");
  return make_polygon(std::move(hull));
}

namespace {

bool on_segment(Point2 p, Point2 a, Point2 b, double tol) {
  return point_segment_distance(p, a, b) <= tol;
}

// Proper or touching intersection of closed segments.
bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d) {
  const int o1 = orientation(a, b, c);
  const int o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a);
  const int o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  const double tol = 1e-12 * std::max({norm(b - a), norm(d - c), 1.0});
  if (o1 == 0 && on_segment(c, a, b, tol)) return true;
  if (o2 == 0 && on_segment(d, a, b, tol)) return true;
  if (o3 == 0 && on_segment(a, c, d, tol)) return true;
  if (o4 == 0 && on_segment(b, c, d, tol)) return true;
  return false;
}

}  // namespace

bool is_simple_polygon(const Polygon2& poly) {
  const auto& v = poly.vertices;
  const std::size_t n = v.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = v[i], b = v[(i + 1) % n];
    for (std::size_t j = i + 1; j < n; ++j) {
      const Point2 c = v[j], d = v[(j + 1) % n];
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) {
        // Shared endpoint allowed; anything beyond it is a crossing.
        const Point2 shared = (j == i + 1) ? b : a;
        const Point2 a2 = (j == i + 1) ? a : b;
        const Point2 d2 = (j == i + 1) ? d : c;
        const double tol = 1e-12 * std::max({norm(b - a), norm(d - c), 1.0});
        if (on_segment(a2, c, d, tol) || on_segment(d2, a, b, tol)) {
          if (dist(a2, shared) > tol && dist(d2, shared) > tol) return false;
          // Edges folding back over each other.
          if (dot(a2 - shared, d2 - shared) > 0 &&
              std::abs(cross(a2 - shared, d2 - shared)) <=
                  tol * std::max(norm(a2 - shared), norm(d2 - shared)))
            return false;
        }
        continue;
      }
      if (segments_intersect(a, b, c, d)) return false;
    }
  }
  return true;
}

bool point_in_polygon(const Polygon2& poly, Point2 p) {
  const auto& v = poly.vertices;
  const std::size_t n = v.size();
  const double tol = 1e-12 * std::max(1.0, diameter(poly));
  for (std::size_t i = 0; i < n; ++i)
    if (on_segment(p, v[i], v[(i + 1) % n], tol)) return true;

  // Winding number via y-straddling crossings; robust for off-boundary p.
  int winding = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = v[i], b = v[(i + 1) % n];
    if (a.y <= p.y) {
      if (b.y > p.y && orient2d(a, b, p) > 0) ++winding;
    } else {
      if (b.y <= p.y && orient2d(a, b, p) < 0) --winding;
    }
  }
  return winding != 0;
}

// ---------------------------------------------------------------------------
// Polyline helpers
// ---------------------------------------------------------------------------

double polyline_length(const std::vector<Point2>& pts) {
  double len = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) len += dist(pts[i], pts[i + 1]);
  return len;
}

std::pair<Point2, double> nearest_on_polyline(const std::vector<Point2>& pts, Point2 p) {
  double best = std::numeric_limits<double>::infinity();
  Point2 best_pt = pts.front();
  double best_s = 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Point2 a = pts[i], b = pts[i + 1];
    const Point2 ab = b - a;
    const double len2 = dot(ab, ab);
    double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
    const Point2 q = a + t * ab;
    const double d = dist(p, q);
    if (d < best) {
      best = d;
      best_pt = q;
      best_s = s + t * std::sqrt(len2);
    }
    s += std::sqrt(len2);
  }
  return {best_pt, best_s};
}

Point2 point_at_arclength(const std::vector<Point2>& pts, double s) {
  if (s <= 0.0) return pts.front();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double seg = dist(pts[i], pts[i + 1]);
    if (acc + seg >= s && seg > 0.0) {
      const double t = (s - acc) / seg;
      return pts[i] + t * (pts[i + 1] - pts[i]);
    }
    acc += seg;
  }
  return pts.back();
}

Point2 tangent_at_arclength(const std::vector<Point2>& pts, double s) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double seg = dist(pts[i], pts[i + 1]);
    if ((acc + seg >= s || i + 2 == pts.size()) && seg > 0.0) {
      const Point2 d = pts[i + 1] - pts[i];
      return (1.0 / seg) * d;
    }
    acc += seg;
  }
  // Zero-length path; point along +x by convention.
  return {1.0, 0.0};
}

std::vector<Point2> sub_polyline(const std::vector<Point2>& pts, double s0, double length) {
  const double total = polyline_length(pts);
  const double lo = std::clamp(s0, 0.0, total);
  const double hi = std::clamp(s0 + length, lo, total);
  std::vector<Point2> out;
  out.push_back(point_at_arclength(pts, lo));
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double seg = dist(pts[i], pts[i + 1]);
    const double s_end = acc + seg;
    if (s_end > lo && s_end < hi) out.push_back(pts[i + 1]);
    acc = s_end;
  }
  out.push_back(point_at_arclength(pts, hi));
  if (out.size() == 1) out.push_back(out.front());
  return out;
}

}  // namespace scmt
