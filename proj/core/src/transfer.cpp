#include "scmtransfer/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace scmt {

Point2 normalize_command(const Command& u, const CommandBounds& b) {
  return {(u.v - b.v_min) / (b.v_max - b.v_min),
          (u.omega - b.omega_min) / (b.omega_max - b.omega_min)};
}

Command denormalize_command(Point2 n, const CommandBounds& b) {
  return {b.v_min + n.x * (b.v_max - b.v_min),
          b.omega_min + n.y * (b.omega_max - b.omega_min)};
}

PairStore::PairStore(int grid_rows, int grid_cols, int k_min, CommandBounds learner_bounds,
                     CommandBounds teacher_bounds)
    : rows_(grid_rows),
      cols_(grid_cols),
      k_min_(std::max(1, k_min)),
      learner_bounds_(learner_bounds),
      teacher_bounds_(teacher_bounds),
      cells_(static_cast<std::size_t>(grid_rows) * grid_cols) {}

int PairStore::cell_of(const Command& learner_cmd) const {
  const Point2 n = normalize_command(learner_cmd, learner_bounds_);
  const int col = std::clamp(static_cast<int>(n.x * cols_), 0, cols_ - 1);
  const int row = std::clamp(static_cast<int>(n.y * rows_), 0, rows_ - 1);
  return row * cols_ + col;
}

void PairStore::add_raw(const Command& teacher_equiv, const Command& u_learner) {
  Cell& c = cells_[cell_of(u_learner)];
  c.sum_teacher_v += teacher_equiv.v;
  c.sum_teacher_omega += teacher_equiv.omega;
  c.sum_learner_v += u_learner.v;
  c.sum_learner_omega += u_learner.omega;
  c.count += 1;
}

void PairStore::restore_cell(int index, const Cell& cell) { cells_.at(index) = cell; }

PairStore::ObservationResult PairStore::record_observation(const Command& u_learner,
                                                            const Pose& p0, const Pose& p1,
                                                            double dt, double noise_sigma) {
  ObservationResult result;
  Command equiv;
  try {
    equiv = inverse_teacher_command(p0, p1, dt, noise_sigma);
  } catch (const InconsistentMotion&) {
    ++dropped_;
    return result;
  }
  // Observations whose teacher equivalent falls outside the teacher's own
  // command range cannot be reproduced by the teacher; drop them.
  const double vtol = 1e-9 * (teacher_bounds_.v_max - teacher_bounds_.v_min) +
                      3.0 * noise_sigma / dt;
  const double wtol = 1e-9 * (teacher_bounds_.omega_max - teacher_bounds_.omega_min);
  if (equiv.v < teacher_bounds_.v_min - vtol || equiv.v > teacher_bounds_.v_max + vtol ||
      equiv.omega < teacher_bounds_.omega_min - wtol ||
      equiv.omega > teacher_bounds_.omega_max + wtol) {
    ++dropped_;
    return result;
  }
  add_raw(equiv, u_learner);
  result.accepted = true;
  result.teacher_equiv = equiv;
  result.refined = refined_pair_in_cell(cell_of(u_learner));
  return result;
}

std::optional<CommandPair> PairStore::refined_pair_in_cell(int cell) const {
  const Cell& c = cells_[cell];
  if (c.count < k_min_) return std::nullopt;
  const double inv = 1.0 / c.count;
  CommandPair pair;
  pair.teacher_equiv = {c.sum_teacher_v * inv, c.sum_teacher_omega * inv};
  pair.learner_cmd = {c.sum_learner_v * inv, c.sum_learner_omega * inv};
  pair.support_count = c.count;
  return pair;
}

std::vector<CommandPair> PairStore::refined_pairs() const {
  std::vector<CommandPair> out;
  for (int i = 0; i < static_cast<int>(cells_.size()); ++i)
    if (auto p = refined_pair_in_cell(i)) out.push_back(*p);
  return out;
}

LearnerLimits LearnerLimits::cold_start(const CommandBounds& teacher,
                                        const CommandBounds& learner) {
  LearnerLimits limits;
  limits.teacher_box = teacher;
  limits.teacher_bounds = teacher;
  limits.learner_bounds = learner;
  return limits;
}

bool on_learner_boundary(const Command& u, const CommandBounds& b, double tol) {
  const double vr = b.v_max - b.v_min;
  const double wr = b.omega_max - b.omega_min;
  return std::abs(u.v - b.v_min) <= tol * vr || std::abs(u.v - b.v_max) <= tol * vr ||
         std::abs(u.omega - b.omega_min) <= tol * wr ||
         std::abs(u.omega - b.omega_max) <= tol * wr;
}

namespace {

void rebuild_hull(LearnerLimits& limits) {
  if (limits.boundary_equivalents.size() < 3) return;
  try {
    limits.hull = convex_hull(limits.boundary_equivalents);
  } catch (const DegenerateInput&) {
    limits.hull.reset();
  }
}

struct ChannelView {
  double lo, hi;        // current box edges
  double outer_lo, outer_hi;
  double learner_lo, learner_hi;
  double equiv, learner;
};

}  // namespace

LimitsUpdate update_limits(LearnerLimits& limits, const CommandPair& new_pair,
                           bool on_boundary, const std::vector<CommandPair>& existing) {
  LimitsUpdate result;
  CommandBounds box = limits.teacher_box;

  const auto apply_channel = [&](ChannelView ch, double& lo_edge, double& hi_edge,
                                 const char* lo_name, const char* hi_name) {
    const double lr = ch.learner_hi - ch.learner_lo;
    const double t = (ch.learner - ch.learner_lo) / lr;
    const double range = ch.hi - ch.lo;
    const double s = (ch.equiv - ch.lo) / range;

    const double pin_tol = 1e-9;
    if (on_boundary) {
      // Fig. 6(a): the pair's learner command sits on the learner-domain
      // boundary, so its teacher equivalent marks the edge directly. Only
      // the pinned channels update.
      if (std::abs(t - 1.0) <= pin_tol) {
        result.edges.push_back({hi_name, "boundary", hi_edge, ch.equiv});
        hi_edge = ch.equiv;
      } else if (std::abs(t) <= pin_tol) {
        result.edges.push_back({lo_name, "boundary", lo_edge, ch.equiv});
        lo_edge = ch.equiv;
      }
      return;
    }

    // Fig. 6(b): proportional extrapolation, shrink-only. The normalized
    // learner position is the divisor, so values at either extreme make
    // the ratio meaningless.
    if (t < 1e-6 || 1.0 - t < 1e-6) {
      result.degenerate_normalization = true;
      return;
    }
    // Equivalents outside the box carry no shrink evidence; the coverage
    // step below grows the box over them instead.
    if (s < -1e-12 || s > 1.0 + 1e-12) return;
    if (t >= 0.5) {
      const double projected = s / t;
      if (projected < 1.0 - 1e-9) {
        const double new_edge = ch.lo + projected * range;
        result.edges.push_back({hi_name, "proportional", hi_edge, new_edge});
        hi_edge = new_edge;
      }
    } else {
      const double projected = 1.0 - (1.0 - s) / (1.0 - t);
      if (projected > 1e-9) {
        const double new_edge = ch.lo + projected * range;
        result.edges.push_back({lo_name, "proportional", lo_edge, new_edge});
        lo_edge = new_edge;
      }
    }
  };

  apply_channel({box.v_min, box.v_max, limits.teacher_bounds.v_min,
                 limits.teacher_bounds.v_max, limits.learner_bounds.v_min,
                 limits.learner_bounds.v_max, new_pair.teacher_equiv.v,
                 new_pair.learner_cmd.v},
                box.v_min, box.v_max, "v_min", "v_max");
  apply_channel({box.omega_min, box.omega_max, limits.teacher_bounds.omega_min,
                 limits.teacher_bounds.omega_max, limits.learner_bounds.omega_min,
                 limits.learner_bounds.omega_max, new_pair.teacher_equiv.omega,
                 new_pair.learner_cmd.omega},
                box.omega_min, box.omega_max, "omega_min", "omega_max");

  // Shrinks never exclude an existing refined pair's teacher equivalent.
  const auto cover = [&](const Command& equiv) {
    box.v_min = std::min(box.v_min, equiv.v);
    box.v_max = std::max(box.v_max, equiv.v);
    box.omega_min = std::min(box.omega_min, equiv.omega);
    box.omega_max = std::max(box.omega_max, equiv.omega);
  };
  for (const auto& pair : existing) cover(pair.teacher_equiv);
  cover(new_pair.teacher_equiv);

  // Outer clamp last: the box never exceeds the teacher's own bounds even
  // when measurement noise places equivalents slightly past them.
  box.v_min = std::max(box.v_min, limits.teacher_bounds.v_min);
  box.v_max = std::min(box.v_max, limits.teacher_bounds.v_max);
  box.omega_min = std::max(box.omega_min, limits.teacher_bounds.omega_min);
  box.omega_max = std::min(box.omega_max, limits.teacher_bounds.omega_max);

  if (!box.valid()) return result;  // refuse an update that collapses the box

  // Report only edges that actually moved, at their final values.
  const auto final_edge = [&](const std::string& name) {
    if (name == "v_min") return box.v_min;
    if (name == "v_max") return box.v_max;
    if (name == "omega_min") return box.omega_min;
    return box.omega_max;
  };
  const auto old_edge = [&](const std::string& name) {
    if (name == "v_min") return limits.teacher_box.v_min;
    if (name == "v_max") return limits.teacher_box.v_max;
    if (name == "omega_min") return limits.teacher_box.omega_min;
    return limits.teacher_box.omega_max;
  };
  std::vector<LimitsUpdate::EdgeChange> kept;
  for (auto& e : result.edges) {
    e.old_value = old_edge(e.edge);
    e.new_value = final_edge(e.edge);
    if (e.new_value != e.old_value) kept.push_back(e);
  }
  result.edges = std::move(kept);

  result.changed = box.v_min != limits.teacher_box.v_min ||
                   box.v_max != limits.teacher_box.v_max ||
                   box.omega_min != limits.teacher_box.omega_min ||
                   box.omega_max != limits.teacher_box.omega_max;
  limits.teacher_box = box;

  if (on_boundary) {
    limits.boundary_equivalents.push_back(
        {new_pair.teacher_equiv.v, new_pair.teacher_equiv.omega});
    rebuild_hull(limits);
  }
  return result;
}

std::optional<MappingQuad> build_mapping_quad(const PairStore& store,
                                              const Command& w_teacher) {
  const std::vector<CommandPair> pairs = store.refined_pairs();
  if (pairs.size() < 4) return std::nullopt;

  std::vector<Point2> teacher_pts;
  teacher_pts.reserve(pairs.size());
  for (const auto& p : pairs) teacher_pts.push_back({p.teacher_equiv.v, p.teacher_equiv.omega});

  Triangulation tri;
  try {
    tri = delaunay_triangulate(teacher_pts);
  } catch (const DegenerateInput&) {
    return std::nullopt;
  }

  const Point2 w{w_teacher.v, w_teacher.omega};
  const auto t0 = locate_triangle(tri, w);
  if (!t0) return std::nullopt;

  struct Candidate {
    double area;
    int neighbor;
    std::array<int, 4> verts;  // triangulation point indices, CCW
  };
  std::vector<Candidate> candidates;
  const auto& tv = tri.triangles[*t0];
  for (int slot = 0; slot < 3; ++slot) {
    const int nb = tri.adjacency[*t0][slot];
    if (nb < 0) continue;
    const int a = tv[slot];
    const int b = tv[(slot + 1) % 3];
    const auto& nv = tri.triangles[nb];
    int d = -1;
    for (int k = 0; k < 3; ++k)
      if (nv[k] != a && nv[k] != b) d = nv[k];
    if (d < 0) continue;
    const std::array<int, 4> quad{tv[(slot + 2) % 3], a, d, b};
    Polygon2 poly;
    poly.vertices = {tri.points[quad[0]], tri.points[quad[1]], tri.points[quad[2]],
                     tri.points[quad[3]]};
    const double area = std::abs(signed_area(poly));
    candidates.push_back({area, nb, quad});
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return a.area < b.area || (a.area == b.area && a.neighbor < b.neighbor);
  });

  for (const auto& cand : candidates) {
    MappingQuad quad;
    try {
      quad.teacher = make_polygon({tri.points[cand.verts[0]], tri.points[cand.verts[1]],
                                   tri.points[cand.verts[2]], tri.points[cand.verts[3]]});
    } catch (const DegenerateInput&) {
      continue;
    }
    if (!is_simple_polygon(quad.teacher)) continue;
    if (!point_in_polygon(quad.teacher, w)) continue;

    std::vector<Point2> learner_pts;
    bool ok = true;
    for (int k = 0; k < 4; ++k) {
      const std::size_t pair_idx = tri.source_index[cand.verts[k]];
      if (pair_idx >= pairs.size()) {
        ok = false;
        break;
      }
      quad.pair_indices[k] = static_cast<int>(pair_idx);
      learner_pts.push_back(
          {pairs[pair_idx].learner_cmd.v, pairs[pair_idx].learner_cmd.omega});
    }
    if (!ok) continue;
    Polygon2 learner;
    learner.vertices = learner_pts;
    if (signed_area(learner) <= 0.0) continue;  // orientation-flipped field
    try {
      quad.learner = make_polygon(learner_pts);
    } catch (const DegenerateInput&) {
      continue;
    }
    if (!is_simple_polygon(quad.learner)) continue;
    return quad;
  }
  return std::nullopt;
}

const char* to_string(TransferMode mode) {
  switch (mode) {
    case TransferMode::Mapped: return "MAPPED";
    case TransferMode::Direct: return "DIRECT";
    case TransferMode::Perturbed: return "PERTURBED";
  }
  return "DIRECT";
}

TransferOutcome transfer(const PairStore& store, const LearnerLimits& limits,
                         const Command& w_teacher) {
  TransferOutcome out;
  out.learner_cmd = w_teacher;

  Command w_query = w_teacher;
  auto quad = build_mapping_quad(store, w_query);
  if (!quad) {
    // Saturated demands ride exactly on the pair hull's boundary (the box
    // never exceeds observed equivalents); a sub-microscopic pull toward
    // the pair cloud lets them map.
    const std::vector<CommandPair> pairs = store.refined_pairs();
    if (!pairs.empty()) {
      Command c{0.0, 0.0};
      for (const auto& p : pairs) {
        c.v += p.teacher_equiv.v;
        c.omega += p.teacher_equiv.omega;
      }
      c.v /= pairs.size();
      c.omega /= pairs.size();
      w_query = {w_teacher.v + 1e-6 * (c.v - w_teacher.v),
                 w_teacher.omega + 1e-6 * (c.omega - w_teacher.omega)};
      quad = build_mapping_quad(store, w_query);
    }
  }
  if (quad) {
    try {
      const ScmMap map_teacher = build_rectangle_map(quad->teacher);
      const ScmMap map_learner = build_rectangle_map(quad->learner);
      const Point2 mapped = transfer_point(map_teacher, map_learner,
                                           {w_query.v, w_query.omega});
      if (point_in_polygon(quad->learner, mapped)) {
        out.mode = TransferMode::Mapped;
        out.learner_cmd = {mapped.x, mapped.y};
        out.quad_used = std::move(quad);
        return out;
      }
      out.scm_degraded = true;
    } catch (const Error&) {
      out.scm_degraded = true;
    }
  }

  // No usable mapping region: Direct in an unconfigured cell, Perturbed
  // toward the nearest unconfigured neighbor otherwise. The teacher-box
  // grid is aligned cell-for-cell with the learner clustering grid, so
  // occupancy is the clustering occupancy and a perturbed probe lands in
  // the cell it targets.
  const int rows = store.grid_rows(), cols = store.grid_cols();
  const Point2 n = normalize_command(w_teacher, limits.teacher_box);
  const int col = std::clamp(static_cast<int>(n.x * cols), 0, cols - 1);
  const int row = std::clamp(static_cast<int>(n.y * rows), 0, rows - 1);
  const auto occupied = [&](int idx) {
    return store.refined_pair_in_cell(idx).has_value();
  };

  if (!occupied(row * cols + col)) {
    out.mode = TransferMode::Direct;
    return out;
  }

  // 8-neighborhood, Euclidean-nearest center, lowest row-major on ties.
  const double cw = 1.0 / cols, chh = 1.0 / rows;
  int best_index = -1;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) {
      if (dr == 0 && dc == 0) continue;
      const int r = row + dr, c = col + dc;
      if (r < 0 || r >= rows || c < 0 || c >= cols) continue;
      const int idx = r * cols + c;
      if (occupied(idx)) continue;
      const double dx = (c - col) * cw, dy = (r - row) * chh;
      const double d = std::hypot(dx, dy);
      if (d < best_dist - 1e-15 || (std::abs(d - best_dist) <= 1e-15 && idx < best_index)) {
        best_dist = d;
        best_index = idx;
      }
    }
  }
  if (best_index < 0) {
    out.mode = TransferMode::Direct;
    return out;
  }
  const int br = best_index / cols, bc = best_index % cols;
  const Point2 center{(bc + 0.5) * cw, (br + 0.5) * chh};
  out.mode = TransferMode::Perturbed;
  // The probe is a learner command at the target cell's center, so the
  // resulting observation configures exactly that cell.
  out.learner_cmd = denormalize_command(center, store.learner_bounds());
  return out;
}

}  // namespace scmt
