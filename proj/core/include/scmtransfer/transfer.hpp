#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scmtransfer/geometry.hpp"
#include "scmtransfer/scm.hpp"
#include "scmtransfer/vehicle.hpp"

namespace scmt {

// A learner command linked to the equivalent teacher command producing
// the same motion.
struct CommandPair {
  Command teacher_equiv;
  Command learner_cmd;
  int support_count = 0;
};

Point2 normalize_command(const Command& u, const CommandBounds& b);
Command denormalize_command(Point2 n, const CommandBounds& b);

// Grid-cell clustering of raw observations in the normalized learner
// command domain; a cell's refined pair is the running mean of its
// cluster once it reaches k_min observations.
class PairStore {
 public:
  PairStore(int grid_rows, int grid_cols, int k_min, CommandBounds learner_bounds,
            CommandBounds teacher_bounds);
  PairStore() : PairStore(11, 11, 5, CommandBounds{}, CommandBounds{}) {}

  struct Cell {
    double sum_teacher_v = 0.0;
    double sum_teacher_omega = 0.0;
    double sum_learner_v = 0.0;
    double sum_learner_omega = 0.0;
    int count = 0;
  };

  int grid_rows() const { return rows_; }
  int grid_cols() const { return cols_; }
  int k_min() const { return k_min_; }
  const CommandBounds& learner_bounds() const { return learner_bounds_; }
  const CommandBounds& teacher_bounds() const { return teacher_bounds_; }
  const std::vector<Cell>& cells() const { return cells_; }
  int dropped_observations() const { return dropped_; }

  // Cell index of a learner command (clamped into the grid).
  int cell_of(const Command& learner_cmd) const;

  struct ObservationResult {
    bool accepted = false;
    Command teacher_equiv;               // valid when accepted
    std::optional<CommandPair> refined;  // cell's pair when at/past k_min
  };

  // Accumulate one observed transition. The equivalent teacher command is
  // recovered by teacher inverse kinematics; inconsistent observations
  // are dropped and counted.
  ObservationResult record_observation(const Command& u_learner, const Pose& p0,
                                       const Pose& p1, double dt, double noise_sigma = 0.0);

  // Refined pairs in row-major cell order.
  std::vector<CommandPair> refined_pairs() const;
  std::optional<CommandPair> refined_pair_in_cell(int cell) const;

  // Test-support: inject a raw observation directly.
  void add_raw(const Command& teacher_equiv, const Command& u_learner);

  void restore_cell(int index, const Cell& cell);

 private:
  int rows_, cols_, k_min_;
  CommandBounds learner_bounds_;
  CommandBounds teacher_bounds_;
  std::vector<Cell> cells_;
  int dropped_ = 0;
};

// Learned axis-aligned learner limits expressed in the teacher command
// domain, plus the convex hull of boundary-pair teacher equivalents.
struct LearnerLimits {
  CommandBounds teacher_box;
  CommandBounds teacher_bounds;  // outer clamp
  CommandBounds learner_bounds;  // normalization reference
  std::vector<Point2> boundary_equivalents;
  std::optional<Polygon2> hull;

  static LearnerLimits cold_start(const CommandBounds& teacher,
                                  const CommandBounds& learner);
};

struct LimitsUpdate {
  bool changed = false;
  bool degenerate_normalization = false;
  // One entry per touched edge: {edge name, rule ("boundary"|"proportional"), new value}
  struct EdgeChange {
    std::string edge;
    std::string rule;
    double old_value = 0.0;
    double new_value = 0.0;
  };
  std::vector<EdgeChange> edges;
};

// Boundary pairs set box edges directly; interior pairs shrink edges by
// proportional extrapolation in normalized coordinates. Shrinks are
// clamped so every existing refined pair stays inside the box.
LimitsUpdate update_limits(LearnerLimits& limits, const CommandPair& new_pair,
                           bool on_boundary, const std::vector<CommandPair>& existing);

// True when a channel of the learner command sits on the learner-domain
// boundary (the Fig. 6(a) trigger).
bool on_learner_boundary(const Command& u, const CommandBounds& learner_bounds,
                         double tol = 1e-9);

struct MappingQuad {
  Polygon2 teacher;
  Polygon2 learner;
  std::array<int, 4> pair_indices{};  // into refined_pairs()
};

// Steps 1-4 of the primitive transfer construction: Delaunay-triangulate
// teacher equivalents, merge the containing triangle with an adjacent one
// (smallest resulting quad first) and verify both quads are simple.
std::optional<MappingQuad> build_mapping_quad(const PairStore& store, const Command& w_teacher);

enum class TransferMode { Mapped, Direct, Perturbed };

struct TransferOutcome {
  Command learner_cmd;
  TransferMode mode = TransferMode::Direct;
  std::optional<MappingQuad> quad_used;
  bool scm_degraded = false;  // mapping failed, fell back to Direct
};

const char* to_string(TransferMode mode);

// Full decision flow: Mapped when a quad exists, otherwise Direct for an
// unconfigured cell and Perturbed toward the nearest unconfigured
// neighbor cell when the cell already holds a refined pair.
TransferOutcome transfer(const PairStore& store, const LearnerLimits& limits,
                         const Command& w_teacher);

}  // namespace scmt
