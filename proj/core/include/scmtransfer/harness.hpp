#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scmtransfer/scenario.hpp"

namespace scmt {

struct StepRecord {
  double t = 0.0;  // end of the control interval
  Pose pose;       // post-step state
  Command teacher_cmd;
  Command learner_cmd;
  std::string mode;  // MAPPED | DIRECT | PERTURBED | BASELINE
  double deviation = 0.0;
};

struct LimitsEvent {
  double t = 0.0;
  std::string edge;  // v_min | v_max | omega_min | omega_max
  std::string rule;  // boundary | proportional | containment
  double old_value = 0.0;
  double new_value = 0.0;
};

struct RunMetrics {
  double max_deviation = 0.0;
  double mean_deviation = 0.0;
  double completion_time = 0.0;
  bool goal_reached = false;
  bool collision = false;
  int steps = 0;
  int mapped_count = 0;
  int direct_count = 0;
  int perturbed_count = 0;
  int baseline_count = 0;
  int dropped_observations = 0;
};

struct RunResult {
  RunMetrics metrics;
  std::vector<StepRecord> trajectory;
  PairStore store;
  LearnerLimits limits;
  std::vector<LimitsEvent> limits_history;
};

// Closed-loop simulation of the scenario (teacher policy -> transfer ->
// learner step -> pair recording -> limit updates). Deterministic per seed.
RunResult run_scenario(const Scenario& s);

// The comparison baseline: teacher dynamics tracking under the
// ground-truth learner limits, no transfer in the loop.
RunResult run_ideal_teacher(const Scenario& s);

struct GridErrorCell {
  Command teacher_cmd;
  std::string mode;
  double pos_err_scm = 0.0;
  double orient_err_scm = 0.0;
  double pos_err_baseline = 0.0;
  double orient_err_baseline = 0.0;
};

// Exhaustive 0.1 s rollout comparison over a dense command grid inside
// the learned limits (teacher vs baseline learner vs scm learner).
std::vector<GridErrorCell> run_grid_error_map(const Scenario& s, const PairStore& store,
                                              const LearnerLimits& limits, int resolution);

// Artifact files: trajectory.csv, pairs.json, limits_history.csv,
// metrics.json. Byte-stable for a fixed seed.
void export_run(const RunResult& run, const Scenario& s, const std::string& out_dir);
void export_grid_error_map(const std::vector<GridErrorCell>& cells,
                           const std::string& out_dir);

void save_pairs_snapshot(const PairStore& store, const LearnerLimits& limits,
                         const std::string& path);
struct PairsSnapshot {
  PairStore store;
  LearnerLimits limits;
};
PairsSnapshot load_pairs_snapshot(const std::string& path);

RunMetrics metrics_from_trajectory(const std::vector<StepRecord>& records,
                                   double control_dt, const Scenario* scenario);
std::vector<StepRecord> read_trajectory_file(const std::string& path);

}  // namespace scmt
