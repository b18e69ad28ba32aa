#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ricci2d/diagnostics.hpp"
#include "ricci2d/rescale.hpp"
#include "ricci2d/solver.hpp"

namespace ricci2d::solver {

struct RunOptions {
  InitialDatum datum;
  GridSpec grid;
  SteppingPolicy policy;
  BoundaryPolicy bc;
  int record_stride = 10;
  rescale::SnapshotGrids snapshot_grids;
  std::size_t mono_pairs = 256;
  std::uint64_t seed = 1;
  // Where the last good state is dumped on a stiffness failure ("" = no dump).
  std::string failure_checkpoint;
  bool keep_frames = true;
};

struct Trajectory {
  double T_est = 0.0;
  double M0 = 0.0;
  // Comparison cusp 2(t + A)/(zeta - zeta_shift)^2: zeta_shift matches the outer
  // boundary data and A is the smallest offset dominating the datum.
  double cusp_offset = 0.0;
  double zeta_shift = 0.0;
  std::vector<diag::DiagnosticsRecord> records;
  std::vector<double> cusp_excess;            // per record, discrete cusp
  std::vector<double> continuum_cusp_excess;  // per record, sampled continuum cusp
  std::vector<rescale::ProfileSnapshot> snapshots;
  std::vector<FlowState> frames;  // states at the snapshot times
  FlowState final_state;
  std::string stop_reason;
  long steps = 0;
  long rejections = 0;
};

// Smallest A >= 0 with v <= (t + A) e^{w~} at every node where the discrete cusp
// shape w~ (shift zeta_0) is finite.
double cusp_offset_for(const FlowState& state, double zeta_shift = 0.0);

// Time at which tau reaches `tau` given T_est.
double time_of_tau(double tau, double T_est);

using ProgressFn = std::function<void(const diag::DiagnosticsRecord&)>;

// Integrates from init_state until the last scheduled tau is reached or the mass
// drops below mass_floor * M0. Throws StiffnessFailure when dt falls below dt_min.
Trajectory run(const RunOptions& opts, const ProgressFn& progress = {});

}  // namespace ricci2d::solver
