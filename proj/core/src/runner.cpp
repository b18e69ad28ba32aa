#include "ricci2d/runner.hpp"

#include <algorithm>
#include <cmath>

#include "ricci2d/checkpoint.hpp"
#include "ricci2d/errors.hpp"
#include "ricci2d/field_ops.hpp"

namespace ricci2d::solver {

double cusp_offset_for(const FlowState& s, double zeta_shift) {
  const std::vector<double> shape = discrete_cusp_shape(s.grid, zeta_shift);
  double A = 0.0;
  for (std::size_t i = 0; i < s.grid.n_zeta(); ++i) {
    if (!std::isfinite(shape[i])) continue;
    for (std::size_t j = 0; j < s.grid.n_theta(); ++j)
      A = std::max(A, std::exp(s.w(i, j) - shape[i]) - s.t);
  }
  return A;
}

double time_of_tau(double tau, double T_est) { return T_est - 1.0 / tau; }

Trajectory run(const RunOptions& o, const ProgressFn& progress) {
  validate(o.policy);
  if (o.record_stride < 1) throw ConfigError("outputs.record_stride must be >= 1");
  const CylGrid grid = CylGrid::stretched(o.grid);
  FlowState s = init_state(o.datum, grid);
  BoundaryPolicy bc = o.bc;
  bc.zeta_shift = outer_cusp_shift(s);
  boundary_conditions(s, bc);

  Trajectory tr;
  tr.M0 = mass(s);
  tr.T_est = estimate_T(tr.M0, s.t);
  tr.zeta_shift = bc.zeta_shift;
  tr.cusp_offset = cusp_offset_for(s, tr.zeta_shift);

  diag::RecordContext ctx;
  ctx.T_est = tr.T_est;
  if (!o.snapshot_grids.anisotropy_xi.empty()) ctx.anisotropy_xi = o.snapshot_grids.anisotropy_xi.front();
  ctx.mono_pairs = diag::monotonicity_pairs(grid, o.datum.rho, o.mono_pairs, o.seed);

  auto emit = [&](const FlowState& st) {
    tr.records.push_back(diag::make_record(st, ctx));
    tr.cusp_excess.push_back(diag::cusp_excess(st, tr.cusp_offset, tr.zeta_shift));
    tr.continuum_cusp_excess.push_back(
        diag::continuum_cusp_excess(st, tr.cusp_offset, tr.zeta_shift));
    if (progress) progress(tr.records.back());
  };
  auto snapshot = [&](const FlowState& st) {
    tr.snapshots.push_back(rescale::make_snapshot(st, tr.T_est, o.snapshot_grids));
    if (o.keep_frames) tr.frames.push_back(st);
  };

  std::vector<double> sched = o.policy.tau_schedule;
  std::sort(sched.begin(), sched.end());
  sched.erase(std::unique(sched.begin(), sched.end()), sched.end());

  emit(s);
  std::size_t next = 0;
  const double tau0 = 1.0 / (tr.T_est - s.t);
  while (next < sched.size() && sched[next] <= tau0) {
    snapshot(s);
    ++next;
  }

  tr.stop_reason = "tau-schedule-complete";
  bool last_recorded = true;
  while (next < sched.size()) {
    if (mass(s) < o.policy.mass_floor * tr.M0) {
      tr.stop_reason = "mass-floor";
      break;
    }
    const double t_target = time_of_tau(sched[next], tr.T_est);
    double dt = adapt_dt(s, o.policy, tr.T_est);
    bool landing = false;
    if (s.t + dt >= t_target * (1.0 - 1e-15)) {
      dt = t_target - s.t;
      landing = true;
    }
    FlowState n;
    for (;;) {
      try {
        n = step_implicit(s, dt, o.policy, bc);
        break;
      } catch (const StepRejected&) {
        ++tr.rejections;
        dt *= 0.5;
        landing = false;
        if (dt < o.policy.dt_min) {
          if (!o.failure_checkpoint.empty()) write_checkpoint(o.failure_checkpoint, s);
          throw StiffnessFailure("time step fell below dt_min at t = " + std::to_string(s.t),
                                 o.failure_checkpoint);
        }
      }
    }
    if (landing) n.t = t_target;
    s = std::move(n);
    ++tr.steps;
    last_recorded = false;
    if (landing) {
      emit(s);
      snapshot(s);
      last_recorded = true;
      ++next;
    } else if (s.step_index % o.record_stride == 0) {
      emit(s);
      last_recorded = true;
    }
  }
  if (!last_recorded) emit(s);
  tr.final_state = std::move(s);
  return tr;
}

}  // namespace ricci2d::solver
