#pragma once

#include <string>
#include <vector>

#include "ricci2d/exact.hpp"
#include "ricci2d/grid.hpp"

namespace ricci2d::solver {

enum class DatumKind { Disk, SmoothBump, TwoBumps };

std::string to_string(DatumKind k);
DatumKind datum_kind_from_string(const std::string& s);

struct InitialDatum {
  DatumKind kind = DatumKind::Disk;
  double height = 4.0;
  double rho = 1.0;
  // Bump centres for TwoBumps; each bump has radius rho - max |offset|.
  std::vector<exact::Point2> offsets;
  double t0 = 0.01;
  // Amplitude of the decaying extension floor_eps * height * min(1, rho/r).
  double floor_eps = 1.0;

  bool operator==(const InitialDatum& o) const;
};

struct SteppingPolicy {
  double dt_max = 0.05;
  double dt_min = 1e-14;
  double sigma = 0.1;
  double newton_tol = 1e-10;
  int newton_max_iter = 30;
  std::vector<double> tau_schedule{2, 5, 10, 12, 20, 30, 40, 50};
  double mass_floor = 1e-3;

  bool operator==(const SteppingPolicy&) const = default;
};

void validate(const InitialDatum& d);
void validate(const SteppingPolicy& p);

enum class InnerBoundary { RegularOrigin, CuspDirichlet };

struct BoundaryPolicy {
  InnerBoundary inner = InnerBoundary::RegularOrigin;
  // Offset A of the cusp 2(t + A)/zeta^2 imposed at zeta_max (and at zeta_min
  // for CuspDirichlet).
  double cusp_offset = 0.0;
  // Translation zeta_0 of the cusp: 2(t + A)/(zeta - zeta_0)^2. A translation in
  // zeta is a dilation in x, so the shifted cusp is still an exact solution.
  double zeta_shift = 0.0;
};

// Shape of the discrete cusp on `grid`: w~ with Lap w~ = e^{w~} at interior
// nodes, equal to log(2/(zeta - zeta_0)^2) on the two outermost rows. Then
// w = log(t + A) + w~ is an exact solution of the backward-Euler scheme.
// Entries inward of the discrete singularity are +inf.
std::vector<double> discrete_cusp_shape(const CylGrid& grid, double zeta_shift,
                                        double cutoff = 50.0);

// Shift zeta_0 for which the outer row of `state` lies on 2t/(zeta - zeta_0)^2.
double outer_cusp_shift(const FlowState& state);

// Exact area of the datum u0.
double datum_mass(const InitialDatum& d);
// Value of the datum u0 at x.
double datum_value(const InitialDatum& d, exact::Point2 x);

// Log field of the regularized datum: the datum extended by a decaying floor and
// capped by a cusp whose shift is tuned so that the grid mass equals datum_mass.
FlowState init_state(const InitialDatum& d, const CylGrid& grid);

// w = log(2(t + A)/zeta^2) on a grid with zeta_min > 0.
FlowState init_cusp_state(const CylGrid& grid, double t, double offset);

// Applies the Dirichlet data for time state.t (outer row, inner row for CuspDirichlet).
void boundary_conditions(FlowState& state, const BoundaryPolicy& bc = {});

// Ghost value below the first row enforcing w_zeta = 2 (regular origin).
double inner_ghost_value(const FlowState& state, std::size_t j);

struct StepStats {
  int newton_iterations = 0;
  double update_norm = 0.0;
};

// One backward-Euler step of e^w_t = Lap_c w solved by damped Newton.
// Throws StepRejected when Newton does not converge.
FlowState step_implicit(const FlowState& state, double dt, const SteppingPolicy& policy,
                        const BoundaryPolicy& bc = {}, StepStats* stats = nullptr);

// T_est = t0 + m / 4 pi.
double estimate_T(double mass, double t0);

// min(dt_max, sigma (T_est - t)).
double adapt_dt(const FlowState& state, const SteppingPolicy& policy, double T_est);

}  // namespace ricci2d::solver
