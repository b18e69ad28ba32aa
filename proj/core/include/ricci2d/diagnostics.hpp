#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ricci2d/exact.hpp"
#include "ricci2d/grid.hpp"
#include "ricci2d/rescale.hpp"

namespace ricci2d::diag {

struct DiagnosticsRecord {
  double t = 0.0;
  double tau = 0.0;
  double mass = 0.0;
  double rmax = 0.0;
  double rmax_scaled = 0.0;
  double width = 0.0;
  double width_scaled = 0.0;
  double alpha = 0.0;
  double xi_front = 0.0;
  double origin_curv_scaled = 0.0;
  double anisotropy = 1.0;
  double ab_margin = 0.0;
  double mono_violation = 0.0;

  bool operator==(const DiagnosticsRecord&) const = default;
};

// Max of R over interior nodes.
double rmax(const FlowState& state);
// (T - t)^2 max R.
double rmax_scaling(const FlowState& state, double T_est);

// Max over zeta rows of the circumference integral of e^{w/2} dtheta.
double width(const FlowState& state);

// min over interior nodes of R + 1/t.
double aronson_benilan(const FlowState& state);

struct MonotonicityPair {
  exact::Point2 x;
  exact::Point2 y;
};

// Quasi-random pairs with |y| >= |x| + rho inside the grid disk.
std::vector<MonotonicityPair> monotonicity_pairs(const CylGrid& grid, double rho,
                                                 std::size_t n_pairs, std::uint64_t seed);

// max over pairs of u(y) - u(x); nonpositive when the ordering holds.
double monotonicity_check(const FlowState& state, std::span<const MonotonicityPair> pairs);

// u at a Cartesian point (flat continuation inside zeta_min).
double u_at(const FlowState& state, exact::Point2 x);

// Max over interior nodes of v - (t + A) e^{w~}, with w~ the discrete cusp shape
// (see solver::discrete_cusp_shape), i.e. the grid's exact counterpart of
// 2(t + A)/(zeta - zeta_0)^2. Nodes inward of the discrete singularity are skipped.
double cusp_excess(const FlowState& state, double offset, double zeta_shift = 0.0);

// Same against the sampled continuum cusp 2(t + A)/(zeta - zeta_0)^2 on zeta > zeta_0.
double continuum_cusp_excess(const FlowState& state, double offset, double zeta_shift = 0.0);

struct HarnackConstants {
  double E = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  std::size_t pairs = 100;
};

struct HarnackSample {
  double t1 = 0.0;
  double t2 = 0.0;
  double R1 = 0.0;
  double R2 = 0.0;
  double dist = 0.0;  // straight-segment length under g(t1)
};

// R2 - [ (t1 - T/2)/(t2 - T/2) ]^E-style lower bound; see harnack_bound.
double harnack_bound(const HarnackSample& s, double T_est, const HarnackConstants& k);
double harnack_gap(const HarnackSample& s, double T_est, const HarnackConstants& k);

// Metric length of the straight segment x1 -> x2 under u(., t) dx^2.
double segment_length(const FlowState& state, exact::Point2 x1, exact::Point2 x2,
                      int n_sub = 256);

struct HarnackPair {
  std::size_t frame1 = 0;
  std::size_t frame2 = 0;
  exact::Point2 x1;
  exact::Point2 x2;
};

std::vector<HarnackPair> harnack_pairs(std::span<const FlowState> frames, double T_est,
                                       double r_max, std::size_t n_pairs, std::uint64_t seed);

std::vector<HarnackSample> harnack_samples(std::span<const FlowState> frames,
                                           std::span<const HarnackPair> pairs, double T_est);

struct HarnackSearch {
  bool found = false;
  double C1 = 0.0;
  double C2 = 0.0;
  double min_gap = 0.0;      // at the reported (C1, C2), or best over the lattice
  std::size_t lattice_size = 0;
};

// Searches C1, C2 over 10^{k/2}, k = -6..6, for min gap >= -tol.
HarnackSearch harnack_search(std::span<const HarnackSample> samples, double T_est, double E,
                             double tol);

// Integral over [eta, xi_hi] x [0, 2pi] of v~, plus the cusp-shaped tail
// v~(xi_hi) xi_hi^2 / xi^2 beyond xi_hi.
double tail_area(const rescale::ProfileSnapshot& s, double eta);

// Integral over theta of log v~(xi, theta).
double log_theta_avg(const rescale::ProfileSnapshot& s, double xi);

double anisotropy(const rescale::ProfileSnapshot& s, double xi);

struct MassAudit {
  double max_rel_deviation = 0.0;
  std::size_t worst_index = 0;
};

// max |m - m0 + 4 pi (t - t0)| / m0 over records.
MassAudit mass_audit(std::span<const DiagnosticsRecord> records);

struct RecordContext {
  double T_est = 0.0;
  double anisotropy_xi = 1.5;  // multiple of T_est
  std::vector<MonotonicityPair> mono_pairs;
};

DiagnosticsRecord make_record(const FlowState& state, const RecordContext& ctx);

std::string csv_header();
std::string csv_row(const DiagnosticsRecord& r);
void write_csv(std::ostream& os, std::span<const DiagnosticsRecord> records);
// Throws ParseError with the offending line number.
std::vector<DiagnosticsRecord> read_csv(std::istream& is);

}  // namespace ricci2d::diag
