#pragma once

#include <string>
#include <vector>

#include "ricci2d/grid.hpp"

namespace ricci2d::rescale {

// Rescaled profiles of one state. outer holds v~(xi_k, theta_j) xi-major.
struct ProfileSnapshot {
  double t = 0.0;
  double tau = 0.0;
  double T_est = 0.0;
  double alpha = 0.0;
  std::vector<double> y;
  std::vector<double> inner;
  double lambda_fit = 0.0;
  double lambda_residual = 0.0;
  std::size_t n_theta = 1;
  std::vector<double> xi;
  std::vector<double> outer;
  std::vector<double> anisotropy_xi;
  std::vector<double> anisotropy;

  double outer_at(std::size_t k, std::size_t j) const { return outer[k * n_theta + j]; }
  bool operator==(const ProfileSnapshot&) const = default;
};

double tau_of(double t, double T_est);

// alpha = 1 / (tau^2 u(0, t)).
double alpha(const FlowState& state, double T_est);

// u~(y) = alpha tau^2 u(alpha^{1/2} y), theta-averaged. Throws RangeError naming
// the largest feasible y when the grid is too short.
std::vector<double> inner_profile(const FlowState& state, double T_est,
                                  const std::vector<double>& y);

struct LambdaFit {
  double lambda = 0.0;
  // ||1/u~ - 1 - lambda y^2|| / ||1/u~ - 1||.
  double relative_residual = 0.0;
};

// Least squares of 1/u~ - 1 against y^2 through the origin.
LambdaFit fit_lambda(const std::vector<double>& y, const std::vector<double>& u);

// v~(xi, theta_j) = tau^2 v(tau xi, theta_j), xi-major.
std::vector<double> outer_profile(const FlowState& state, double T_est,
                                  const std::vector<double>& xi);

double xi_front(double alpha, double tau);

// (T - t)^2 times the theta-averaged curvature on the innermost interior row.
double rescaled_origin_curvature(const FlowState& state, double T_est);

struct SnapshotGrids {
  double y_max = 3.0;
  int n_y = 61;
  double xi_lo = 0.25;
  double xi_hi = 3.0;
  int n_xi = 111;
  std::vector<double> anisotropy_xi{1.5};

  bool operator==(const SnapshotGrids&) const = default;
};

// xi grid is truncated at zeta_max / tau when the grid does not reach xi_hi.
ProfileSnapshot make_snapshot(const FlowState& state, double T_est, const SnapshotGrids& grids);

// Max over theta / min over theta of v~ at xi (linear in xi between grid columns).
double snapshot_anisotropy(const ProfileSnapshot& s, double xi);

std::string serialize(const ProfileSnapshot& s);
ProfileSnapshot deserialize(const std::string& text);

}  // namespace ricci2d::rescale
