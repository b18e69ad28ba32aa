#pragma once

#include <functional>
#include <string>
#include <vector>

namespace ricci2d::exact {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline double norm2(Point2 p) { return p.x * p.x + p.y * p.y; }

// Cigar U(y, tau) = 1 / (lambda |y|^2 + e^{4 lambda_bar tau}). It solves
// U_tau = Lap log U exactly when lambda == lambda_bar.
struct SolitonParams {
  double lambda = 0.5;
  double lambda_bar = 0.5;
};

// Cusp 2 (t + A) / (r^2 log^2 r) on r > 1.
struct CuspParams {
  double offset = 0.0;
};

double cigar(Point2 y, double tau, const SolitonParams& p);
double cusp(double r, double t, const CuspParams& p);
// Cusp expressed in v = r^2 u as a function of zeta = log r > 0.
double cusp_v(double zeta, double t, const CuspParams& p);

// 1 / ((T/2) |y|^2 + 1).
double inner_profile_limit(Point2 y, double T);
// 2T / xi^2 for xi > T, 0 for 0 < xi < T; undefined at xi == T.
double outer_profile_limit(double xi, double T);

using Sampler = std::function<double(Point2, double)>;

// u_t - Lap log u by centered differences in time (step dt) and the 5-point
// Laplacian (step h). Throws DomainError if the sampler is not positive on the stencil.
double pde_residual(const Sampler& u, Point2 x, double t, double h, double dt);

// Lap log U + T div(y U) for a steady inner profile, 5-point/centered differences.
double inner_steady_residual(const std::function<double(Point2)>& U, double T, Point2 y,
                             double h);

// xi V'(xi) + 2 V for the steady outer equation, centered difference.
double outer_steady_residual(const std::function<double(double)>& V, double xi, double h);

struct ConvergenceLevel {
  double h = 0.0;
  double residual = 0.0;  // max |residual| over the sample points
  double order = 0.0;     // log2(previous / current); 0 on the first level
};

struct ConvergenceStudy {
  std::string case_name;
  std::vector<ConvergenceLevel> levels;
  // Max |residual| on branches where it must vanish identically (outer-steady, xi < T).
  double exact_branch_residual = 0.0;
  bool pass = false;
};

inline constexpr double kOrderLo = 1.7;
inline constexpr double kOrderHi = 2.3;

// Residual convergence for one of "cigar", "cusp", "inner-steady",
// "outer-steady" under `refinements` halvings of h (and dt) from h0.
ConvergenceStudy convergence_study(const std::string& case_name, int refinements,
                                   double h0 = 1e-2);

std::vector<std::string> exact_case_names();

}  // namespace ricci2d::exact
