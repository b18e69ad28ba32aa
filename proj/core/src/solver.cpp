#include "ricci2d/solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <string>

#include "ricci2d/errors.hpp"
#include "ricci2d/field_ops.hpp"

namespace ricci2d::solver {

std::string to_string(DatumKind k) {
  switch (k) {
    case DatumKind::Disk: return "disk";
    case DatumKind::SmoothBump: return "smooth-bump";
    case DatumKind::TwoBumps: return "two-bumps";
  }
  return "disk";
}

DatumKind datum_kind_from_string(const std::string& s) {
  if (s == "disk") return DatumKind::Disk;
  if (s == "smooth-bump") return DatumKind::SmoothBump;
  if (s == "two-bumps") return DatumKind::TwoBumps;
  throw ConfigError("datum.kind must be one of disk, smooth-bump, two-bumps (got '" + s + "')");
}

bool InitialDatum::operator==(const InitialDatum& o) const {
  if (offsets.size() != o.offsets.size()) return false;
  for (std::size_t k = 0; k < offsets.size(); ++k)
    if (offsets[k].x != o.offsets[k].x || offsets[k].y != o.offsets[k].y) return false;
  return kind == o.kind && height == o.height && rho == o.rho && t0 == o.t0 &&
         floor_eps == o.floor_eps;
}

namespace {

double bump_radius(const InitialDatum& d) {
  double m = 0.0;
  for (const auto& c : d.offsets) m = std::max(m, std::sqrt(exact::norm2(c)));
  return d.rho - m;
}

// exp(1 - 1/(1 - q)) on [0, 1).
double bump_profile(double q) { return q < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - q)) : 0.0; }

// Integral of bump_profile over [0, 1]; the integrand is flat to all orders at 1.
double bump_integral() {
  static const double value = [] {
    const int n = 20000;
    const double h = 1.0 / n;
    double s = bump_profile(0.0) + bump_profile(1.0);
    for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * bump_profile(k * h);
    return s * h / 3.0;
  }();
  return value;
}

}  // namespace

void validate(const InitialDatum& d) {
  if (!(d.height > 0.0)) throw ConfigError("datum.height must be > 0");
  if (!(d.rho > 0.0)) throw ConfigError("datum.rho must be > 0");
  if (!(d.t0 > 0.0)) throw ConfigError("datum.t0 must be > 0");
  if (d.floor_eps == 0.0)
    throw DegenerateError("datum.floor_eps = 0 leaves log u0 = -inf outside the support");
  if (!(d.floor_eps > 0.0 && d.floor_eps <= 1.0))
    throw ConfigError("datum.floor_eps must lie in (0, 1]");
  if (d.kind == DatumKind::TwoBumps) {
    if (d.offsets.size() != 2) throw ConfigError("two-bumps datum needs exactly 2 offsets");
    if (!(bump_radius(d) > 0.0)) throw ConfigError("two-bumps offsets must lie inside rho");
  }
}

void validate(const SteppingPolicy& p) {
  if (!(p.sigma > 0.0 && p.sigma < 1.0)) throw ConfigError("policy.sigma must lie in (0, 1)");
  if (!(p.dt_max > 0.0)) throw ConfigError("policy.dt_max must be > 0");
  if (!(p.dt_min > 0.0 && p.dt_min < p.dt_max))
    throw ConfigError("policy.dt_min must lie in (0, dt_max)");
  if (!(p.newton_tol > 0.0)) throw ConfigError("policy.newton_tol must be > 0");
  if (p.newton_max_iter < 1) throw ConfigError("policy.newton_max_iter must be >= 1");
  if (!(p.mass_floor > 0.0 && p.mass_floor < 1.0))
    throw ConfigError("policy.mass_floor must lie in (0, 1)");
  for (double tau : p.tau_schedule)
    if (!(tau > 0.0)) throw ConfigError("policy.tau_schedule entries must be > 0");
}

double datum_mass(const InitialDatum& d) {
  switch (d.kind) {
    case DatumKind::Disk: return 0.5 * kTwoPi * d.rho * d.rho * d.height;
    case DatumKind::SmoothBump: return 0.5 * kTwoPi * d.rho * d.rho * d.height * bump_integral();
    case DatumKind::TwoBumps: {
      const double b = bump_radius(d);
      return static_cast<double>(d.offsets.size()) * 0.5 * kTwoPi * b * b * d.height *
             bump_integral();
    }
  }
  return 0.0;
}

double datum_value(const InitialDatum& d, exact::Point2 x) {
  switch (d.kind) {
    case DatumKind::Disk: return exact::norm2(x) <= d.rho * d.rho ? d.height : 0.0;
    case DatumKind::SmoothBump: return d.height * bump_profile(exact::norm2(x) / (d.rho * d.rho));
    case DatumKind::TwoBumps: {
      const double b2 = bump_radius(d) * bump_radius(d);
      double s = 0.0;
      for (const auto& c : d.offsets)
        s += d.height * bump_profile(exact::norm2({x.x - c.x, x.y - c.y}) / b2);
      return s;
    }
  }
  return 0.0;
}

FlowState init_state(const InitialDatum& d, const CylGrid& grid) {
  validate(d);
  if (grid.zeta_split() < std::log(d.rho) + 2.0)
    throw ConfigError("grid.zeta_split must be >= log(rho) + 2 to resolve the datum");

  // log of the extended datum r^2 max(u0, floor) at every node.
  LogField base(grid);
  for (std::size_t i = 0; i < grid.n_zeta(); ++i) {
    const double z = grid.zeta(i);
    const double r = std::exp(z);
    const double g = d.floor_eps * d.height * std::min(1.0, d.rho / r);
    for (std::size_t j = 0; j < grid.n_theta(); ++j) {
      const double th = grid.theta(j);
      const double u0 = datum_value(d, {r * std::cos(th), r * std::sin(th)});
      base(i, j) = 2.0 * z + std::log(std::max(u0, g));
    }
  }

  FlowState s;
  s.grid = grid;
  s.t = d.t0;
  s.w = base;
  // The cap is the cusp 2 t0/(zeta - z0)^2 sampled at the two outermost nodes and
  // continued inward by the discrete recursion Lap w = (1 - eps) e^w / t0, so that
  // the sampled datum satisfies R >= -1/t0 node by node. Marching inward keeps the
  // cusp mode stable; the recursion stops once it overtakes the extended datum.
  const double slack = 1.0 - 1e-9;
  const std::size_t nz = grid.n_zeta();
  std::vector<double> cap(nz);
  auto apply_cap = [&](double z0) {
    double wmax = -HUGE_VAL;
    for (std::size_t k = 0; k < base.size(); ++k) wmax = std::max(wmax, base[k]);
    for (std::size_t i : {nz - 1, nz - 2}) {
      const double dz = grid.zeta(i) - z0;
      cap[i] = dz > 0.0 ? std::log(2.0 * d.t0 / (dz * dz)) : HUGE_VAL;
    }
    for (std::size_t i = nz - 2; i > 0; --i) {
      if (!(cap[i] <= wmax) || !(cap[i + 1] <= wmax)) {
        cap[i - 1] = HUGE_VAL;
        continue;
      }
      const double hm = grid.h(i - 1), hp = grid.h(i);
      const double c = 0.5 * (hm + hp);
      const double slope_m = (cap[i + 1] - cap[i]) / hp - c * slack * std::exp(cap[i]) / d.t0;
      cap[i - 1] = cap[i] - hm * slope_m;
    }
    for (std::size_t i = 0; i < nz; ++i)
      for (std::size_t j = 0; j < grid.n_theta(); ++j) s.w(i, j) = std::min(base(i, j), cap[i]);
  };

  const double target = datum_mass(d);
  double lo = grid.zeta_min() - 20.0;
  double hi = grid.zeta_max();
  apply_cap(lo);
  if (mass(s) > target) throw ConfigError("datum mass too small for this grid");
  apply_cap(hi);
  if (mass(s) < target) throw ConfigError("grid too short to hold the datum mass");
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    apply_cap(mid);
    (mass(s) < target ? lo : hi) = mid;
  }
  apply_cap(0.5 * (lo + hi));
  return s;
}

FlowState init_cusp_state(const CylGrid& grid, double t, double offset) {
  if (!(grid.zeta_min() > 0.0)) throw DomainError("cusp state needs zeta_min > 0");
  FlowState s;
  s.grid = grid;
  s.t = t;
  s.w = LogField(grid);
  for (std::size_t i = 0; i < grid.n_zeta(); ++i) {
    const double w = std::log(exact::cusp_v(grid.zeta(i), t, {offset}));
    for (std::size_t j = 0; j < grid.n_theta(); ++j) s.w(i, j) = w;
  }
  return s;
}

void boundary_conditions(FlowState& s, const BoundaryPolicy& bc) {
  if (!(s.t + bc.cusp_offset > 0.0)) throw DomainError("boundary data need t + A > 0");
  const CylGrid& g = s.grid;
  const std::size_t last = g.n_zeta() - 1;
  const double wout =
      std::log(exact::cusp_v(g.zeta_max() - bc.zeta_shift, s.t, {bc.cusp_offset}));
  for (std::size_t j = 0; j < g.n_theta(); ++j) s.w(last, j) = wout;
  if (bc.inner == InnerBoundary::CuspDirichlet) {
    const double win =
        std::log(exact::cusp_v(g.zeta_min() - bc.zeta_shift, s.t, {bc.cusp_offset}));
    for (std::size_t j = 0; j < g.n_theta(); ++j) s.w(0, j) = win;
  }
}

std::vector<double> discrete_cusp_shape(const CylGrid& grid, double zeta_shift, double cutoff) {
  const std::size_t nz = grid.n_zeta();
  std::vector<double> w(nz, HUGE_VAL);
  for (std::size_t i : {nz - 1, nz - 2}) {
    const double dz = grid.zeta(i) - zeta_shift;
    if (!(dz > 0.0)) return w;
    w[i] = std::log(2.0 / (dz * dz));
  }
  for (std::size_t i = nz - 2; i > 0; --i) {
    if (!(w[i] <= cutoff)) break;
    const double hm = grid.h(i - 1), hp = grid.h(i);
    const double c = 0.5 * (hm + hp);
    w[i - 1] = w[i] - hm * ((w[i + 1] - w[i]) / hp - c * std::exp(w[i]));
  }
  return w;
}

double outer_cusp_shift(const FlowState& s) {
  const double v = std::exp(s.w(s.grid.n_zeta() - 1, 0));
  return s.grid.zeta_max() - std::sqrt(2.0 * s.t / v);
}

double inner_ghost_value(const FlowState& s, std::size_t j) {
  return s.w(0, j) - 2.0 * s.grid.h(0);
}

namespace {

// Newton system for the unknown rows [i0, n_zeta - 2], scaled by the zeta cell
// width so that the Jacobian is symmetric.
struct System {
  const CylGrid& g;
  std::size_t i0;
  double dt;
  bool regular;

  std::size_t rows() const { return g.n_zeta() - 1 - i0; }
  double cell(std::size_t i) const { return i == 0 ? g.h(0) : 0.5 * (g.h(i - 1) + g.h(i)); }

  // Scaled residual c (e^w - e^wn) - dt (flux difference + c w_thth).
  void residual(const LogField& w, const LogField& wn, std::vector<double>& G) const {
    const std::size_t nt = g.n_theta();
    const double inv_dth2 = nt > 1 ? 1.0 / (g.dtheta() * g.dtheta()) : 0.0;
    G.assign(rows() * nt, 0.0);
    for (std::size_t i = i0; i + 1 < g.n_zeta(); ++i) {
      const double c = cell(i);
      for (std::size_t j = 0; j < nt; ++j) {
        const double wc = w(i, j);
        const double fp = (w(i + 1, j) - wc) / g.h(i);
        const double fm = i == 0 ? 2.0 : (wc - w(i - 1, j)) / g.h(i - 1);
        double th = 0.0;
        if (nt > 1)
          th = (w(i, (j + 1) % nt) - 2.0 * wc + w(i, (j + nt - 1) % nt)) * inv_dth2;
        G[(i - i0) * nt + j] =
            c * (std::exp(wc) - std::exp(wn(i, j))) - dt * (fp - fm) - dt * c * th;
      }
    }
  }
};

void solve_tridiagonal(const System& sys, const LogField& w, std::vector<double>& rhs) {
  const std::size_t n = sys.rows();
  std::vector<double> diag(n), off(n, 0.0);  // off[k] couples k and k+1
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = k + sys.i0;
    double dd = sys.cell(i) * std::exp(w(i, 0)) + sys.dt / sys.g.h(i);
    if (i > 0) dd += sys.dt / sys.g.h(i - 1);
    diag[k] = dd;
    if (k + 1 < n) off[k] = -sys.dt / sys.g.h(i);
  }
  // Thomas algorithm on the symmetric tridiagonal matrix.
  for (std::size_t k = 1; k < n; ++k) {
    const double m = off[k - 1] / diag[k - 1];
    diag[k] -= m * off[k - 1];
    rhs[k] -= m * rhs[k - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t k = n - 1; k-- > 0;) rhs[k] = (rhs[k] - off[k] * rhs[k + 1]) / diag[k];
}

void solve_sparse(const System& sys, const LogField& w, std::vector<double>& rhs) {
  const CylGrid& g = sys.g;
  const std::size_t nt = g.n_theta();
  const std::size_t n = sys.rows() * nt;
  const double inv_dth2 = 1.0 / (g.dtheta() * g.dtheta());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(n * 5);
  for (std::size_t i = sys.i0; i + 1 < g.n_zeta(); ++i) {
    const double c = sys.cell(i);
    for (std::size_t j = 0; j < nt; ++j) {
      const auto row = static_cast<int>((i - sys.i0) * nt + j);
      double dd = c * std::exp(w(i, j)) + sys.dt / g.h(i) + 2.0 * sys.dt * c * inv_dth2;
      if (i > 0) dd += sys.dt / g.h(i - 1);
      trip.emplace_back(row, row, dd);
      const double cth = -sys.dt * c * inv_dth2;
      trip.emplace_back(row, static_cast<int>((i - sys.i0) * nt + (j + 1) % nt), cth);
      trip.emplace_back(row, static_cast<int>((i - sys.i0) * nt + (j + nt - 1) % nt), cth);
      if (i + 2 < g.n_zeta())
        trip.emplace_back(row, static_cast<int>((i + 1 - sys.i0) * nt + j), -sys.dt / g.h(i));
      if (i > sys.i0)
        trip.emplace_back(row, static_cast<int>((i - 1 - sys.i0) * nt + j),
                          -sys.dt / g.h(i - 1));
    }
  }
  Eigen::SparseMatrix<double> J(static_cast<int>(n), static_cast<int>(n));
  J.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  ldlt.compute(J);
  if (ldlt.info() != Eigen::Success) throw StepRejected("LDLT factorization failed");
  Eigen::Map<Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(n));
  Eigen::VectorXd x = ldlt.solve(b);
  b = x;
}

}  // namespace

FlowState step_implicit(const FlowState& state, double dt, const SteppingPolicy& policy,
                        const BoundaryPolicy& bc, StepStats* stats) {
  if (!(dt > 0.0)) throw DomainError("step_implicit: dt must be > 0");
  const CylGrid& g = state.grid;
  FlowState next;
  next.grid = g;
  next.t = state.t + dt;
  next.step_index = state.step_index + 1;
  next.w = state.w;
  if (!state.increment.empty() && state.last_dt > 0.0) {
    const double ratio = std::min(dt / state.last_dt, 4.0);
    for (std::size_t k = 0; k < next.w.size(); ++k) next.w[k] += ratio * state.increment[k];
  }
  boundary_conditions(next, bc);

  const bool regular = bc.inner == InnerBoundary::RegularOrigin;
  const System sys{g, regular ? std::size_t{0} : std::size_t{1}, dt, regular};
  const std::size_t nt = g.n_theta();
  std::vector<double> G;
  constexpr double kMaxUpdate = 2.0;
  for (int it = 1; it <= policy.newton_max_iter; ++it) {
    sys.residual(next.w, state.w, G);
    for (double& x : G) x = -x;
    if (g.radial())
      solve_tridiagonal(sys, next.w, G);
    else
      solve_sparse(sys, next.w, G);
    double norm = 0.0;
    for (double x : G) norm = std::max(norm, std::abs(x));
    if (!std::isfinite(norm)) throw StepRejected("non-finite Newton update");
    const double scale = norm > kMaxUpdate ? kMaxUpdate / norm : 1.0;
    for (std::size_t k = 0; k < G.size(); ++k) {
      const std::size_t i = k / nt + sys.i0;
      next.w(i, k % nt) += scale * G[k];
    }
    if (scale == 1.0 && norm <= policy.newton_tol) {
      if (stats) *stats = {it, norm};
      next.last_dt = dt;
      next.increment = NodeField(g);
      for (std::size_t k = 0; k < next.w.size(); ++k)
        next.increment[k] = next.w[k] - state.w[k];
      return next;
    }
  }
  throw StepRejected("Newton did not converge in " + std::to_string(policy.newton_max_iter) +
                     " iterations");
}

double estimate_T(double m, double t0) {
  if (!(m > 0.0)) throw DomainError("estimate_T: mass must be > 0");
  return t0 + m / kFourPi;
}

double adapt_dt(const FlowState& s, const SteppingPolicy& p, double T_est) {
  if (!(s.t < T_est)) throw DomainError("adapt_dt: t is at or past the extinction time");
  return std::min(p.dt_max, p.sigma * (T_est - s.t));
}

}  // namespace ricci2d::solver
