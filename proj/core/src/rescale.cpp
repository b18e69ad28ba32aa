#include "ricci2d/rescale.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>

#include "ricci2d/errors.hpp"
#include "ricci2d/field_ops.hpp"

namespace ricci2d::rescale {

double tau_of(double t, double T_est) {
  if (!(t < T_est)) throw DomainError("tau undefined at or past T_est");
  return 1.0 / (T_est - t);
}

double alpha(const FlowState& s, double T_est) {
  const double tau = tau_of(s.t, T_est);
  const double u0 = u_at_origin(s).value;
  if (!(u0 > 0.0)) throw DegenerateError("alpha: u(0, t) must be > 0");
  return 1.0 / (tau * tau * u0);
}

namespace {

// w at (zeta, theta), continued below zeta_min by a flat u (w linear with slope 2).
double w_extended(const FlowState& s, double zeta, double theta) {
  const CylGrid& g = s.grid;
  if (zeta < g.zeta_min()) return interp(s.w, g, g.zeta_min(), theta) + 2.0 * (zeta - g.zeta_min());
  return interp(s.w, g, zeta, theta);
}

}  // namespace

std::vector<double> inner_profile(const FlowState& s, double T_est, const std::vector<double>& y) {
  const double tau = tau_of(s.t, T_est);
  const double a = alpha(s, T_est);
  const double sa = std::sqrt(a);
  const CylGrid& g = s.grid;
  const double y_feasible = std::exp(g.zeta_max()) / sa;
  std::vector<double> out;
  out.reserve(y.size());
  for (double yy : y) {
    if (yy < 0.0) throw DomainError("inner_profile: y must be >= 0");
    if (yy == 0.0) {
      out.push_back(1.0);
      continue;
    }
    const double zeta = std::log(sa * yy);
    if (zeta > g.zeta_max()) {
      std::ostringstream msg;
      msg.precision(6);
      msg << "inner_profile: y = " << yy << " lies beyond the grid; max feasible y = "
          << y_feasible;
      throw RangeError(msg.str());
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < g.n_theta(); ++j)
      acc += std::exp(w_extended(s, zeta, g.theta(j)) - 2.0 * zeta);
    out.push_back(a * tau * tau * acc / static_cast<double>(g.n_theta()));
  }
  return out;
}

LambdaFit fit_lambda(const std::vector<double>& y, const std::vector<double>& u) {
  if (y.size() != u.size()) throw DomainError("fit_lambda: size mismatch");
  if (y.size() < 8) throw InsufficientData("fit_lambda: needs at least 8 radii");
  double syy = 0.0, syf = 0.0, sff = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    if (!(u[k] > 0.0)) throw DomainError("fit_lambda: profile must be positive");
    const double q = y[k] * y[k];
    const double f = 1.0 / u[k] - 1.0;
    syy += q * q;
    syf += q * f;
    sff += f * f;
  }
  if (!(syy > 0.0)) throw DegenerateError("fit_lambda: all radii are zero (rank deficient)");
  if (!(std::sqrt(sff) > 1e-12 * std::sqrt(syy)))
    throw DegenerateError("fit_lambda: constant profile (rank deficient)");
  LambdaFit fit;
  fit.lambda = syf / syy;
  double res = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double r = 1.0 / u[k] - 1.0 - fit.lambda * y[k] * y[k];
    res += r * r;
  }
  fit.relative_residual = std::sqrt(res / sff);
  return fit;
}

std::vector<double> outer_profile(const FlowState& s, double T_est, const std::vector<double>& xi) {
  const double tau = tau_of(s.t, T_est);
  const CylGrid& g = s.grid;
  std::vector<double> out;
  out.reserve(xi.size() * g.n_theta());
  for (double x : xi) {
    const double zeta = tau * x;
    if (zeta > g.zeta_max())
      throw RangeError("outer_profile: xi = " + std::to_string(x) + " needs zeta = " +
                       std::to_string(zeta) + " > zeta_max; max feasible xi = " +
                       std::to_string(g.zeta_max() / tau));
    for (std::size_t j = 0; j < g.n_theta(); ++j)
      out.push_back(tau * tau * std::exp(w_extended(s, zeta, g.theta(j))));
  }
  return out;
}

double xi_front(double a, double tau) {
  if (!(a > 0.0) || !(tau > 0.0)) throw DomainError("xi_front: alpha and tau must be > 0");
  return std::log(a) / (2.0 * tau);
}

double rescaled_origin_curvature(const FlowState& s, double T_est) {
  const double tau = tau_of(s.t, T_est);
  const NodeField R = curvature_field(s);
  const std::size_t row = s.increment.empty() ? 1 : 0;
  double acc = 0.0;
  for (std::size_t j = 0; j < s.grid.n_theta(); ++j) acc += R(row, j);
  return acc / static_cast<double>(s.grid.n_theta()) / (tau * tau);
}

double snapshot_anisotropy(const ProfileSnapshot& s, double xi) {
  if (s.n_theta <= 1) return 1.0;
  if (s.xi.size() < 2 || xi < s.xi.front() || xi > s.xi.back())
    throw RangeError("anisotropy: xi outside the snapshot range");
  auto it = std::upper_bound(s.xi.begin(), s.xi.end(), xi);
  std::size_t k = std::min<std::size_t>(
      it == s.xi.begin() ? 0 : static_cast<std::size_t>(it - s.xi.begin()) - 1, s.xi.size() - 2);
  const double a = (xi - s.xi[k]) / (s.xi[k + 1] - s.xi[k]);
  double mx = -HUGE_VAL, mn = HUGE_VAL;
  for (std::size_t j = 0; j < s.n_theta; ++j) {
    const double v = (1.0 - a) * s.outer_at(k, j) + a * s.outer_at(k + 1, j);
    mx = std::max(mx, v);
    mn = std::min(mn, v);
  }
  if (!(mn > 0.0)) throw DomainError("anisotropy: min over theta must be > 0");
  return mx / mn;
}

ProfileSnapshot make_snapshot(const FlowState& s, double T_est, const SnapshotGrids& sg) {
  ProfileSnapshot p;
  p.t = s.t;
  p.T_est = T_est;
  p.tau = tau_of(s.t, T_est);
  p.alpha = alpha(s, T_est);
  p.n_theta = s.grid.n_theta();
  for (int k = 0; k < sg.n_y; ++k) p.y.push_back(sg.y_max * k / (sg.n_y - 1));
  p.inner = inner_profile(s, T_est, p.y);
  const LambdaFit fit = fit_lambda(p.y, p.inner);
  p.lambda_fit = fit.lambda;
  p.lambda_residual = fit.relative_residual;
  const double xi_hi = std::min(sg.xi_hi, s.grid.zeta_max() / p.tau);
  if (xi_hi > sg.xi_lo) {
    for (int k = 0; k < sg.n_xi; ++k)
      p.xi.push_back(sg.xi_lo + (xi_hi - sg.xi_lo) * k / (sg.n_xi - 1));
    p.xi.back() = xi_hi;
    p.outer = outer_profile(s, T_est, p.xi);
    for (double x : sg.anisotropy_xi) {
      const double xa = x * T_est;
      if (xa < p.xi.front() || xa > p.xi.back()) continue;
      p.anisotropy_xi.push_back(xa);
      p.anisotropy.push_back(snapshot_anisotropy(p, xa));
    }
  }
  return p;
}

std::string serialize(const ProfileSnapshot& s) {
  nlohmann::json j;
  j["t"] = s.t;
  j["tau"] = s.tau;
  j["T_est"] = s.T_est;
  j["alpha"] = s.alpha;
  j["y"] = s.y;
  j["inner"] = s.inner;
  j["lambda_fit"] = s.lambda_fit;
  j["lambda_residual"] = s.lambda_residual;
  j["n_theta"] = s.n_theta;
  j["xi"] = s.xi;
  j["outer"] = s.outer;
  j["anisotropy_xi"] = s.anisotropy_xi;
  j["anisotropy"] = s.anisotropy;
  return j.dump(1) + "\n";
}

ProfileSnapshot deserialize(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("snapshot: ") + e.what(), 1);
  }
  ProfileSnapshot s;
  try {
    s.t = j.at("t");
    s.tau = j.at("tau");
    s.T_est = j.at("T_est");
    s.alpha = j.at("alpha");
    s.y = j.at("y").get<std::vector<double>>();
    s.inner = j.at("inner").get<std::vector<double>>();
    s.lambda_fit = j.at("lambda_fit");
    s.lambda_residual = j.at("lambda_residual");
    s.n_theta = j.at("n_theta");
    s.xi = j.at("xi").get<std::vector<double>>();
    s.outer = j.at("outer").get<std::vector<double>>();
    s.anisotropy_xi = j.at("anisotropy_xi").get<std::vector<double>>();
    s.anisotropy = j.at("anisotropy").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("snapshot: ") + e.what(), 1);
  }
  if (s.outer.size() != s.xi.size() * s.n_theta || s.y.size() != s.inner.size())
    throw ParseError("snapshot: inconsistent array sizes", 1);
  return s;
}

}  // namespace ricci2d::rescale
