#include "ricci2d/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "ricci2d/errors.hpp"
#include "ricci2d/field_ops.hpp"
#include "ricci2d/solver.hpp"

namespace ricci2d::diag {

namespace {

void interior_extrema(const NodeField& R, double& mx, double& mn) {
  mx = -HUGE_VAL;
  mn = HUGE_VAL;
  const std::size_t nt = R.n_theta();
  for (std::size_t i = 1; i + 1 < R.n_zeta(); ++i)
    for (std::size_t j = 0; j < nt; ++j) {
      mx = std::max(mx, R(i, j));
      mn = std::min(mn, R(i, j));
    }
}

double radical_inverse(std::uint64_t k, std::uint64_t base) {
  double inv = 1.0 / static_cast<double>(base);
  double f = inv;
  double r = 0.0;
  while (k > 0) {
    r += f * static_cast<double>(k % base);
    k /= base;
    f *= inv;
  }
  return r;
}

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

exact::Point2 polar(double zeta, double theta) {
  const double r = std::exp(zeta);
  return {r * std::cos(theta), r * std::sin(theta)};
}

double theta_weight(std::size_t n_theta) {
  return n_theta <= 1 ? kTwoPi : kTwoPi / static_cast<double>(n_theta);
}

// Column of v~ at xi, linear between snapshot columns.
std::vector<double> column_at(const rescale::ProfileSnapshot& s, double xi) {
  if (s.xi.size() < 2) throw RangeError("snapshot has no outer profile");
  if (xi < s.xi.front() || xi > s.xi.back())
    throw RangeError("xi = " + std::to_string(xi) + " outside snapshot range [" +
                     std::to_string(s.xi.front()) + ", " + std::to_string(s.xi.back()) + "]");
  auto it = std::upper_bound(s.xi.begin(), s.xi.end(), xi);
  std::size_t k = std::min<std::size_t>(
      it == s.xi.begin() ? 0 : static_cast<std::size_t>(it - s.xi.begin()) - 1, s.xi.size() - 2);
  const double a = (xi - s.xi[k]) / (s.xi[k + 1] - s.xi[k]);
  std::vector<double> col(s.n_theta);
  for (std::size_t j = 0; j < s.n_theta; ++j)
    col[j] = (1.0 - a) * s.outer_at(k, j) + a * s.outer_at(k + 1, j);
  return col;
}

double theta_integral(const std::vector<double>& col) {
  double acc = 0.0;
  for (double v : col) acc += v;
  return acc * theta_weight(col.size());
}

}  // namespace

double rmax(const FlowState& s) {
  double mx, mn;
  interior_extrema(curvature_field(s), mx, mn);
  return mx;
}

double rmax_scaling(const FlowState& s, double T_est) {
  const double d = T_est - s.t;
  return d * d * rmax(s);
}

double width(const FlowState& s) {
  const CylGrid& g = s.grid;
  const double wth = theta_weight(g.n_theta());
  double best = 0.0;
  for (std::size_t i = 0; i < g.n_zeta(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < g.n_theta(); ++j) acc += std::exp(0.5 * s.w(i, j));
    best = std::max(best, acc * wth);
  }
  return best;
}

double aronson_benilan(const FlowState& s) {
  double mx, mn;
  interior_extrema(curvature_field(s), mx, mn);
  return mn + 1.0 / s.t;
}

double u_at(const FlowState& s, exact::Point2 x) {
  const CylGrid& g = s.grid;
  const double r = std::sqrt(exact::norm2(x));
  const double th = std::atan2(x.y, x.x);
  if (r == 0.0 || std::log(r) <= g.zeta_min())
    return std::exp(interp(s.w, g, g.zeta_min(), th) - 2.0 * g.zeta_min());
  const double z = std::log(r);
  return std::exp(interp(s.w, g, z, th) - 2.0 * z);
}

std::vector<MonotonicityPair> monotonicity_pairs(const CylGrid& g, double rho, std::size_t n,
                                                 std::uint64_t seed) {
  if (!(rho > 0.0)) throw DomainError("monotonicity_pairs: rho must be > 0");
  const double zmax = g.zeta_max();
  const double zcap = std::log(std::exp(zmax) - rho);
  if (!(zcap > g.zeta_min())) throw RangeError("grid too short for monotonicity pairs");
  const double near = std::min(zcap, std::log(rho) + 4.0);
  std::vector<MonotonicityPair> out;
  out.reserve(n);
  const std::uint64_t base = seed * 7919 + 1;
  for (std::size_t k = 0; k < n; ++k) {
    const std::uint64_t q = base + k;
    const double hi = (k % 2 == 0) ? near : zcap;
    const double zx = g.zeta_min() + (hi - g.zeta_min()) * radical_inverse(q, 2);
    const double ry0 = std::exp(zx) + rho;
    const double zy_lo = std::log(ry0);
    const double zy_hi = std::min(zmax, zy_lo + 4.0);
    const double zy = zy_lo + (zy_hi - zy_lo) * radical_inverse(q, 3);
    out.push_back({polar(zx, kTwoPi * radical_inverse(q, 5)),
                   polar(zy, kTwoPi * radical_inverse(q, 7))});
  }
  return out;
}

double monotonicity_check(const FlowState& s, std::span<const MonotonicityPair> pairs) {
  double worst = -HUGE_VAL;
  for (const auto& p : pairs) worst = std::max(worst, u_at(s, p.y) - u_at(s, p.x));
  return pairs.empty() ? 0.0 : worst;
}

double cusp_excess(const FlowState& s, double offset, double zeta_shift) {
  const CylGrid& g = s.grid;
  const std::vector<double> shape = solver::discrete_cusp_shape(g, zeta_shift);
  double worst = -HUGE_VAL;
  for (std::size_t i = 1; i + 1 < g.n_zeta(); ++i) {
    if (!std::isfinite(shape[i])) continue;
    const double cap = (s.t + offset) * std::exp(shape[i]);
    for (std::size_t j = 0; j < g.n_theta(); ++j) worst = std::max(worst, std::exp(s.w(i, j)) - cap);
  }
  return worst;
}

double continuum_cusp_excess(const FlowState& s, double offset, double zeta_shift) {
  const CylGrid& g = s.grid;
  double worst = -HUGE_VAL;
  for (std::size_t i = 1; i + 1 < g.n_zeta(); ++i) {
    const double z = g.zeta(i) - zeta_shift;
    if (!(z > 0.0)) continue;
    const double cap = exact::cusp_v(z, s.t, {offset});
    for (std::size_t j = 0; j < g.n_theta(); ++j) worst = std::max(worst, std::exp(s.w(i, j)) - cap);
  }
  return worst;
}

double harnack_bound(const HarnackSample& s, double, const HarnackConstants& k) {
  if (!(s.t2 > s.t1)) throw DomainError("harnack: requires t2 > t1");
  if (!(s.R2 + k.E > 0.0)) throw DomainError("harnack: R + E must be > 0");
  const double dt = s.t2 - s.t1;
  return 1.0 / std::sqrt(s.R2 + k.E) - k.C1 * dt - k.C2 * s.dist * s.dist / dt;
}

double harnack_gap(const HarnackSample& s, double T_est, const HarnackConstants& k) {
  const double rhs = harnack_bound(s, T_est, k);
  if (!(s.R1 + k.E > 0.0)) throw DomainError("harnack: R + E must be > 0");
  return 1.0 / std::sqrt(s.R1 + k.E) - rhs;
}

double segment_length(const FlowState& s, exact::Point2 a, exact::Point2 b, int n_sub) {
  const double len = std::sqrt(exact::norm2({b.x - a.x, b.y - a.y}));
  if (len == 0.0) return 0.0;
  double acc = 0.0;
  for (int k = 0; k < n_sub; ++k) {
    const double q = (k + 0.5) / n_sub;
    acc += std::sqrt(u_at(s, {a.x + q * (b.x - a.x), a.y + q * (b.y - a.y)}));
  }
  return acc * len / n_sub;
}

std::vector<HarnackPair> harnack_pairs(std::span<const FlowState> frames, double T_est,
                                       double r_max, std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> eligible;
  for (std::size_t f = 0; f < frames.size(); ++f)
    if (frames[f].t > 0.5 * T_est) eligible.push_back(f);
  if (eligible.size() < 2) throw InsufficientData("harnack: needs two frames with t > T/2");
  std::mt19937_64 rng(seed);
  std::vector<HarnackPair> out;
  const double z_lo = frames[eligible.front()].grid.zeta_min();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t a = eligible[static_cast<std::size_t>(unit(rng) * eligible.size())];
    std::size_t b = eligible[static_cast<std::size_t>(unit(rng) * eligible.size())];
    while (frames[a].t == frames[b].t)
      b = eligible[static_cast<std::size_t>(unit(rng) * eligible.size())];
    if (frames[a].t > frames[b].t) std::swap(a, b);
    const double z_hi = std::min(std::log(r_max), frames[a].grid.zeta_max());
    HarnackPair p;
    p.frame1 = a;
    p.frame2 = b;
    p.x1 = polar(z_lo + (z_hi - z_lo) * unit(rng), kTwoPi * unit(rng));
    p.x2 = polar(z_lo + (z_hi - z_lo) * unit(rng), kTwoPi * unit(rng));
    out.push_back(p);
  }
  return out;
}

std::vector<HarnackSample> harnack_samples(std::span<const FlowState> frames,
                                           std::span<const HarnackPair> pairs, double T_est) {
  std::vector<NodeField> R;
  for (const auto& f : frames) R.push_back(curvature_field(f));
  auto R_at = [&](std::size_t f, exact::Point2 x) {
    const CylGrid& g = frames[f].grid;
    const double r = std::sqrt(exact::norm2(x));
    const double z = r == 0.0 ? g.zeta_min() : std::clamp(std::log(r), g.zeta_min(), g.zeta_max());
    return interp(R[f], g, z, std::atan2(x.y, x.x));
  };
  std::vector<HarnackSample> out;
  for (const auto& p : pairs) {
    const FlowState& f1 = frames[p.frame1];
    const FlowState& f2 = frames[p.frame2];
    if (!(f2.t > f1.t)) throw DomainError("harnack: requires t2 > t1");
    if (!(f1.t > 0.5 * T_est)) throw DomainError("harnack: requires t1 > T/2");
    out.push_back({f1.t, f2.t, R_at(p.frame1, p.x1), R_at(p.frame2, p.x2),
                   segment_length(f1, p.x1, p.x2)});
  }
  return out;
}

HarnackSearch harnack_search(std::span<const HarnackSample> samples, double T_est, double E,
                             double tol) {
  HarnackSearch best;
  best.min_gap = -HUGE_VAL;
  for (int a = -6; a <= 6; ++a)
    for (int b = -6; b <= 6; ++b) {
      ++best.lattice_size;
      const HarnackConstants k{E, std::pow(10.0, 0.5 * a), std::pow(10.0, 0.5 * b), samples.size()};
      double mn = HUGE_VAL;
      for (const auto& s : samples) mn = std::min(mn, harnack_gap(s, T_est, k));
      if (!best.found && mn >= -tol) {
        best.found = true;
        best.C1 = k.C1;
        best.C2 = k.C2;
        best.min_gap = mn;
      } else if (!best.found && mn > best.min_gap) {
        best.C1 = k.C1;
        best.C2 = k.C2;
        best.min_gap = mn;
      }
    }
  return best;
}

double tail_area(const rescale::ProfileSnapshot& s, double eta) {
  if (s.xi.size() < 2) throw RangeError("snapshot has no outer profile");
  if (eta > s.xi.back())
    throw RangeError("tail_area: eta = " + std::to_string(eta) + " beyond xi_hi = " +
                     std::to_string(s.xi.back()));
  if (eta < s.xi.front()) throw RangeError("tail_area: eta below xi_lo");
  auto col_integral = [&](std::size_t k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < s.n_theta; ++j) acc += s.outer_at(k, j);
    return acc * theta_weight(s.n_theta);
  };
  auto it = std::upper_bound(s.xi.begin(), s.xi.end(), eta);
  std::size_t k = static_cast<std::size_t>(it - s.xi.begin());  // first column > eta
  double area = 0.0;
  double prev_x = eta;
  double prev_f = theta_integral(column_at(s, eta));
  for (; k < s.xi.size(); ++k) {
    const double f = col_integral(k);
    area += 0.5 * (f + prev_f) * (s.xi[k] - prev_x);
    prev_x = s.xi[k];
    prev_f = f;
  }
  return area + col_integral(s.xi.size() - 1) * s.xi.back();
}

double log_theta_avg(const rescale::ProfileSnapshot& s, double xi) {
  const std::vector<double> col = column_at(s, xi);
  double acc = 0.0;
  for (double v : col) {
    if (!(v > 0.0)) throw DomainError("log_theta_avg: nonpositive profile value");
    acc += std::log(v);
  }
  return acc * theta_weight(col.size());
}

double anisotropy(const rescale::ProfileSnapshot& s, double xi) {
  if (s.n_theta <= 1) return 1.0;
  const std::vector<double> col = column_at(s, xi);
  const auto [mn, mx] = std::minmax_element(col.begin(), col.end());
  if (!(*mn > 0.0)) throw DegenerateError("anisotropy: min over theta is 0");
  return *mx / *mn;
}

MassAudit mass_audit(std::span<const DiagnosticsRecord> rec) {
  if (rec.size() < 2) throw InsufficientData("mass_audit: needs at least 2 records");
  MassAudit a;
  const double m0 = rec.front().mass;
  const double t0 = rec.front().t;
  for (std::size_t k = 0; k < rec.size(); ++k) {
    const double d = std::abs(rec[k].mass - m0 + kFourPi * (rec[k].t - t0)) / m0;
    if (d > a.max_rel_deviation) {
      a.max_rel_deviation = d;
      a.worst_index = k;
    }
  }
  return a;
}

DiagnosticsRecord make_record(const FlowState& s, const RecordContext& ctx) {
  const CylGrid& g = s.grid;
  DiagnosticsRecord r;
  r.t = s.t;
  r.tau = 1.0 / (ctx.T_est - s.t);
  r.mass = mass(s);
  const NodeField R = curvature_field(s);
  double mx, mn;
  interior_extrema(R, mx, mn);
  const double d2 = (ctx.T_est - s.t) * (ctx.T_est - s.t);
  r.rmax = mx;
  r.rmax_scaled = d2 * mx;
  r.width = width(s);
  r.width_scaled = r.width / (ctx.T_est - s.t);
  r.alpha = 1.0 / (r.tau * r.tau * u_at_origin(s).value);
  r.xi_front = std::log(r.alpha) / (2.0 * r.tau);
  const std::size_t row = s.increment.empty() ? 1 : 0;
  double acc = 0.0;
  for (std::size_t j = 0; j < g.n_theta(); ++j) acc += R(row, j);
  r.origin_curv_scaled = d2 * acc / static_cast<double>(g.n_theta());
  if (g.n_theta() > 1) {
    const double z = std::clamp(ctx.anisotropy_xi * ctx.T_est * r.tau, g.zeta_min(), g.zeta_max());
    double vmx = -HUGE_VAL, vmn = HUGE_VAL;
    for (std::size_t j = 0; j < g.n_theta(); ++j) {
      const double w = interp(s.w, g, z, g.theta(j));
      vmx = std::max(vmx, w);
      vmn = std::min(vmn, w);
    }
    r.anisotropy = std::exp(vmx - vmn);
  }
  r.ab_margin = mn + 1.0 / s.t;
  r.mono_violation = monotonicity_check(s, ctx.mono_pairs);
  return r;
}

namespace {
const char* const kFields[] = {"t",     "tau",          "mass",      "rmax",     "rmax_scaled",
                               "width", "width_scaled", "alpha",     "xi_front", "origin_curv_scaled",
                               "anisotropy", "ab_margin", "mono_violation"};
constexpr std::size_t kNumFields = sizeof(kFields) / sizeof(kFields[0]);

double* field_ptr(DiagnosticsRecord& r, std::size_t k) {
  double* f[] = {&r.t,        &r.tau,   &r.mass,     &r.rmax,
                 &r.rmax_scaled, &r.width, &r.width_scaled, &r.alpha,
                 &r.xi_front, &r.origin_curv_scaled, &r.anisotropy, &r.ab_margin,
                 &r.mono_violation};
  return f[k];
}
}  // namespace

std::string csv_header() {
  std::string h;
  for (std::size_t k = 0; k < kNumFields; ++k) {
    if (k) h += ',';
    h += kFields[k];
  }
  return h;
}

std::string csv_row(const DiagnosticsRecord& rec) {
  DiagnosticsRecord r = rec;
  std::string out;
  char buf[40];
  for (std::size_t k = 0; k < kNumFields; ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", *field_ptr(r, k));
    if (k) out += ',';
    out += buf;
  }
  return out;
}

void write_csv(std::ostream& os, std::span<const DiagnosticsRecord> records) {
  os << csv_header() << '\n';
  for (const auto& r : records) os << csv_row(r) << '\n';
}

std::vector<DiagnosticsRecord> read_csv(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(is, line)) throw ParseError("records: missing header", 1);
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != csv_header()) throw ParseError("records: unexpected header", lineno);
  std::vector<DiagnosticsRecord> out;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    DiagnosticsRecord r;
    std::stringstream ss(line);
    std::string cell;
    std::size_t k = 0;
    while (std::getline(ss, cell, ',')) {
      if (k >= kNumFields) throw ParseError("records: too many fields", lineno);
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size())
        throw ParseError("records: malformed number '" + cell + "'", lineno);
      *field_ptr(r, k++) = v;
    }
    if (k != kNumFields) throw ParseError("records: expected 13 fields", lineno);
    out.push_back(r);
  }
  return out;
}

}  // namespace ricci2d::diag
