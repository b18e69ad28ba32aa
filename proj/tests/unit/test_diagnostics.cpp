#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "ricci2d/diagnostics.hpp"
#include "ricci2d/errors.hpp"
#include "ricci2d/exact.hpp"
#include "ricci2d/field_ops.hpp"
#include "ricci2d/solver.hpp"

using namespace ricci2d;
using namespace ricci2d::diag;

namespace {

FlowState from_u(const CylGrid& g, double t, const std::function<double(double, double)>& u_of_r_th) {
  FlowState s;
  s.grid = g;
  s.w = LogField(g);
  for (std::size_t i = 0; i < g.n_zeta(); ++i) {
    const double z = g.zeta(i);
    for (std::size_t j = 0; j < g.n_theta(); ++j)
      s.w(i, j) = 2.0 * z + std::log(u_of_r_th(std::exp(z), g.theta(j)));
  }
  s.t = t;
  return s;
}

// Eternal cigar u = 1 / (lambda r^2 + e^{4 lambda t}).
FlowState cigar_frame(double lambda, double t, double zmin = -4.0) {
  return from_u(CylGrid::uniform(zmin, 6.0, 1000, 1), t, [&](double r, double) {
    return 1.0 / (lambda * r * r + std::exp(4.0 * lambda * t));
  });
}

rescale::ProfileSnapshot limit_snapshot(double T, double xi_lo, double xi_hi, int n, int n_theta,
                                        const std::function<double(double, double)>& v) {
  rescale::ProfileSnapshot s;
  s.T_est = T;
  s.n_theta = static_cast<std::size_t>(n_theta);
  for (int k = 0; k < n; ++k) {
    const double xi = xi_lo + (xi_hi - xi_lo) * k / (n - 1);
    s.xi.push_back(xi);
    for (int j = 0; j < n_theta; ++j) s.outer.push_back(v(xi, kTwoPi * j / n_theta));
  }
  return s;
}

}  // namespace

TEST_CASE("rmax_scaling: cigar frame scaled to lambda = T/2 collapses to 2T; flat is 0") {
  // u = U0 / (mu r^2 + 1) with (T - t)^2 * 4 mu / U0 = 2T.
  const double T = 1.0, t = 0.9, U0 = 1e-3;
  const double mu = 2.0 * T * U0 / (4.0 * (T - t) * (T - t));
  const FlowState s = from_u(CylGrid::uniform(-4.0, 6.0, 800, 1), t, [&](double r, double) {
    return U0 / (mu * r * r + 1.0);
  });
  CHECK(rmax_scaling(s, T) == doctest::Approx(2.0 * T).epsilon(1e-4));
  const FlowState flat = from_u(CylGrid::uniform(-4.0, 2.0, 50, 3), 0.5, [](double, double) { return 2.0; });
  CHECK(std::abs(rmax_scaling(flat, T)) <= 1e-12);
  CHECK(std::abs(rmax(flat)) <= 1e-12);
}

TEST_CASE("width: cigar metric lambda = 1/2, a = 1 gives 2 pi sqrt 2") {
  const FlowState s = from_u(CylGrid::uniform(-8.0, 14.0, 2000, 1), 1.0, [](double r, double) {
    return 1.0 / (0.5 * r * r + 1.0);
  });
  CHECK(width(s) == doctest::Approx(kTwoPi * std::sqrt(2.0)).epsilon(1e-9));
  CHECK(width(s) == doctest::Approx(8.8858).epsilon(1e-4));
}

TEST_CASE("width: constant v = c gives 2 pi sqrt c; radial width is max of 2 pi e^{w/2}") {
  FlowState s;
  s.grid = CylGrid::uniform(0.0, 3.0, 20, 1);
  s.w = LogField(s.grid, std::log(2.25));
  CHECK(width(s) == doctest::Approx(kTwoPi * 1.5).epsilon(1e-15));
  s.grid = CylGrid::uniform(-1.0, 3.0, 40, 1);
  s.w = LogField(s.grid);
  double mx = 0.0;
  for (std::size_t i = 0; i < 40; ++i) {
    s.w(i, 0) = std::sin(3.0 * s.grid.zeta(i));
    mx = std::max(mx, kTwoPi * std::exp(0.5 * s.w(i, 0)));
  }
  CHECK(width(s) == mx);
}

TEST_CASE("aronson_benilan: exact cusp saturates, cigar has margin about 1/t") {
  const double t = 0.4;
  SUBCASE("discrete cusp shape is an exact backward-Euler solution: margin 0 to roundoff") {
    const CylGrid g = CylGrid::uniform(0.0, 40.0, 400, 1);
    const auto shape = solver::discrete_cusp_shape(g, -0.5);
    FlowState s;
    s.grid = g;
    s.w = LogField(g);
    for (std::size_t i = 0; i < g.n_zeta(); ++i) s.w(i, 0) = std::log(t) + shape[i];
    s.t = t;
    CHECK(std::abs(aronson_benilan(s)) <= 1e-8);
    CHECK(std::abs(cusp_excess(s, 0.0, -0.5)) <= 1e-15);
  }
  SUBCASE("sampled continuum cusp: margin O(h^2)") {
    double m[2];
    for (int level = 0; level < 2; ++level) {
      const CylGrid g = CylGrid::uniform(2.0, 40.0, 77 * (1 << level) - ((1 << level) - 1), 1);
      FlowState s;
      s.grid = g;
      s.w = LogField(g);
      for (std::size_t i = 0; i < g.n_zeta(); ++i)
        s.w(i, 0) = std::log(exact::cusp_v(g.zeta(i), t, {}));
      s.t = t;
      m[level] = std::abs(aronson_benilan(s));
    }
    CHECK(m[0] < 0.05 / t);
    CHECK(oracle::log2_ratio(m[0], m[1]) == doctest::Approx(2.0).epsilon(0.1));
  }
  SUBCASE("cigar: R > 0 so the margin is at least 1/t") {
    const FlowState s = cigar_frame(0.5, t);
    CHECK(aronson_benilan(s) >= 1.0 / t);
    CHECK(aronson_benilan(s) == doctest::Approx(1.0 / t).epsilon(1e-3));
  }
}

TEST_CASE("monotonicity: radial nonincreasing profile has no violation") {
  const FlowState s = cigar_frame(0.5, 0.1, -8.0);
  const auto pairs = monotonicity_pairs(s.grid, 1.0, 256, 5);
  REQUIRE(pairs.size() == 256);
  for (const auto& p : pairs)
    CHECK(std::sqrt(exact::norm2(p.y)) >= std::sqrt(exact::norm2(p.x)) + 1.0 - 1e-12);
  CHECK(monotonicity_check(s, pairs) <= 0.0);
}

TEST_CASE("monotonicity: constructed pair with u(y) = u(x) + 0.1 reports 0.1") {
  const CylGrid g = CylGrid::uniform(-6.0, 4.0, 200, 8);
  const FlowState s = from_u(g, 1.0, [](double r, double) { return r < 1.5 ? 1.0 : 1.1; });
  const std::vector<MonotonicityPair> pairs{{{0.1, 0.0}, {3.0, 0.0}}, {{0.2, 0.1}, {0.0, 1.25}}};
  CHECK(monotonicity_check(s, pairs) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("u_at: flat continuation inside zeta_min and exact zeta-affine recovery") {
  const FlowState s = from_u(CylGrid::uniform(-5.0, 3.0, 80, 4), 1.0, [](double, double) { return 0.8; });
  CHECK(u_at(s, {0.0, 0.0}) == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(u_at(s, {1e-4, 0.0}) == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(u_at(s, {1.3, -2.0}) == doctest::Approx(0.8).epsilon(1e-14));
}

TEST_CASE("segment_length: flat metric gives the Euclidean length") {
  const FlowState s = from_u(CylGrid::uniform(-8.0, 3.0, 100, 16), 1.0, [](double, double) { return 1.0; });
  CHECK(segment_length(s, {-1.0, 0.5}, {2.0, -1.5}) == doctest::Approx(std::sqrt(13.0)).epsilon(1e-12));
  CHECK(segment_length(s, {0.3, 0.3}, {0.3, 0.3}) == 0.0);
}

TEST_CASE("harnack_gap: coincident points, t2 -> t1+ leaves C1 (t2 - t1)") {
  const HarnackConstants k{1.0 + 2.0 / 1.3, 0.7, 2.0, 1};
  for (double dt : {1e-2, 1e-4, 1e-6}) {
    const HarnackSample s{0.8, 0.8 + dt, 0.37, 0.37, 0.0};
    CHECK(harnack_gap(s, 1.3, k) == doctest::Approx(k.C1 * dt).epsilon(1e-6));
    CHECK(harnack_gap(s, 1.3, k) >= 0.0);
  }
  CHECK_THROWS_AS(harnack_gap({0.8, 0.8, 0.0, 0.0, 0.0}, 1.3, k), DomainError);
  CHECK_THROWS_AS(harnack_gap({0.9, 0.8, 0.0, 0.0, 0.0}, 1.3, k), DomainError);
}

TEST_CASE("harnack_gap: depends only on the sample values") {
  const HarnackConstants k{2.0, 1.0, 1.0, 1};
  const HarnackSample a{0.6, 0.75, 1.2, 0.4, 0.3};
  HarnackSample b = a;
  b.t1 += 5.0;
  b.t2 += 5.0;
  CHECK(harnack_gap(a, 1.0, k) == doctest::Approx(harnack_gap(b, 7.0, k)).epsilon(1e-13));
}

TEST_CASE("harnack: exact cigar trajectory has nonnegative gaps for C1 = C2 = 1") {
  const double T = 1.0, lam = 0.5;
  std::vector<FlowState> frames;
  for (double t : {0.55, 0.6, 0.7, 0.8, 0.9}) frames.push_back(cigar_frame(lam, t));
  const auto pairs = harnack_pairs(frames, T, 2.0, 100, 9);
  REQUIRE(pairs.size() == 100);
  const auto samples = harnack_samples(frames, pairs, T);
  const HarnackConstants k{1.0 + 2.0 / T, 1.0, 1.0, 100};
  for (const auto& s : samples) {
    CHECK(s.t2 > s.t1);
    CHECK(s.t1 > 0.5 * T);
    CHECK(harnack_gap(s, T, k) >= 0.0);
  }
  const HarnackSearch found = harnack_search(samples, T, k.E, 1e-6);
  CHECK(found.found);
  CHECK(found.lattice_size == 169);
}

TEST_CASE("harnack_pairs: fewer than two late frames is insufficient data") {
  std::vector<FlowState> frames{cigar_frame(0.5, 0.2), cigar_frame(0.5, 0.7)};
  CHECK_THROWS_AS(harnack_pairs(frames, 1.0, 2.0, 10, 1), InsufficientData);
}

TEST_CASE("tail_area: exact outer limit") {
  const double T = 1.0;
  const auto V = [&](double xi, double) { return xi >= T ? 2.0 * T / (xi * xi) : 0.0; };
  const auto s = limit_snapshot(T, T, 3.0, 2001, 1, V);
  CHECK(tail_area(s, 2.0) == doctest::Approx(kTwoPi).epsilon(1e-6));
  CHECK(tail_area(s, 2.0) == doctest::Approx(6.2832).epsilon(1e-4));
  CHECK(tail_area(s, T) == doctest::Approx(2.0 * kTwoPi).epsilon(1e-6));
  for (double eta : {1.5, 2.25, 2.9})
    CHECK(tail_area(s, eta) == doctest::Approx(kFourPi * T / eta).epsilon(1e-6));
  CHECK_THROWS_AS(tail_area(s, 3.5), RangeError);
  CHECK_THROWS_AS(tail_area(s, 0.5), RangeError);
}

TEST_CASE("tail_area: total area from below the front is 4 pi within quadrature error") {
  const double T = 1.0;
  const int n = 2751;
  const double lo = 0.25, hi = 3.0, h = (hi - lo) / (n - 1);
  const auto V = [&](double xi, double) { return xi >= T ? 2.0 * T / (xi * xi) : 0.0; };
  const auto s = limit_snapshot(T, lo, hi, n, 8, V);
  CHECK(std::abs(tail_area(s, lo) - kFourPi) <= kTwoPi * h * 2.0 / T);
}

TEST_CASE("log_theta_avg: exact limit values") {
  const double T = 1.0;
  const auto V = [&](double xi, double) { return xi > T ? 2.0 * T / (xi * xi) : 0.0; };
  const auto s = limit_snapshot(T, 1.1, 3.0, 191, 4, V);
  // Linear interpolation of V between nodes spaced 0.01 apart.
  CHECK(std::abs(log_theta_avg(s, std::sqrt(2.0 * T))) <= 1e-3);
  CHECK(log_theta_avg(s, 2.0) == doctest::Approx(kTwoPi * std::log(0.5)).epsilon(1e-12));
  CHECK(log_theta_avg(s, 2.0) == doctest::Approx(-4.3552).epsilon(1e-4));
}

TEST_CASE("anisotropy: radial is 1, synthetic 1 + 0.5 cos theta is 3, always >= 1") {
  const auto radial = limit_snapshot(1.0, 0.5, 3.0, 11, 1, [](double xi, double) { return 1.0 / xi; });
  CHECK(anisotropy(radial, 1.5) == 1.0);
  const auto iso = limit_snapshot(1.0, 0.5, 3.0, 11, 16, [](double xi, double) { return 1.0 / xi; });
  CHECK(anisotropy(iso, 1.5) == 1.0);
  const auto cosine =
      limit_snapshot(1.0, 0.5, 3.0, 11, 64, [](double, double th) { return 1.0 + 0.5 * std::cos(th); });
  CHECK(anisotropy(cosine, 1.5) == doctest::Approx(3.0).epsilon(1e-14));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> U(0.1, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto rnd = limit_snapshot(1.0, 0.5, 3.0, 11, 8, [&](double, double) { return U(rng); });
    CHECK(anisotropy(rnd, 1.7) >= 1.0);
  }
}

TEST_CASE("mass_audit: exact law, corrupted record, too few records") {
  std::vector<DiagnosticsRecord> recs;
  for (int k = 0; k < 50; ++k) {
    DiagnosticsRecord r;
    r.t = 0.01 + 0.02 * k;
    r.mass = kFourPi * (1.01 - r.t);
    recs.push_back(r);
  }
  CHECK(mass_audit(recs).max_rel_deviation <= 1e-14);
  recs[31].mass *= 1.05;
  const MassAudit a = mass_audit(recs);
  CHECK(a.worst_index == 31);
  CHECK(a.max_rel_deviation == doctest::Approx(0.05 * recs[31].mass / 1.05 / recs[0].mass).epsilon(1e-12));
  CHECK_THROWS_AS(mass_audit(std::span(recs).first(1)), InsufficientData);
}

TEST_CASE("csv: header order, exact round trip, parse errors carry the line") {
  CHECK(csv_header() ==
        "t,tau,mass,rmax,rmax_scaled,width,width_scaled,alpha,xi_front,origin_curv_scaled,"
        "anisotropy,ab_margin,mono_violation");
  std::vector<DiagnosticsRecord> recs(3);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(-1e3, 1e3);
  for (auto& r : recs) {
    r.t = U(rng) * 1e-7;
    r.tau = U(rng);
    r.mass = std::nextafter(U(rng), 0.0);
    r.rmax = U(rng);
    r.rmax_scaled = 1.0 / 3.0;
    r.width = U(rng);
    r.width_scaled = U(rng);
    r.alpha = 1e300;
    r.xi_front = U(rng);
    r.origin_curv_scaled = U(rng);
    r.anisotropy = 1.0;
    r.ab_margin = -1e-300;
    r.mono_violation = -HUGE_VAL;
  }
  std::stringstream ss;
  write_csv(ss, recs);
  std::stringstream in(ss.str());
  CHECK(read_csv(in) == recs);

  std::string text = ss.str();
  const auto third = text.find('\n', text.find('\n') + 1) + 1;
  text.insert(third + 2, "x");
  std::stringstream bad(text);
  try {
    read_csv(bad);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}
