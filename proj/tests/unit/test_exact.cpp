#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "ricci2d/errors.hpp"
#include "ricci2d/exact.hpp"

using namespace ricci2d;
using namespace ricci2d::exact;

TEST_CASE("cigar: normalization and direct substitution") {
  for (double lam : {0.1, 0.5, 3.0}) CHECK(cigar({0, 0}, 0.0, {lam, lam}) == 1.0);
  CHECK(cigar({1, 0}, 0.0, {0.5, 0.5}) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(cigar({0.6, 0.8}, 0.0, {0.5, 0.5}) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("cigar: positive, radially nonincreasing, origin value e^{-4 lambda_bar tau}") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> L(0.1, 5.0), T(-2.0, 2.0), R(0.0, 20.0);
  for (int k = 0; k < 200; ++k) {
    const SolitonParams p{L(rng), L(rng)};
    const double tau = T(rng);
    CHECK(cigar({0, 0}, tau, p) == doctest::Approx(std::exp(-4.0 * p.lambda_bar * tau)).epsilon(1e-15));
    const double r1 = R(rng), r2 = r1 + R(rng);
    const double u1 = cigar({r1, 0}, tau, p), u2 = cigar({0, r2}, tau, p);
    CHECK(u1 > 0.0);
    CHECK(u2 > 0.0);
    CHECK(u2 <= u1);
  }
}

TEST_CASE("pde_residual: cigar residual converges with ratio 4 under halving") {
  const SolitonParams p{0.5, 0.5};
  const Sampler u = [&](Point2 x, double t) { return cigar(x, t, p); };
  const Point2 x{0.3, -0.7};
  const double t = 0.2;
  double r[4];
  for (int k = 0; k < 4; ++k) {
    const double h = 0.02 / (1 << k);
    r[k] = std::abs(pde_residual(u, x, t, h, h));
  }
  for (int k = 1; k < 4; ++k) CHECK(r[k - 1] / r[k] == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("pde_residual: spatially and temporally constant sampler gives exactly zero") {
  const Sampler c = [](Point2, double) { return 2.75; };
  CHECK(pde_residual(c, {0.1, 0.2}, 0.5, 1e-2, 1e-2) == 0.0);
  CHECK(pde_residual(c, {-4.0, 9.0}, 3.0, 1e-4, 1e-3) == 0.0);
}

TEST_CASE("pde_residual: nonpositive sampler is a domain error") {
  const Sampler bad = [](Point2 x, double) { return x.x; };
  CHECK_THROWS_AS(pde_residual(bad, {0.0, 0.0}, 1.0, 0.1, 0.1), DomainError);
}

TEST_CASE("cusp: direct substitution and domain") {
  CHECK(cusp(std::exp(1.0), 1.0, {0.0}) == doctest::Approx(2.0 * std::exp(-2.0)).epsilon(1e-15));
  CHECK(cusp(std::exp(1.0), 1.0, {0.0}) == doctest::Approx(0.2707).epsilon(1e-4));
  CHECK(cusp_v(2.0, 0.5, {0.0}) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK_THROWS_AS(cusp(1.0, 1.0, {}), DomainError);
  CHECK_THROWS_AS(cusp(0.5, 1.0, {}), DomainError);
  CHECK_NOTHROW(cusp(1.0 + 1e-6, 1.0, {}));
}

TEST_CASE("cusp: residual with A = 3 vanishes under refinement at r > 1.5") {
  const Sampler u = [](Point2 x, double t) { return cusp(std::sqrt(norm2(x)), t, {3.0}); };
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> R(1.5, 6.0), Th(0.0, 6.283185307179586), T(0.1, 2.0);
  for (int k = 0; k < 6; ++k) {
    const double r = R(rng), th = Th(rng), t = T(rng);
    const Point2 x{r * std::cos(th), r * std::sin(th)};
    const double coarse = std::abs(pde_residual(u, x, t, 1e-2, 1e-2));
    const double fine = std::abs(pde_residual(u, x, t, 2.5e-3, 2.5e-3));
    CHECK(fine < coarse);
    CHECK(coarse / fine == doctest::Approx(16.0).epsilon(0.1));
  }
}

TEST_CASE("cusp: exactly linear in t, curvature -1/(t + A)") {
  const CuspParams p{0.4};
  for (double r : {1.3, 2.0, 7.5}) {
    const double u1 = cusp(r, 0.5, p), u2 = cusp(r, 1.5, p), u3 = cusp(r, 2.5, p);
    CHECK(u3 - u2 == doctest::Approx(u2 - u1).epsilon(1e-14));
    // R = -Lap log u / u, with the Laplacian from the Richardson oracle along the radius.
    const double t = 0.8;
    auto logu = [&](double s) { return std::log(cusp(s, t, p)); };
    const double lap = oracle::d2_richardson(logu, r, 1e-2) +
                       (logu(r + 1e-5) - logu(r - 1e-5)) / (2e-5) / r;
    const double R = -lap / cusp(r, t, p);
    CHECK(R == doctest::Approx(-1.0 / (t + p.offset)).epsilon(1e-6));
  }
}

TEST_CASE("inner_profile_limit: normalization and substitution") {
  CHECK(inner_profile_limit({0, 0}, 1.7) == 1.0);
  CHECK(inner_profile_limit({1.0, 1.0}, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("inner steady residual: second order on random points") {
  const double T = 1.3;
  const auto U = [&](Point2 y) { return inner_profile_limit(y, T); };
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> Y(-2.0, 2.0);
  for (int k = 0; k < 6; ++k) {
    const Point2 y{Y(rng), Y(rng)};
    const double a = std::abs(inner_steady_residual(U, T, y, 1e-2));
    const double b = std::abs(inner_steady_residual(U, T, y, 5e-3));
    CHECK(a / b == doctest::Approx(4.0).epsilon(0.05));
  }
}

TEST_CASE("outer_profile_limit: branches") {
  CHECK(outer_profile_limit(2.0, 1.0) == 0.5);
  CHECK(outer_profile_limit(0.5, 1.0) == 0.0);
  CHECK_THROWS(outer_profile_limit(1.0, 1.0));
}

TEST_CASE("outer_profile_limit: total area 4 pi for T = 1 by quadrature") {
  // s = 1/xi maps [T, inf) to (0, 1/T]; d xi = ds / s^2.
  const double T = 1.0;
  const double total = oracle::integrate(
      [&](double s) {
        if (s <= 0.0) return 2.0 * M_PI * 2.0 * T;  // limit of V(1/s)/s^2
        return 2.0 * M_PI * outer_profile_limit(1.0 / s, T) / (s * s);
      },
      0.0, 1.0 / T * (1.0 - 1e-15));
  CHECK(total == doctest::Approx(4.0 * M_PI).epsilon(1e-9));
}

TEST_CASE("outer_profile_limit: xi V' + 2 V = 0 on xi > T at second order") {
  const double T = 0.8;
  const auto V = [&](double xi) { return outer_profile_limit(xi, T); };
  for (double xi : {1.0, 1.7, 2.9}) {
    const double a = std::abs(outer_steady_residual(V, xi, 1e-2));
    const double b = std::abs(outer_steady_residual(V, xi, 5e-3));
    CHECK(a / b == doctest::Approx(4.0).epsilon(0.05));
  }
  CHECK(outer_steady_residual(V, 0.4, 1e-2) == 0.0);
}

TEST_CASE("convergence_study: every exact case has order in [1.7, 2.3]") {
  for (const auto& name : exact_case_names()) {
    CAPTURE(name);
    const ConvergenceStudy s = convergence_study(name, 3);
    CHECK(s.pass);
    REQUIRE(s.levels.size() == 4);
    for (std::size_t k = 1; k < s.levels.size(); ++k) {
      CHECK(s.levels[k].order >= kOrderLo);
      CHECK(s.levels[k].order <= kOrderHi);
      CHECK(s.levels[k].h == doctest::Approx(0.5 * s.levels[k - 1].h));
    }
  }
}

TEST_CASE("convergence_study: frozen cigar table") {
  // Frozen from the first run after the Richardson ratio checks above passed.
  const ConvergenceStudy s = convergence_study("cigar", 3);
  CHECK(s.levels[0].residual == doctest::Approx(3.3231240709197252e-05).epsilon(1e-6));
  CHECK(s.levels[3].residual == doctest::Approx(5.1862594219187486e-07).epsilon(1e-4));
}

TEST_CASE("convergence_study: outer-steady exact branch is identically zero") {
  CHECK(convergence_study("outer-steady", 2).exact_branch_residual == 0.0);
}

TEST_CASE("convergence_study: bad arguments") {
  CHECK_THROWS_AS(convergence_study("cigar", 1), ConfigError);
  CHECK_THROWS_AS(convergence_study("bowl", 3), ConfigError);
}
