#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "ricci2d/checkpoint.hpp"
#include "ricci2d/errors.hpp"
#include "ricci2d/field_ops.hpp"
#include "ricci2d/runner.hpp"
#include "ricci2d/solver.hpp"

using namespace ricci2d;
using namespace ricci2d::solver;

namespace {

GridSpec small_grid(int n_zeta = 256, int n_theta = 1) {
  GridSpec g;
  g.n_zeta = n_zeta;
  g.n_theta = n_theta;
  return g;
}

double sup_diff(const LogField& a, const LogField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace

TEST_CASE("estimate_T: mass law examples") {
  CHECK(estimate_T(kFourPi, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(estimate_T(2.0 * kFourPi, 0.5) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK_THROWS(estimate_T(0.0, 0.0));
  CHECK_THROWS(estimate_T(-1.0, 0.0));
}

TEST_CASE("adapt_dt: min rule, cap, geometric sequence") {
  FlowState s;
  SteppingPolicy p;
  p.sigma = 0.1;
  p.dt_max = 1.0;
  s.t = 0.9;
  CHECK(adapt_dt(s, p, 1.0) == doctest::Approx(0.01).epsilon(1e-12));
  p.dt_max = 0.05;
  s.t = 0.0;
  CHECK(adapt_dt(s, p, 10.0) == 0.05);
  p.dt_max = 1.0;
  s.t = 0.0;
  double prev = adapt_dt(s, p, 1.0);
  for (int k = 0; k < 20; ++k) {
    s.t += prev;
    const double dt = adapt_dt(s, p, 1.0);
    CHECK(dt / prev == doctest::Approx(1.0 - p.sigma).epsilon(1e-10));
    prev = dt;
  }
  s.t = 1.0;
  CHECK_THROWS(adapt_dt(s, p, 1.0));
}

TEST_CASE("validate: policy and datum bounds") {
  SteppingPolicy p;
  p.sigma = 1.5;
  CHECK_THROWS_AS(validate(p), ConfigError);
  try {
    validate(p);
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("(0, 1)") != std::string::npos);
  }
  InitialDatum d;
  d.floor_eps = 0.0;
  CHECK_THROWS_AS(validate(d), DegenerateError);
  d = InitialDatum{};
  d.kind = DatumKind::TwoBumps;
  d.offsets = {{0.2, 0.0}};
  CHECK_THROWS_AS(validate(d), ConfigError);
}

TEST_CASE("datum kinds round-trip through their names") {
  for (DatumKind k : {DatumKind::Disk, DatumKind::SmoothBump, DatumKind::TwoBumps})
    CHECK(datum_kind_from_string(to_string(k)) == k);
  CHECK_THROWS_AS(datum_kind_from_string("ring"), ConfigError);
}

TEST_CASE("init_state: disk datum of height 4 and radius 1 gives T_est = t0 + 1") {
  InitialDatum d;
  const FlowState s = init_state(d, CylGrid::stretched(GridSpec{}));
  CHECK(datum_mass(d) == doctest::Approx(kFourPi).epsilon(1e-15));
  CHECK(estimate_T(mass(s), d.t0) == doctest::Approx(d.t0 + 1.0).epsilon(1e-8));
  CHECK(s.t == d.t0);
}

TEST_CASE("init_state: floor_eps = 0 is rejected") {
  InitialDatum d;
  d.floor_eps = 0.0;
  CHECK_THROWS_AS(init_state(d, CylGrid::stretched(GridSpec{})), DegenerateError);
}

TEST_CASE("init_state: two-bumps mass matches a quadrature oracle within 0.5%") {
  InitialDatum d;
  d.kind = DatumKind::TwoBumps;
  d.height = 8.0;
  d.offsets = {{-0.4, 0.0}, {0.4, 0.0}};
  d.floor_eps = 0.01;
  const double ref =
      oracle::integrate_disk([&](double x, double y) { return datum_value(d, {x, y}); }, d.rho, 1e-7);
  CHECK(datum_mass(d) == doctest::Approx(ref).epsilon(1e-4));
  const FlowState s = init_state(d, CylGrid::stretched(small_grid(384, 64)));
  CHECK(std::abs(mass(s) / ref - 1.0) <= 5e-3);
}

TEST_CASE("init_state: datum satisfies the Aronson-Benilan bound on the radial grid") {
  const FlowState s = init_state(InitialDatum{}, CylGrid::stretched(GridSpec{}));
  const NodeField R = curvature_field(s);
  for (std::size_t i = 1; i + 1 < s.grid.n_zeta(); ++i) CHECK(R(i, 0) + 1.0 / s.t >= -1e-6 / s.t);
}

TEST_CASE("boundary_conditions: zeta_max = 40, t = 0.5 gives log(1/1600)") {
  FlowState s;
  s.grid = CylGrid::uniform(-8.0, 40.0, 100, 1);
  s.w = LogField(s.grid, 0.0);
  s.t = 0.5;
  boundary_conditions(s);
  CHECK(s.w(99, 0) == doctest::Approx(std::log(1.0 / 1600.0)).epsilon(1e-15));
  CHECK(std::log(1.0 / 1600.0) == doctest::Approx(-7.3778).epsilon(1e-4));
}

TEST_CASE("boundary_conditions: exact cusp rows are unchanged") {
  FlowState s = init_cusp_state(CylGrid::uniform(2.0, 30.0, 60, 4), 0.7, 0.2);
  const FlowState before = s;
  BoundaryPolicy bc;
  bc.inner = InnerBoundary::CuspDirichlet;
  bc.cusp_offset = 0.2;
  boundary_conditions(s, bc);
  CHECK(sup_diff(s.w, before.w) <= 1e-12);
}

TEST_CASE("boundary_conditions: nonpositive t + A is a domain error") {
  FlowState s = init_cusp_state(CylGrid::uniform(2.0, 30.0, 20, 1), 0.5, 0.0);
  s.t = -0.5;
  CHECK_THROWS_AS(boundary_conditions(s), DomainError);
}

TEST_CASE("inner ghost: w_ghost = w_0 - 2 h_0") {
  const FlowState s = init_state(InitialDatum{}, CylGrid::stretched(small_grid(128, 4)));
  for (std::size_t j = 0; j < 4; ++j)
    CHECK(inner_ghost_value(s, j) == s.w(0, j) - 2.0 * s.grid.h(0));
}

TEST_CASE("step_implicit: dt -> 0 leaves the state unchanged") {
  const FlowState s = init_state(InitialDatum{}, CylGrid::stretched(small_grid()));
  SteppingPolicy p;
  const FlowState n = step_implicit(s, 1e-12, p, {InnerBoundary::RegularOrigin, 0.0, outer_cusp_shift(s)});
  CHECK(sup_diff(n.w, s.w) <= 1e-9);
  CHECK(n.t == s.t + 1e-12);
  CHECK(n.step_index == s.step_index + 1);
}

TEST_CASE("step_implicit: exact cusp row after one step is second order in h") {
  // e^w is linear in t for the cusp, so backward Euler is exact in time.
  double err[2];
  for (int level = 0; level < 2; ++level) {
    const CylGrid g = CylGrid::uniform(2.0, 20.0, 37 * (1 << level) - ((1 << level) - 1), 1);
    const FlowState s = init_cusp_state(g, 0.5, 0.0);
    BoundaryPolicy bc;
    bc.inner = InnerBoundary::CuspDirichlet;
    SteppingPolicy p;
    const double dt = 0.1;
    const FlowState n = step_implicit(s, dt, p, bc);
    err[level] = 0.0;
    for (std::size_t i = 0; i < g.n_zeta(); ++i)
      err[level] = std::max(err[level],
                            std::abs(n.w(i, 0) - std::log(exact::cusp_v(g.zeta(i), 0.6, {}))));
  }
  CHECK(err[0] < 2e-3);
  CHECK(oracle::log2_ratio(err[0], err[1]) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("step_implicit: mass drops by 4 pi dt per step") {
  FlowState s = init_state(InitialDatum{}, CylGrid::stretched(GridSpec{}));
  SteppingPolicy p;
  const BoundaryPolicy bc{InnerBoundary::RegularOrigin, 0.0, outer_cusp_shift(s)};
  for (int k = 0; k < 5; ++k) {
    const double dt = 1e-3;
    const FlowState n = step_implicit(s, dt, p, bc);
    CHECK((mass(s) - mass(n)) / (kFourPi * dt) == doctest::Approx(1.0).epsilon(0.01));
    s = n;
  }
}

TEST_CASE("step_implicit: 2D step agrees with the radial step on a radial datum") {
  InitialDatum d;
  const FlowState s1 = init_state(d, CylGrid::stretched(small_grid(128, 1)));
  const FlowState s8 = init_state(d, CylGrid::stretched(small_grid(128, 8)));
  SteppingPolicy p;
  const FlowState n1 = step_implicit(s1, 1e-3, p, {InnerBoundary::RegularOrigin, 0.0, outer_cusp_shift(s1)});
  const FlowState n8 = step_implicit(s8, 1e-3, p, {InnerBoundary::RegularOrigin, 0.0, outer_cusp_shift(s8)});
  for (std::size_t i = 0; i < n1.grid.n_zeta(); ++i)
    for (std::size_t j = 0; j < 8; ++j) CHECK(n8.w(i, j) == doctest::Approx(n1.w(i, 0)).epsilon(1e-9));
}

TEST_CASE("step_implicit: a stalled Newton iteration is rejected") {
  const FlowState s = init_state(InitialDatum{}, CylGrid::stretched(small_grid()));
  SteppingPolicy p;
  p.newton_max_iter = 1;
  p.newton_tol = 1e-300;
  CHECK_THROWS_AS(step_implicit(s, 1e-2, p), StepRejected);
}

TEST_CASE("discrete cusp shape solves Lap w = e^w at interior nodes") {
  const CylGrid g = CylGrid::stretched(small_grid(200));
  const std::vector<double> w = discrete_cusp_shape(g, -0.2);
  std::size_t finite = 0;
  for (std::size_t i = 1; i + 1 < g.n_zeta(); ++i) {
    if (!std::isfinite(w[i - 1])) continue;
    ++finite;
    const double hm = g.h(i - 1), hp = g.h(i);
    const double lap = 2.0 / (hm + hp) * ((w[i + 1] - w[i]) / hp - (w[i] - w[i - 1]) / hm);
    CHECK(lap == doctest::Approx(std::exp(w[i])).epsilon(1e-9).scale(1e-12));
  }
  CHECK(finite > 100);
  const double d = g.zeta_max() + 0.2;
  CHECK(w.back() == doctest::Approx(std::log(2.0 / (d * d))).epsilon(1e-14));
}

TEST_CASE("run: empty schedule returns the initial record only") {
  RunOptions o;
  o.grid = small_grid(128);
  o.policy.tau_schedule = {};
  const Trajectory tr = run(o);
  REQUIRE(tr.records.size() == 1);
  CHECK(tr.records[0].t == o.datum.t0);
  CHECK(tr.steps == 0);
  CHECK(tr.snapshots.empty());
}

TEST_CASE("run: short radial run obeys the mass law, positivity, AB and comparison") {
  RunOptions o;
  o.grid = small_grid(256);
  o.policy.sigma = 1e-3;
  o.policy.tau_schedule = {2.0, 5.0};
  o.record_stride = 5;
  const Trajectory tr = run(o);
  CHECK(tr.stop_reason == "tau-schedule-complete");
  CHECK(tr.records.back().tau == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(diag::mass_audit(tr.records).max_rel_deviation <= 0.01);
  for (const auto& r : tr.records) CHECK(r.ab_margin >= -1e-3);
  for (double e : tr.cusp_excess) CHECK(e <= 1e-6);
  for (double v : tr.final_state.w.values()) CHECK(std::isfinite(v));
  CHECK(tr.snapshots.size() == 2);
  CHECK(tr.frames.size() == 2);
}

TEST_CASE("run: identical options give bit-identical trajectories") {
  RunOptions o;
  o.grid = small_grid(128);
  o.policy.tau_schedule = {2.0};
  const Trajectory a = run(o), b = run(o);
  CHECK(a.records == b.records);
  CHECK(a.final_state.w == b.final_state.w);
  CHECK(a.steps == b.steps);
}

TEST_CASE("run: cusp-only data stays on the exact cusp to O(h^2)") {
  double err[2];
  for (int level = 0; level < 2; ++level) {
    const CylGrid g = CylGrid::uniform(1.0, 30.0, 59 * (1 << level) - ((1 << level) - 1), 1);
    FlowState s = init_cusp_state(g, 0.1, 0.5);
    BoundaryPolicy bc;
    bc.inner = InnerBoundary::CuspDirichlet;
    bc.cusp_offset = 0.5;
    SteppingPolicy p;
    err[level] = 0.0;
    for (int k = 0; k < 40; ++k) {
      s = step_implicit(s, 0.025, p, bc);
      for (std::size_t i = 0; i < g.n_zeta(); ++i)
        err[level] = std::max(err[level], std::abs(s.w(i, 0) - std::log(exact::cusp_v(
                                                                  g.zeta(i), s.t, {0.5}))));
    }
  }
  CHECK(err[0] < 2e-2);
  CHECK(oracle::log2_ratio(err[0], err[1]) == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("run: stiffness failure dumps the last good state") {
  const auto path = std::filesystem::temp_directory_path() / "ricci2d_stiff.ckpt";
  std::filesystem::remove(path);
  RunOptions o;
  o.grid = small_grid(64);
  o.policy.newton_max_iter = 1;
  o.policy.newton_tol = 1e-300;
  o.policy.dt_min = 1e-6;
  o.failure_checkpoint = path.string();
  try {
    run(o);
    FAIL("expected StiffnessFailure");
  } catch (const StiffnessFailure& e) {
    CHECK(e.checkpoint_path() == path.string());
    const Checkpoint c = read_checkpoint(path.string());
    CHECK(c.state.t == o.datum.t0);
  }
}

TEST_CASE("checkpoint: bit-exact round trip with and without increment") {
  const auto dir = std::filesystem::temp_directory_path();
  FlowState s = init_state(InitialDatum{}, CylGrid::stretched(small_grid(64, 4)));
  write_checkpoint((dir / "a.ckpt").string(), s, "cafe");
  Checkpoint c = read_checkpoint((dir / "a.ckpt").string());
  CHECK(c.state.w == s.w);
  CHECK(c.state.grid == s.grid);
  CHECK(c.state.t == s.t);
  CHECK(c.config_hash == "cafe");
  CHECK(c.state.increment.empty());

  s = step_implicit(s, 1e-3, SteppingPolicy{}, {InnerBoundary::RegularOrigin, 0.0, outer_cusp_shift(s)});
  write_checkpoint((dir / "b.ckpt").string(), s);
  c = read_checkpoint((dir / "b.ckpt").string());
  CHECK(c.state.w == s.w);
  CHECK(c.state.increment == s.increment);
  CHECK(c.state.last_dt == s.last_dt);
  CHECK(c.state.step_index == s.step_index);
}

TEST_CASE("checkpoint: bad magic and truncation are rejected") {
  const auto dir = std::filesystem::temp_directory_path();
  {
    std::ofstream os(dir / "bad.ckpt");
    os << "NOT-A-CHECKPOINT\n{}\n";
  }
  CHECK_THROWS_AS(read_checkpoint((dir / "bad.ckpt").string()), Error);
  const FlowState s = init_state(InitialDatum{}, CylGrid::stretched(small_grid(64)));
  write_checkpoint((dir / "t.ckpt").string(), s);
  std::filesystem::resize_file(dir / "t.ckpt", std::filesystem::file_size(dir / "t.ckpt") - 8);
  CHECK_THROWS_AS(read_checkpoint((dir / "t.ckpt").string()), Error);
  CHECK_THROWS_AS(read_checkpoint((dir / "missing.ckpt").string()), IoError);
}

TEST_CASE("fnv1a: reference vectors") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}
