#include <benchmark/benchmark.h>

#include "ricci2d/field_ops.hpp"
#include "ricci2d/solver.hpp"

using namespace ricci2d;

namespace {

struct Setup {
  FlowState state;
  solver::BoundaryPolicy bc;
  solver::SteppingPolicy policy;
  double T_est = 0.0;
};

Setup make_setup(int n_zeta, int n_theta) {
  GridSpec g;
  g.n_zeta = n_zeta;
  g.n_theta = n_theta;
  solver::InitialDatum d;
  if (n_theta > 1) {
    d.kind = solver::DatumKind::TwoBumps;
    d.height = 8.0;
    d.offsets = {{-0.4, 0.0}, {0.4, 0.0}};
    d.floor_eps = 0.01;
  }
  Setup s;
  s.state = solver::init_state(d, CylGrid::stretched(g));
  s.bc.zeta_shift = solver::outer_cusp_shift(s.state);
  solver::boundary_conditions(s.state, s.bc);
  s.T_est = solver::estimate_T(mass(s.state), s.state.t);
  return s;
}

void BM_StepImplicit(benchmark::State& st) {
  const Setup s = make_setup(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)));
  const double dt = solver::adapt_dt(s.state, s.policy, s.T_est);
  for (auto _ : st) benchmark::DoNotOptimize(solver::step_implicit(s.state, dt, s.policy, s.bc));
  st.counters["nodes"] = static_cast<double>(st.range(0) * st.range(1));
}
BENCHMARK(BM_StepImplicit)->Args({512, 1})->Args({2048, 1})->Args({384, 64})->Unit(benchmark::kMillisecond);

void BM_Laplacian(benchmark::State& st) {
  const Setup s = make_setup(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)));
  for (auto _ : st) benchmark::DoNotOptimize(laplacian_c(s.state.w, s.state.grid));
}
BENCHMARK(BM_Laplacian)->Args({512, 1})->Args({384, 64});

void BM_InitState(benchmark::State& st) {
  GridSpec g;
  g.n_zeta = static_cast<int>(st.range(0));
  const CylGrid grid = CylGrid::stretched(g);
  for (auto _ : st) benchmark::DoNotOptimize(solver::init_state(solver::InitialDatum{}, grid));
}
BENCHMARK(BM_InitState)->Arg(512)->Arg(2048);

}  // namespace

BENCHMARK_MAIN();
