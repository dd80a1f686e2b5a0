#include <benchmark/benchmark.h>

#include "eqcont/homotopies.hpp"
#include "eqcont/nested.hpp"
#include "eqcont/oracle.hpp"
#include "eqcont/polysys.hpp"

using namespace eqcont;

namespace {

City three_locations()
{
    City c = City::line(3, 2.5, 1.0);
    c.L1 = 2.4;
    c.L2 = 0.6;
    return c;
}

void BM_PolyEval(benchmark::State& state)
{
    City c = City::line(static_cast<int>(state.range(0)), 2.5, 1.0);
    PolySystem sys = build_static_system(c, Rational{5, 2});
    CVec z = CVec::Constant(c.J(), cplx(0.7, 0.1));
    for (auto _ : state) benchmark::DoNotOptimize(sys.eval(z));
}
BENCHMARK(BM_PolyEval)->Arg(3)->Arg(5)->Arg(7);

void BM_PolyJacobian(benchmark::State& state)
{
    City c = City::line(static_cast<int>(state.range(0)), 2.5, 1.0);
    PolySystem sys = build_static_system(c, Rational{5, 2});
    CVec z = CVec::Constant(c.J(), cplx(0.7, 0.1));
    CVec f;
    CMat jac;
    for (auto _ : state) {
        sys.eval_jac(z, f, jac);
        benchmark::DoNotOptimize(jac.data());
    }
}
BENCHMARK(BM_PolyJacobian)->Arg(3)->Arg(5)->Arg(7);

void BM_TotalDegreeThreeLocations(benchmark::State& state)
{
    City c = three_locations();
    TrackerConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(solve_total_degree(c, Rational{5, 2}, cfg).equilibria.size());
}
BENCHMARK(BM_TotalDegreeThreeLocations)->Unit(benchmark::kMillisecond);

void BM_AmenityHomotopy(benchmark::State& state)
{
    City c = City::random_line(static_cast<int>(state.range(0)), 2.5, 0.0, 1.0, 0.5, 11);
    TrackerConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(solve_amenity_homotopy(c, Rational{5, 2}, cfg).equilibria.size());
}
BENCHMARK(BM_AmenityHomotopy)->Arg(3)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_ElasticityPath(benchmark::State& state)
{
    City c = three_locations();
    TrackerConfig cfg;
    auto eqs = solve_total_degree(c, Rational{5, 2}, cfg).proper();
    c.eta = 2.0;
    for (auto _ : state)
        for (const auto& e : eqs) benchmark::DoNotOptimize(solve_elasticity_homotopy(c, e, cfg).path.steps_taken);
}
BENCHMARK(BM_ElasticityPath)->Unit(benchmark::kMillisecond);

void BM_Oracle(benchmark::State& state)
{
    City c = three_locations();
    GridSpec gs;
    gs.resolution = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(brute_force_equilibria(c, gs).size());
}
BENCHMARK(BM_Oracle)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_CitywideResidualJacobian(benchmark::State& state)
{
    NestedParams p;
    p.Lw = 0.4;
    p.Lb = 1.6;
    NestedCity nc = synthetic_nested_city(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)) / 4,
                                          3, 5, p);
    CitywideH h(nc, 1.0);
    CitywideState s;
    const int jn = nc.neighborhoods(), jc = nc.communities();
    s.q_n = Vec::Ones(jn);
    s.psi_n = Vec::Constant(jn, 0.5);
    s.psi_c = Vec::Constant(jc, 0.5);
    s.Lw = Vec::Constant(jc, p.Lw / jc);
    s.Lb = Vec::Constant(jc, p.Lb / jc);
    s.Uw = Vec::Ones(jc);
    s.Ub = Vec::Ones(jc);
    Vec y = h.pack(s);
    for (auto _ : state) benchmark::DoNotOptimize(h.jac_x(y, 0.5));
}
BENCHMARK(BM_CitywideResidualJacobian)->Arg(20)->Arg(80)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
