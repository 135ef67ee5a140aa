#include <benchmark/benchmark.h>

#include <cmath>

#include "cnls/energy.hpp"
#include "cnls/grid.hpp"
#include "cnls/solver.hpp"

namespace {

using namespace cnls;

double sech(double x) { return 1.0 / std::cosh(x); }

GridSpec grid_for(int dim, int n) { return GridSpec(dim, 8.0, n); }

State soliton_state(const GridSpec& g) {
    State s(g);
    s.u = Field::from_function(g, [](const Point& p) { return std::sqrt(2.0) * sech(p[0]) * sech(p[1]); });
    s.v = Field::from_function(g, [](const Point& p) { return sech(p[0]) * sech(p[1]); });
    return s;
}

void BM_Laplacian(benchmark::State& st) {
    const GridSpec g = grid_for(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)));
    const State s = soliton_state(g);
    Field out(g);
    for (auto _ : st) {
        apply_laplacian(g, s.u.values(), out.values());
        benchmark::DoNotOptimize(out.values().data());
    }
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(g.size()));
}
BENCHMARK(BM_Laplacian)->Args({1, 4001})->Args({2, 201})->Args({3, 41});

Problem problem_on(const GridSpec& g) {
    Problem p;
    p.mu1 = 1.0;
    p.mu2 = 2.0;
    p.beta = 0.5;
    p.a = RadialHomogeneous{1.0, 2.0, {0.0, 0.0, 0.0}};
    p.b = ConstantPotential{1.0};
    p.grid = g;
    return p;
}

void BM_Energy(benchmark::State& st) {
    const GridSpec g = grid_for(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)));
    const Discretization d(problem_on(g));
    const State s = soliton_state(g);
    for (auto _ : st) benchmark::DoNotOptimize(energy(s, d).total);
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(g.size()));
}
BENCHMARK(BM_Energy)->Args({1, 4001})->Args({2, 201});

void BM_Gradient(benchmark::State& st) {
    const GridSpec g = grid_for(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)));
    const Discretization d(problem_on(g));
    const State s = soliton_state(g);
    for (auto _ : st) benchmark::DoNotOptimize(l2_gradient(s, d).u.values().data());
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(g.size()));
}
BENCHMARK(BM_Gradient)->Args({1, 4001})->Args({2, 201});

void BM_Solve1D(benchmark::State& st) {
    const Problem p = problem_on(grid_for(1, static_cast<int>(st.range(0))));
    SolverParams params;
    params.tol_residual = 1e-6;
    for (auto _ : st) {
        const SolveResult r = solve_system(p, params);
        benchmark::DoNotOptimize(r.energy());
        st.counters["iterations"] = r.iterations;
    }
}
BENCHMARK(BM_Solve1D)->Arg(201)->Arg(401)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
