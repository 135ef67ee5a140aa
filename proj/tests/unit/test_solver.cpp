#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "cnls/solver.hpp"
#include "oracles.hpp"

using namespace cnls;

namespace {

Problem constant_line(double mu1, double mu2, double beta) {
    Problem p;
    p.grid = GridSpec(1, 20.0, 801);
    p.mu1 = mu1;
    p.mu2 = mu2;
    p.beta = beta;
    return p;
}

SolverParams params(double tol = 1e-9) {
    SolverParams sp;
    sp.tol_residual = tol;
    sp.max_iters = 400000;
    return sp;
}

double centered_profile_error(const Field& u, double amp) {
    const double xc = peak_location(u)[0];
    const Field ref = Field::from_function(u.grid(), [&](const Point& x) { return amp * oracle::sech(x[0] - xc); });
    const Field d = u - ref;
    return std::sqrt(inner(d, d) / inner(ref, ref));
}

Mask interval(const GridSpec& g, double lo, double hi) {
    Mask m(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.node(i)[0];
        m.set(i, x > lo && x < hi);
    }
    return m;
}

}  // namespace

TEST(Solver, ScalarSoliton) {
    const SolveResult r = solve_scalar(constant_line(1.0, 1.0, 0.0), Component::U, params());
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.energy(), oracle::kSolitonEnergy, 5e-3);
    EXPECT_LE(centered_profile_error(r.state.u, std::sqrt(2.0)), 1e-2);
    EXPECT_EQ(r.mass_v4, 0.0);
    EXPECT_TRUE(r.semi_trivial);
}

TEST(Solver, ScalarSecondComponent) {
    const SolveResult r = solve_scalar(constant_line(1.0, 2.0, 0.0), Component::V, params());
    EXPECT_NEAR(r.energy(), oracle::kSolitonEnergy / 2.0, 5e-3);
    EXPECT_LE(centered_profile_error(r.state.v, 1.0), 1e-2);
    EXPECT_EQ(r.mass_u4, 0.0);
}

TEST(Solver, SynchronizedState) {
    const SolveResult r = solve_system(constant_line(1.0, 1.0, 3.0), params());
    EXPECT_TRUE(r.converged);
    EXPECT_FALSE(r.semi_trivial);
    EXPECT_NEAR(r.energy(), oracle::synchronized_energy(1.0, 3.0), 5e-3);
    EXPECT_LE(centered_profile_error(r.state.u, std::sqrt(2.0) / 2.0), 1e-2);
    EXPECT_LE(oracle::rel_l2(r.state.u, r.state.v), 1e-6);
}

TEST(Solver, WeakCouplingLosesToScalarStates) {
    const Problem p = constant_line(1.0, 1.0, 0.1);
    const SolveResult r = solve_system(p, params());
    const double scalar = solve_scalar(p, Component::U, params()).energy();
    EXPECT_TRUE(r.semi_trivial || r.energy() >= scalar - 1e-6);
}

TEST(Solver, MuScaling) {
    Problem p = constant_line(1.0, 1.0, 0.0);
    p.grid = GridSpec(1, 12.0, 481);
    const SolveResult r1 = solve_scalar(p, Component::U, params(1e-11));
    p.mu1 = 4.0;
    const SolveResult r4 = solve_scalar(p, Component::U, params(1e-11));
    for (std::size_t i = 0; i < p.grid.size(); ++i) EXPECT_NEAR(r4.state.u[i], 0.5 * r1.state.u[i], 1e-6);
}

TEST(Solver, TwoDimensionalRefinement) {
    Problem p = constant_line(1.0, 1.0, 0.0);
    p.grid = GridSpec(2, 10.0, 81);
    const SolveResult coarse = solve_scalar(p, Component::U, params(1e-7));
    p.grid = GridSpec(2, 10.0, 161);
    const SolveResult fine = solve_scalar(p, Component::U, params(1e-7));
    EXPECT_TRUE(coarse.converged);
    EXPECT_TRUE(fine.converged);
    EXPECT_NEAR(coarse.energy() / fine.energy(), 1.0, 1e-2);
    // Weinstein's constant: the 2D cubic ground state has mass 11.70089, energy half of it.
    EXPECT_NEAR(fine.energy(), 11.70089 / 2.0, 0.02 * 11.70089 / 2.0);
}

TEST(Solver, HarmonicLimitRefinementAndSymmetry) {
    const PotentialSpec W = RadialHomogeneous{1.0, 2.0, {}};
    const SolveResult coarse = solve_limit_homogeneous(W, 1, 1, 3, GridSpec(1, 8.0, 401), params());
    const SolveResult fine = solve_limit_homogeneous(W, 1, 1, 3, GridSpec(1, 8.0, 801), params());
    EXPECT_NEAR(coarse.energy() / fine.energy(), 1.0, 1e-2);
    EXPECT_LE(oracle::rel_l2(fine.state.u, fine.state.v), 1e-6);
    EXPECT_FALSE(fine.semi_trivial);
}

TEST(Solver, CouplingLowersLimitEnergy) {
    const PotentialSpec W = RadialHomogeneous{1.0, 2.0, {}};
    const GridSpec g(1, 8.0, 401);
    const SolveResult b3 = solve_limit_homogeneous(W, 1, 1, 3, g, params());
    const SolveResult b6 = solve_limit_homogeneous(W, 1, 1, 6, g, params());
    EXPECT_LT(b6.energy(), b3.energy());
    Problem p6;
    p6.grid = g;
    p6.beta = 6.0;
    p6.a = W;
    p6.b = W;
    const double j = quotient_J(b3.state, p6);
    EXPECT_LT(j, b3.energy());
    EXPECT_GE(j, b6.energy() * (1 - 1e-9));
}

TEST(Solver, DirichletScalingCovariance) {
    const GridSpec g(1, 2.5, 501);
    const SolveResult r1 = solve_limit_dirichlet(interval(g, -1, 1), interval(g, -1, 1), 1, 1, 3, g, params());
    const SolveResult r2 = solve_limit_dirichlet(interval(g, -2, 2), interval(g, -2, 2), 1, 1, 3, g, params());
    EXPECT_NEAR(r2.energy() / (r1.energy() / 8.0), 1.0, 1e-2);
    EXPECT_LE(oracle::rel_l2(r1.state.u, r1.state.v), 1e-6);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (std::abs(g.node(i)[0]) >= 1.0) EXPECT_EQ(r1.state.u[i], 0.0);
    }
}

TEST(Solver, DirichletRejectsBadMasks) {
    const GridSpec g(1, 2.0, 81);
    EXPECT_THROW(solve_limit_dirichlet(interval(g, -1.5, -0.5), interval(g, 0.5, 1.5), 1, 1, 3, g, params()),
                 std::invalid_argument);
    EXPECT_THROW(solve_limit_dirichlet(Mask(g), interval(g, -1, 1), 1, 1, 3, g, params()), std::invalid_argument);
}

TEST(Solver, LimitRejectsNonHomogeneousPotential) {
    EXPECT_THROW(solve_limit_homogeneous(ConstantPotential{1.0}, 1, 1, 3, GridSpec(1, 4.0, 81), params()),
                 std::invalid_argument);
}

TEST(Solver, ZeroInitialStateRejected) {
    const Problem p = constant_line(1.0, 1.0, 1.0);
    SolverParams sp = params();
    sp.init = Provided{State(p.grid)};
    EXPECT_THROW(solve_system(p, sp), std::domain_error);
}

TEST(Solver, ProvidedInitialState) {
    Problem p = constant_line(1.0, 1.0, 3.0);
    p.grid = GridSpec(1, 15.0, 301);
    SolverParams sp = params(1e-8);
    sp.init = Provided{State(Field::from_function(p.grid, [](const Point& x) { return std::exp(-x[0] * x[0]); }),
                             Field::from_function(p.grid, [](const Point& x) { return std::exp(-x[0] * x[0]); }))};
    const SolveResult r = solve_system(p, sp);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.energy(), oracle::synchronized_energy(1.0, 3.0), 5e-3);
}

TEST(Solver, RestartsAreDeterministic) {
    Problem p = constant_line(1.0, 1.0, 3.0);
    p.grid = GridSpec(1, 15.0, 301);
    SolverParams sp = params(1e-8);
    sp.restarts = 2;
    sp.seed = 42;
    const SolveResult a = solve_system(p, sp);
    const SolveResult b = solve_system(p, sp);
    ASSERT_EQ(a.run_energies.size(), 3u);
    EXPECT_EQ(a.run_energies, b.run_energies);
    EXPECT_EQ(a.chosen_run, b.chosen_run);
    for (std::size_t i = 0; i < p.grid.size(); ++i) EXPECT_EQ(a.state.u[i], b.state.u[i]);
    EXPECT_FALSE(a.restarts_disagree);
    EXPECT_EQ(a.chosen_run, 0);
}

TEST(Solver, RandomInitConverges) {
    Problem p = constant_line(1.0, 1.0, 3.0);
    p.grid = GridSpec(1, 15.0, 301);
    SolverParams sp = params(1e-8);
    sp.init = RandomPositive{9};
    const SolveResult r = solve_system(p, sp);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.energy(), oracle::synchronized_energy(1.0, 3.0), 5e-3);
}

TEST(Solver, TraceObserverAndIterationCap) {
    Problem p = constant_line(1.0, 1.0, 3.0);
    p.grid = GridSpec(1, 15.0, 301);
    SolverParams sp = params(1e-14);
    sp.max_iters = 500;
    sp.record_trace = true;
    int calls = 0;
    sp.observer = [&](const State&) { ++calls; };
    sp.observe_every = 10;
    const SolveResult r = solve_system(p, sp);
    EXPECT_FALSE(r.converged);
    EXPECT_EQ(r.iterations, 500);
    ASSERT_FALSE(r.trace.empty());
    EXPECT_GT(calls, 0);
    EXPECT_LE(calls, 50);
    for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i].total_energy, r.trace[i - 1].total_energy * (1 + 1e-12));
    EXPECT_LE(r.trace.back().dt, stable_time_step(Discretization(p)) * (1 + 1e-12));
    std::ostringstream os;
    write_trace_csv(os, r.trace);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "iter,total_energy,residual_l2,t_scale,dt");
}

TEST(Solver, StableStepFormula) {
    Problem p;
    p.grid = GridSpec(2, 1.0, 11);
    p.a = ConstantPotential{3.0};
    const double h = 0.2;
    EXPECT_NEAR(stable_time_step(Discretization(p)), 0.9 * 2.0 / (8.0 / (h * h) + 3.0), 1e-15);
}
