#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "cnls/energy.hpp"
#include "oracles.hpp"

using namespace cnls;

namespace {

const GridSpec kLine(1, 20.0, 801);

Field on(const GridSpec& g, double (*f)(double), double amp = 1.0) {
    return Field::from_function(g, [f, amp](const Point& x) { return amp * f(x[0]); });
}

Problem line_problem(double mu1, double mu2, double beta) {
    Problem p;
    p.grid = kLine;
    p.mu1 = mu1;
    p.mu2 = mu2;
    p.beta = beta;
    return p;
}

// Hand-rolled 1D quadrature: forward differences for the kinetic term, trapezoid otherwise.
double kinetic_1d(const Field& f) {
    const double h = f.grid().spacing();
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < f.size(); ++i) s += (f[i + 1] - f[i]) * (f[i + 1] - f[i]) / h;
    return s;
}

double trapz_1d(const Field& f, double (*g)(double, double), const Field& other) {
    const double h = f.grid().spacing();
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double w = (i == 0 || i + 1 == f.size()) ? 0.5 * h : h;
        s += w * g(f[i], other[i]);
    }
    return s;
}

}  // namespace

TEST(Energy, QuarticFormZeroAndHomogeneity) {
    const Problem p = line_problem(1.0, 2.0, 0.7);
    EXPECT_EQ(quartic_form(State(kLine), p), 0.0);
    const State s(on(kLine, oracle::sech), on(kLine, oracle::sech, 0.4));
    const double f = quartic_form(s, p);
    for (double t : {0.5, 2.0}) EXPECT_NEAR(quartic_form(t * s, p), std::pow(t, 4) * f, 1e-12 * f);
}

TEST(Energy, SolitonQuartic) {
    const Problem p = line_problem(1.0, 1.0, 0.0);
    const State s(on(kLine, oracle::soliton), Field(kLine));
    EXPECT_NEAR(quartic_form(s, p), oracle::kSolitonQuartic, 1e-3);
}

TEST(Energy, ZeroState) {
    const auto e = energy(State(kLine), line_problem(1.0, 1.0, 1.0));
    EXPECT_EQ(e.total, 0.0);
    EXPECT_EQ(e.nehari_residual, 0.0);
}

TEST(Energy, SolitonEnergyAndResidual) {
    const auto e = energy(State(on(kLine, oracle::soliton), Field(kLine)), line_problem(1.0, 1.0, 5.0));
    EXPECT_NEAR(e.total, oracle::kSolitonEnergy, 2e-3);
    EXPECT_NEAR(e.nehari_residual, 0.0, 2e-3);
    EXPECT_NEAR(e.kinetic_u, oracle::kSolitonKinetic, 2e-3);
    EXPECT_NEAR(e.potential_u, 4.0, 1e-6);
}

TEST(Energy, DoublingScalesComponents) {
    const Problem p = line_problem(1.0, 3.0, 2.0);
    const State s(on(kLine, oracle::sech), on(kLine, oracle::sech, 0.5));
    const auto a = energy(s, p);
    const auto b = energy(2.0 * s, p);
    EXPECT_NEAR(b.kinetic_u, 4 * a.kinetic_u, 1e-12);
    EXPECT_NEAR(b.potential_v, 4 * a.potential_v, 1e-12);
    EXPECT_NEAR(b.quartic_u, 16 * a.quartic_u, 1e-11);
    EXPECT_NEAR(b.quartic_v, 16 * a.quartic_v, 1e-11);
    EXPECT_NEAR(b.cross, 16 * a.cross, 1e-11);
}

TEST(Energy, BreakdownMatchesHandQuadrature) {
    const Problem p = line_problem(1.0, 2.0, 3.0);
    const State s(on(kLine, oracle::sech), on(kLine, oracle::sech, 0.5));
    const auto e = energy(s, p);
    EXPECT_NEAR(e.kinetic_u, kinetic_1d(s.u), 1e-13);
    EXPECT_NEAR(e.cross, trapz_1d(s.u, [](double a, double b) { return a * a * b * b; }, s.v), 1e-13);
    EXPECT_NEAR(e.potential_v, trapz_1d(s.v, [](double a, double) { return a * a; }, s.v), 1e-13);
    EXPECT_NEAR(e.total, 0.5 * e.norm_sq() - 0.25 * e.quartic_form(), 1e-13);
}

TEST(Nehari, ScaleOfNehariStateIsOne) {
    const Problem p = line_problem(1.0, 1.0, 3.0);
    const State s(on(kLine, oracle::sech), on(kLine, oracle::sech, 0.3));
    const State on_n = nehari_scale(s, p) * s;
    EXPECT_NEAR(nehari_scale(on_n, p), 1.0, 1e-12);
    EXPECT_NEAR(nehari_scale(2.0 * s, p), 0.5 * nehari_scale(s, p), 1e-12);
}

TEST(Nehari, MatchesBisection) {
    const Problem p = line_problem(1.0, 1.0, 3.0);
    const State s(on(kLine, oracle::sech), on(kLine, oracle::sech));
    auto sq = [](double a, double) { return a * a; };
    const double norm = kinetic_1d(s.u) + kinetic_1d(s.v) + trapz_1d(s.u, sq, s.u) + trapz_1d(s.v, sq, s.v);
    const double F = trapz_1d(s.u, [](double a, double) { return a * a * a * a; }, s.u) +
                     trapz_1d(s.v, [](double a, double) { return a * a * a * a; }, s.v) +
                     6.0 * trapz_1d(s.u, [](double a, double b) { return a * a * b * b; }, s.v);
    const double t_ref = oracle::bisect([&](double t) { return t * t * norm - t * t * t * t * F; }, 1e-3, 100.0);
    EXPECT_NEAR(nehari_scale(s, p), t_ref, 1e-10);
}

TEST(Nehari, RejectsZeroState) {
    const Problem p = line_problem(1.0, 1.0, 1.0);
    EXPECT_THROW(nehari_scale(State(kLine), p), std::domain_error);
    EXPECT_THROW(quotient_J(State(kLine), p), std::domain_error);
}

TEST(Quotient, ScaleInvariantAndRayMaximum) {
    const Problem p = line_problem(1.0, 2.0, 3.0);
    const State s(on(kLine, oracle::sech), on(kLine, oracle::sech, 0.7));
    const double J = quotient_J(s, p);
    EXPECT_NEAR(quotient_J(2.0 * s, p), J, 1e-12 * J);
    EXPECT_NEAR(energy(nehari_scale(s, p) * s, p).total, J, 1e-10 * J);
    const auto [tmax, imax] = oracle::golden_max([&](double t) { return energy(t * s, p).total; }, 0.0, 10.0);
    EXPECT_NEAR(imax, J, 1e-8 * J);
    EXPECT_NEAR(tmax, nehari_scale(s, p), 1e-6);
}

TEST(Quotient, SolitonValue) {
    const State s(on(kLine, oracle::soliton), Field(kLine));
    EXPECT_NEAR(quotient_J(s, line_problem(1.0, 1.0, 0.0)), oracle::kSolitonEnergy, 2e-3);
}

TEST(Gradient, ZeroState) {
    const State g = l2_gradient(State(kLine), line_problem(1.0, 1.0, 1.0));
    for (std::size_t i = 0; i < kLine.size(); ++i) {
        EXPECT_EQ(g.u[i], 0.0);
        EXPECT_EQ(g.v[i], 0.0);
    }
}

TEST(Gradient, SolitonResidual) {
    const State g = l2_gradient(State(on(kLine, oracle::soliton), Field(kLine)), line_problem(1.0, 1.0, 0.0));
    EXPECT_LE(std::sqrt(inner(g.u, g.u) + inner(g.v, g.v)), 5e-3);
}

TEST(Gradient, MatchesCentralDifferences) {
    std::mt19937_64 rng(20240611);
    for (int trial = 0; trial < 20; ++trial) {
        const int dim = 1 + trial % 2;
        const GridSpec g(dim, 4.0, dim == 1 ? 161 : 41);
        Problem p;
        p.grid = g;
        p.mu1 = 1.0 + 0.1 * trial;
        p.mu2 = 2.0;
        p.beta = trial % 3 == 0 ? -0.5 : 1.5;
        p.form = ProblemForm::Scaled;
        p.eps = 0.5;
        EnvelopePotential env;
        env.centers = {Point{0.5, 0, 0}};
        p.a = env;
        p.b = RadialHomogeneous{2.0, 2.0, {}};
        const State s(oracle::random_bumps(g, rng), oracle::random_bumps(g, rng));
        const State d(oracle::random_bumps(g, rng), oracle::random_bumps(g, rng));
        const State G = l2_gradient(s, p);
        const double analytic = inner(G.u, d.u) + inner(G.v, d.v);
        const double fd = oracle::central_diff5(
            [&](double tau) {
                State x = s;
                x.u += tau * d.u;
                x.v += tau * d.v;
                return energy(x, p).total;
            },
            1e-3);
        EXPECT_NEAR(fd, analytic, 1e-6 * std::abs(analytic)) << "trial " << trial;
    }
}

TEST(Segregation, InteriorExample) {
    const auto r = segregation_min(1, 1, 1, 2, 1);
    EXPECT_TRUE(r.interior);
    EXPECT_EQ(r.s, 1.0);
    EXPECT_EQ(r.t, 1.0);
    EXPECT_NEAR(r.value, (1.0 + 1.0) * (1.0 + 1.0) / (1.0 + 4.0 + 1.0), 1e-15);
}

TEST(Segregation, BoundaryExample) {
    const auto r = segregation_min(1, 1, 1, 0.5, 1);
    EXPECT_FALSE(r.interior);
    EXPECT_NEAR(r.value, 1.0, 1e-15);
    const auto brute = oracle::seg_grid_search(1, 1, 1, 0.5, 1);
    EXPECT_NEAR(brute.value, 1.0, 1e-15);
    EXPECT_TRUE(brute.s == 0.0 || brute.t == 0.0);
}

TEST(Segregation, AsymmetricMinimizerLocation) {
    const auto r = segregation_min(2, 1, 1, 3, 1);
    ASSERT_TRUE(r.interior);
    EXPECT_NEAR(r.t / r.s, 5.0, 1e-14);
    EXPECT_NEAR(r.value, 7.0 / 8.0, 1e-14);
    const auto brute = oracle::seg_grid_search(2, 1, 1, 3, 1);
    EXPECT_NEAR(brute.s, 2.0, 1e-3);
    EXPECT_NEAR(brute.t, 10.0, 1e-3);
}

TEST(Segregation, AgreesWithGridSearch) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double a = u(rng), b = u(rng), c = u(rng), d = u(rng), e = u(rng);
        const auto r = segregation_min(a, b, c, d, e);
        const auto brute = oracle::seg_grid_search(a, b, c, d, e);
        EXPECT_LE(r.value, brute.value * (1 + 1e-12));
        EXPECT_NEAR(r.value, brute.value, 1e-4 * brute.value);
        EXPECT_NEAR(r.value, oracle::seg_quotient(a, b, c, d, e, r.s, r.t), 1e-12 * r.value);
    }
}

TEST(Segregation, RejectsNonPositive) {
    EXPECT_THROW(segregation_min(0, 1, 1, 1, 1), std::invalid_argument);
    EXPECT_THROW(segregation_min(1, 1, 1, -1, 1), std::invalid_argument);
}

TEST(Thresholds, SymmetricCollapseToMu) {
    const Field U = on(kLine, oracle::sech, std::sqrt(2.0 / 1.5));
    const auto t = beta_thresholds(U, U, std::nullopt, 1.5, 1.5);
    EXPECT_NEAR(t.beta0, 1.5, 1e-12);
    EXPECT_EQ(t.beta1, 1.5);
    EXPECT_FALSE(t.beta2.has_value());
    EXPECT_NEAR(t.beta_hat, 1.5, 1e-12);
}

TEST(Thresholds, ExactSolitonsAsymmetric) {
    // U = sqrt(2) sech solves mu1 = 1, V = sech solves mu2 = 2.
    const Field U = on(kLine, oracle::soliton);
    const Field V = on(kLine, oracle::sech);
    const auto t = beta_thresholds(U, V, std::nullopt, 1.0, 2.0);
    EXPECT_NEAR(t.beta0, 2.0, 1e-12);
    EXPECT_EQ(t.beta1, 2.0);
    EXPECT_NEAR(t.beta_hat, 2.0, 1e-12);
}

TEST(Thresholds, ZeroSetTermAndErrors) {
    const GridSpec g(1, 2.0, 41);
    Mask A(g), B(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.node(i)[0];
        A.set(i, x > -1.0 && x < 0.5);
        B.set(i, x > -0.5 && x < 1.0);
    }
    const Field u0 = Field::from_function(g, [](const Point& x) { return x[0] > -1 && x[0] < 0.5 ? 1.0 : 0.0; });
    const Field v0 = Field::from_function(g, [](const Point& x) { return x[0] > -0.5 && x[0] < 1 ? 2.0 : 0.0; });
    const Field U = on(g, oracle::sech);
    const auto t = beta_thresholds(U, U, ZeroSetStates{u0, v0, A, B}, 1.0, 1.0);
    ASSERT_TRUE(t.beta2.has_value());
    const double uA = integrate_masked(Field::from_function(g, [&](const Point&) { return 1.0; }), A);
    const double vB = 16.0 * integrate_masked(Field::from_function(g, [&](const Point&) { return 1.0; }), B);
    const double cross = 4.0 * integrate_masked(Field::from_function(g, [&](const Point&) { return 1.0; }), A & B);
    EXPECT_NEAR(*t.beta2, std::max(vB / cross, uA / cross), 1e-12);
    EXPECT_NEAR(t.beta_hat, std::max({t.beta0, t.beta1, *t.beta2}), 0.0);
    const Field left = Field::from_function(g, [](const Point& x) { return x[0] < 0 ? 1.0 : 0.0; });
    const Field right = Field::from_function(g, [](const Point& x) { return x[0] > 0 ? 1.0 : 0.0; });
    EXPECT_THROW(beta_thresholds(left, right, std::nullopt, 1, 1), std::domain_error);
}

TEST(Discretization, ScaledSampling) {
    Problem p;
    p.grid = GridSpec(1, 4.0, 9);
    p.form = ProblemForm::Scaled;
    p.eps = 0.5;
    p.a = RadialHomogeneous{1.0, 2.0, {}};
    const Discretization d(p);
    for (std::size_t i = 0; i < p.grid.size(); ++i) {
        const double x = 0.5 * p.grid.node(i)[0];
        EXPECT_DOUBLE_EQ(d.potential_u()[i], x * x);
        EXPECT_EQ(d.potential_v()[i], 1.0);
    }
    EXPECT_EQ(d.active_u().count(), 7u);
}

TEST(Discretization, DirichletSupports) {
    Problem p;
    p.grid = GridSpec(1, 2.0, 21);
    p.form = ProblemForm::Dirichlet;
    EXPECT_THROW(Discretization{p}, std::invalid_argument);
    Mask m(p.grid);
    for (std::size_t i = 5; i < 12; ++i) m.set(i, true);
    p.support_u = m;
    p.support_v = Mask(p.grid, true);
    const Discretization d(p);
    EXPECT_EQ(d.active_u().count(), 7u);
    EXPECT_EQ(d.active_v().count(), 19u);
    EXPECT_EQ(d.potential_u()[8], 0.0);
}

TEST(Problem, ValidateRejectsBadInput) {
    Problem p;
    p.mu1 = 0.0;
    EXPECT_THROW(validate(p), std::invalid_argument);
    p.mu1 = 1.0;
    p.eps = -1.0;
    EXPECT_THROW(validate(p), std::invalid_argument);
    p.eps = 1.0;
    p.a = ConstantPotential{-2.0};
    EXPECT_THROW(validate(p), std::invalid_argument);
}
