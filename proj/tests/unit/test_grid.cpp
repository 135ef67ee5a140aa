#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cnls/grid.hpp"
#include "oracles.hpp"

using namespace cnls;

TEST(GridSpec, NodesAndWeights) {
    const GridSpec g(2, 1.0, 9);
    EXPECT_EQ(g.size(), 81u);
    EXPECT_DOUBLE_EQ(g.spacing(), 0.25);
    EXPECT_EQ(g.stride(0), 1u);
    EXPECT_EQ(g.stride(1), 9u);
    const auto p = g.node(g.flat({1, 3, 0}));
    EXPECT_DOUBLE_EQ(p[0], -0.75);
    EXPECT_DOUBLE_EQ(p[1], -0.25);
    EXPECT_EQ(g.index(g.flat({5, 7, 0})), (NodeIndex{5, 7, 0}));
    EXPECT_TRUE(g.is_boundary(0));
    EXPECT_TRUE(g.is_boundary(g.flat({8, 3, 0})));
    EXPECT_FALSE(g.is_boundary(g.flat({2, 2, 0})));
    EXPECT_DOUBLE_EQ(g.weight(0), 0.015625);
    EXPECT_DOUBLE_EQ(g.weight(g.flat({2, 0, 0})), 0.03125);
    EXPECT_DOUBLE_EQ(g.weight(g.flat({2, 2, 0})), 0.0625);
}

TEST(GridSpec, RejectsBadShapes) {
    EXPECT_THROW(GridSpec(0, 1.0, 5), std::invalid_argument);
    EXPECT_THROW(GridSpec(4, 1.0, 5), std::invalid_argument);
    EXPECT_THROW(GridSpec(1, -1.0, 5), std::invalid_argument);
    EXPECT_THROW(GridSpec(1, 1.0, 7), std::invalid_argument);
}

TEST(Laplacian, AnnihilatesConstants) {
    for (int dim = 1; dim <= 3; ++dim) {
        const GridSpec g(dim, 2.0, 9);
        const Field l = laplacian(Field::from_function(g, [](const Point&) { return 1.7; }));
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!g.is_boundary(i)) EXPECT_NEAR(l[i], 0.0, 1e-12);
        }
    }
}

TEST(Laplacian, ExactOnQuadratics) {
    for (int n : {11, 37, 101}) {
        const GridSpec g(1, 3.0, n);
        const Field l = laplacian(Field::from_function(g, [](const Point& x) { return x[0] * x[0]; }));
        for (int i = 1; i + 1 < n; ++i) EXPECT_NEAR(l[static_cast<std::size_t>(i)], 2.0, 1e-9);
    }
}

TEST(Laplacian, SecondOrderOnSine) {
    const double L = 2.0;
    const double w = std::numbers::pi / (2.0 * L);
    double err_prev = 0.0;
    for (int n : {41, 81, 161}) {
        const GridSpec g(1, L, n);
        const Field f = Field::from_function(g, [w](const Point& x) { return std::sin(w * x[0]); });
        const Field l = laplacian(f);
        double err = 0.0;
        for (int i = 1; i + 1 < n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            err = std::max(err, std::abs(l[k] + w * w * f[k]));
        }
        EXPECT_LE(err, w * w * w * w * g.spacing() * g.spacing() / 12.0 * 1.01);
        if (err_prev > 0.0) EXPECT_NEAR(err_prev / err, 4.0, 0.1);
        err_prev = err;
    }
}

TEST(Laplacian, ApplyMatchesAllocatingForm) {
    const GridSpec g(3, 1.0, 9);
    const Field f = Field::from_function(g, [](const Point& x) { return std::exp(-x[0] * x[0]) * (1 + x[1]) * x[2]; });
    const Field l = laplacian(f);
    std::vector<double> out(g.size());
    apply_laplacian(g, f.values(), out);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_DOUBLE_EQ(out[i], l[i]);
}

TEST(Integrate, BoxVolume) {
    for (int dim = 1; dim <= 3; ++dim) {
        const GridSpec g(dim, 1.5, 9);
        EXPECT_NEAR(integrate(Field::from_function(g, [](const Point&) { return 1.0; })), std::pow(3.0, dim), 1e-12);
    }
}

TEST(Integrate, SechSquared) {
    const GridSpec g(1, 20.0, 801);
    const double s2 = integrate(Field::from_function(g, [](const Point& x) { return std::pow(oracle::sech(x[0]), 2); }));
    EXPECT_NEAR(s2, oracle::int_sech2(20.0), 1e-8);
    EXPECT_NEAR(s2, 2.0, 1e-8);
    const double w2 =
        integrate(Field::from_function(g, [](const Point& x) { return std::pow(oracle::soliton(x[0]), 2); }));
    EXPECT_NEAR(w2, 4.0, 1e-7);
}

TEST(Integrate, MaskedSubset) {
    const GridSpec g(1, 1.0, 9);
    Mask m(g);
    m.set(4, true);
    const Field f = Field::from_function(g, [](const Point& x) { return 1.0 + x[0]; });
    EXPECT_DOUBLE_EQ(integrate_masked(f, m), 0.25);
    EXPECT_DOUBLE_EQ(integrate_masked(f, Mask(g, true)), integrate(f));
}

TEST(GradNormSq, ZeroAndHomogeneity) {
    const GridSpec g(2, 3.0, 31);
    EXPECT_EQ(grad_norm_sq(Field(g)), 0.0);
    const Field f = Field::from_function(g, [](const Point& x) { return std::exp(-x[0] * x[0] - 2 * x[1] * x[1]); });
    EXPECT_NEAR(grad_norm_sq(2.0 * f), 4.0 * grad_norm_sq(f), 1e-13 * grad_norm_sq(f));
}

TEST(GradNormSq, SolitonKinetic) {
    const GridSpec g(1, 20.0, 801);
    const Field w = Field::from_function(g, [](const Point& x) { return oracle::soliton(x[0]); });
    EXPECT_NEAR(grad_norm_sq(w), oracle::kSolitonKinetic, 2e-3);
}

TEST(GradNormSq, SummationByParts) {
    const GridSpec g(2, 2.0, 21);
    Field f = Field::from_function(g, [](const Point& x) { return std::cos(x[0]) * (4 - x[1] * x[1]) + x[0]; });
    f.zero_boundary();
    EXPECT_NEAR(grad_norm_sq(f), -inner(f, laplacian(f)), 1e-10 * grad_norm_sq(f));
}

TEST(Resample, IdentityOnSameGrid) {
    const GridSpec g(2, 2.0, 17);
    const Field f = Field::from_function(g, [](const Point& x) { return std::sin(x[0]) + x[1] * x[1]; });
    const Field r = resample_blowup(f, Point{0, 0, 0}, 1.0, 1.0, g);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(r[i], f[i], 1e-12);
}

TEST(Resample, LinearFunctionExact) {
    const GridSpec src(1, 4.0, 81);
    const Field f = Field::from_function(src, [](const Point& x) { return std::abs(x[0]); });
    const GridSpec dst(1, 2.0, 21);
    const Field r = resample_blowup(f, Point{0, 0, 0}, 2.0, 1.0, dst);
    for (std::size_t i = 0; i < dst.size(); ++i) EXPECT_NEAR(r[i], 2.0 * std::abs(dst.node(i)[0]), 1e-12);
}

TEST(Resample, ZeroOutsideSourceAndErrors) {
    const GridSpec src(1, 1.0, 11);
    const Field f = Field::from_function(src, [](const Point&) { return 1.0; });
    const GridSpec dst(1, 3.0, 13);
    const Field r = resample_blowup(f, Point{0, 0, 0}, 1.0, 1.0, dst);
    EXPECT_EQ(r[0], 0.0);
    EXPECT_EQ(r[6], 1.0);
    EXPECT_THROW(resample_blowup(f, Point{0, 0, 0}, 0.0, 1.0, dst), std::invalid_argument);
    EXPECT_THROW(resample_blowup(f, Point{2, 0, 0}, 1.0, 1.0, dst), std::invalid_argument);
}

TEST(Resample, BlowupPreservesScaledKinetic) {
    const double gamma = 2.0, k = 0.5, eps = 0.1;
    const double s = std::pow(eps, k);
    const GridSpec phys(1, 3.0, 3001);
    const Field u = Field::from_function(
        phys, [&](const Point& x) { return std::pow(eps, k * gamma / 2) * oracle::sech(x[0] / s); });
    const GridSpec blow(1, 8.0, 801);
    const Field eta = resample_blowup(u, Point{0, 0, 0}, s, std::pow(eps, -k * gamma / 2), blow);
    const double lhs = eps * eps * grad_norm_sq(u);
    const double rhs = std::pow(eps, k * (1 + 2 * gamma)) * grad_norm_sq(eta);
    EXPECT_NEAR(lhs / rhs, 1.0, 1e-2);
}

TEST(PeakLocation, RefinesOffGrid) {
    const GridSpec g(2, 2.0, 41);
    const Field f =
        Field::from_function(g, [](const Point& x) { return -(x[0] - 0.23) * (x[0] - 0.23) - (x[1] + 0.41) * (x[1] + 0.41); });
    const Point p = peak_location(f);
    EXPECT_NEAR(p[0], 0.23, 1e-12);
    EXPECT_NEAR(p[1], -0.41, 1e-12);
}

TEST(Mask, SetAlgebra) {
    const GridSpec g(1, 1.0, 9);
    Mask a(g), b(g);
    a.set(1, true);
    a.set(2, true);
    b.set(2, true);
    b.set(3, true);
    EXPECT_EQ((a & b).count(), 1u);
    EXPECT_EQ((a | b).count(), 3u);
    EXPECT_EQ(interior_mask(g).count(), 7u);
    EXPECT_EQ(interior_mask(GridSpec(2, 1.0, 9)).count(), 49u);
}
