#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library except to read grid coordinates.

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "cnls/grid.hpp"

namespace oracle {

inline double sech(double x) { return 1.0 / std::cosh(x); }

/// Cubic soliton of -w'' + w = w^3.
inline double soliton(double x) { return std::sqrt(2.0) * sech(x); }

/// ∫_{-L}^{L} sech² = 2 tanh L.
inline double int_sech2(double L) { return 2.0 * std::tanh(L); }

/// ∫_{-L}^{L} sech⁴ = 2 (tanh L - tanh³ L / 3).
inline double int_sech4(double L) {
    const double t = std::tanh(L);
    return 2.0 * (t - t * t * t / 3.0);
}

/// Whole-line values for the soliton: ∫w'² = 4/3, ∫w² = 4, ∫w⁴ = 16/3, energy 4/3.
constexpr double kSolitonKinetic = 4.0 / 3.0;
constexpr double kSolitonEnergy = 4.0 / 3.0;
constexpr double kSolitonQuartic = 16.0 / 3.0;

/// Ground energy of the synchronized pair u = v = w / sqrt(mu + beta).
inline double synchronized_energy(double mu, double beta) { return 8.0 / (3.0 * (mu + beta)); }

/// Root of f on [lo, hi] by bisection, assuming a sign change.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
    double flo = f(lo);
    for (int i = 0; i < iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Maximizer of a unimodal function on [lo, hi] by golden-section search.
inline std::pair<double, double> golden_max(const std::function<double(double)>& f, double lo, double hi,
                                            int iters = 200) {
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters; ++i) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        }
    }
    const double x = 0.5 * (lo + hi);
    return {x, f(x)};
}

/// Quotient (a s + b t)² / (c s² + 2 d s t + e t²).
inline double seg_quotient(double a, double b, double c, double d, double e, double s, double t) {
    const double n = a * s + b * t;
    return n * n / (c * s * s + 2.0 * d * s * t + e * t * t);
}

struct GridMin {
    double s = 0.0;
    double t = 0.0;
    double value = std::numeric_limits<double>::infinity();
};

/**
 * Grid search of the quotient over [0, side]² with the given step. The
 * quotient is constant along rays, so every grid direction is represented on
 * the outer edges {s = side} ∪ {t = side}, which are searched instead.
 */
inline GridMin seg_grid_search(double a, double b, double c, double d, double e, double side = 10.0,
                               double step = 1e-3) {
    GridMin best;
    const long n = std::lround(side / step);
    for (long i = 0; i <= n; ++i) {
        const double x = static_cast<double>(i) * step;
        for (const auto& [s, t] : {std::pair{side, x}, std::pair{x, side}}) {
            const double q = seg_quotient(a, b, c, d, e, s, t);
            if (q < best.value) best = {s, t, q};
        }
    }
    return best;
}

/// Smooth bump (1 - r²/R²)³ centered at c, zero outside radius R.
inline double bump(const cnls::Point& x, const cnls::Point& c, double R) {
    double r2 = 0.0;
    for (int a = 0; a < 3; ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
    const double q = 1.0 - r2 / (R * R);
    return q > 0.0 ? q * q * q : 0.0;
}

/// Random positive field: a few bumps with centers in [-spread L, spread L]^dim.
inline cnls::Field random_bumps(const cnls::GridSpec& g, std::mt19937_64& rng, double spread = 0.4) {
    const double L = g.half_width();
    std::uniform_real_distribution<double> pos(-spread * L, spread * L), amp(0.3, 2.0), rad(0.2 * L, 0.5 * L);
    std::uniform_int_distribution<int> count(1, 3);
    const int m = count(rng);
    std::vector<std::pair<cnls::Point, std::pair<double, double>>> bumps;
    for (int i = 0; i < m; ++i) {
        cnls::Point c{0, 0, 0};
        for (int a = 0; a < g.dim(); ++a) c[a] = pos(rng);
        bumps.push_back({c, {amp(rng), rad(rng)}});
    }
    return cnls::Field::from_function(g, [&](const cnls::Point& x) {
        double v = 0.0;
        for (const auto& [c, ar] : bumps) v += ar.first * bump(x, c, ar.second);
        return v;
    });
}

/// Even random positive field f(x) + f(-x) with bumps near the origin; the flow keeps it centered.
inline cnls::Field even_random_bumps(const cnls::GridSpec& g, std::mt19937_64& rng) {
    const cnls::Field f = random_bumps(g, rng, 0.05);
    cnls::Field out(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        cnls::NodeIndex idx = g.index(i);
        for (int a = 0; a < g.dim(); ++a) idx[a] = g.points_per_axis() - 1 - idx[a];
        out[i] = f[i] + f[g.flat(idx)];
    }
    return out;
}

/// Five-point central difference of f at 0; exact (up to rounding) for polynomials of degree <= 4.
inline double central_diff5(const std::function<double(double)>& f, double tau) {
    return (-f(2 * tau) + 8 * f(tau) - 8 * f(-tau) + f(-2 * tau)) / (12 * tau);
}

/// Relative L² distance ‖a - b‖ / ‖b‖ with plain node sums (uniform grids).
inline double rel_l2(const cnls::Field& a, const cnls::Field& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return std::sqrt(num / den);
}

}  // namespace oracle
