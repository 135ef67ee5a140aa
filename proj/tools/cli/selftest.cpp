#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "cnls/experiments.hpp"
#include "cnls/io.hpp"
#include "plotdata.hpp"
#include "run.hpp"

namespace cnls::cli {

namespace {

struct Check {
    const char* name;
    std::function<bool()> body;
};

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

Field sech_field(const GridSpec& g, double amp) {
    return Field::from_function(g, [amp](const Point& x) { return amp / std::cosh(x[0]); });
}

double rel_l2(const Field& a, const Field& b) {
    const Field d = a - b;
    return std::sqrt(inner(d, d) / inner(b, b));
}

std::size_t count_lines(const std::filesystem::path& p) {
    std::ifstream is(p);
    return static_cast<std::size_t>(std::count(std::istreambuf_iterator<char>(is), {}, '\n'));
}

SolverParams tight(double tol) {
    SolverParams sp;
    sp.tol_residual = tol;
    sp.max_iters = 400000;
    return sp;
}

std::vector<Check> checks(const std::filesystem::path& scratch) {
    const GridSpec g1(1, 10.0, 201);
    const GridSpec g2(2, 3.0, 31);
    return {
        {"laplacian annihilates constants",
         [=] {
             const Field f = Field::from_function(g2, [](const Point&) { return 3.0; });
             const Field l = laplacian(f);
             for (std::size_t i = 0; i < g2.size(); ++i) {
                 if (!g2.is_boundary(i) && std::abs(l[i]) > 1e-9) return false;
             }
             return true;
         }},
        {"laplacian exact on x^2",
         [=] {
             const Field f = Field::from_function(g1, [](const Point& x) { return x[0] * x[0]; });
             const Field l = laplacian(f);
             for (std::size_t i = 1; i + 1 < g1.size(); ++i) {
                 if (std::abs(l[i] - 2.0) > 1e-9) return false;
             }
             return true;
         }},
        {"integrate one gives box volume",
         [=] {
             const Field f = Field::from_function(g2, [](const Point&) { return 1.0; });
             return close(integrate(f), 36.0, 1e-12);
         }},
        {"integrate zero", [=] { return integrate(Field(g1)) == 0.0; }},
        {"grad_norm_sq of zero", [=] { return grad_norm_sq(Field(g1)) == 0.0; }},
        {"grad_norm_sq quadratic homogeneity",
         [=] {
             const Field f = sech_field(g1, 1.0);
             return close(grad_norm_sq(2.0 * f), 4.0 * grad_norm_sq(f), 1e-13);
         }},
        {"resample identity on the same grid",
         [=] {
             const Field f = sech_field(g1, 1.0);
             const Field r = resample_blowup(f, Point{0, 0, 0}, 1.0, 1.0, g1);
             for (std::size_t i = 0; i < g1.size(); ++i) {
                 if (std::abs(r[i] - f[i]) > 1e-12) return false;
             }
             return true;
         }},
        {"resample of |x| with scale 2",
         [] {
             const GridSpec g(1, 4.0, 81);
             const Field f = Field::from_function(g, [](const Point& x) { return std::abs(x[0]); });
             const GridSpec t(1, 2.0, 41);
             const Field r = resample_blowup(f, Point{0, 0, 0}, 2.0, 1.0, t);
             for (std::size_t i = 0; i < t.size(); ++i) {
                 if (std::abs(r[i] - 2.0 * std::abs(t.node(i)[0])) > 1e-12) return false;
             }
             return true;
         }},
        {"radial homogeneous value and homogeneity",
         [] {
             const PotentialSpec w = RadialHomogeneous{1.0, 3.0, Point{0, 0, 0}};
             if (!close(eval_potential(w, Point{2, 0, 0}), 8.0, 1e-14)) return false;
             for (double t : {0.5, 2.0, 3.0}) {
                 if (!close(eval_potential(w, Point{2 * t, 0, 0}), t * t * t * 8.0, 1e-12)) return false;
             }
             return true;
         }},
        {"envelope values",
         [] {
             EnvelopePotential e;
             e.mu = 1.0;
             e.nu = 1.0;
             e.gamma = 2.0;
             e.centers = {Point{-1, 0, 0}, Point{1, 0, 0}};
             const PotentialSpec s = e;
             return eval_potential(s, Point{0, 0, 0}) == 1.0 && eval_potential(s, Point{1, 0, 0}) == 0.0;
         }},
        {"flat well ramp",
         [] {
             FlatWell f;
             f.zero_set = ZeroBox{Point{-1, 0, 0}, Point{1, 0, 0}};
             f.ramp = 1.0;
             f.margin = 0.5;
             const PotentialSpec s = f;
             return eval_potential(s, Point{1, 0, 0}) == 0.0 && close(eval_potential(s, Point{1.25, 0, 0}), 0.5, 1e-14) &&
                    eval_potential(s, Point{2, 0, 0}) == 1.0;
         }},
        {"constant potential samples to a constant field",
         [=] {
             const Field f = sample_scaled(ConstantPotential{2.5}, g2, 0.37);
             return std::all_of(f.values().begin(), f.values().end(), [](double v) { return v == 2.5; });
         }},
        {"radial blow-up sampling cancels eps",
         [] {
             const GridSpec g(2, 2.0, 21);
             const Point xi{0.5, -0.25, 0.0};
             const PotentialSpec w = RadialHomogeneous{1.5, 2.0, xi};
             for (double eps : {0.5, 0.1, 0.01}) {
                 const Field f = sample_blowup(w, g, eps, 0.5, 2.0, xi);
                 for (std::size_t i = 0; i < g.size(); ++i) {
                     const Point y = g.node(i);
                     if (!close(f[i], 1.5 * (y[0] * y[0] + y[1] * y[1]), 1e-12)) return false;
                 }
             }
             return true;
         }},
        {"constant potential has empty zero set",
         [=] { return !zero_set_mask(ConstantPotential{1.0}, g1, 0.5).any(); }},
        {"flat well zero set is the box",
         [] {
             FlatWell f;
             f.zero_set = ZeroBox{Point{-1, 0, 0}, Point{1, 0, 0}};
             const GridSpec g(1, 2.0, 33);
             const Mask m = zero_set_mask(f, g);
             for (std::size_t i = 0; i < g.size(); ++i) {
                 if (m[i] != (std::abs(g.coord(static_cast<int>(i))) <= 1.0)) return false;
             }
             return m.count() == 17;
         }},
        {"radial zero set is the origin node",
         [] {
             const GridSpec g(1, 1.0, 21);
             const Mask m = zero_set_mask(RadialHomogeneous{}, g);
             return m.count() == 1 && m[10];
         }},
        {"quartic form of zero", [=] {
             Problem p;
             p.grid = g1;
             return quartic_form(State(g1), p) == 0.0;
         }},
        {"energy of zero",
         [=] {
             Problem p;
             p.grid = g1;
             const auto e = energy(State(g1), p);
             return e.total == 0.0 && e.nehari_residual == 0.0;
         }},
        {"energy components under doubling",
         [=] {
             Problem p;
             p.grid = g1;
             p.beta = 2.0;
             const State s(sech_field(g1, 1.0), sech_field(g1, 0.5));
             const auto e1 = energy(s, p);
             const auto e2 = energy(2.0 * s, p);
             return close(e2.kinetic_u, 4 * e1.kinetic_u, 1e-13) && close(e2.potential_v, 4 * e1.potential_v, 1e-13) &&
                    close(e2.quartic_u, 16 * e1.quartic_u, 1e-13) && close(e2.cross, 16 * e1.cross, 1e-13);
         }},
        {"quartic form degree-4 homogeneity",
         [=] {
             Problem p;
             p.grid = g1;
             p.beta = 2.0;
             const State s(sech_field(g1, 1.0), sech_field(g1, 0.5));
             const double f = quartic_form(s, p);
             return close(quartic_form(2.0 * s, p), 16.0 * f, 1e-12) && close(quartic_form(0.5 * s, p), f / 16.0, 1e-12);
         }},
        {"nehari scale halves when the state doubles",
         [=] {
             Problem p;
             p.grid = g1;
             p.beta = 3.0;
             const State s(sech_field(g1, 1.0), sech_field(g1, 1.0));
             const double t = nehari_scale(s, p);
             return close(nehari_scale(2.0 * s, p), 0.5 * t, 1e-12) && close(nehari_scale(t * s, p), 1.0, 1e-12);
         }},
        {"quotient J is scale invariant",
         [=] {
             Problem p;
             p.grid = g1;
             p.beta = 3.0;
             const State s(sech_field(g1, 1.0), sech_field(g1, 0.7));
             return close(quotient_J(2.0 * s, p), quotient_J(s, p), 1e-12);
         }},
        {"ray maximum equals J",
         [=] {
             Problem p;
             p.grid = g1;
             p.beta = 3.0;
             const State s(sech_field(g1, 1.0), sech_field(g1, 0.6));
             return close(energy(nehari_scale(s, p) * s, p).total, quotient_J(s, p), 1e-10);
         }},
        {"gradient of zero",
         [=] {
             Problem p;
             p.grid = g1;
             const State gr = l2_gradient(State(g1), p);
             return inner(gr.u, gr.u) == 0.0 && inner(gr.v, gr.v) == 0.0;
         }},
        {"segregation interior example",
         [] {
             const auto r = segregation_min(1, 1, 1, 2, 1);
             return r.interior && r.s == 1.0 && r.t == 1.0 && close(r.value, 2.0 / 3.0, 1e-14);
         }},
        {"symmetric thresholds collapse to mu",
         [=] {
             const Field U = sech_field(g1, std::sqrt(2.0));
             const auto t = beta_thresholds(U, U, std::nullopt, 1.5, 1.5);
             return close(t.beta0, 1.5, 1e-14) && close(t.beta1, 1.5, 0.0) && close(t.beta_hat, 1.5, 1e-14);
         }},
        {"zero initial state rejected",
         [=] {
             Problem p;
             p.grid = g1;
             SolverParams sp;
             sp.init = Provided{State(g1)};
             try {
                 solve_system(p, sp);
             } catch (const std::domain_error&) {
                 return true;
             }
             return false;
         }},
        {"ground state scales as mu^-1/2",
         [] {
             Problem p;
             p.grid = GridSpec(1, 10.0, 201);
             const SolveResult r1 = solve_scalar(p, Component::U, tight(1e-11));
             p.mu1 = 4.0;
             const SolveResult r4 = solve_scalar(p, Component::U, tight(1e-11));
             for (std::size_t i = 0; i < p.grid.size(); ++i) {
                 if (std::abs(r4.state.u[i] - 0.5 * r1.state.u[i]) > 1e-6) return false;
             }
             return true;
         }},
        {"radial limit with equal mu is synchronized",
         [] {
             const SolveResult r =
                 solve_limit_homogeneous(RadialHomogeneous{}, 1.0, 1.0, 3.0, GridSpec(1, 6.0, 121), tight(1e-11));
             return rel_l2(r.state.u, r.state.v) <= 1e-6;
         }},
        {"symmetric Dirichlet masks give w = z",
         [] {
             const GridSpec g(1, 2.0, 81);
             Mask m(g);
             for (std::size_t i = 0; i < g.size(); ++i) m.set(i, std::abs(g.node(i)[0]) < 1.0);
             const SolveResult r = solve_limit_dirichlet(m, m, 1.0, 1.0, 3.0, g, tight(1e-11));
             return rel_l2(r.state.u, r.state.v) <= 1e-6;
         }},
        {"disjoint Dirichlet masks rejected",
         [] {
             const GridSpec g(1, 2.0, 81);
             Mask a(g), b(g);
             for (std::size_t i = 0; i < g.size(); ++i) {
                 const double x = g.node(i)[0];
                 a.set(i, x < -0.5 && x > -1.5);
                 b.set(i, x > 0.5 && x < 1.5);
             }
             try {
                 solve_limit_dirichlet(a, b, 1.0, 1.0, 3.0, g, SolverParams{});
             } catch (const std::invalid_argument&) {
                 return true;
             }
             return false;
         }},
        {"sweep returns one record per eps in order",
         [] {
             Problem p;
             p.grid = GridSpec(1, 10.0, 101);
             p.form = ProblemForm::Scaled;
             p.beta = 3.0;
             SweepOptions o;
             o.policy = GridPolicy::ScaledBox;
             const std::vector<double> eps{1.0, 0.5, 0.25};
             const auto recs = epsilon_sweep(p, eps, tight(1e-6), o);
             return recs.size() == 3 && recs[0].eps == 1.0 && recs[1].eps == 0.5 && recs[2].eps == 0.25;
         }},
        {"blow-up distance of a state to itself",
         [=] {
             SolveResult limit;
             limit.state = State(sech_field(g1, 1.0), sech_field(g1, 0.5));
             const Point peak = peak_location(limit.state.u);
             const BlowupDistance d = blowup_compare(limit.state, 1.0, 2.0, peak, limit);
             return d.l2 <= 1e-10 && d.h1 <= 1e-10;
         }},
        {"single center is chosen",
         [] { return choose_site({Point{0.3, 0, 0}}, {0.7}) == 0; }},
        {"tied sites go to the lexicographically smaller center",
         [] { return choose_site({Point{1, 0, 0}, Point{-1, 0, 0}}, {0.5, 0.5 * (1 + 1e-10)}) == 1; }},
        {"log-log data has one row per record",
         [=] {
             std::vector<SweepRecord> recs(3);
             for (std::size_t i = 0; i < 3; ++i) {
                 recs[i].eps = std::pow(0.5, static_cast<double>(i + 1));
                 recs[i].c_eps = std::pow(recs[i].eps, 2.5);
             }
             return count_lines(emit_loglog(scratch, recs)) == 3;
         }},
        {"empty record list rejected",
         [=] {
             try {
                 emit_loglog(scratch, {});
             } catch (const std::invalid_argument&) {
                 return true;
             }
             return false;
         }},
        {"profile files per axis",
         [=] {
             const auto one = emit_profiles(scratch, "p1", sech_field(g1, 1.0));
             const auto two = emit_profiles(scratch, "p2", Field::from_function(g2, [](const Point& x) {
                                                return std::exp(-x[0] * x[0] - x[1] * x[1]);
                                            }));
             return one.size() == 1 && two.size() == 2;
         }},
        {"scaling fit on exact power law",
         [] {
             std::vector<SweepRecord> recs;
             for (double e : {0.4, 0.2, 0.1, 0.05}) {
                 SweepRecord r;
                 r.eps = e;
                 r.c_eps = 7.0 * std::pow(e, 2.5);
                 r.converged = true;
                 recs.push_back(r);
             }
             const ScalingFit fit = fit_scaling(recs, 2.0, 1);
             return close(fit.fitted_slope, 2.5, 1e-10) && close(fit.r_squared, 1.0, 1e-10);
         }},
        {"predicted exponent for gamma 2 in 1D",
         [] { return close(blowup_exponent(2.0), 0.5, 0.0) && close(predicted_exponent(2.0, 1), 2.5, 1e-15); }},
    };
}

}  // namespace

int run_selftest(std::ostream& out, const std::filesystem::path& scratch_dir) {
    ensure_directory(scratch_dir);
    const auto list = checks(scratch_dir);
    int passed = 0;
    for (const auto& c : list) {
        bool ok = false;
        try {
            ok = c.body();
        } catch (const std::exception&) {
            ok = false;
        }
        out << (ok ? "ok   " : "FAIL ") << c.name << '\n';
        passed += ok ? 1 : 0;
    }
    out << "PASS " << passed << '/' << list.size() << '\n';
    return static_cast<int>(list.size()) - passed;
}

}  // namespace cnls::cli
