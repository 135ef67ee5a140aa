#include "cnls/energy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cnls {

namespace {

Field zero_potential(const GridSpec& g) { return Field(g); }

Field sample_for(const Problem& p, const PotentialSpec& spec) {
    switch (p.form) {
        case ProblemForm::Scaled: return sample_scaled(spec, p.grid, p.eps);
        case ProblemForm::Limit: return sample_scaled(spec, p.grid, 1.0);
        case ProblemForm::Dirichlet: return zero_potential(p.grid);
    }
    return zero_potential(p.grid);
}

Mask active_for(const Problem& p, const std::optional<Mask>& support) {
    Mask m = interior_mask(p.grid);
    if (support) {
        if (!(support->grid() == p.grid)) throw std::invalid_argument("support mask grid does not match problem grid");
        m = m & *support;
    }
    return m;
}

void require_grid(const State& s, const Discretization& d) {
    if (!(s.grid() == d.grid())) throw std::invalid_argument("state grid does not match problem grid");
}

double weighted_sum_sq(const Field& f, const Field& pot, const std::vector<double>& w) {
    double sum = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) sum += w[i] * pot[i] * f[i] * f[i];
    return sum;
}

}  // namespace

void validate(const Problem& p) {
    if (!(p.mu1 > 0.0)) throw std::invalid_argument("mu1 must be > 0");
    if (!(p.mu2 > 0.0)) throw std::invalid_argument("mu2 must be > 0");
    if (!(p.eps > 0.0)) throw std::invalid_argument("eps must be > 0");
    if (!std::isfinite(p.beta)) throw std::invalid_argument("beta must be finite");
    validate(p.a);
    validate(p.b);
    if (p.form == ProblemForm::Dirichlet && (!p.support_u || !p.support_v))
        throw std::invalid_argument("Dirichlet form needs support masks for both components");
}

Discretization::Discretization(const Problem& p)
    : grid_(p.grid),
      pot_u_(sample_for(p, p.a)),
      pot_v_(sample_for(p, p.b)),
      active_u_(active_for(p, p.support_u)),
      active_v_(active_for(p, p.support_v)),
      weights_(p.grid.weights()),
      mu1_(p.mu1),
      mu2_(p.mu2),
      beta_(p.beta) {
    validate(p);
}

double quartic_form(const State& s, const Discretization& d) {
    require_grid(s, d);
    const auto& w = d.weights();
    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double u2 = s.u[i] * s.u[i];
        const double v2 = s.v[i] * s.v[i];
        sum += w[i] * (d.mu1() * u2 * u2 + 2.0 * d.beta() * u2 * v2 + d.mu2() * v2 * v2);
    }
    return sum;
}

double quartic_form(const State& s, const Problem& p) { return quartic_form(s, Discretization(p)); }

double energy_norm_sq(const State& s, const Discretization& d) {
    require_grid(s, d);
    return grad_norm_sq(s.u) + weighted_sum_sq(s.u, d.potential_u(), d.weights()) + grad_norm_sq(s.v) +
           weighted_sum_sq(s.v, d.potential_v(), d.weights());
}

EnergyBreakdown energy(const State& s, const Discretization& d) {
    require_grid(s, d);
    const auto& w = d.weights();
    EnergyBreakdown e;
    e.kinetic_u = grad_norm_sq(s.u);
    e.kinetic_v = grad_norm_sq(s.v);
    e.potential_u = weighted_sum_sq(s.u, d.potential_u(), w);
    e.potential_v = weighted_sum_sq(s.v, d.potential_v(), w);
    double u4 = 0.0, v4 = 0.0, uv = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double u2 = s.u[i] * s.u[i];
        const double v2 = s.v[i] * s.v[i];
        u4 += w[i] * u2 * u2;
        v4 += w[i] * v2 * v2;
        uv += w[i] * u2 * v2;
    }
    e.quartic_u = d.mu1() * u4;
    e.quartic_v = d.mu2() * v4;
    e.cross = uv;
    e.beta = d.beta();
    e.total = 0.5 * e.norm_sq() - 0.25 * e.quartic_form();
    e.nehari_residual = e.norm_sq() - e.quartic_form();
    return e;
}

EnergyBreakdown energy(const State& s, const Problem& p) { return energy(s, Discretization(p)); }

double nehari_scale(const State& s, const Discretization& d) {
    const double norm = energy_norm_sq(s, d);
    const double f = quartic_form(s, d);
    if (!(norm > 0.0)) throw std::domain_error("nehari_scale: state is zero");
    if (!(f > 0.0)) throw std::domain_error("nehari_scale: quartic form F(u,v) <= 0");
    return std::sqrt(norm / f);
}

double nehari_scale(const State& s, const Problem& p) { return nehari_scale(s, Discretization(p)); }

double quotient_J(const State& s, const Discretization& d) {
    const double norm = energy_norm_sq(s, d);
    const double f = quartic_form(s, d);
    if (!(norm > 0.0)) throw std::domain_error("quotient_J: state is zero");
    if (!(f > 0.0)) throw std::domain_error("quotient_J: quartic form F(u,v) <= 0");
    return norm * norm / (4.0 * f);
}

double quotient_J(const State& s, const Problem& p) { return quotient_J(s, Discretization(p)); }

State l2_gradient(const State& s, const Discretization& d) {
    require_grid(s, d);
    State g(d.grid());
    apply_laplacian(d.grid(), s.u.values(), g.u.values());
    apply_laplacian(d.grid(), s.v.values(), g.v.values());
    const Field& pa = d.potential_u();
    const Field& pb = d.potential_v();
    for (std::size_t i = 0; i < d.grid().size(); ++i) {
        const double u = s.u[i];
        const double v = s.v[i];
        g.u[i] = d.active_u()[i] ? (-g.u[i] + pa[i] * u - d.mu1() * u * u * u - d.beta() * v * v * u) : 0.0;
        g.v[i] = d.active_v()[i] ? (-g.v[i] + pb[i] * v - d.mu2() * v * v * v - d.beta() * u * u * v) : 0.0;
    }
    return g;
}

State l2_gradient(const State& s, const Problem& p) { return l2_gradient(s, Discretization(p)); }

SegregationResult segregation_min(double a, double b, double c, double d, double e) {
    if (!(a > 0.0 && b > 0.0 && c > 0.0 && d > 0.0 && e > 0.0))
        throw std::invalid_argument("segregation_min: all coefficients must be > 0");
    SegregationResult r;
    const double s = b * d - a * e;
    const double t = a * d - b * c;
    if (s > 0.0 && t > 0.0) {
        r.interior = true;
        r.s = s;
        r.t = t;
        const double num = (a * s + b * t) * (a * s + b * t);
        r.value = num / (c * s * s + 2.0 * d * s * t + e * t * t);
        return r;
    }
    const double on_s = a * a / c;
    const double on_t = b * b / e;
    if (on_s <= on_t) {
        r.s = 1.0;
        r.value = on_s;
    } else {
        r.t = 1.0;
        r.value = on_t;
    }
    return r;
}

BetaThresholds beta_thresholds(const Field& U, const Field& V, const std::optional<ZeroSetStates>& zero_states,
                               double mu1, double mu2) {
    if (!(U.grid() == V.grid())) throw std::invalid_argument("beta_thresholds: U and V on different grids");
    const auto& w = U.grid().weights();
    double u4 = 0.0, v4 = 0.0, uv = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double u2 = U[i] * U[i];
        const double v2 = V[i] * V[i];
        u4 += w[i] * u2 * u2;
        v4 += w[i] * v2 * v2;
        uv += w[i] * u2 * v2;
    }
    if (!(uv > 0.0)) throw std::domain_error("beta_thresholds: ∫U²V² vanishes (disjoint supports)");

    BetaThresholds t;
    t.beta0 = std::max(mu2 * v4 / uv, mu1 * u4 / uv);
    t.beta1 = std::max(mu1, mu2);
    t.beta_hat = std::max(t.beta0, t.beta1);

    if (zero_states) {
        const ZeroSetStates& z = *zero_states;
        if (!(z.u0.grid() == z.v0.grid()) || !(z.mask_a.grid() == z.u0.grid()) || !(z.mask_b.grid() == z.u0.grid()))
            throw std::invalid_argument("beta_thresholds: zero-set states on mismatched grids");
        const Mask omega = z.mask_a & z.mask_b;
        const auto& w0 = z.u0.grid().weights();
        double a4 = 0.0, b4 = 0.0, cross = 0.0;
        for (std::size_t i = 0; i < w0.size(); ++i) {
            const double u2 = z.u0[i] * z.u0[i];
            const double v2 = z.v0[i] * z.v0[i];
            if (z.mask_a[i]) a4 += w0[i] * u2 * u2;
            if (z.mask_b[i]) b4 += w0[i] * v2 * v2;
            if (omega[i]) cross += w0[i] * u2 * v2;
        }
        if (!(cross > 0.0)) throw std::domain_error("beta_thresholds: ∫_Ω U0²V0² vanishes");
        t.beta2 = std::max(mu2 * b4 / cross, mu1 * a4 / cross);
        t.beta_hat = std::max(t.beta_hat, *t.beta2);
    }
    return t;
}

}  // namespace cnls
