#include "cnls/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace cnls {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::optional<double> degree_of(const PotentialSpec& s) {
    if (const auto* r = std::get_if<RadialHomogeneous>(&s)) return r->gamma;
    if (const auto* e = std::get_if<EnvelopePotential>(&s)) return e->gamma;
    return std::nullopt;
}

bool is_flat_well(const PotentialSpec& s) { return std::holds_alternative<FlatWell>(s); }

void require_decreasing(const std::vector<double>& eps_list) {
    if (eps_list.empty()) throw std::invalid_argument("eps list is empty");
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (!(eps_list[i] > 0.0)) throw std::invalid_argument("eps values must be > 0");
        if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
            throw std::invalid_argument("eps list must be strictly decreasing");
    }
}

Field relabel(const Field& f, const GridSpec& g) {
    return Field(g, std::vector<double>(f.values().begin(), f.values().end()));
}

State relabel(const State& s, const GridSpec& g) { return State(relabel(s.u, g), relabel(s.v, g)); }

Field density(const State& s) {
    Field d(s.grid());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = s.u[i] * s.u[i] + s.v[i] * s.v[i];
    return d;
}

double sum_sq(const State& s) { return inner(s.u, s.u) + inner(s.v, s.v); }

double masked_sq_distance(const State& a, const State& b, const Mask& m) {
    double s = 0.0;
    const auto w = a.grid().weights();
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!m[i]) continue;
        const double du = a.u[i] - b.u[i];
        const double dv = a.v[i] - b.v[i];
        s += w[i] * (du * du + dv * dv);
    }
    return s;
}

double masked_sq_norm(const State& a, const Mask& m) {
    double s = 0.0;
    const auto w = a.grid().weights();
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (m[i]) s += w[i] * (a.u[i] * a.u[i] + a.v[i] * a.v[i]);
    }
    return s;
}

struct SolvePlan {
    Problem problem;
    GridSpec physical;
};

SolvePlan plan_for(const Problem& tmpl, double eps, GridPolicy policy) {
    const GridSpec& g = tmpl.grid;
    Problem p = tmpl;
    p.eps = eps;
    if (policy == GridPolicy::PhysicalBox) {
        p.grid = GridSpec(g.dim(), g.half_width() / eps, g.points_per_axis());
        return {p, g};
    }
    return {p, GridSpec(g.dim(), g.half_width() * eps, g.points_per_axis())};
}

}  // namespace

double blowup_exponent(double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
    return 2.0 / (2.0 + gamma);
}

double predicted_exponent(double gamma, int dim) { return blowup_exponent(gamma) * (dim + 2.0 * gamma); }

std::optional<double> homogeneity_degree(const Problem& p) {
    const auto ga = degree_of(p.a);
    const auto gb = degree_of(p.b);
    if (ga && gb && *ga == *gb) return ga;
    return std::nullopt;
}

double residual_scale(const Problem& p, double eps) {
    const int n = p.grid.dim();
    if (const auto gamma = homogeneity_degree(p)) {
        const double k = blowup_exponent(*gamma);
        return std::pow(eps, 1.5 * k * *gamma - 0.5 * (1.0 - k) * n);
    }
    if (is_flat_well(p.a) && is_flat_well(p.b)) return std::pow(eps, 3.0 - 0.5 * n);
    return 1.0;
}

void run_indexed(std::size_t count, int max_parallel, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, max_parallel)));
    std::vector<std::exception_ptr> errors(count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < workers; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

std::vector<SweepRecord> epsilon_sweep(const Problem& tmpl, const std::vector<double>& eps_list,
                                       const SolverParams& params, const SweepOptions& options) {
    if (tmpl.form != ProblemForm::Scaled) throw std::invalid_argument("epsilon_sweep needs a Scaled-form template");
    require_decreasing(eps_list);
    validate(tmpl);
    const auto gamma = homogeneity_degree(tmpl);
    const int dim = tmpl.grid.dim();

    std::vector<SweepRecord> records(eps_list.size());
    run_indexed(eps_list.size(), options.max_parallel, [&](std::size_t i) {
        const double eps = eps_list[i];
        const SolvePlan plan = plan_for(tmpl, eps, options.policy);
        SolverParams local = params;
        if (options.rescale_tolerance) local.tol_residual = params.tol_residual * residual_scale(tmpl, eps);

        double sobolev = kNaN;
        std::optional<Discretization> disc;
        if (options.track_sobolev) {
            disc.emplace(plan.problem);
            sobolev = std::numeric_limits<double>::infinity();
            local.observe_every = std::max(1, params.observe_every);
            local.observer = [&](const State& s) {
                const EnergyBreakdown e = energy(s, *disc);
                const double nu = e.kinetic_u + e.potential_u;
                const double nv = e.kinetic_v + e.potential_v;
                const double q = e.quartic_u / disc->mu1() + e.quartic_v / disc->mu2();
                if (q > 0.0) sobolev = std::min(sobolev, (nu * nu + nv * nv) / q);
            };
        }

        SolveResult r = solve_system(plan.problem, local);
        SweepRecord rec;
        rec.eps = eps;
        rec.c_scaled = r.energy();
        rec.c_eps = std::pow(eps, dim) * r.energy();
        rec.converged = r.converged;
        rec.semi_trivial = r.semi_trivial;
        rec.iters = r.iterations;
        rec.state = relabel(r.state, plan.physical);
        rec.x_star_estimate = peak_location(density(rec.state));
        rec.blowup_l2 = kNaN;
        rec.blowup_h1 = kNaN;
        rec.energy_bound_m = kNaN;
        rec.sobolev_constant = kNaN;
        if (gamma) {
            const double k = blowup_exponent(*gamma);
            const double scale = std::pow(eps, predicted_exponent(*gamma, dim));
            rec.energy_bound_m = 0.25 * std::pow(eps, dim) * r.breakdown.norm_sq() / scale;
            if (options.track_sobolev && std::isfinite(sobolev))
                rec.sobolev_constant = sobolev * std::pow(eps, -(2.0 * k * *gamma - (1.0 - k) * dim));
        } else if (options.track_sobolev && std::isfinite(sobolev)) {
            rec.sobolev_constant = sobolev;
        }
        if (options.reference) {
            const BlowupDistance d =
                blowup_compare(rec.state, eps, options.reference->gamma, rec.x_star_estimate, options.reference->limit);
            rec.blowup_l2 = d.l2;
            rec.blowup_h1 = d.h1;
        }
        records[i] = std::move(rec);
    });

    double running = -std::numeric_limits<double>::infinity();
    for (auto& rec : records) {
        if (std::isnan(rec.energy_bound_m)) continue;
        running = std::max(running, rec.energy_bound_m);
        rec.energy_bound_m = running;
    }
    return records;
}

ScalingFit fit_scaling(const std::vector<SweepRecord>& records, double gamma, int dim, double E_W_reference) {
    std::vector<const SweepRecord*> used;
    for (const auto& r : records) {
        if (r.converged && r.c_eps > 0.0) used.push_back(&r);
    }
    if (used.size() < 3) throw std::invalid_argument("fit_scaling needs at least 3 converged records");
    ScalingFit fit;
    fit.gamma = gamma;
    fit.k = blowup_exponent(gamma);
    fit.predicted_exponent = fit.k * (dim + 2.0 * gamma);
    fit.E_W_reference = E_W_reference;
    fit.points = used.size();

    const double n = static_cast<double>(used.size());
    double sx = 0.0, sy = 0.0;
    for (const auto* r : used) {
        sx += std::log(r->eps);
        sy += std::log(r->c_eps);
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto* r : used) {
        const double dx = std::log(r->eps) - mx;
        const double dy = std::log(r->c_eps) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("fit_scaling: eps values must differ");
    fit.fitted_slope = sxy / sxx;
    fit.intercept = my - fit.fitted_slope * mx;
    fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;

    const SweepRecord* smallest = *std::min_element(
        used.begin(), used.end(), [](const SweepRecord* a, const SweepRecord* b) { return a->eps < b->eps; });
    fit.limit_ratio = smallest->c_eps / std::pow(smallest->eps, fit.predicted_exponent);
    return fit;
}

BlowupDistance blowup_compare(const State& physical, double eps, double gamma, const Point& x_center,
                              const SolveResult& limit) {
    const GridSpec& target = limit.state.grid();
    if (physical.grid().dim() != target.dim())
        throw std::invalid_argument("blowup_compare: state and limit grids differ in dimension");
    if (!(eps > 0.0)) throw std::invalid_argument("blowup_compare: eps must be > 0");
    const double k = blowup_exponent(gamma);
    const double s = std::pow(eps, k);
    const double amplitude = std::pow(eps, -0.5 * k * gamma);
    const Point y_peak = peak_location(density(limit.state));
    Point center = x_center;
    for (std::size_t a = 0; a < 3; ++a) center[a] -= s * y_peak[a];

    const State g = resample_blowup(physical, center, s, amplitude, target);
    const Field du = g.u - limit.state.u;
    const Field dv = g.v - limit.state.v;
    const double ref_l2 = sum_sq(limit.state);
    const double ref_h1 = ref_l2 + grad_norm_sq(limit.state.u) + grad_norm_sq(limit.state.v);
    const double diff_l2 = inner(du, du) + inner(dv, dv);
    const double diff_h1 = diff_l2 + grad_norm_sq(du) + grad_norm_sq(dv);
    if (!(ref_l2 > 0.0)) throw std::invalid_argument("blowup_compare: limit state is zero");
    return {std::sqrt(diff_l2 / ref_l2), std::sqrt(diff_h1 / ref_h1)};
}

std::size_t choose_site(const std::vector<Point>& centers, const std::vector<double>& E_W_values) {
    if (centers.empty() || centers.size() != E_W_values.size())
        throw std::invalid_argument("choose_site: one E_W value per center required");
    std::size_t best = 0;
    for (std::size_t i = 1; i < centers.size(); ++i) {
        const double e = E_W_values[i];
        const double b = E_W_values[best];
        const bool tie = std::abs(e - b) <= 1e-8 * std::max(std::abs(e), std::abs(b));
        if ((!tie && e < b) || (tie && centers[i] < centers[best])) best = i;
    }
    return best;
}

ConcentrationReport concentration_site(const std::vector<SweepRecord>& records, const std::vector<Point>& centers,
                                       const std::vector<double>& E_W_values, double gamma) {
    if (records.empty()) throw std::invalid_argument("concentration_site: no records");
    if (centers.empty() || centers.size() != E_W_values.size())
        throw std::invalid_argument("concentration_site: one E_W value per center required");
    ConcentrationReport rep;
    rep.E_W_values = E_W_values;
    const std::size_t best = choose_site(centers, E_W_values);
    rep.chosen_index = best;
    const auto smallest = std::min_element(records.begin(), records.end(),
                                           [](const SweepRecord& a, const SweepRecord& b) { return a.eps < b.eps; });
    rep.measured = smallest->x_star_estimate;
    double d2 = 0.0;
    for (std::size_t a = 0; a < 3; ++a) d2 += (rep.measured[a] - centers[best][a]) * (rep.measured[a] - centers[best][a]);
    rep.distance = std::sqrt(d2);
    rep.allowed = 2.0 * std::pow(smallest->eps, blowup_exponent(gamma));
    rep.agrees = rep.distance <= rep.allowed;
    return rep;
}

FlatwellReport flatwell_limit(const Problem& tmpl, const std::vector<double>& eps_list, const SolverParams& params,
                              int max_parallel) {
    if (!is_flat_well(tmpl.a) || !is_flat_well(tmpl.b))
        throw std::invalid_argument("flatwell_limit needs flat-well potentials for a and b");
    const GridSpec& g = tmpl.grid;
    const Mask A = zero_set_mask(tmpl.a, g, 0.0) & interior_mask(g);
    const Mask B = zero_set_mask(tmpl.b, g, 0.0) & interior_mask(g);
    if (!A.any() || !B.any()) throw std::invalid_argument("flatwell_limit: a zero set contains no grid nodes");
    if (!(A & B).any()) throw std::invalid_argument("flatwell_limit: zero sets do not intersect");
    const Mask sigma = A | B;

    FlatwellReport rep;
    SweepOptions options;
    options.policy = GridPolicy::PhysicalBox;
    options.max_parallel = max_parallel;
    rep.records = epsilon_sweep(tmpl, eps_list, params, options);
    rep.dirichlet = solve_limit_dirichlet(A, B, tmpl.mu1, tmpl.mu2, tmpl.beta, g, params);
    rep.c_sigma = rep.dirichlet.energy();

    const auto& wa = std::get<FlatWell>(tmpl.a);
    const auto& wb = std::get<FlatWell>(tmpl.b);
    Mask plateau(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Point x = g.node(i);
        plateau.set(i, eval_potential(tmpl.a, x) >= wa.ramp && eval_potential(tmpl.b, x) >= wb.ramp);
    }

    const int dim = g.dim();
    const double ref = masked_sq_norm(rep.dirichlet.state, sigma);
    for (const auto& rec : rep.records) {
        const double eps = rec.eps;
        rep.normalized_energies.push_back(std::pow(eps, dim - 4.0) * rec.c_scaled);
        State w = (1.0 / eps) * rec.state;
        rep.distances.push_back(std::sqrt(masked_sq_distance(w, rep.dirichlet.state, sigma) / ref));
        State ws = std::pow(eps, -0.5) * rec.state;
        rep.statement_distances.push_back(std::sqrt(masked_sq_distance(ws, rep.dirichlet.state, sigma) / ref));
        rep.leakage.push_back(masked_sq_norm(w, plateau));
    }
    return rep;
}

ThresholdReport compute_thresholds(const Problem& p, const SolverParams& params) {
    validate(p);
    ThresholdReport rep;
    rep.eps = p.eps;
    rep.U = solve_scalar(p, Component::U, params);
    rep.V = solve_scalar(p, Component::V, params);

    const Discretization d(p);
    const Mask inner_nodes = interior_mask(p.grid);
    Mask A(p.grid), B(p.grid);
    const double tol_a = default_zero_tolerance(p.a, homogeneity_degree(p).value_or(1.0));
    const double tol_b = default_zero_tolerance(p.b, homogeneity_degree(p).value_or(1.0));
    for (std::size_t i = 0; i < p.grid.size(); ++i) {
        A.set(i, inner_nodes[i] && d.potential_u()[i] <= tol_a);
        B.set(i, inner_nodes[i] && d.potential_v()[i] <= tol_b);
    }
    std::optional<ZeroSetStates> zero;
    if (A.count() >= 3 && B.count() >= 3) {
        Problem q = p;
        q.form = ProblemForm::Dirichlet;
        q.support_u = A;
        q.support_v = B;
        rep.U0 = solve_scalar(q, Component::U, params);
        rep.V0 = solve_scalar(q, Component::V, params);
        zero = ZeroSetStates{rep.U0->state.u, rep.V0->state.v, A, B};
    }
    rep.thresholds = beta_thresholds(rep.U.state.u, rep.V.state.v, zero, p.mu1, p.mu2);
    return rep;
}

SemiTrivialComparison compare_with_semitrivial(const Problem& p, const SolverParams& params) {
    SemiTrivialComparison c;
    const SolveResult coupled = solve_system(p, params);
    c.coupled = coupled.energy();
    c.coupled_semi_trivial = coupled.semi_trivial;
    c.scalar_u = solve_scalar(p, Component::U, params).energy();
    c.scalar_v = solve_scalar(p, Component::V, params).energy();
    c.margin = std::min(c.scalar_u, c.scalar_v) - c.coupled;
    return c;
}

ScalingIdentity scaling_identity_check(const State& pair, const Problem& physical, const Point& x_i, double eps,
                                       double gamma) {
    const double k = blowup_exponent(gamma);
    const GridSpec& yg = pair.grid();
    const GridSpec& zg = physical.grid;
    if (yg.dim() != zg.dim()) throw std::invalid_argument("scaling_identity_check: dimension mismatch");
    const int dim = zg.dim();
    const double s = std::pow(eps, k);
    const double amp = std::pow(eps, 0.5 * k * gamma);
    auto lift = [&](const Field& f) {
        return Field::from_function(zg, [&](const Point& z) {
            Point y{(z[0] - x_i[0]) / s, (z[1] - x_i[1]) / s, (z[2] - x_i[2]) / s};
            return amp * interpolate(f, y);
        });
    };
    const State phys(lift(pair.u), lift(pair.v));
    const Field a_phys = sample_scaled(physical.a, zg, 1.0);
    const Field b_phys = sample_scaled(physical.b, zg, 1.0);
    const Field a_y = sample_blowup(physical.a, yg, eps, k, gamma, x_i);
    const Field b_y = sample_blowup(physical.b, yg, eps, k, gamma, x_i);

    auto weighted = [](const Field& f, const Field& pot) {
        double sum = 0.0;
        const auto w = f.grid().weights();
        for (std::size_t i = 0; i < w.size(); ++i) sum += w[i] * pot[i] * f[i] * f[i];
        return sum;
    };
    auto quart = [&](const State& st) {
        double sum = 0.0;
        const auto w = st.grid().weights();
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double u2 = st.u[i] * st.u[i], v2 = st.v[i] * st.v[i];
            sum += w[i] * (physical.mu1 * u2 * u2 + 2.0 * physical.beta * u2 * v2 + physical.mu2 * v2 * v2);
        }
        return sum;
    };
    const double factor = std::pow(eps, k * (dim + 2.0 * gamma));
    ScalingIdentity out;
    out.kinetic_ratio = eps * eps * (grad_norm_sq(phys.u) + grad_norm_sq(phys.v)) /
                        (factor * (grad_norm_sq(pair.u) + grad_norm_sq(pair.v)));
    out.potential_ratio = (weighted(phys.u, a_phys) + weighted(phys.v, b_phys)) /
                          (factor * (weighted(pair.u, a_y) + weighted(pair.v, b_y)));
    out.quartic_ratio = quart(phys) / (factor * quart(pair));
    return out;
}

UpperBoundCheck upper_bound_check(const SweepRecord& record, const State& test_pair, const PotentialSpec& W,
                                  double mu1, double mu2, double beta, double gamma, double slack) {
    Problem lim;
    lim.mu1 = mu1;
    lim.mu2 = mu2;
    lim.beta = beta;
    lim.a = W;
    lim.b = W;
    lim.grid = test_pair.grid();
    lim.form = ProblemForm::Limit;
    UpperBoundCheck c;
    c.ray_max = quotient_J(test_pair, lim);
    c.ratio = record.c_eps / std::pow(record.eps, predicted_exponent(gamma, lim.grid.dim()));
    c.holds = c.ratio <= (1.0 + slack) * c.ray_max;
    return c;
}

}  // namespace cnls
