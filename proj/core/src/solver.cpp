#include "cnls/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>

#include "cnls/io.hpp"

namespace cnls {

namespace {

constexpr double kEnergySlack = 1e-12;
constexpr double kTieTolerance = 1e-9;
constexpr double kDisagreeTolerance = 1e-6;
constexpr double kSemiTrivialRatio = 1e-6;
constexpr int kGrowAfter = 50;
constexpr int kEnergyWindow = 1000;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

double default_width(const Discretization& d, const SolverParams& params) {
    return params.init_width > 0.0 ? params.init_width : 0.1 * d.grid().half_width();
}

/// Nodes eligible to host the initial bump: active for both components if possible.
std::vector<std::size_t> host_nodes(const Discretization& d) {
    std::vector<std::size_t> both, either;
    for (std::size_t i = 0; i < d.grid().size(); ++i) {
        const bool au = d.active_u()[i];
        const bool av = d.active_v()[i];
        if (au && av) both.push_back(i);
        if (au || av) either.push_back(i);
    }
    return both.empty() ? either : both;
}

double sq_dist(const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < 3; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return s;
}

void add_bump(const Discretization& d, State& s, const Point& c, double width, double amp_u, double amp_v) {
    const double inv = 1.0 / (2.0 * width * width);
    for (std::size_t i = 0; i < d.grid().size(); ++i) {
        const double g = std::exp(-sq_dist(d.grid().node(i), c) * inv);
        if (d.active_u()[i]) s.u[i] += amp_u * g;
        if (d.active_v()[i]) s.v[i] += amp_v * g;
    }
}

State gaussian_at_min(const Discretization& d, const SolverParams& params) {
    const auto hosts = host_nodes(d);
    if (hosts.empty()) throw std::invalid_argument("no active nodes to place the initial state");
    const Point origin{0.0, 0.0, 0.0};
    std::size_t best = hosts.front();
    double best_pot = std::numeric_limits<double>::infinity();
    double best_r = std::numeric_limits<double>::infinity();
    for (std::size_t i : hosts) {
        const double pot = d.potential_u()[i] + d.potential_v()[i];
        const double r = sq_dist(d.grid().node(i), origin);
        if (pot < best_pot || (pot == best_pot && r < best_r)) {
            best = i;
            best_pot = pot;
            best_r = r;
        }
    }
    State s(d.grid());
    add_bump(d, s, d.grid().node(best), default_width(d, params), 1.0, 0.9);
    return s;
}

State random_positive(const Discretization& d, const SolverParams& params, std::uint64_t seed) {
    const auto hosts = host_nodes(d);
    if (hosts.empty()) throw std::invalid_argument("no active nodes to place the initial state");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i : hosts) {
        const double pot = d.potential_u()[i] + d.potential_v()[i];
        lo = std::min(lo, pot);
        hi = std::max(hi, pot);
    }
    const double cut = lo + 0.1 * (hi - lo);
    const double inner = 0.8 * d.grid().half_width();
    std::vector<std::size_t> low;
    for (std::size_t i : hosts) {
        const Point x = d.grid().node(i);
        bool inside = true;
        for (int a = 0; a < d.grid().dim(); ++a) inside = inside && std::abs(x[static_cast<std::size_t>(a)]) <= inner;
        if (inside && d.potential_u()[i] + d.potential_v()[i] <= cut) low.push_back(i);
    }
    if (low.empty()) low = hosts;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double width = default_width(d, params);
    State s(d.grid());
    const int bumps = 1 + static_cast<int>(rng() % 3);
    for (int b = 0; b < bumps; ++b) {
        const std::size_t node = low[static_cast<std::size_t>(rng() % low.size())];
        const double w = width * (0.5 + unit(rng));
        const double au = 0.2 + 0.8 * unit(rng);
        const double av = 0.2 + 0.8 * unit(rng);
        add_bump(d, s, d.grid().node(node), w, au, av);
    }
    return s;
}

State provided_state(const Discretization& d, const State& given) {
    if (!(given.grid() == d.grid())) throw std::invalid_argument("provided initial state is on a different grid");
    State s(d.grid());
    for (std::size_t i = 0; i < d.grid().size(); ++i) {
        if (d.active_u()[i]) s.u[i] = std::max(0.0, given.u[i]);
        if (d.active_v()[i]) s.v[i] = std::max(0.0, given.v[i]);
    }
    return s;
}

bool is_semi_trivial(double u4, double v4) {
    return std::min(u4, v4) < kSemiTrivialRatio * std::max(u4, v4);
}

/// Explicit flow on flat buffers. L = -Δ + potential, applied to active nodes only.
class Flow {
public:
    Flow(const Discretization& d, const SolverParams& params) : d_(d), params_(params) {
        const std::size_t n = d.grid().size();
        u_.assign(n, 0.0);
        v_.assign(n, 0.0);
        lu_.assign(n, 0.0);
        lv_.assign(n, 0.0);
        cu_.assign(n, 0.0);
        cv_.assign(n, 0.0);
        lcu_.assign(n, 0.0);
        lcv_.assign(n, 0.0);
        gu_.assign(n, 0.0);
        gv_.assign(n, 0.0);
        cap_ = stable_time_step(d);
    }

    SolveResult run(const State& init) {
        const std::size_t n = d_.grid().size();
        for (std::size_t i = 0; i < n; ++i) {
            u_[i] = d_.active_u()[i] ? std::max(0.0, init.u[i]) : 0.0;
            v_[i] = d_.active_v()[i] ? std::max(0.0, init.v[i]) : 0.0;
        }
        apply_operator(u_, v_, lu_, lv_);
        const double norm = norm_sq(u_, v_, lu_, lv_);
        const double quart = quartic(u_, v_);
        if (!(norm > 0.0) || !(quart > 0.0)) throw std::domain_error("initial state is zero or has F(u,v) <= 0");
        double t = std::sqrt(norm / quart);
        scale(t);
        energy_ = 0.25 * norm * t * t;

        double dt = params_.dt.value_or(cap_);
        if (!(dt > 0.0)) throw std::invalid_argument("solver dt must be positive");
        const double dt_floor = 1e-14 * dt;
        int streak = 0;
        long accepted = 0;
        int iter = 0;
        bool converged = false;
        double residual = 0.0;
        double last_t = t;
        std::vector<double> history;
        SolveResult result{State(d_.grid()), {}, 0, false, false, 0, 0, 0, 0, {}, {}, 0, false};

        for (iter = 0; iter <= params_.max_iters; ++iter) {
            residual = gradient();
            if (params_.record_trace) result.trace.push_back({iter, energy_, residual, last_t, dt});
            if (residual <= params_.tol_residual) {
                converged = true;
                break;
            }
            if (iter == params_.max_iters) break;
            if (params_.tol_energy > 0.0) {
                history.push_back(energy_);
                if (history.size() > static_cast<std::size_t>(kEnergyWindow)) {
                    const double old = history[history.size() - 1 - kEnergyWindow];
                    if (std::abs(old - energy_) <= params_.tol_energy * kEnergyWindow * std::abs(energy_)) break;
                }
            }

            for (std::size_t i = 0; i < n; ++i) {
                cu_[i] = d_.active_u()[i] ? std::max(0.0, u_[i] - dt * gu_[i]) : 0.0;
                cv_[i] = d_.active_v()[i] ? std::max(0.0, v_[i] - dt * gv_[i]) : 0.0;
            }
            apply_operator(cu_, cv_, lcu_, lcv_);
            const double cn = norm_sq(cu_, cv_, lcu_, lcv_);
            const double cf = quartic(cu_, cv_);
            bool accept = cn > 0.0 && cf > 0.0;
            double ct = 1.0;
            double ce = 0.0;
            if (accept) {
                ct = std::sqrt(cn / cf);
                ce = 0.25 * cn * ct * ct;
                accept = ce <= energy_ + kEnergySlack * std::abs(energy_);
            }
            if (!accept) {
                dt *= 0.5;
                streak = 0;
                if (dt < dt_floor) break;
                continue;
            }
            std::swap(u_, cu_);
            std::swap(v_, cv_);
            std::swap(lu_, lcu_);
            std::swap(lv_, lcv_);
            scale(ct);
            energy_ = ce;
            last_t = ct;
            if (++streak >= kGrowAfter) {
                dt = std::min(1.2 * dt, std::max(cap_, params_.dt.value_or(cap_)));
                streak = 0;
            }
            ++accepted;
            if (params_.observer && accepted % std::max(1, params_.observe_every) == 0) params_.observer(current());
        }

        result.state = current();
        result.breakdown = energy(result.state, d_);
        result.iterations = iter;
        result.converged = converged;
        result.residual_l2 = residual;
        result.final_dt = dt;
        double u4 = 0.0, v4 = 0.0;
        const auto& w = d_.weights();
        for (std::size_t i = 0; i < n; ++i) {
            u4 += w[i] * u_[i] * u_[i] * u_[i] * u_[i];
            v4 += w[i] * v_[i] * v_[i] * v_[i] * v_[i];
        }
        result.mass_u4 = u4;
        result.mass_v4 = v4;
        result.semi_trivial = is_semi_trivial(u4, v4);
        return result;
    }

private:
    State current() const { return State(Field(d_.grid(), u_), Field(d_.grid(), v_)); }

    void apply_operator(const std::vector<double>& u, const std::vector<double>& v, std::vector<double>& lu,
                        std::vector<double>& lv) const {
        apply_laplacian(d_.grid(), u, lu);
        apply_laplacian(d_.grid(), v, lv);
        const Field& pa = d_.potential_u();
        const Field& pb = d_.potential_v();
        for (std::size_t i = 0; i < u.size(); ++i) {
            lu[i] = -lu[i] + pa[i] * u[i];
            lv[i] = -lv[i] + pb[i] * v[i];
        }
    }

    double norm_sq(const std::vector<double>& u, const std::vector<double>& v, const std::vector<double>& lu,
                   const std::vector<double>& lv) const {
        const auto& w = d_.weights();
        double s = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) s += w[i] * (u[i] * lu[i] + v[i] * lv[i]);
        return s;
    }

    double quartic(const std::vector<double>& u, const std::vector<double>& v) const {
        const auto& w = d_.weights();
        const double mu1 = d_.mu1(), mu2 = d_.mu2(), beta = d_.beta();
        double s = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double u2 = u[i] * u[i];
            const double v2 = v[i] * v[i];
            s += w[i] * (mu1 * u2 * u2 + 2.0 * beta * u2 * v2 + mu2 * v2 * v2);
        }
        return s;
    }

    void scale(double t) {
        for (std::size_t i = 0; i < u_.size(); ++i) {
            u_[i] *= t;
            v_[i] *= t;
            lu_[i] *= t;
            lv_[i] *= t;
        }
    }

    /// Fills gu_, gv_ and returns the weighted L2 norm.
    double gradient() {
        const auto& w = d_.weights();
        const double mu1 = d_.mu1(), mu2 = d_.mu2(), beta = d_.beta();
        double s = 0.0;
        for (std::size_t i = 0; i < u_.size(); ++i) {
            const double u = u_[i], v = v_[i];
            gu_[i] = d_.active_u()[i] ? lu_[i] - mu1 * u * u * u - beta * v * v * u : 0.0;
            gv_[i] = d_.active_v()[i] ? lv_[i] - mu2 * v * v * v - beta * u * u * v : 0.0;
            s += w[i] * (gu_[i] * gu_[i] + gv_[i] * gv_[i]);
        }
        return std::sqrt(s);
    }

    const Discretization& d_;
    const SolverParams& params_;
    std::vector<double> u_, v_, lu_, lv_, cu_, cv_, lcu_, lcv_, gu_, gv_;
    double energy_ = 0.0;
    double cap_ = 0.0;
};

SolveResult run_with_restarts(const Discretization& d, const SolverParams& params) {
    std::vector<SolveResult> runs;
    {
        State init = std::visit(
            [&](const auto& g) -> State {
                using T = std::decay_t<decltype(g)>;
                if constexpr (std::is_same_v<T, GaussianAtMin>) return gaussian_at_min(d, params);
                else if constexpr (std::is_same_v<T, Provided>) return provided_state(d, g.state);
                else return random_positive(d, params, g.seed);
            },
            params.init);
        runs.push_back(Flow(d, params).run(init));
    }
    std::uint64_t seed = params.seed;
    for (int r = 0; r < params.restarts; ++r) {
        seed = splitmix64(seed + static_cast<std::uint64_t>(r));
        runs.push_back(Flow(d, params).run(random_positive(d, params, seed)));
    }

    int best = -1;
    bool any_nontrivial = false;
    for (const auto& r : runs) any_nontrivial = any_nontrivial || !r.semi_trivial;
    for (int i = 0; i < static_cast<int>(runs.size()); ++i) {
        const auto& r = runs[static_cast<std::size_t>(i)];
        if (any_nontrivial && r.semi_trivial) continue;
        if (best < 0) {
            best = i;
            continue;
        }
        const double cur = runs[static_cast<std::size_t>(best)].energy();
        if (r.energy() < cur - kTieTolerance * std::abs(cur)) best = i;
    }

    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    std::vector<double> energies;
    for (const auto& r : runs) {
        energies.push_back(r.energy());
        if (!r.semi_trivial && r.converged) {
            lo = std::min(lo, r.energy());
            hi = std::max(hi, r.energy());
        }
    }
    SolveResult out = std::move(runs[static_cast<std::size_t>(best)]);
    out.run_energies = std::move(energies);
    out.chosen_run = best;
    out.restarts_disagree = (hi > lo) && (hi - lo) > kDisagreeTolerance * std::abs(lo);
    return out;
}

}  // namespace

double stable_time_step(const Discretization& d) {
    const double h = d.grid().spacing();
    double vmax = 0.0;
    for (std::size_t i = 0; i < d.grid().size(); ++i) {
        if (d.active_u()[i]) vmax = std::max(vmax, d.potential_u()[i]);
        if (d.active_v()[i]) vmax = std::max(vmax, d.potential_v()[i]);
    }
    return 0.9 * 2.0 / (4.0 * d.grid().dim() / (h * h) + vmax);
}

SolveResult solve_system(const Problem& p, const SolverParams& params) {
    const Discretization d(p);
    return run_with_restarts(d, params);
}

SolveResult solve_scalar(const Problem& p, Component which, const SolverParams& params) {
    Problem q = p;
    const Mask off(p.grid, false);
    if (which == Component::U) q.support_v = off;
    else q.support_u = off;
    const Discretization d(q);
    return run_with_restarts(d, params);
}

SolveResult solve_limit_homogeneous(const PotentialSpec& W, double mu1, double mu2, double beta,
                                    const GridSpec& grid, const SolverParams& params) {
    if (!std::holds_alternative<RadialHomogeneous>(W) && !std::holds_alternative<TabulatedPotential>(W))
        throw std::invalid_argument("limit potential must be radial_homogeneous or tabulated");
    Problem p;
    p.mu1 = mu1;
    p.mu2 = mu2;
    p.beta = beta;
    p.a = W;
    p.b = W;
    p.grid = grid;
    p.form = ProblemForm::Limit;
    return solve_system(p, params);
}

SolveResult solve_limit_dirichlet(const Mask& mask_a, const Mask& mask_b, double mu1, double mu2, double beta,
                                  const GridSpec& grid, const SolverParams& params) {
    if (!(mask_a.grid() == grid) || !(mask_b.grid() == grid))
        throw std::invalid_argument("Dirichlet masks must live on the solve grid");
    const Mask inner = interior_mask(grid);
    if (!(mask_a & inner).any() || !(mask_b & inner).any())
        throw std::invalid_argument("Dirichlet masks must contain interior nodes");
    if (!(mask_a & mask_b & inner).any()) throw std::invalid_argument("Dirichlet masks do not intersect");
    Problem p;
    p.mu1 = mu1;
    p.mu2 = mu2;
    p.beta = beta;
    p.a = ConstantPotential{0.0};
    p.b = ConstantPotential{0.0};
    p.grid = grid;
    p.form = ProblemForm::Dirichlet;
    p.support_u = mask_a;
    p.support_v = mask_b;
    return solve_system(p, params);
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace) {
    os << "iter,total_energy,residual_l2,t_scale,dt\n";
    for (const auto& r : trace) {
        os << r.iter << ',' << format_double(r.total_energy) << ',' << format_double(r.residual_l2) << ','
           << format_double(r.t_scale) << ',' << format_double(r.dt) << '\n';
    }
}

}  // namespace cnls
