#include "run.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "cnls/io.hpp"
#include "plotdata.hpp"

#ifndef CNLS_VERSION
#define CNLS_VERSION "unknown"
#endif

namespace cnls::cli {

namespace {

namespace fs = std::filesystem;

class NotConverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string fmt(double x) { return format_double(x); }
const char* fmt(bool b) { return b ? "true" : "false"; }

std::string fmt_point(const Point& p, int dim) {
    std::string s;
    for (int a = 0; a < dim; ++a) {
        if (a) s += ';';
        s += fmt(p[static_cast<std::size_t>(a)]);
    }
    return s;
}

void write_manifest(const RunConfig& cfg) {
    auto os = open_output(cfg.output_dir / "manifest.txt");
    os << "cnls " << CNLS_VERSION << '\n';
    os << "mode " << mode_name(cfg.mode) << '\n';
    os << "seed " << cfg.seed << '\n';
    os << "max_parallel " << cfg.max_parallel << '\n';
    os << "compiler " << __VERSION__ << '\n';
    os << "json " << NLOHMANN_JSON_VERSION_MAJOR << '.' << NLOHMANN_JSON_VERSION_MINOR << '.'
       << NLOHMANN_JSON_VERSION_PATCH << '\n';
    os << "config " << cfg.echo.dump() << '\n';
    if (!os) throw IoError("write failed: manifest.txt");
}

void write_result_csv(const fs::path& path, const SolveResult& r) {
    auto os = open_output(path);
    os << "energy,kinetic_u,potential_u,kinetic_v,potential_v,quartic_u,quartic_v,cross,nehari_residual,"
          "residual_l2,iterations,converged,semi_trivial,mass_u4,mass_v4,restarts_disagree\n";
    const auto& b = r.breakdown;
    os << fmt(b.total) << ',' << fmt(b.kinetic_u) << ',' << fmt(b.potential_u) << ',' << fmt(b.kinetic_v) << ','
       << fmt(b.potential_v) << ',' << fmt(b.quartic_u) << ',' << fmt(b.quartic_v) << ',' << fmt(b.cross) << ','
       << fmt(b.nehari_residual) << ',' << fmt(r.residual_l2) << ',' << r.iterations << ',' << fmt(r.converged)
       << ',' << fmt(r.semi_trivial) << ',' << fmt(r.mass_u4) << ',' << fmt(r.mass_v4) << ','
       << fmt(r.restarts_disagree) << '\n';
    if (!os) throw IoError("write failed: " + path.string());
}

void write_state(const fs::path& dir, const std::string& su, const std::string& sv, const State& s) {
    write_field_file(dir / (su + ".dat"), s.u);
    write_field_file(dir / (sv + ".dat"), s.v);
    emit_profiles(dir, su, s.u);
    emit_profiles(dir, sv, s.v);
}

void emit_solve(const RunConfig& cfg, const SolveResult& r, std::ostream& out) {
    write_result_csv(cfg.output_dir / "result.csv", r);
    write_state(cfg.output_dir, "u", "v", r.state);
    if (cfg.solver.record_trace) {
        auto os = open_output(cfg.output_dir / "trace.csv");
        write_trace_csv(os, r.trace);
    }
    out << "energy=" << fmt(r.energy()) << " converged=" << fmt(r.converged) << " iterations=" << r.iterations
        << " semi_trivial=" << fmt(r.semi_trivial) << '\n';
    if (cfg.strict && !r.converged) throw NotConverged("solve did not reach tol_residual");
}

struct LocalSite {
    Point center;
    RadialHomogeneous W;
};

std::vector<LocalSite> local_sites(const PotentialSpec& a) {
    std::vector<LocalSite> sites;
    if (const auto* e = std::get_if<EnvelopePotential>(&a)) {
        for (std::size_t i = 0; i < e->centers.size(); ++i) sites.push_back({e->centers[i], local_model(*e, i)});
    } else if (const auto* r = std::get_if<RadialHomogeneous>(&a)) {
        sites.push_back({r->x0, RadialHomogeneous{r->nu, r->gamma, Point{0.0, 0.0, 0.0}}});
    }
    return sites;
}

void run_sweep(const RunConfig& cfg, std::ostream& out) {
    const Problem& p = cfg.problem;
    if (p.form != ProblemForm::Scaled) throw std::invalid_argument("sweep mode needs problem.form = \"scaled\"");
    const int dim = p.grid.dim();
    const auto gamma = homogeneity_degree(p);

    SweepOptions opt;
    opt.policy = cfg.policy;
    opt.max_parallel = cfg.max_parallel;
    opt.track_sobolev = cfg.track_sobolev;

    std::vector<LocalSite> sites;
    std::vector<SolveResult> limits;
    std::vector<double> E_W;
    std::size_t chosen = 0;
    if (gamma && cfg.limit_grid) {
        sites = local_sites(p.a);
        limits.resize(sites.size());
        run_indexed(sites.size(), cfg.max_parallel, [&](std::size_t i) {
            limits[i] = solve_limit_homogeneous(sites[i].W, p.mu1, p.mu2, p.beta, *cfg.limit_grid, cfg.solver);
        });
        std::vector<Point> centers;
        for (std::size_t i = 0; i < sites.size(); ++i) {
            centers.push_back(sites[i].center);
            E_W.push_back(limits[i].energy());
        }
        chosen = choose_site(centers, E_W);
        opt.reference = BlowupReference{*gamma, limits[chosen]};
    }

    const auto records = epsilon_sweep(p, cfg.eps_list, cfg.solver, opt);

    {
        auto os = open_output(cfg.output_dir / "sweep.csv");
        os << "eps,c_eps,x_star,blowup_l2,blowup_h1,converged,iters\n";
        for (const auto& r : records) {
            os << fmt(r.eps) << ',' << fmt(r.c_eps) << ',' << fmt_point(r.x_star_estimate, dim) << ','
               << fmt(r.blowup_l2) << ',' << fmt(r.blowup_h1) << ',' << fmt(r.converged) << ',' << r.iters << '\n';
        }
        if (!os) throw IoError("write failed: sweep.csv");
    }
    {
        auto os = open_output(cfg.output_dir / "sweep_details.csv");
        os << "eps,c_eps,c_scaled,energy_bound_m,semi_trivial,sobolev_constant\n";
        for (const auto& r : records) {
            os << fmt(r.eps) << ',' << fmt(r.c_eps) << ',' << fmt(r.c_scaled) << ',' << fmt(r.energy_bound_m) << ','
               << fmt(r.semi_trivial) << ',' << fmt(r.sobolev_constant) << '\n';
        }
    }
    emit_loglog(cfg.output_dir, records);
    write_state(cfg.output_dir, "u_smallest_eps", "v_smallest_eps", records.back().state);

    std::size_t converged = 0;
    for (const auto& r : records) converged += r.converged ? 1 : 0;
    if (gamma && converged >= 3) {
        const ScalingFit fit = fit_scaling(records, *gamma, dim, limits.empty() ? 0.0 : E_W[chosen]);
        auto os = open_output(cfg.output_dir / "scaling_fits.csv");
        os << "gamma,k,predicted_exponent,fitted_slope,r_squared,limit_ratio,E_W_reference,points\n";
        os << fmt(fit.gamma) << ',' << fmt(fit.k) << ',' << fmt(fit.predicted_exponent) << ','
           << fmt(fit.fitted_slope) << ',' << fmt(fit.r_squared) << ',' << fmt(fit.limit_ratio) << ','
           << fmt(fit.E_W_reference) << ',' << fit.points << '\n';
        std::ostringstream block;
        block << "gamma=" << fmt(fit.gamma) << "\nk=" << fmt(fit.k) << "\npredicted_exponent="
              << fmt(fit.predicted_exponent) << "\nfitted_slope=" << fmt(fit.fitted_slope)
              << "\nr_squared=" << fmt(fit.r_squared) << "\nlimit_ratio=" << fmt(fit.limit_ratio)
              << "\nE_W_reference=" << fmt(fit.E_W_reference) << "\npoints=" << fit.points << '\n';
        auto summary = open_output(cfg.output_dir / "fit_summary.txt");
        summary << block.str();
        out << block.str();
    }
    if (!limits.empty()) {
        write_state(cfg.output_dir, "limit_w", "limit_phi", limits[chosen].state);
        std::vector<Point> centers;
        for (const auto& s : sites) centers.push_back(s.center);
        const ConcentrationReport rep = concentration_site(records, centers, E_W, *gamma);
        auto os = open_output(cfg.output_dir / "concentration.txt");
        os << "chosen_index=" << rep.chosen_index << '\n';
        for (std::size_t i = 0; i < E_W.size(); ++i) os << "E_W_" << i << '=' << fmt(E_W[i]) << '\n';
        os << "measured=" << fmt_point(rep.measured, dim) << "\ndistance=" << fmt(rep.distance)
           << "\nallowed=" << fmt(rep.allowed) << "\nagrees=" << fmt(rep.agrees) << '\n';
    }
    out << "records=" << records.size() << " converged=" << converged << '\n';
    if (cfg.strict && converged != records.size()) throw NotConverged("some sweep points did not converge");
}

void run_flatwell(const RunConfig& cfg, std::ostream& out) {
    const FlatwellReport rep = flatwell_limit(cfg.problem, cfg.eps_list, cfg.solver, cfg.max_parallel);
    auto os = open_output(cfg.output_dir / "flatwell.csv");
    os << "eps,c_eps,normalized_energy,c_sigma,distance,statement_distance,leakage,converged,iters\n";
    bool all = rep.dirichlet.converged;
    Curve dist;
    for (std::size_t i = 0; i < rep.records.size(); ++i) {
        const auto& r = rep.records[i];
        os << fmt(r.eps) << ',' << fmt(r.c_scaled) << ',' << fmt(rep.normalized_energies[i]) << ','
           << fmt(rep.c_sigma) << ',' << fmt(rep.distances[i]) << ',' << fmt(rep.statement_distances[i]) << ','
           << fmt(rep.leakage[i]) << ',' << fmt(r.converged) << ',' << r.iters << '\n';
        all = all && r.converged;
        dist.emplace_back(r.eps, rep.distances[i]);
    }
    if (!os) throw IoError("write failed: flatwell.csv");
    write_curve(cfg.output_dir / "flatwell_distance.dat", dist);
    write_state(cfg.output_dir, "dirichlet_w", "dirichlet_z", rep.dirichlet.state);
    out << "c_sigma=" << fmt(rep.c_sigma) << " records=" << rep.records.size() << '\n';
    if (cfg.strict && !all) throw NotConverged("some flat-well solves did not converge");
}

void run_thresholds(const RunConfig& cfg, std::ostream& out) {
    std::vector<double> eps = cfg.eps_list.empty() ? std::vector<double>{cfg.problem.eps} : cfg.eps_list;
    std::vector<ThresholdReport> reports(eps.size());
    run_indexed(eps.size(), cfg.max_parallel, [&](std::size_t i) {
        Problem p = cfg.problem;
        p.eps = eps[i];
        reports[i] = compute_thresholds(p, cfg.solver);
    });
    auto os = open_output(cfg.output_dir / "thresholds.csv");
    os << "eps,beta0,beta1,beta2,beta_hat,energy_U,energy_V,converged\n";
    double worst = 0.0;
    bool all = true;
    for (const auto& r : reports) {
        const bool conv = r.U.converged && r.V.converged && (!r.U0 || r.U0->converged) && (!r.V0 || r.V0->converged);
        all = all && conv;
        const auto& t = r.thresholds;
        os << fmt(r.eps) << ',' << fmt(t.beta0) << ',' << fmt(t.beta1) << ','
           << (t.beta2 ? fmt(*t.beta2) : std::string("nan")) << ',' << fmt(t.beta_hat) << ',' << fmt(r.U.energy())
           << ',' << fmt(r.V.energy()) << ',' << fmt(conv) << '\n';
        worst = std::max(worst, t.beta_hat);
    }
    auto summary = open_output(cfg.output_dir / "thresholds_summary.txt");
    summary << "beta_hat_max=" << fmt(worst) << "\nbeta=" << fmt(cfg.problem.beta)
            << "\nabove_threshold=" << fmt(cfg.problem.beta > worst) << '\n';
    out << "beta_hat_max=" << fmt(worst) << '\n';
    if (cfg.strict && !all) throw NotConverged("a threshold ground state did not converge");
}

void run_limit_dirichlet(const RunConfig& cfg, std::ostream& out) {
    const Problem& p = cfg.problem;
    const Mask inner = interior_mask(p.grid);
    const Mask A = zero_set_mask(p.a, p.grid, default_zero_tolerance(p.a, 1.0)) & inner;
    const Mask B = zero_set_mask(p.b, p.grid, default_zero_tolerance(p.b, 1.0)) & inner;
    const SolveResult r = solve_limit_dirichlet(A, B, p.mu1, p.mu2, p.beta, p.grid, cfg.solver);
    emit_solve(cfg, r, out);
}

int fail(std::ostream& err, int code, const char* kind, const std::string& message) {
    std::string flat = message;
    for (char& c : flat) {
        if (c == '\n') c = ' ';
    }
    err << "error code=" << code << " kind=" << kind << " message=" << flat << '\n';
    return code;
}

std::uint64_t parse_seed(const char* text) {
    std::string s(text);
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
        throw ConfigError("GPE_SEED must be a nonnegative integer");
    try {
        return std::stoull(s);
    } catch (const std::exception&) {
        throw ConfigError("GPE_SEED out of range");
    }
}

void apply_seed(RunConfig& cfg, std::uint64_t seed) {
    cfg.seed = seed;
    cfg.solver.seed = seed;
    if (std::holds_alternative<RandomPositive>(cfg.solver.init)) cfg.solver.init = RandomPositive{seed};
    cfg.echo["seed"] = seed;
}

}  // namespace

int run_config(RunConfig cfg, std::ostream& out, std::ostream& err) {
    try {
        if (cfg.mode == Mode::Selftest) {
            ensure_directory(cfg.output_dir);
            write_manifest(cfg);
            std::ostringstream report;
            const int failures = run_selftest(report, cfg.output_dir / "selftest_files");
            out << report.str();
            auto os = open_output(cfg.output_dir / "selftest.txt");
            os << report.str();
            return failures == 0 ? kOk : fail(err, kInternal, "selftest", std::to_string(failures) + " checks failed");
        }
        ensure_directory(cfg.output_dir);
        write_manifest(cfg);
        switch (cfg.mode) {
            case Mode::Solve: emit_solve(cfg, solve_system(cfg.problem, cfg.solver), out); break;
            case Mode::Scalar: emit_solve(cfg, solve_scalar(cfg.problem, cfg.component, cfg.solver), out); break;
            case Mode::LimitHomogeneous:
                emit_solve(cfg,
                           solve_limit_homogeneous(cfg.problem.a, cfg.problem.mu1, cfg.problem.mu2, cfg.problem.beta,
                                                   cfg.problem.grid, cfg.solver),
                           out);
                break;
            case Mode::LimitDirichlet: run_limit_dirichlet(cfg, out); break;
            case Mode::Thresholds: run_thresholds(cfg, out); break;
            case Mode::Sweep: run_sweep(cfg, out); break;
            case Mode::Flatwell: run_flatwell(cfg, out); break;
            case Mode::Selftest: break;
        }
        return kOk;
    } catch (const ConfigError& e) {
        return fail(err, kConfig, "config", e.what());
    } catch (const IoError& e) {
        return fail(err, kIo, "io", e.what());
    } catch (const NotConverged& e) {
        return fail(err, kNotConverged, "not_converged", e.what());
    } catch (const std::invalid_argument& e) {
        return fail(err, kPrecondition, "precondition", e.what());
    } catch (const std::domain_error& e) {
        return fail(err, kPrecondition, "precondition", e.what());
    } catch (const std::out_of_range& e) {
        return fail(err, kPrecondition, "precondition", e.what());
    } catch (const std::exception& e) {
        return fail(err, kInternal, "internal", e.what());
    }
}

int run(const fs::path& config_path, const Overrides& overrides, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = load_config(config_path);
        if (overrides.seed) {
            apply_seed(cfg, *overrides.seed);
        } else if (const char* env = std::getenv("GPE_SEED")) {
            apply_seed(cfg, parse_seed(env));
        }
        if (overrides.output_dir) {
            cfg.output_dir = *overrides.output_dir;
            cfg.echo["output_dir"] = cfg.output_dir.string();
        }
        if (overrides.strict) {
            cfg.strict = true;
            cfg.echo["strict"] = true;
        }
        if (overrides.max_parallel) {
            if (*overrides.max_parallel < 1) throw ConfigError("--max-parallel must be >= 1");
            cfg.max_parallel = *overrides.max_parallel;
            cfg.echo["max_parallel"] = cfg.max_parallel;
        }
    } catch (const ConfigError& e) {
        return fail(err, kConfig, "config", e.what());
    }
    return run_config(std::move(cfg), out, err);
}

}  // namespace cnls::cli
