#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <variant>
#include <vector>

#include "cnls/energy.hpp"

namespace cnls {

/// Both components as Gaussians at the minimum of a+b, amplitudes 1.0 and 0.9.
struct GaussianAtMin {};
/// Caller-supplied initial state.
struct Provided {
    State state{GridSpec(1, 1.0, 8)};
};
/// Random positive sum of Gaussian bumps placed in the low-potential region.
struct RandomPositive {
    std::uint64_t seed = 0;
};

using InitialGuess = std::variant<GaussianAtMin, Provided, RandomPositive>;

/// One row of the per-iteration trace.
struct TraceRow {
    int iter = 0;
    double total_energy = 0.0;
    double residual_l2 = 0.0;
    double t_scale = 1.0;
    double dt = 0.0;
};

struct SolverParams {
    /// Flow step; defaults to the explicit stability bound.
    std::optional<double> dt;
    int max_iters = 200000;
    /// Convergence when the L2 norm of the Euler-Lagrange residual drops below this.
    double tol_residual = 1e-8;
    /// If > 0, stop early (unconverged) once the relative energy decrease over
    /// 1000 iterations falls below 1000 * tol_energy.
    double tol_energy = 0.0;
    InitialGuess init = GaussianAtMin{};
    /// Extra randomized positive restarts, seeded from `seed`.
    int restarts = 0;
    std::uint64_t seed = 0;
    /// Gaussian width of the initial guess; 0 picks 10% of the box half-width.
    double init_width = 0.0;
    bool record_trace = false;
    /// Called on every `observe_every`-th accepted state (after projection).
    std::function<void(const State&)> observer;
    int observe_every = 1;
};

struct SolveResult {
    State state{GridSpec(1, 1.0, 8)};
    EnergyBreakdown breakdown;
    int iterations = 0;
    bool converged = false;
    bool semi_trivial = false;
    /// (∫u⁴, ∫v⁴).
    double mass_u4 = 0.0;
    double mass_v4 = 0.0;
    double residual_l2 = 0.0;
    double final_dt = 0.0;
    std::vector<TraceRow> trace;
    /// Energies of every run (default init first, then restarts).
    std::vector<double> run_energies;
    /// Index into run_energies of the returned run.
    int chosen_run = 0;
    /// Set when nontrivial runs disagree in energy by more than 1e-6 relative.
    bool restarts_disagree = false;

    double energy() const { return breakdown.total; }
};

/// Stability bound 0.9 * 2 / (4 dim / h² + max potential) of the explicit flow.
double stable_time_step(const Discretization& d);

/**
 * Nehari-projected gradient flow for the coupled system.
 *
 * Iterates s <- max(0, s - dt·G(s)) followed by s <- t(s)·s with t the Nehari
 * scale. A step that raises the projected energy by more than 1e-12 relative
 * is rejected and dt is halved; after 50 accepted steps dt grows by 1.2 up to
 * the stability bound. Among the default run and the restarts, the
 * lowest-energy nontrivial result is returned (ties within 1e-9 relative go to
 * the earlier run); if every run is semi-trivial the best one is returned with
 * semi_trivial set.
 *
 * Throws std::domain_error when the initial state is zero.
 */
SolveResult solve_system(const Problem& p, const SolverParams& params);

enum class Component { U, V };

/// Ground state of one scalar equation; the other component is held at 0.
SolveResult solve_scalar(const Problem& p, Component which, const SolverParams& params);

/// Ground state (w, phi) of the limit system with potential W on both components.
SolveResult solve_limit_homogeneous(const PotentialSpec& W, double mu1, double mu2, double beta,
                                    const GridSpec& grid, const SolverParams& params);

/**
 * Ground state (w, z) of the Dirichlet system on the masks: u vanishes outside
 * mask_a and v outside mask_b. Throws std::invalid_argument for empty masks or
 * an empty intersection.
 */
SolveResult solve_limit_dirichlet(const Mask& mask_a, const Mask& mask_b, double mu1, double mu2, double beta,
                                  const GridSpec& grid, const SolverParams& params);

/// Writes `iter,total_energy,residual_l2,t_scale,dt` rows.
void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace);

}  // namespace cnls
