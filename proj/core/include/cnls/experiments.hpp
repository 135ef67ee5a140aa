#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "cnls/energy.hpp"
#include "cnls/solver.hpp"

namespace cnls {

/// Blow-up exponent k = 2 / (2 + gamma).
double blowup_exponent(double gamma);

/// Energy scaling exponent k (N + 2 gamma).
double predicted_exponent(double gamma, int dim);

/// Common homogeneity degree of a and b, if both are radial or envelope potentials with the same gamma.
std::optional<double> homogeneity_degree(const Problem& p);

/**
 * Factor converting a residual tolerance stated for the rescaled profile into
 * one for the solution of the scaled problem at eps. Blow-up profiles
 * (homogeneous zeros of degree gamma) give eps^(3kγ/2 - (1-k)N/2); flat wells
 * give eps^(3 - N/2); anything else gives 1.
 */
double residual_scale(const Problem& p, double eps);

/**
 * Runs fn(0), ..., fn(count-1) on at most max_parallel threads. Results are
 * stored by index, so the output never depends on scheduling. The exception of
 * the lowest failing index is rethrown.
 */
void run_indexed(std::size_t count, int max_parallel, const std::function<void(std::size_t)>& fn);

enum class GridPolicy {
    /// template.grid is the physical box; the scaled problem at eps uses half-width L/eps, same n.
    PhysicalBox,
    /// template.grid is used unchanged for the scaled problem at every eps.
    ScaledBox,
};

struct BlowupReference {
    double gamma = 2.0;
    /// Limit ground state on the blow-up grid.
    SolveResult limit;
};

struct SweepOptions {
    GridPolicy policy = GridPolicy::PhysicalBox;
    int max_parallel = 1;
    /// Interpret params.tol_residual in rescaled units (see residual_scale).
    bool rescale_tolerance = true;
    std::optional<BlowupReference> reference;
    /// Track the empirical weighted Sobolev constant along the flow.
    bool track_sobolev = false;
};

struct SweepRecord {
    double eps = 0.0;
    /// Ground energy in physical normalization, eps^N times the scaled-problem energy.
    double c_eps = 0.0;
    /// Ground energy of the scaled problem itself.
    double c_scaled = 0.0;
    /// Running max over the sweep of ‖(u,v)‖²/(4 eps^(k(N+2γ))) in physical normalization; NaN without gamma.
    double energy_bound_m = 0.0;
    Point x_star_estimate{0.0, 0.0, 0.0};
    double blowup_l2 = 0.0;
    double blowup_h1 = 0.0;
    bool converged = false;
    bool semi_trivial = false;
    int iters = 0;
    /// Min over sampled flow states of (‖ω‖² + ‖φ‖²)-type quotient in blow-up units; NaN unless tracked.
    double sobolev_constant = 0.0;
    /// Solution in physical coordinates.
    State state{GridSpec(1, 1.0, 8)};
};

/**
 * One independent solve per eps. eps_list must be strictly decreasing and
 * positive and the template must use ProblemForm::Scaled. Records come back in
 * input order; non-convergence is recorded, not thrown.
 */
std::vector<SweepRecord> epsilon_sweep(const Problem& tmpl, const std::vector<double>& eps_list,
                                       const SolverParams& params, const SweepOptions& options = {});

struct ScalingFit {
    double gamma = 0.0;
    double k = 0.0;
    double predicted_exponent = 0.0;
    double fitted_slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    /// c_eps / eps^predicted_exponent at the smallest converged eps.
    double limit_ratio = 0.0;
    double E_W_reference = 0.0;
    std::size_t points = 0;
};

/// Least-squares fit of log c_eps against log eps over converged records (at least 3).
ScalingFit fit_scaling(const std::vector<SweepRecord>& records, double gamma, int dim,
                       double E_W_reference = 0.0);

struct BlowupDistance {
    double l2 = 0.0;
    double h1 = 0.0;
};

/**
 * Relative L² and H¹ distances between the blow-up of a physical-coordinate
 * state, A = eps^(-kγ/2), s = eps^k, and the limit ground state. The resampling
 * center is x_center shifted so that the limit's peak lines up with it.
 */
BlowupDistance blowup_compare(const State& physical, double eps, double gamma, const Point& x_center,
                              const SolveResult& limit);

struct ConcentrationReport {
    std::size_t chosen_index = 0;
    std::vector<double> E_W_values;
    Point measured{0.0, 0.0, 0.0};
    double distance = 0.0;
    double allowed = 0.0;
    bool agrees = false;
};

/// Index of the smallest E_W value; values within 1e-8 relative tie and go to the lexicographically smaller center.
std::size_t choose_site(const std::vector<Point>& centers, const std::vector<double>& E_W_values);

/**
 * Picks argmin_i E_W_values[i] (values within 1e-8 relative tie, broken by
 * lexicographic center order) and compares it with the measured peak of the
 * smallest-eps record; agreement means distance <= 2 eps^k.
 */
ConcentrationReport concentration_site(const std::vector<SweepRecord>& records, const std::vector<Point>& centers,
                                       const std::vector<double>& E_W_values, double gamma);

struct FlatwellReport {
    std::vector<SweepRecord> records;
    SolveResult dirichlet;
    double c_sigma = 0.0;
    /// eps^(N-4) c_scaled per record.
    std::vector<double> normalized_energies;
    /// Relative L² distance on Σ of eps^-1 u(x/eps) to the Dirichlet state.
    std::vector<double> distances;
    /// Same with the eps^(-1/2) prefactor; reported only.
    std::vector<double> statement_distances;
    /// ∫ (w² + z²) over nodes where both potentials sit on their plateau.
    std::vector<double> leakage;
};

/// Template potentials must both be flat wells; template.grid is the physical box.
FlatwellReport flatwell_limit(const Problem& tmpl, const std::vector<double>& eps_list, const SolverParams& params,
                              int max_parallel = 1);

struct ThresholdReport {
    double eps = 0.0;
    BetaThresholds thresholds;
    SolveResult U;
    SolveResult V;
    std::optional<SolveResult> U0;
    std::optional<SolveResult> V0;
};

/**
 * Scalar ground states U, V of p and, when both potentials vanish on nodes of
 * the grid, Dirichlet states U0, V0 on those zero sets; then the thresholds.
 */
ThresholdReport compute_thresholds(const Problem& p, const SolverParams& params);

struct SemiTrivialComparison {
    double coupled = 0.0;
    double scalar_u = 0.0;
    double scalar_v = 0.0;
    /// min(scalar_u, scalar_v) - coupled.
    double margin = 0.0;
    bool coupled_semi_trivial = false;
};

SemiTrivialComparison compare_with_semitrivial(const Problem& p, const SolverParams& params);

struct ScalingIdentity {
    double kinetic_ratio = 0.0;
    double potential_ratio = 0.0;
    double quartic_ratio = 0.0;
};

/**
 * For a pair (η, φ) on a blow-up grid, builds η_eps(z) = eps^(kγ/2) η((z - x_i)/eps^k)
 * on the physical grid and returns each physical integral (eps² ∫|∇·|², ∫a·², ∫ quartic)
 * divided by eps^(k(N+2γ)) times its blow-up counterpart with a(eps^k y + x_i)/eps^(kγ).
 */
ScalingIdentity scaling_identity_check(const State& pair, const Problem& physical, const Point& x_i, double eps,
                                       double gamma);

struct UpperBoundCheck {
    double ratio = 0.0;
    double ray_max = 0.0;
    bool holds = false;
};

/// c_eps / eps^(k(N+2γ)) <= (1 + slack) max_t J_W(t η, t φ) for a test pair on the blow-up grid.
UpperBoundCheck upper_bound_check(const SweepRecord& record, const State& test_pair, const PotentialSpec& W,
                                  double mu1, double mu2, double beta, double gamma, double slack = 0.05);

}  // namespace cnls
