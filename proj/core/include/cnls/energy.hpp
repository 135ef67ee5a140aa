#pragma once

#include <optional>

#include "cnls/grid.hpp"
#include "cnls/potential.hpp"

namespace cnls {

/// How the potentials enter the functional.
enum class ProblemForm {
    Scaled,     ///< coefficients a(eps x), b(eps x)
    Limit,      ///< coefficients a(x), b(x); eps unused
    Dirichlet,  ///< zero potential, supports restricted to masks
};

/**
 * One instance of the coupled cubic system
 *   -Δu + a u = mu1 u^3 + beta v^2 u,
 *   -Δv + b v = mu2 v^3 + beta u^2 v
 * on a truncated box. beta is not checked against the coupling thresholds;
 * sub-threshold runs are allowed.
 */
struct Problem {
    double mu1 = 1.0;
    double mu2 = 1.0;
    double beta = 0.0;
    double eps = 1.0;
    PotentialSpec a = ConstantPotential{1.0};
    PotentialSpec b = ConstantPotential{1.0};
    GridSpec grid{1, 10.0, 201};
    ProblemForm form = ProblemForm::Limit;
    /// Dirichlet supports of u and v (required for ProblemForm::Dirichlet, ignored otherwise).
    std::optional<Mask> support_u;
    std::optional<Mask> support_v;
};

/// Throws std::invalid_argument if mu1, mu2, eps or the potentials are out of range.
void validate(const Problem& p);

/**
 * Sampled coefficients and active node sets of a Problem.
 *
 * The E-norm and every Nehari quantity use these sampled potentials, so the
 * algebra (projection scale, quotient, ray maximum) is exact at the discrete
 * level.
 */
class Discretization {
public:
    explicit Discretization(const Problem& p);

    const GridSpec& grid() const { return grid_; }
    const Field& potential_u() const { return pot_u_; }
    const Field& potential_v() const { return pot_v_; }
    /// Interior nodes intersected with the component's support.
    const Mask& active_u() const { return active_u_; }
    const Mask& active_v() const { return active_v_; }
    const std::vector<double>& weights() const { return weights_; }

    double mu1() const { return mu1_; }
    double mu2() const { return mu2_; }
    double beta() const { return beta_; }

private:
    GridSpec grid_;
    Field pot_u_;
    Field pot_v_;
    Mask active_u_;
    Mask active_v_;
    std::vector<double> weights_;
    double mu1_, mu2_, beta_;
};

struct EnergyBreakdown {
    double kinetic_u = 0.0;    ///< ∫|∇u|²
    double potential_u = 0.0;  ///< ∫a u²
    double kinetic_v = 0.0;
    double potential_v = 0.0;
    double quartic_u = 0.0;  ///< mu1 ∫u⁴
    double quartic_v = 0.0;  ///< mu2 ∫v⁴
    double cross = 0.0;      ///< ∫u²v² (unweighted by beta)
    double beta = 0.0;
    double total = 0.0;
    double nehari_residual = 0.0;  ///< ‖(u,v)‖²_E - F(u,v)

    double norm_sq() const { return kinetic_u + potential_u + kinetic_v + potential_v; }
    double quartic_form() const { return quartic_u + 2.0 * beta * cross + quartic_v; }
};

/// F(u,v) = ∫ mu1 u⁴ + 2 beta u²v² + mu2 v⁴.
double quartic_form(const State& s, const Problem& p);
double quartic_form(const State& s, const Discretization& d);

/// ‖(u,v)‖²_E with the sampled potentials.
double energy_norm_sq(const State& s, const Discretization& d);

EnergyBreakdown energy(const State& s, const Problem& p);
EnergyBreakdown energy(const State& s, const Discretization& d);

/**
 * Unique t > 0 with t·s on the Nehari manifold: t = sqrt(‖s‖²_E / F(s)).
 * Throws std::domain_error if s = 0 or F(s) <= 0.
 */
double nehari_scale(const State& s, const Problem& p);
double nehari_scale(const State& s, const Discretization& d);

/// J(s) = ‖s‖⁴_E / (4 F(s)); invariant under s -> t s. Same errors as nehari_scale.
double quotient_J(const State& s, const Problem& p);
double quotient_J(const State& s, const Discretization& d);

/// Euler-Lagrange residual (−Δu + a u − mu1 u³ − beta v² u, ...) at every node.
State l2_gradient(const State& s, const Problem& p);
State l2_gradient(const State& s, const Discretization& d);

struct SegregationResult {
    bool interior = false;
    double s = 0.0;
    double t = 0.0;
    double value = 0.0;
};

/**
 * Minimum over the closed quadrant (s,t) >= 0, (s,t) != 0 of
 *   (a s + b t)² / (c s² + 2 d s t + e t²).
 * The minimum is interior iff ad - bc > 0 and bd - ae > 0, and is then attained
 * at (s, t) = (bd - ae, ad - bc). Otherwise it sits on the axis with the smaller
 * of a²/c and b²/e, reported as (1, 0) or (0, 1).
 * Throws std::invalid_argument unless all inputs are > 0.
 */
SegregationResult segregation_min(double a, double b, double c, double d, double e);

struct BetaThresholds {
    double beta0 = 0.0;
    double beta1 = 0.0;
    /// Absent when the potentials have no zero set on the grid.
    std::optional<double> beta2;
    double beta_hat = 0.0;
};

/// Dirichlet ground states on the zero sets A, B with masks A, B and Omega = A ∩ B.
struct ZeroSetStates {
    Field u0;
    Field v0;
    Mask mask_a;
    Mask mask_b;
};

/**
 * Coupling thresholds from scalar ground states U, V (and, if present, the
 * Dirichlet states U0, V0 on the zero sets):
 *   beta0 = max(mu2 ∫V⁴ / ∫U²V², mu1 ∫U⁴ / ∫U²V²),
 *   beta1 = max(mu1, mu2),
 *   beta2 = max(mu2 ∫_B V0⁴ / ∫_Ω U0²V0², mu1 ∫_A U0⁴ / ∫_Ω U0²V0²),
 *   beta_hat = max of those present.
 * Throws std::domain_error when a cross integral vanishes.
 */
BetaThresholds beta_thresholds(const Field& U, const Field& V, const std::optional<ZeroSetStates>& zero_states,
                               double mu1, double mu2);

}  // namespace cnls
