#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "cnls/grid.hpp"

namespace cnls {

/// a(x) = tau.
struct ConstantPotential {
    double tau = 0.0;
};

/// a(x) = nu * |x - x0|^gamma.
struct RadialHomogeneous {
    double nu = 1.0;
    double gamma = 2.0;
    Point x0{0.0, 0.0, 0.0};
};

/**
 * a(x) = min{ mu, nu_1 |x - c_1|^gamma, ..., nu_l |x - c_l|^gamma }.
 *
 * `center_nu` optionally gives one coefficient per center; empty means every
 * center uses `nu`.
 */
struct EnvelopePotential {
    double mu = 1.0;
    double nu = 1.0;
    double gamma = 2.0;
    std::vector<Point> centers;
    std::vector<double> center_nu;

    double coefficient(std::size_t i) const { return center_nu.empty() ? nu : center_nu[i]; }
};

struct ZeroBox {
    Point lo{0.0, 0.0, 0.0};
    Point hi{0.0, 0.0, 0.0};
};

struct ZeroBall {
    Point center{0.0, 0.0, 0.0};
    double radius = 1.0;
};

/// a(x) = ramp * min(1, dist(x, Z) / margin); zero exactly on Z.
struct FlatWell {
    std::variant<ZeroBox, ZeroBall> zero_set;
    double ramp = 1.0;
    double margin = 1.0;
};

/// Values on a grid, multilinearly interpolated.
struct TabulatedPotential {
    Field values;
};

using PotentialSpec =
    std::variant<ConstantPotential, RadialHomogeneous, EnvelopePotential, FlatWell, TabulatedPotential>;

/// Throws std::invalid_argument when a parameter is out of range.
void validate(const PotentialSpec& spec);

/// Distance from x to the zero set of a flat well.
double distance_to_zero_set(const FlatWell& well, const Point& x);

/// Evaluates the potential at x. Tabulated potentials throw std::out_of_range outside their box.
double eval_potential(const PotentialSpec& spec, const Point& x);

/// Field of spec(sigma * x_node).
Field sample_scaled(const PotentialSpec& spec, const GridSpec& grid, double sigma);

/// Field of spec(eps^k * x_node + x_i) / eps^(k*gamma).
Field sample_blowup(const PotentialSpec& spec, const GridSpec& grid, double eps, double k, double gamma,
                    const Point& x_i);

/// Nodes where spec(x_node) <= tol.
Mask zero_set_mask(const PotentialSpec& spec, const GridSpec& grid, double tol = 0.0);

/// 0 for symbolic potentials; h_tab^gamma for tabulated ones.
double default_zero_tolerance(const PotentialSpec& spec, double gamma);

/**
 * Local gamma-homogeneous model nu_i |y|^gamma of an envelope at center i,
 * expressed around the origin.
 */
RadialHomogeneous local_model(const EnvelopePotential& env, std::size_t i);

/**
 * Finite-difference estimate of sup_{|z-x|=r} |a(z) - W(z-x)| / r^gamma for
 * each radius (sampled along the coordinate directions and diagonals).
 * A sequence tending to 0 is the numerical signature of a homogeneous
 * contact of order gamma at x.
 */
std::vector<double> homogeneous_contact_quotients(const PotentialSpec& a, const Point& x,
                                                  const RadialHomogeneous& model, int dim,
                                                  const std::vector<double>& radii);

}  // namespace cnls
