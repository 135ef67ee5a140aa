#include "cnls/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cnls {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double distance(const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < 3; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

bool finite(const Point& p) { return std::isfinite(p[0]) && std::isfinite(p[1]) && std::isfinite(p[2]); }

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

void validate(const PotentialSpec& spec) {
    std::visit(overloaded{
                   [](const ConstantPotential& p) {
                       require(p.tau >= 0.0 && std::isfinite(p.tau), "constant potential: tau must be >= 0");
                   },
                   [](const RadialHomogeneous& p) {
                       require(p.nu > 0.0, "radial_homogeneous: nu must be > 0");
                       require(p.gamma > 0.0, "radial_homogeneous: gamma must be > 0");
                       require(finite(p.x0), "radial_homogeneous: x0 must be finite");
                   },
                   [](const EnvelopePotential& p) {
                       require(p.mu > 0.0, "envelope: mu must be > 0");
                       require(p.nu > 0.0, "envelope: nu must be > 0");
                       require(p.gamma > 0.0, "envelope: gamma must be > 0");
                       require(!p.centers.empty(), "envelope: centers must be nonempty");
                       require(p.center_nu.empty() || p.center_nu.size() == p.centers.size(),
                               "envelope: center_nu must match centers");
                       for (double c : p.center_nu) require(c > 0.0, "envelope: center_nu entries must be > 0");
                   },
                   [](const FlatWell& p) {
                       require(p.ramp > 0.0, "flat_well: ramp must be > 0");
                       require(p.margin > 0.0, "flat_well: margin must be > 0");
                       if (const auto* ball = std::get_if<ZeroBall>(&p.zero_set))
                           require(ball->radius > 0.0, "flat_well: ball radius must be > 0");
                       if (const auto* box = std::get_if<ZeroBox>(&p.zero_set)) {
                           for (std::size_t i = 0; i < 3; ++i)
                               require(box->lo[i] <= box->hi[i], "flat_well: box lo must be <= hi");
                       }
                   },
                   [](const TabulatedPotential& p) {
                       for (double v : p.values.values())
                           require(v >= 0.0, "tabulated potential: values must be >= 0");
                   },
               },
               spec);
}

double distance_to_zero_set(const FlatWell& well, const Point& x) {
    return std::visit(overloaded{
                          [&](const ZeroBox& box) {
                              double s = 0.0;
                              for (std::size_t i = 0; i < 3; ++i) {
                                  const double d = std::max({box.lo[i] - x[i], 0.0, x[i] - box.hi[i]});
                                  s += d * d;
                              }
                              return std::sqrt(s);
                          },
                          [&](const ZeroBall& ball) { return std::max(0.0, distance(x, ball.center) - ball.radius); },
                      },
                      well.zero_set);
}

double eval_potential(const PotentialSpec& spec, const Point& x) {
    return std::visit(
        overloaded{
            [](const ConstantPotential& p) { return p.tau; },
            [&](const RadialHomogeneous& p) { return p.nu * std::pow(distance(x, p.x0), p.gamma); },
            [&](const EnvelopePotential& p) {
                double v = p.mu;
                for (std::size_t i = 0; i < p.centers.size(); ++i)
                    v = std::min(v, p.coefficient(i) * std::pow(distance(x, p.centers[i]), p.gamma));
                return v;
            },
            [&](const FlatWell& p) {
                const double d = distance_to_zero_set(p, x);
                if (d == 0.0) return 0.0;
                return p.ramp * std::min(1.0, d / p.margin);
            },
            [&](const TabulatedPotential& p) {
                if (!p.values.grid().contains(x))
                    throw std::out_of_range("tabulated potential evaluated outside its box");
                return std::max(0.0, interpolate(p.values, x));
            },
        },
        spec);
}

Field sample_scaled(const PotentialSpec& spec, const GridSpec& grid, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("sample_scaled: scale must be positive");
    return Field::from_function(grid, [&](const Point& x) {
        Point y{sigma * x[0], sigma * x[1], sigma * x[2]};
        return eval_potential(spec, y);
    });
}

Field sample_blowup(const PotentialSpec& spec, const GridSpec& grid, double eps, double k, double gamma,
                    const Point& x_i) {
    if (!(eps > 0.0)) throw std::invalid_argument("sample_blowup: eps must be positive");
    const double s = std::pow(eps, k);
    const double inv = std::pow(eps, -k * gamma);
    // Homogeneous potentials centered at x_i scale exactly; evaluate in closed form
    // so the eps^(k gamma) factors cancel without round-off.
    if (const auto* rh = std::get_if<RadialHomogeneous>(&spec)) {
        if (rh->gamma == gamma && rh->x0 == x_i) {
            return Field::from_function(grid, [&](const Point& y) {
                return rh->nu * std::pow(distance(y, Point{0.0, 0.0, 0.0}), gamma);
            });
        }
    }
    return Field::from_function(grid, [&](const Point& y) {
        Point z{s * y[0] + x_i[0], s * y[1] + x_i[1], s * y[2] + x_i[2]};
        return eval_potential(spec, z) * inv;
    });
}

Mask zero_set_mask(const PotentialSpec& spec, const GridSpec& grid, double tol) {
    if (!(tol >= 0.0)) throw std::invalid_argument("zero_set_mask: tol must be >= 0");
    Mask m(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) m.set(i, eval_potential(spec, grid.node(i)) <= tol);
    return m;
}

double default_zero_tolerance(const PotentialSpec& spec, double gamma) {
    if (const auto* tab = std::get_if<TabulatedPotential>(&spec))
        return std::pow(tab->values.grid().spacing(), gamma);
    return 0.0;
}

RadialHomogeneous local_model(const EnvelopePotential& env, std::size_t i) {
    if (i >= env.centers.size()) throw std::out_of_range("local_model: center index out of range");
    return RadialHomogeneous{env.coefficient(i), env.gamma, Point{0.0, 0.0, 0.0}};
}

std::vector<double> homogeneous_contact_quotients(const PotentialSpec& a, const Point& x,
                                                  const RadialHomogeneous& model, int dim,
                                                  const std::vector<double>& radii) {
    // Unit directions: coordinate axes and the main diagonals of the cube.
    std::vector<Point> dirs;
    for (int ax = 0; ax < dim; ++ax) {
        Point e{0.0, 0.0, 0.0};
        e[static_cast<std::size_t>(ax)] = 1.0;
        dirs.push_back(e);
        e[static_cast<std::size_t>(ax)] = -1.0;
        dirs.push_back(e);
    }
    if (dim >= 2) {
        const int corners = 1 << dim;
        const double inv = 1.0 / std::sqrt(static_cast<double>(dim));
        for (int c = 0; c < corners; ++c) {
            Point e{0.0, 0.0, 0.0};
            for (int ax = 0; ax < dim; ++ax) e[static_cast<std::size_t>(ax)] = ((c >> ax) & 1) ? inv : -inv;
            dirs.push_back(e);
        }
    }
    std::vector<double> out;
    out.reserve(radii.size());
    for (double r : radii) {
        double worst = 0.0;
        for (const Point& d : dirs) {
            Point z{x[0] + r * d[0], x[1] + r * d[1], x[2] + r * d[2]};
            Point y{r * d[0], r * d[1], r * d[2]};
            const double diff = eval_potential(a, z) - eval_potential(PotentialSpec{model}, y);
            worst = std::max(worst, std::abs(diff) / std::pow(r, model.gamma));
        }
        out.push_back(worst);
    }
    return out;
}

}  // namespace cnls
