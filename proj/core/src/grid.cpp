#include "cnls/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cnls {

namespace {

struct Extents {
    int nx = 1, ny = 1, nz = 1;
};

Extents extents(const GridSpec& g) {
    Extents e;
    const int n = g.points_per_axis();
    e.nx = n;
    if (g.dim() >= 2) e.ny = n;
    if (g.dim() >= 3) e.nz = n;
    return e;
}

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
    if (!(a == b)) throw std::invalid_argument(std::string(what) + ": fields live on different grids");
}

}  // namespace

// ---------------------------------------------------------------------------
// GridSpec

GridSpec::GridSpec(int dim, double half_width, int points_per_axis)
    : dim_(dim), half_width_(half_width), n_(points_per_axis) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("grid dim must be 1, 2 or 3");
    if (!(half_width > 0.0) || !std::isfinite(half_width))
        throw std::invalid_argument("grid half_width must be positive");
    if (points_per_axis < 8) throw std::invalid_argument("grid needs at least 8 points per axis");
    h_ = 2.0 * half_width_ / static_cast<double>(n_ - 1);
    size_ = 1;
    for (int a = 0; a < 3; ++a) {
        strides_[static_cast<std::size_t>(a)] = (a < dim_) ? size_ : 0;
        if (a < dim_) size_ *= static_cast<std::size_t>(n_);
    }
}

NodeIndex GridSpec::index(std::size_t flat) const {
    NodeIndex idx{0, 0, 0};
    const auto n = static_cast<std::size_t>(n_);
    for (int a = 0; a < dim_; ++a) {
        idx[static_cast<std::size_t>(a)] = static_cast<int>(flat % n);
        flat /= n;
    }
    return idx;
}

std::size_t GridSpec::flat(const NodeIndex& idx) const {
    std::size_t f = 0;
    for (int a = dim_ - 1; a >= 0; --a) f = f * static_cast<std::size_t>(n_) + static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
    return f;
}

Point GridSpec::node(std::size_t flat) const {
    const NodeIndex idx = index(flat);
    Point x{0.0, 0.0, 0.0};
    for (int a = 0; a < dim_; ++a) x[static_cast<std::size_t>(a)] = coord(idx[static_cast<std::size_t>(a)]);
    return x;
}

bool GridSpec::is_boundary(std::size_t flat) const {
    const NodeIndex idx = index(flat);
    for (int a = 0; a < dim_; ++a) {
        const int i = idx[static_cast<std::size_t>(a)];
        if (i == 0 || i == n_ - 1) return true;
    }
    return false;
}

bool GridSpec::contains(const Point& x) const {
    for (int a = 0; a < dim_; ++a) {
        if (!(std::abs(x[static_cast<std::size_t>(a)]) <= half_width_)) return false;
    }
    return true;
}

double GridSpec::weight(std::size_t flat) const {
    const NodeIndex idx = index(flat);
    double w = 1.0;
    for (int a = 0; a < dim_; ++a) {
        const int i = idx[static_cast<std::size_t>(a)];
        w *= (i == 0 || i == n_ - 1) ? 0.5 * h_ : h_;
    }
    return w;
}

std::vector<double> GridSpec::weights() const {
    std::vector<double> w(size_);
    for (std::size_t i = 0; i < size_; ++i) w[i] = weight(i);
    return w;
}

// ---------------------------------------------------------------------------
// Field / State / Mask

Field::Field(GridSpec grid) : grid_(grid), values_(grid.size(), 0.0) {}

Field::Field(GridSpec grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size())
        throw std::invalid_argument("field has " + std::to_string(values_.size()) + " values, grid needs " +
                                    std::to_string(grid_.size()));
    for (double v : values_) {
        if (!std::isfinite(v)) throw std::invalid_argument("field values must be finite");
    }
}

Field& Field::operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
}

Field& Field::operator+=(const Field& other) {
    require_same_grid(grid_, other.grid_, "Field::operator+=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

Field& Field::operator-=(const Field& other) {
    require_same_grid(grid_, other.grid_, "Field::operator-=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

void Field::zero_boundary() {
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (grid_.is_boundary(i)) values_[i] = 0.0;
    }
}

Field operator*(double s, Field f) { return f *= s; }
Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }

State::State(Field u_, Field v_) : u(std::move(u_)), v(std::move(v_)) {
    require_same_grid(u.grid(), v.grid(), "State");
}

State operator*(double s, State st) { return st *= s; }

Mask::Mask(GridSpec grid, bool value) : grid_(grid), bits_(grid.size(), value ? 1 : 0) {}

Mask::Mask(GridSpec grid, std::vector<std::uint8_t> bits) : grid_(grid), bits_(std::move(bits)) {
    if (bits_.size() != grid_.size()) throw std::invalid_argument("mask size does not match grid");
    for (auto& b : bits_) b = b ? 1 : 0;
}

std::size_t Mask::count() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

Mask operator&(const Mask& a, const Mask& b) {
    require_same_grid(a.grid_, b.grid_, "Mask::operator&");
    Mask out(a.grid_);
    for (std::size_t i = 0; i < a.bits_.size(); ++i) out.bits_[i] = a.bits_[i] & b.bits_[i];
    return out;
}

Mask operator|(const Mask& a, const Mask& b) {
    require_same_grid(a.grid_, b.grid_, "Mask::operator|");
    Mask out(a.grid_);
    for (std::size_t i = 0; i < a.bits_.size(); ++i) out.bits_[i] = a.bits_[i] | b.bits_[i];
    return out;
}

Mask interior_mask(const GridSpec& grid) {
    Mask m(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) m.set(i, !grid.is_boundary(i));
    return m;
}

// ---------------------------------------------------------------------------
// Operators

void apply_laplacian(const GridSpec& grid, std::span<const double> in, std::span<double> out) {
    const Extents e = extents(grid);
    const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    const double diag = -2.0 * grid.dim() * inv_h2;
    const std::size_t sy = static_cast<std::size_t>(e.nx);
    const std::size_t sz = sy * static_cast<std::size_t>(e.ny);
    const bool has_y = grid.dim() >= 2;
    const bool has_z = grid.dim() >= 3;

    for (int k = 0; k < e.nz; ++k) {
        for (int j = 0; j < e.ny; ++j) {
            const std::size_t row = static_cast<std::size_t>(k) * sz + static_cast<std::size_t>(j) * sy;
            const double* f = in.data() + row;
            double* o = out.data() + row;
            for (int i = 0; i < e.nx; ++i) {
                double s = diag * f[i];
                if (i > 0) s += inv_h2 * f[i - 1];
                if (i + 1 < e.nx) s += inv_h2 * f[i + 1];
                o[i] = s;
            }
            if (has_y) {
                for (int i = 0; i < e.nx; ++i) {
                    double s = 0.0;
                    if (j > 0) s += f[static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(sy)];
                    if (j + 1 < e.ny) s += f[static_cast<std::size_t>(i) + sy];
                    o[i] += inv_h2 * s;
                }
            }
            if (has_z) {
                for (int i = 0; i < e.nx; ++i) {
                    double s = 0.0;
                    if (k > 0) s += f[static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(sz)];
                    if (k + 1 < e.nz) s += f[static_cast<std::size_t>(i) + sz];
                    o[i] += inv_h2 * s;
                }
            }
        }
    }
}

Field laplacian(const Field& f) {
    Field out(f.grid());
    apply_laplacian(f.grid(), f.values(), out.values());
    return out;
}

double integrate(const Field& f) {
    const GridSpec& g = f.grid();
    double sum = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) sum += g.weight(i) * f[i];
    return sum;
}

double integrate_masked(const Field& f, const Mask& mask) {
    require_same_grid(f.grid(), mask.grid(), "integrate_masked");
    const GridSpec& g = f.grid();
    double sum = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (mask[i]) sum += g.weight(i) * f[i];
    }
    return sum;
}

double inner(const Field& f, const Field& g) {
    require_same_grid(f.grid(), g.grid(), "inner");
    const GridSpec& grid = f.grid();
    double sum = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) sum += grid.weight(i) * f[i] * g[i];
    return sum;
}

double grad_norm_sq(const Field& f) {
    const GridSpec& g = f.grid();
    const int n = g.points_per_axis();
    const double h = g.spacing();
    const std::vector<double> w = g.weights();
    double total = 0.0;
    for (int axis = 0; axis < g.dim(); ++axis) {
        const std::size_t stride = g.stride(axis);
        double sum = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const NodeIndex idx = g.index(i);
            if (idx[static_cast<std::size_t>(axis)] + 1 >= n) continue;
            const double d = (f[i + stride] - f[i]) / h;
            // Transverse trapezoid weight times h along the edge.
            const int ia = idx[static_cast<std::size_t>(axis)];
            const double along = (ia == 0) ? 0.5 * h : h;
            sum += d * d * (w[i] / along) * h;
        }
        total += sum;
    }
    return total;
}

double interpolate(const Field& f, const Point& x) {
    const GridSpec& g = f.grid();
    if (!g.contains(x)) return 0.0;
    const int n = g.points_per_axis();
    const double h = g.spacing();
    std::array<int, 3> lo{0, 0, 0};
    std::array<double, 3> t{0.0, 0.0, 0.0};
    for (int a = 0; a < g.dim(); ++a) {
        const auto ua = static_cast<std::size_t>(a);
        const double r = (x[ua] + g.half_width()) / h;
        int i = static_cast<int>(std::floor(r));
        i = std::clamp(i, 0, n - 2);
        double frac = r - i;
        // Snap round-off so grid-aligned queries hit nodes exactly.
        if (std::abs(frac) < 1e-12) frac = 0.0;
        if (std::abs(frac - 1.0) < 1e-12) frac = 1.0;
        lo[ua] = i;
        t[ua] = frac;
    }
    double value = 0.0;
    const int corners = 1 << g.dim();
    for (int c = 0; c < corners; ++c) {
        NodeIndex idx{0, 0, 0};
        double wgt = 1.0;
        for (int a = 0; a < g.dim(); ++a) {
            const auto ua = static_cast<std::size_t>(a);
            const int bit = (c >> a) & 1;
            idx[ua] = lo[ua] + bit;
            wgt *= bit ? t[ua] : (1.0 - t[ua]);
        }
        if (wgt != 0.0) value += wgt * f[g.flat(idx)];
    }
    return value;
}

Field resample_blowup(const Field& f, const Point& center, double scale, double amplitude,
                      const GridSpec& target) {
    if (!(scale > 0.0)) throw std::invalid_argument("resample_blowup: scale must be positive");
    if (!f.grid().contains(center)) throw std::invalid_argument("resample_blowup: center outside source box");
    if (target.dim() != f.grid().dim()) throw std::invalid_argument("resample_blowup: dimension mismatch");
    Field out(target);
    for (std::size_t i = 0; i < target.size(); ++i) {
        const Point y = target.node(i);
        Point x{0.0, 0.0, 0.0};
        for (int a = 0; a < target.dim(); ++a) {
            const auto ua = static_cast<std::size_t>(a);
            x[ua] = center[ua] + scale * y[ua];
        }
        out[i] = amplitude * interpolate(f, x);
    }
    return out;
}

Point peak_location(const Field& f) {
    const GridSpec& g = f.grid();
    std::size_t best = 0;
    for (std::size_t i = 1; i < f.size(); ++i) {
        if (f[i] > f[best]) best = i;
    }
    Point p = g.node(best);
    const NodeIndex idx = g.index(best);
    const int n = g.points_per_axis();
    for (int a = 0; a < g.dim(); ++a) {
        const auto ua = static_cast<std::size_t>(a);
        const int i = idx[ua];
        if (i == 0 || i == n - 1) continue;
        const std::size_t s = g.stride(a);
        const double fm = f[best - s];
        const double f0 = f[best];
        const double fp = f[best + s];
        const double denom = fm - 2.0 * f0 + fp;
        if (denom < 0.0) {
            const double offset = 0.5 * (fm - fp) / denom;
            p[ua] += std::clamp(offset, -0.5, 0.5) * g.spacing();
        }
    }
    return p;
}

}  // namespace cnls
