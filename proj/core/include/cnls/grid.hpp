#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cnls {

/// A point of R^N, N <= 3. Coordinates beyond the grid dimension are zero.
using Point = std::array<double, 3>;

/// Multi-index of a grid node; unused axes hold 0.
using NodeIndex = std::array<int, 3>;

/**
 * Uniform tensor grid on the box [-L, L]^dim with n nodes per axis.
 *
 * Nodes are x_i = -L + i*h, h = 2L/(n-1). The outermost node layer is the
 * Dirichlet boundary: fields vanish there after every solver step. Storage
 * order is row-major with the x axis fastest.
 */
class GridSpec {
public:
    GridSpec(int dim, double half_width, int points_per_axis);

    int dim() const { return dim_; }
    double half_width() const { return half_width_; }
    int points_per_axis() const { return n_; }
    double spacing() const { return h_; }

    /// Total node count n^dim.
    std::size_t size() const { return size_; }

    /// Stride (in flat storage) of one step along `axis`.
    std::size_t stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }

    double coord(int i) const { return -half_width_ + h_ * i; }

    NodeIndex index(std::size_t flat) const;
    std::size_t flat(const NodeIndex& idx) const;
    Point node(std::size_t flat) const;

    bool is_boundary(std::size_t flat) const;
    bool contains(const Point& x) const;

    /// Trapezoidal quadrature weight of a node.
    double weight(std::size_t flat) const;

    /// Weights of all nodes, same order as field storage.
    std::vector<double> weights() const;

    friend bool operator==(const GridSpec& a, const GridSpec& b) {
        return a.dim_ == b.dim_ && a.n_ == b.n_ && a.half_width_ == b.half_width_;
    }

private:
    int dim_;
    double half_width_;
    int n_;
    double h_;
    std::size_t size_;
    std::array<std::size_t, 3> strides_{};
};

/// Real grid function. Values are finite and stored row-major (x fastest).
class Field {
public:
    explicit Field(GridSpec grid);
    Field(GridSpec grid, std::vector<double> values);

    template <typename Fn>
    static Field from_function(const GridSpec& grid, Fn&& fn) {
        std::vector<double> values(grid.size());
        for (std::size_t i = 0; i < values.size(); ++i) values[i] = fn(grid.node(i));
        return Field(grid, std::move(values));
    }

    const GridSpec& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }

    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    Field& operator*=(double s);
    Field& operator+=(const Field& other);
    Field& operator-=(const Field& other);

    /// Set the Dirichlet boundary layer to zero.
    void zero_boundary();

private:
    GridSpec grid_;
    std::vector<double> values_;
};

Field operator*(double s, Field f);
Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);

/// Pair (u, v) on one shared grid.
class State {
public:
    State(Field u, Field v);
    explicit State(const GridSpec& grid) : State(Field(grid), Field(grid)) {}

    const GridSpec& grid() const { return u.grid(); }

    State& operator*=(double s) {
        u *= s;
        v *= s;
        return *this;
    }

    Field u;
    Field v;
};

State operator*(double s, State st);

/// Boolean node set on a grid (zero sets, Dirichlet supports).
class Mask {
public:
    explicit Mask(GridSpec grid, bool value = false);
    Mask(GridSpec grid, std::vector<std::uint8_t> bits);

    const GridSpec& grid() const { return grid_; }
    bool operator[](std::size_t i) const { return bits_[i] != 0; }
    void set(std::size_t i, bool on) { bits_[i] = on ? 1 : 0; }
    std::size_t count() const;
    bool any() const { return count() > 0; }

    std::span<const std::uint8_t> bits() const { return bits_; }

    friend Mask operator&(const Mask& a, const Mask& b);
    friend Mask operator|(const Mask& a, const Mask& b);

private:
    GridSpec grid_;
    std::vector<std::uint8_t> bits_;
};

/// Interior nodes (everything except the Dirichlet layer).
Mask interior_mask(const GridSpec& grid);

// ---------------------------------------------------------------------------
// Discrete operators

/// Second-order central Laplacian; neighbors outside the box count as 0.
Field laplacian(const Field& f);

/// Same stencil writing into caller storage (no allocation). `out` must have grid.size() entries.
void apply_laplacian(const GridSpec& grid, std::span<const double> in, std::span<double> out);

/// Composite trapezoidal rule over the box.
double integrate(const Field& f);

/// Trapezoidal integral restricted to the nodes of `mask`.
double integrate_masked(const Field& f, const Mask& mask);

/// Weighted L2 inner product using the trapezoidal weights.
double inner(const Field& f, const Field& g);

/**
 * Sum over axes of the forward-difference quadrature of |d f / d x_axis|^2.
 *
 * Each edge (i, i+e_axis) inside the box contributes (f_{i+e}-f_i)^2 / h^2
 * times h and the trapezoidal weights of the transverse axes. For fields that
 * vanish on the boundary layer this equals -inner(f, laplacian(f)) exactly.
 */
double grad_norm_sq(const Field& f);

/// Zero-extended multilinear interpolation of f at x.
double interpolate(const Field& f, const Point& x);

/**
 * Blow-up resampling g(y) = A * f(center + s*y) on `target`.
 *
 * Multilinear interpolation; zero where center + s*y leaves the source box.
 * Throws std::invalid_argument for s <= 0 or a center outside the source box.
 */
Field resample_blowup(const Field& f, const Point& center, double scale, double amplitude,
                      const GridSpec& target);

inline State resample_blowup(const State& s, const Point& center, double scale, double amplitude,
                             const GridSpec& target) {
    return State(resample_blowup(s.u, center, scale, amplitude, target),
                 resample_blowup(s.v, center, scale, amplitude, target));
}

/// Location of the maximum of f, refined per axis by a 3-point parabola.
Point peak_location(const Field& f);

}  // namespace cnls
