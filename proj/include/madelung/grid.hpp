#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "madelung/error.hpp"

namespace madelung {

using Complex = std::complex<double>;
using Point = std::array<double, 3>;
using Index3 = std::array<std::size_t, 3>;

/// Uniform cell-centred Cartesian grid in 1-3 dimensions.
///
/// Axis `a` carries n[a] samples at lower[a] + (i + 1/2) h[a], with
/// h[a] = (upper[a] - lower[a]) / n[a]. Unused axes have n = 1.
/// Storage is row-major with axis 0 slowest.
class GridSpec {
public:
    static constexpr std::size_t kMinPoints = 8;
    static constexpr std::size_t kMaxTotalPoints = std::size_t{1} << 26;

    GridSpec() = default;

    /// Validating constructor. Throws Error(InvalidArgument) on a bad spec.
    GridSpec(int dim, std::span<const std::size_t> n, std::span<const double> lower,
             std::span<const double> upper, std::span<const bool> periodic);

    /// Same point count, extent and periodicity on every axis.
    static GridSpec cube(int dim, std::size_t n, double lower, double upper, bool periodic);

    int dim() const { return dim_; }
    std::size_t points(int axis) const { return n_[axis]; }
    double lower(int axis) const { return lower_[axis]; }
    double upper(int axis) const { return upper_[axis]; }
    bool periodic(int axis) const { return periodic_[axis]; }
    double spacing(int axis) const { return h_[axis]; }
    double min_spacing() const;
    double cell_volume() const;
    bool fully_periodic() const;
    bool any_periodic() const;

    std::size_t size() const { return n_[0] * n_[1] * n_[2]; }
    std::size_t stride(int axis) const { return stride_[axis]; }

    double coord(int axis, std::size_t i) const { return lower_[axis] + (static_cast<double>(i) + 0.5) * h_[axis]; }

    std::size_t flat(std::size_t i, std::size_t j = 0, std::size_t k = 0) const
    {
        return i * stride_[0] + j * stride_[1] + k * stride_[2];
    }
    Index3 unflat(std::size_t flat) const;
    Point position(std::size_t flat) const;

    /// Neighbour along `axis` at offset `step`, wrapping on periodic axes.
    std::optional<std::size_t> neighbor(std::size_t flat, int axis, int step) const;

    friend bool operator==(const GridSpec&, const GridSpec&) = default;

private:
    int dim_ = 1;
    std::array<std::size_t, 3> n_{1, 1, 1};
    std::array<double, 3> lower_{0, 0, 0};
    std::array<double, 3> upper_{1, 1, 1};
    std::array<bool, 3> periodic_{false, false, false};
    std::array<double, 3> h_{1, 1, 1};
    std::array<std::size_t, 3> stride_{1, 1, 1};
};

/// Samples of a real or complex function on one time slice.
template <class T>
class BasicScalarField {
public:
    using value_type = T;

    BasicScalarField() = default;
    explicit BasicScalarField(GridSpec grid, double time = 0.0, T fill = T{})
        : grid_(std::move(grid)), values_(grid_.size(), fill), time_(time) {}
    BasicScalarField(GridSpec grid, std::vector<T> values, double time = 0.0);

    const GridSpec& grid() const { return grid_; }
    double time() const { return time_; }
    void set_time(double t) { time_ = t; }

    std::size_t size() const { return values_.size(); }
    T& operator[](std::size_t i) { return values_[i]; }
    const T& operator[](std::size_t i) const { return values_[i]; }
    std::span<T> values() { return values_; }
    std::span<const T> values() const { return values_; }
    std::vector<T>& storage() { return values_; }

    bool all_finite() const;

private:
    GridSpec grid_;
    std::vector<T> values_;
    double time_ = 0.0;
};

using ScalarField = BasicScalarField<double>;
using ComplexField = BasicScalarField<Complex>;

/// One scalar component per spatial axis (or a single component for the
/// scalar curl of a 2D field).
template <class T>
class BasicVectorField {
public:
    BasicVectorField() = default;
    BasicVectorField(const GridSpec& grid, int components, double time = 0.0);

    const GridSpec& grid() const { return components_.front().grid(); }
    double time() const { return components_.front().time(); }
    void set_time(double t);
    int components() const { return static_cast<int>(components_.size()); }

    BasicScalarField<T>& operator[](int c) { return components_[c]; }
    const BasicScalarField<T>& operator[](int c) const { return components_[c]; }

    bool all_finite() const;

private:
    std::vector<BasicScalarField<T>> components_;
};

using VectorField = BasicVectorField<double>;
using ComplexVectorField = BasicVectorField<Complex>;

/// Boolean membership per grid point. Represents a (possibly holed) region.
class RegionMask {
public:
    RegionMask() = default;
    explicit RegionMask(GridSpec grid, bool fill = false)
        : grid_(std::move(grid)), member_(grid_.size(), fill ? 1 : 0) {}

    static RegionMask full(const GridSpec& grid) { return RegionMask(grid, true); }
    template <class Pred>
    static RegionMask where(const GridSpec& grid, Pred&& pred)
    {
        RegionMask m(grid);
        for (std::size_t i = 0; i < grid.size(); ++i)
            m.member_[i] = pred(grid.position(i), i) ? 1 : 0;
        return m;
    }

    const GridSpec& grid() const { return grid_; }
    bool contains(std::size_t i) const { return member_[i] != 0; }
    void set(std::size_t i, bool v) { member_[i] = v ? 1 : 0; }
    std::size_t count() const;
    bool empty() const { return count() == 0; }

    /// Removes every member within `cells` steps (face or diagonal) of a
    /// non-member or of a non-periodic grid edge.
    RegionMask eroded(int cells) const;
    RegionMask intersect(const RegionMask& other) const;
    RegionMask unite(const RegionMask& other) const;
    RegionMask complement() const;

    /// Connected components under face adjacency; returns component id per
    /// point (-1 for non-members) and writes the number of components.
    std::vector<int> components(int& count) const;

    friend bool operator==(const RegionMask&, const RegionMask&) = default;

private:
    GridSpec grid_;
    std::vector<std::uint8_t> member_;
};

enum class DerivativeScheme {
    /// Spectral on periodic axes, 4th-order finite differences elsewhere.
    Auto,
    /// 4th-order central differences on every axis (periodic axes wrap).
    /// Stencils are local, so masked data does not leak across the grid.
    FiniteDifference,
};

enum class LaplacianRoute { Auto, Composed, Spectral };

template <class T>
BasicScalarField<T> derivative(const BasicScalarField<T>& f, int axis,
                               DerivativeScheme scheme = DerivativeScheme::Auto);

template <class T>
BasicVectorField<T> gradient(const BasicScalarField<T>& f, DerivativeScheme scheme = DerivativeScheme::Auto);

template <class T>
BasicScalarField<T> divergence(const BasicVectorField<T>& v, DerivativeScheme scheme = DerivativeScheme::Auto);

/// 3D: three components. 2D: a single component holding dv_y/dx - dv_x/dy.
/// 1D: a single zero component.
VectorField curl(const VectorField& v, DerivativeScheme scheme = DerivativeScheme::Auto);

/// Composed route: divergence(gradient(f)). Spectral route: -|k|^2 in Fourier
/// space, only available on fully periodic grids. Auto picks spectral when
/// the grid is fully periodic and the scheme is Auto.
template <class T>
BasicScalarField<T> laplacian(const BasicScalarField<T>& f, DerivativeScheme scheme = DerivativeScheme::Auto,
                              LaplacianRoute route = LaplacianRoute::Auto);

/// Riemann sum of f h^dim over the member points. Throws EmptyRegion.
template <class T>
T integrate(const BasicScalarField<T>& f, const RegionMask& region);
template <class T>
T integrate(const BasicScalarField<T>& f);

/// Multilinear interpolation at an arbitrary point. Periodic axes wrap;
/// on non-periodic axes the point must lie between the first and last
/// sample, otherwise nullopt.
std::optional<double> interpolate(const ScalarField& f, const Point& p);
std::optional<Point> interpolate(const VectorField& v, const Point& p);

/// Index of the cell whose centre is nearest to p (nullopt if outside the
/// grid extent on a non-periodic axis).
std::optional<std::size_t> locate(const GridSpec& grid, const Point& p);

/// Throws Error(NonFinite) naming `what` if any sample is NaN or Inf.
template <class T>
void require_finite(const BasicScalarField<T>& f, const char* what);
void require_finite(const VectorField& v, const char* what);

/// Max-norm and discrete L2 norm (sqrt of sum |f|^2 h^dim) over a mask.
double max_norm(const ScalarField& f, const RegionMask& region);
double l2_norm(const ScalarField& f, const RegionMask& region);
double max_norm(const VectorField& v, const RegionMask& region);
double l2_norm(const VectorField& v, const RegionMask& region);

ScalarField abs_squared(const ComplexField& psi);
ScalarField real_part(const ComplexField& f);
ScalarField imag_part(const ComplexField& f);
ComplexField to_complex(const ScalarField& f);

/// Samples a function of position onto the grid.
template <class Fn>
ScalarField sample(const GridSpec& grid, Fn&& fn, double time = 0.0)
{
    ScalarField f(grid, time);
    for (std::size_t i = 0; i < grid.size(); ++i) f[i] = fn(grid.position(i));
    return f;
}

template <class Fn>
ComplexField sample_complex(const GridSpec& grid, Fn&& fn, double time = 0.0)
{
    ComplexField f(grid, time);
    for (std::size_t i = 0; i < grid.size(); ++i) f[i] = fn(grid.position(i));
    return f;
}

} // namespace madelung
