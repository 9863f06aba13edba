#include "madelung/grid.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "fft.hpp"

namespace madelung {

// ---------------------------------------------------------------------------
// GridSpec

GridSpec::GridSpec(int dim, std::span<const std::size_t> n, std::span<const double> lower,
                   std::span<const double> upper, std::span<const bool> periodic)
    : dim_(dim)
{
    if (dim < 1 || dim > 3) throw Error(ErrorCode::InvalidArgument, "grid dimension must be 1, 2 or 3");
    const auto d = static_cast<std::size_t>(dim);
    if (n.size() < d || lower.size() < d || upper.size() < d || periodic.size() < d)
        throw Error(ErrorCode::InvalidArgument, "grid arrays shorter than the dimension");
    std::size_t total = 1;
    for (int a = 0; a < dim; ++a) {
        if (n[a] < kMinPoints)
            throw Error(ErrorCode::InvalidArgument,
                        "axis " + std::to_string(a) + " needs at least " + std::to_string(kMinPoints) + " points");
        n_[a] = n[a];
        lower_[a] = lower[a];
        upper_[a] = upper[a];
        periodic_[a] = periodic[a];
        h_[a] = (upper[a] - lower[a]) / static_cast<double>(n[a]);
        if (!(h_[a] > 0.0) || !std::isfinite(h_[a]))
            throw Error(ErrorCode::InvalidArgument, "axis " + std::to_string(a) + " has non-positive spacing");
        if (total > kMaxTotalPoints / n[a])
            throw Error(ErrorCode::InvalidArgument, "grid exceeds the 2^26 point budget");
        total *= n[a];
    }
    stride_[2] = 1;
    stride_[1] = n_[2];
    stride_[0] = n_[1] * n_[2];
}

GridSpec GridSpec::cube(int dim, std::size_t n, double lower, double upper, bool periodic)
{
    std::array<std::size_t, 3> nn{n, n, n};
    std::array<double, 3> lo{lower, lower, lower};
    std::array<double, 3> hi{upper, upper, upper};
    std::array<bool, 3> pp{periodic, periodic, periodic};
    return GridSpec(dim, nn, lo, hi, pp);
}

double GridSpec::min_spacing() const
{
    double h = h_[0];
    for (int a = 1; a < dim_; ++a) h = std::min(h, h_[a]);
    return h;
}

double GridSpec::cell_volume() const
{
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= h_[a];
    return v;
}

bool GridSpec::fully_periodic() const
{
    for (int a = 0; a < dim_; ++a)
        if (!periodic_[a]) return false;
    return true;
}

bool GridSpec::any_periodic() const
{
    for (int a = 0; a < dim_; ++a)
        if (periodic_[a]) return true;
    return false;
}

Index3 GridSpec::unflat(std::size_t flat) const
{
    Index3 idx{};
    idx[0] = flat / stride_[0];
    flat -= idx[0] * stride_[0];
    idx[1] = flat / stride_[1];
    idx[2] = flat - idx[1] * stride_[1];
    return idx;
}

Point GridSpec::position(std::size_t flat) const
{
    const Index3 idx = unflat(flat);
    Point p{0, 0, 0};
    for (int a = 0; a < dim_; ++a) p[a] = coord(a, idx[a]);
    return p;
}

std::optional<std::size_t> GridSpec::neighbor(std::size_t flat, int axis, int step) const
{
    const Index3 idx = unflat(flat);
    const auto n = static_cast<long>(n_[axis]);
    long j = static_cast<long>(idx[axis]) + step;
    if (j < 0 || j >= n) {
        if (!periodic_[axis]) return std::nullopt;
        j = ((j % n) + n) % n;
    }
    return flat - idx[axis] * stride_[axis] + static_cast<std::size_t>(j) * stride_[axis];
}

// ---------------------------------------------------------------------------
// Fields

template <class T>
BasicScalarField<T>::BasicScalarField(GridSpec grid, std::vector<T> values, double time)
    : grid_(std::move(grid)), values_(std::move(values)), time_(time)
{
    if (values_.size() != grid_.size())
        throw Error(ErrorCode::InvalidArgument, "field size does not match grid");
}

template <class T>
bool BasicScalarField<T>::all_finite() const
{
    return std::all_of(values_.begin(), values_.end(), [](const T& v) {
        if constexpr (std::is_same_v<T, Complex>) return std::isfinite(v.real()) && std::isfinite(v.imag());
        else return std::isfinite(v);
    });
}

template <class T>
BasicVectorField<T>::BasicVectorField(const GridSpec& grid, int components, double time)
{
    components_.reserve(static_cast<std::size_t>(components));
    for (int c = 0; c < components; ++c) components_.emplace_back(grid, time);
}

template <class T>
void BasicVectorField<T>::set_time(double t)
{
    for (auto& c : components_) c.set_time(t);
}

template <class T>
bool BasicVectorField<T>::all_finite() const
{
    return std::all_of(components_.begin(), components_.end(), [](const auto& c) { return c.all_finite(); });
}

template class BasicScalarField<double>;
template class BasicScalarField<Complex>;
template class BasicVectorField<double>;
template class BasicVectorField<Complex>;

// ---------------------------------------------------------------------------
// RegionMask

std::size_t RegionMask::count() const
{
    return static_cast<std::size_t>(std::count(member_.begin(), member_.end(), std::uint8_t{1}));
}

RegionMask RegionMask::eroded(int cells) const
{
    if (cells <= 0) return *this;
    RegionMask out = *this;
    // Separable min-filter over a (2c+1)^dim box.
    for (int a = 0; a < grid_.dim(); ++a) {
        const std::vector<std::uint8_t> src = out.member_;
        const auto n = static_cast<long>(grid_.points(a));
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            if (!src[i]) continue;
            const long pos = static_cast<long>(grid_.unflat(i)[a]);
            bool keep = true;
            for (int s = -cells; s <= cells && keep; ++s) {
                if (s == 0) continue;
                if (!grid_.periodic(a) && (pos + s < 0 || pos + s >= n)) {
                    keep = false;
                    break;
                }
                auto nb = grid_.neighbor(i, a, s);
                if (!nb || !src[*nb]) keep = false;
            }
            out.member_[i] = keep ? 1 : 0;
        }
    }
    return out;
}

RegionMask RegionMask::intersect(const RegionMask& other) const
{
    if (!(grid_ == other.grid_)) throw Error(ErrorCode::InvalidArgument, "mask grids differ");
    RegionMask out(grid_);
    for (std::size_t i = 0; i < member_.size(); ++i) out.member_[i] = member_[i] & other.member_[i];
    return out;
}

RegionMask RegionMask::unite(const RegionMask& other) const
{
    if (!(grid_ == other.grid_)) throw Error(ErrorCode::InvalidArgument, "mask grids differ");
    RegionMask out(grid_);
    for (std::size_t i = 0; i < member_.size(); ++i) out.member_[i] = member_[i] | other.member_[i];
    return out;
}

RegionMask RegionMask::complement() const
{
    RegionMask out(grid_);
    for (std::size_t i = 0; i < member_.size(); ++i) out.member_[i] = member_[i] ? 0 : 1;
    return out;
}

std::vector<int> RegionMask::components(int& count) const
{
    std::vector<int> label(member_.size(), -1);
    count = 0;
    std::deque<std::size_t> queue;
    for (std::size_t seed = 0; seed < member_.size(); ++seed) {
        if (!member_[seed] || label[seed] >= 0) continue;
        label[seed] = count;
        queue.push_back(seed);
        while (!queue.empty()) {
            const std::size_t cur = queue.front();
            queue.pop_front();
            for (int a = 0; a < grid_.dim(); ++a) {
                for (int s : {-1, 1}) {
                    auto nb = grid_.neighbor(cur, a, s);
                    if (nb && member_[*nb] && label[*nb] < 0) {
                        label[*nb] = count;
                        queue.push_back(*nb);
                    }
                }
            }
        }
        ++count;
    }
    return label;
}

// ---------------------------------------------------------------------------
// Differential operators

namespace {

void spectral_derivative_real(const std::vector<double>& in, std::vector<double>& out, const GridSpec& grid,
                              int axis)
{
    const std::size_t n = grid.points(axis);
    std::vector<Complex> work(in.begin(), in.end());
    detail::transform_axis(work, grid, axis, -1);
    std::vector<double> k = detail::wavenumbers(n, grid.upper(axis) - grid.lower(axis));
    if (n % 2 == 0) k[n / 2] = 0.0; // odd derivative: drop the Nyquist mode
    const std::size_t stride = grid.stride(axis);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < work.size(); ++i) {
        const std::size_t m = (i / stride) % n;
        work[i] *= Complex(0.0, k[m] * inv_n);
    }
    detail::transform_axis(work, grid, axis, +1);
    out.resize(in.size());
    for (std::size_t i = 0; i < work.size(); ++i) out[i] = work[i].real();
}

template <class T>
void fd_derivative(std::span<const T> in, std::span<T> out, const GridSpec& grid, int axis)
{
    const std::size_t n = grid.points(axis);
    const std::size_t stride = grid.stride(axis);
    const std::size_t outer = grid.size() / (n * stride);
    const double h = grid.spacing(axis);
    const bool periodic = grid.periodic(axis);
    const double c4 = 1.0 / (12.0 * h);
    const double c2 = 1.0 / (2.0 * h);
    const auto sn = static_cast<long>(n);
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t s = 0; s < stride; ++s) {
            const std::size_t base = o * n * stride + s;
            auto at = [&](long i) -> const T& {
                if (periodic) i = ((i % sn) + sn) % sn;
                return in[base + static_cast<std::size_t>(i) * stride];
            };
            for (long i = 0; i < sn; ++i) {
                T d;
                if (periodic || (i >= 2 && i <= sn - 3)) {
                    d = (at(i - 2) - 8.0 * at(i - 1) + 8.0 * at(i + 1) - at(i + 2)) * c4;
                } else if (i == 0) {
                    d = (-3.0 * at(0) + 4.0 * at(1) - at(2)) * c2;
                } else if (i == sn - 1) {
                    d = (3.0 * at(sn - 1) - 4.0 * at(sn - 2) + at(sn - 3)) * c2;
                } else {
                    d = (at(i + 1) - at(i - 1)) * c2;
                }
                out[base + static_cast<std::size_t>(i) * stride] = d;
            }
        }
    }
}

ScalarField real_derivative(const ScalarField& f, int axis, DerivativeScheme scheme)
{
    ScalarField out(f.grid(), f.time());
    const GridSpec& g = f.grid();
    if (axis >= g.dim()) return out;
    if (scheme == DerivativeScheme::Auto && g.periodic(axis)) {
        std::vector<double> in(f.values().begin(), f.values().end());
        spectral_derivative_real(in, out.storage(), g, axis);
    } else {
        fd_derivative<double>(f.values(), out.values(), g, axis);
    }
    return out;
}

} // namespace

template <class T>
BasicScalarField<T> derivative(const BasicScalarField<T>& f, int axis, DerivativeScheme scheme)
{
    if constexpr (std::is_same_v<T, double>) {
        return real_derivative(f, axis, scheme);
    } else {
        // Real and imaginary parts separately: a real input gives an exactly
        // real derivative.
        const ScalarField re = real_derivative(real_part(f), axis, scheme);
        const ScalarField im = real_derivative(imag_part(f), axis, scheme);
        ComplexField out(f.grid(), f.time());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = Complex(re[i], im[i]);
        return out;
    }
}

template <class T>
BasicVectorField<T> gradient(const BasicScalarField<T>& f, DerivativeScheme scheme)
{
    const int dim = f.grid().dim();
    BasicVectorField<T> out(f.grid(), dim, f.time());
    for (int a = 0; a < dim; ++a) out[a] = derivative(f, a, scheme);
    return out;
}

template <class T>
BasicScalarField<T> divergence(const BasicVectorField<T>& v, DerivativeScheme scheme)
{
    BasicScalarField<T> out(v.grid(), v.time());
    const int dim = std::min(v.grid().dim(), v.components());
    for (int a = 0; a < dim; ++a) {
        const BasicScalarField<T> d = derivative(v[a], a, scheme);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += d[i];
    }
    return out;
}

VectorField curl(const VectorField& v, DerivativeScheme scheme)
{
    const GridSpec& g = v.grid();
    if (g.dim() == 1) return VectorField(g, 1, v.time());
    if (g.dim() == 2) {
        VectorField out(g, 1, v.time());
        const ScalarField dvy_dx = derivative(v[1], 0, scheme);
        const ScalarField dvx_dy = derivative(v[0], 1, scheme);
        for (std::size_t i = 0; i < g.size(); ++i) out[0][i] = dvy_dx[i] - dvx_dy[i];
        return out;
    }
    VectorField out(g, 3, v.time());
    for (int c = 0; c < 3; ++c) {
        const int p = (c + 1) % 3;
        const int q = (c + 2) % 3;
        const ScalarField a = derivative(v[q], p, scheme);
        const ScalarField b = derivative(v[p], q, scheme);
        for (std::size_t i = 0; i < g.size(); ++i) out[c][i] = a[i] - b[i];
    }
    return out;
}

namespace {

ScalarField spectral_laplacian_real(const ScalarField& f)
{
    const GridSpec& g = f.grid();
    std::vector<Complex> work(f.values().begin(), f.values().end());
    detail::transform_all(work, g, -1);
    std::array<std::vector<double>, 3> k;
    for (int a = 0; a < g.dim(); ++a) k[a] = detail::wavenumbers(g.points(a), g.upper(a) - g.lower(a));
    const double inv_n = 1.0 / static_cast<double>(g.size());
    for (std::size_t i = 0; i < work.size(); ++i) {
        const Index3 idx = g.unflat(i);
        double k2 = 0.0;
        for (int a = 0; a < g.dim(); ++a) k2 += k[a][idx[a]] * k[a][idx[a]];
        work[i] *= -k2 * inv_n;
    }
    detail::transform_all(work, g, +1);
    ScalarField out(g, f.time());
    for (std::size_t i = 0; i < work.size(); ++i) out[i] = work[i].real();
    return out;
}

} // namespace

template <class T>
BasicScalarField<T> laplacian(const BasicScalarField<T>& f, DerivativeScheme scheme, LaplacianRoute route)
{
    const GridSpec& g = f.grid();
    bool spectral = false;
    if (route == LaplacianRoute::Spectral) {
        if (!g.fully_periodic())
            throw Error(ErrorCode::InvalidArgument, "spectral Laplacian needs a fully periodic grid");
        spectral = true;
    } else if (route == LaplacianRoute::Auto) {
        spectral = g.fully_periodic() && scheme == DerivativeScheme::Auto;
    }
    if (!spectral) return divergence(gradient(f, scheme), scheme);
    if constexpr (std::is_same_v<T, double>) {
        return spectral_laplacian_real(f);
    } else {
        const ScalarField re = spectral_laplacian_real(real_part(f));
        const ScalarField im = spectral_laplacian_real(imag_part(f));
        ComplexField out(g, f.time());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = Complex(re[i], im[i]);
        return out;
    }
}

template <class T>
T integrate(const BasicScalarField<T>& f, const RegionMask& region)
{
    if (!(f.grid() == region.grid())) throw Error(ErrorCode::InvalidArgument, "region grid differs from field grid");
    T sum{};
    bool any = false;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (region.contains(i)) {
            sum += f[i];
            any = true;
        }
    }
    if (!any) throw Error(ErrorCode::EmptyRegion, "integration region has no member points");
    return sum * f.grid().cell_volume();
}

template <class T>
T integrate(const BasicScalarField<T>& f)
{
    T sum{};
    for (std::size_t i = 0; i < f.size(); ++i) sum += f[i];
    return sum * f.grid().cell_volume();
}

template ScalarField derivative(const ScalarField&, int, DerivativeScheme);
template ComplexField derivative(const ComplexField&, int, DerivativeScheme);
template VectorField gradient(const ScalarField&, DerivativeScheme);
template ComplexVectorField gradient(const ComplexField&, DerivativeScheme);
template ScalarField divergence(const VectorField&, DerivativeScheme);
template ComplexField divergence(const ComplexVectorField&, DerivativeScheme);
template ScalarField laplacian(const ScalarField&, DerivativeScheme, LaplacianRoute);
template ComplexField laplacian(const ComplexField&, DerivativeScheme, LaplacianRoute);
template double integrate(const ScalarField&, const RegionMask&);
template Complex integrate(const ComplexField&, const RegionMask&);
template double integrate(const ScalarField&);
template Complex integrate(const ComplexField&);

// ---------------------------------------------------------------------------
// Interpolation

namespace {

struct Stencil {
    std::array<std::array<std::size_t, 2>, 3> idx{};
    std::array<double, 3> frac{};
};

std::optional<Stencil> bracket(const GridSpec& g, const Point& p)
{
    Stencil s;
    for (int a = 0; a < 3; ++a) {
        if (a >= g.dim()) {
            s.idx[a] = {0, 0};
            s.frac[a] = 0.0;
            continue;
        }
        const auto n = static_cast<long>(g.points(a));
        const double u = (p[a] - g.lower(a)) / g.spacing(a) - 0.5;
        if (!std::isfinite(u)) return std::nullopt;
        double fl = std::floor(u);
        double fr = u - fl;
        long i0 = static_cast<long>(fl);
        long i1 = i0 + 1;
        if (g.periodic(a)) {
            i0 = ((i0 % n) + n) % n;
            i1 = ((i1 % n) + n) % n;
        } else {
            if (u < 0.0 || u > static_cast<double>(n - 1)) return std::nullopt;
            if (i1 > n - 1) {
                i1 = n - 1;
                i0 = n - 2;
                fr = 1.0;
            }
        }
        s.idx[a] = {static_cast<std::size_t>(i0), static_cast<std::size_t>(i1)};
        s.frac[a] = fr;
    }
    return s;
}

double apply(const Stencil& s, const GridSpec& g, std::span<const double> v)
{
    double acc = 0.0;
    for (int c = 0; c < 8; ++c) {
        const int bx = c & 1, by = (c >> 1) & 1, bz = (c >> 2) & 1;
        if ((by && g.dim() < 2) || (bz && g.dim() < 3)) continue;
        const double w = (bx ? s.frac[0] : 1.0 - s.frac[0]) * (by ? s.frac[1] : 1.0 - s.frac[1]) *
                         (bz ? s.frac[2] : 1.0 - s.frac[2]);
        if (w == 0.0) continue;
        acc += w * v[g.flat(s.idx[0][bx], s.idx[1][by], s.idx[2][bz])];
    }
    return acc;
}

} // namespace

std::optional<double> interpolate(const ScalarField& f, const Point& p)
{
    auto s = bracket(f.grid(), p);
    if (!s) return std::nullopt;
    return apply(*s, f.grid(), f.values());
}

std::optional<Point> interpolate(const VectorField& v, const Point& p)
{
    auto s = bracket(v.grid(), p);
    if (!s) return std::nullopt;
    Point out{0, 0, 0};
    for (int c = 0; c < std::min(v.components(), 3); ++c) out[c] = apply(*s, v.grid(), v[c].values());
    return out;
}

std::optional<std::size_t> locate(const GridSpec& g, const Point& p)
{
    Index3 idx{0, 0, 0};
    for (int a = 0; a < g.dim(); ++a) {
        const auto n = static_cast<long>(g.points(a));
        long i = static_cast<long>(std::floor((p[a] - g.lower(a)) / g.spacing(a)));
        if (g.periodic(a)) {
            i = ((i % n) + n) % n;
        } else if (i < 0 || i >= n) {
            return std::nullopt;
        }
        idx[a] = static_cast<std::size_t>(i);
    }
    return g.flat(idx[0], idx[1], idx[2]);
}

// ---------------------------------------------------------------------------
// Norms and helpers

template <class T>
void require_finite(const BasicScalarField<T>& f, const char* what)
{
    if (!f.all_finite()) throw Error(ErrorCode::NonFinite, std::string(what) + " contains NaN or Inf");
}
template void require_finite(const ScalarField&, const char*);
template void require_finite(const ComplexField&, const char*);

void require_finite(const VectorField& v, const char* what)
{
    if (!v.all_finite()) throw Error(ErrorCode::NonFinite, std::string(what) + " contains NaN or Inf");
}

double max_norm(const ScalarField& f, const RegionMask& region)
{
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (region.contains(i)) m = std::max(m, std::abs(f[i]));
    return m;
}

double l2_norm(const ScalarField& f, const RegionMask& region)
{
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (region.contains(i)) s += f[i] * f[i];
    return std::sqrt(s * f.grid().cell_volume());
}

double max_norm(const VectorField& v, const RegionMask& region)
{
    double m = 0.0;
    for (std::size_t i = 0; i < v.grid().size(); ++i) {
        if (!region.contains(i)) continue;
        double s = 0.0;
        for (int c = 0; c < v.components(); ++c) s += v[c][i] * v[c][i];
        m = std::max(m, std::sqrt(s));
    }
    return m;
}

double l2_norm(const VectorField& v, const RegionMask& region)
{
    double s = 0.0;
    for (std::size_t i = 0; i < v.grid().size(); ++i) {
        if (!region.contains(i)) continue;
        for (int c = 0; c < v.components(); ++c) s += v[c][i] * v[c][i];
    }
    return std::sqrt(s * v.grid().cell_volume());
}

ScalarField abs_squared(const ComplexField& psi)
{
    ScalarField out(psi.grid(), psi.time());
    for (std::size_t i = 0; i < psi.size(); ++i) out[i] = std::norm(psi[i]);
    return out;
}

ScalarField real_part(const ComplexField& f)
{
    ScalarField out(f.grid(), f.time());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i].real();
    return out;
}

ScalarField imag_part(const ComplexField& f)
{
    ScalarField out(f.grid(), f.time());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i].imag();
    return out;
}

ComplexField to_complex(const ScalarField& f)
{
    ComplexField out(f.grid(), f.time());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i];
    return out;
}

} // namespace madelung
