#include "madelung/transport.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>

namespace madelung {

namespace {

void require_snapshots(std::span<const MadelungState> snaps, std::size_t minimum)
{
    if (snaps.size() < minimum)
        throw Error(ErrorCode::InsufficientSnapshots, "need at least " + std::to_string(minimum) + " snapshots");
    const GridSpec& g = snaps.front().grid();
    for (const auto& s : snaps)
        if (!(s.grid() == g)) throw Error(ErrorCode::InvalidArgument, "snapshots do not share a grid");
}

bool on_support(const MadelungState& s, const Point& p)
{
    const auto cell = locate(s.grid(), p);
    return cell && s.support.contains(*cell);
}

/// Drift at a point, linearly blended between two snapshots.
std::optional<Point> blended_drift(const MadelungState& a, const MadelungState& b, double tau, const Point& p)
{
    auto va = interpolate(a.drift, p);
    auto vb = interpolate(b.drift, p);
    if (!va || !vb) return std::nullopt;
    Point v;
    for (int c = 0; c < 3; ++c) v[c] = (1.0 - tau) * (*va)[c] + tau * (*vb)[c];
    return v;
}

Point axpy(const Point& x, double a, const Point& y)
{
    return {x[0] + a * y[0], x[1] + a * y[1], x[2] + a * y[2]};
}

} // namespace

// ---------------------------------------------------------------------------

void TrajectoryBundle::write_csv(std::ostream& out) const
{
    static const char* names[3] = {"x", "y", "z"};
    out << "t,seed_id";
    for (int a = 0; a < dim; ++a) out << ',' << names[a];
    out << ",in_domain\n";
    out.precision(17);
    for (std::size_t k = 0; k < times.size(); ++k)
        for (std::size_t s = 0; s < seeds.size(); ++s) {
            out << times[k] << ',' << s;
            for (int a = 0; a < dim; ++a) out << ',' << positions[s][k][a];
            out << ',' << (in_domain[s][k] ? 1 : 0) << '\n';
        }
}

TrajectoryBundle advect_points(std::span<const MadelungState> snapshots, std::span<const Point> seeds,
                               const AdvectOptions& options)
{
    require_snapshots(snapshots, 1);
    if (options.substeps < 1) throw Error(ErrorCode::InvalidArgument, "substeps must be positive");
    TrajectoryBundle b;
    b.dim = snapshots.front().grid().dim();
    b.seeds.assign(seeds.begin(), seeds.end());
    for (const auto& s : snapshots) b.times.push_back(s.time);
    b.positions.assign(seeds.size(), {});
    b.in_domain.assign(seeds.size(), {});

    for (std::size_t i = 0; i < seeds.size(); ++i) {
        Point p = seeds[i];
        for (int a = b.dim; a < 3; ++a) p[a] = 0.0;
        bool alive = interpolate(snapshots[0].drift, p).has_value() &&
                     (!options.require_support || on_support(snapshots[0], p));
        b.positions[i].push_back(p);
        b.in_domain[i].push_back(alive);
        for (std::size_t k = 0; k + 1 < snapshots.size(); ++k) {
            const MadelungState& s0 = snapshots[k];
            const MadelungState& s1 = snapshots[k + 1];
            const double dt = (s1.time - s0.time) / options.substeps;
            for (int sub = 0; alive && sub < options.substeps; ++sub) {
                const double tau = static_cast<double>(sub) / options.substeps;
                const double dtau = 1.0 / options.substeps;
                auto k1 = blended_drift(s0, s1, tau, p);
                auto k2 = k1 ? blended_drift(s0, s1, tau + 0.5 * dtau, axpy(p, 0.5 * dt, *k1)) : std::nullopt;
                auto k3 = k2 ? blended_drift(s0, s1, tau + 0.5 * dtau, axpy(p, 0.5 * dt, *k2)) : std::nullopt;
                auto k4 = k3 ? blended_drift(s0, s1, tau + dtau, axpy(p, dt, *k3)) : std::nullopt;
                if (!k4) {
                    alive = false;
                    break;
                }
                for (int a = 0; a < b.dim; ++a)
                    p[a] += dt / 6.0 * ((*k1)[a] + 2.0 * (*k2)[a] + 2.0 * (*k3)[a] + (*k4)[a]);
                if (!interpolate(s1.drift, p)) alive = false;
            }
            if (alive && options.require_support && !on_support(s1, p)) alive = false;
            b.positions[i].push_back(p);
            b.in_domain[i].push_back(alive);
        }
    }
    return b;
}

// ---------------------------------------------------------------------------
// Geometry

RegionGeometry interval_region(double lo, double hi)
{
    if (!(hi > lo)) throw Error(ErrorCode::BoundaryDegenerate, "interval must have hi > lo");
    RegionGeometry r;
    r.dim = 1;
    r.intervals.push_back({lo, hi});
    return r;
}

RegionGeometry disk_region(const std::array<double, 2>& center, double radius, int vertices)
{
    if (!(radius > 0.0) || vertices < 3) throw Error(ErrorCode::InvalidArgument, "bad disk");
    RegionGeometry r;
    r.dim = 2;
    Polygon poly;
    for (int v = 0; v < vertices; ++v) {
        const double th = 2.0 * std::numbers::pi * v / vertices;
        poly.vertices.push_back({center[0] + radius * std::cos(th), center[1] + radius * std::sin(th)});
    }
    r.loops.push_back(std::move(poly));
    return r;
}

namespace {

RegionGeometry boundary_1d(const RegionMask& mask)
{
    const GridSpec& g = mask.grid();
    RegionGeometry r;
    r.dim = 1;
    const double h = g.spacing(0);
    std::size_t i = 0;
    const std::size_t n = g.points(0);
    while (i < n) {
        if (!mask.contains(i)) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < n && mask.contains(j + 1)) ++j;
        r.intervals.push_back({g.lower(0) + i * h, g.lower(0) + (j + 1) * h});
        i = j + 1;
    }
    return r;
}

RegionGeometry boundary_2d(const RegionMask& mask)
{
    const GridSpec& g = mask.grid();
    const std::size_t nx = g.points(0);
    const std::size_t ny = g.points(1);
    const auto member = [&](long i, long j) {
        if (i < 0 || j < 0 || i >= static_cast<long>(nx) || j >= static_cast<long>(ny)) return false;
        return mask.contains(g.flat(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
    };
    // Corner (i, j) has id i * (ny + 1) + j. Edges are directed so the
    // members lie on the left.
    using Corner = std::size_t;
    const auto id = [&](std::size_t i, std::size_t j) { return i * (ny + 1) + j; };
    std::multimap<Corner, Corner> next;
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < ny; ++j) {
            if (!member(static_cast<long>(i), static_cast<long>(j))) continue;
            const long li = static_cast<long>(i), lj = static_cast<long>(j);
            if (!member(li, lj - 1)) next.emplace(id(i, j), id(i + 1, j));
            if (!member(li + 1, lj)) next.emplace(id(i + 1, j), id(i + 1, j + 1));
            if (!member(li, lj + 1)) next.emplace(id(i + 1, j + 1), id(i, j + 1));
            if (!member(li - 1, lj)) next.emplace(id(i, j + 1), id(i, j));
        }
    RegionGeometry r;
    r.dim = 2;
    const double hx = g.spacing(0), hy = g.spacing(1);
    while (!next.empty()) {
        auto it = next.begin();
        const Corner start = it->first;
        Corner cur = start;
        Polygon poly;
        do {
            poly.vertices.push_back({g.lower(0) + static_cast<double>(cur / (ny + 1)) * hx,
                                     g.lower(1) + static_cast<double>(cur % (ny + 1)) * hy});
            auto e = next.find(cur);
            if (e == next.end()) break;
            const Corner to = e->second;
            next.erase(e);
            cur = to;
        } while (cur != start);
        r.loops.push_back(std::move(poly));
    }
    return r;
}

RegionGeometry boundary_3d(const RegionMask& mask)
{
    RegionGeometry r;
    r.dim = 3;
    r.mask = mask;
    const GridSpec& g = mask.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!mask.contains(i)) continue;
        bool edge = false;
        for (int a = 0; a < 3 && !edge; ++a)
            for (int s : {-1, 1}) {
                const auto q = g.neighbor(i, a, s);
                if (!q || !mask.contains(*q)) edge = true;
            }
        if (edge) r.surface.push_back(g.position(i));
    }
    return r;
}

} // namespace

RegionGeometry boundary_of(const RegionMask& mask)
{
    switch (mask.grid().dim()) {
    case 1: return boundary_1d(mask);
    case 2: return boundary_2d(mask);
    default: return boundary_3d(mask);
    }
}

namespace {

/// Even-odd scanline fill at y: returns sorted crossing abscissae.
std::vector<double> crossings(const std::vector<Polygon>& loops, double y)
{
    std::vector<double> xs;
    for (const auto& poly : loops) {
        const auto& v = poly.vertices;
        for (std::size_t e = 0; e < v.size(); ++e) {
            const auto& a = v[e];
            const auto& b = v[(e + 1) % v.size()];
            if ((a[1] <= y) == (b[1] <= y)) continue;
            xs.push_back(a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1]));
        }
    }
    std::sort(xs.begin(), xs.end());
    return xs;
}

/// Counts lattice samples inside the loops; samples per cell per axis = s.
std::vector<int> sample_counts(const std::vector<Polygon>& loops, const GridSpec& g, int s)
{
    const std::size_t nx = g.points(0), ny = g.points(1);
    const double hx = g.spacing(0) / s, hy = g.spacing(1) / s;
    std::vector<int> count(g.size(), 0);
    const std::size_t cols = nx * static_cast<std::size_t>(s);
    for (std::size_t row = 0; row < ny * static_cast<std::size_t>(s); ++row) {
        const double y = g.lower(1) + (static_cast<double>(row) + 0.5) * hy;
        const auto xs = crossings(loops, y);
        for (std::size_t m = 0; m + 1 < xs.size(); m += 2) {
            // samples with lower + (c + 1/2) hx in [xs[m], xs[m+1])
            const double c0 = std::ceil((xs[m] - g.lower(0)) / hx - 0.5);
            const double c1 = std::ceil((xs[m + 1] - g.lower(0)) / hx - 0.5);
            const auto first = static_cast<long>(std::max(c0, 0.0));
            const auto last = static_cast<long>(std::min(c1, static_cast<double>(cols)));
            for (long c = first; c < last; ++c)
                ++count[g.flat(static_cast<std::size_t>(c) / static_cast<std::size_t>(s),
                               row / static_cast<std::size_t>(s))];
        }
    }
    return count;
}

} // namespace

RegionMask rasterize(const RegionGeometry& region, const GridSpec& grid)
{
    if (region.dim != grid.dim()) throw Error(ErrorCode::InvalidArgument, "region and grid dimension differ");
    if (region.dim == 3) {
        if (!region.mask) throw Error(ErrorCode::InvalidArgument, "3D region carries no mask");
        return *region.mask;
    }
    if (region.dim == 1)
        return RegionMask::where(grid, [&](const Point& x, std::size_t) {
            for (const auto& iv : region.intervals)
                if (x[0] >= iv.lo && x[0] < iv.hi) return true;
            return false;
        });
    const auto count = sample_counts(region.loops, grid, 1);
    RegionMask m(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) m.set(i, count[i] > 0);
    return m;
}

ScalarField coverage(const RegionGeometry& region, const GridSpec& grid, int supersample)
{
    if (region.dim != grid.dim()) throw Error(ErrorCode::InvalidArgument, "region and grid dimension differ");
    ScalarField w(grid);
    if (region.dim == 1) {
        const double h = grid.spacing(0);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double lo = grid.lower(0) + i * h;
            for (const auto& iv : region.intervals)
                w[i] += std::max(0.0, std::min(iv.hi, lo + h) - std::max(iv.lo, lo)) / h;
        }
    } else if (region.dim == 2) {
        if (supersample < 1) throw Error(ErrorCode::InvalidArgument, "supersample must be positive");
        const auto count = sample_counts(region.loops, grid, supersample);
        const double inv = 1.0 / (supersample * supersample);
        for (std::size_t i = 0; i < grid.size(); ++i) w[i] = count[i] * inv;
    } else {
        const RegionMask m = rasterize(region, grid);
        for (std::size_t i = 0; i < grid.size(); ++i) w[i] = m.contains(i) ? 1.0 : 0.0;
    }
    return w;
}

// ---------------------------------------------------------------------------
// Quadrature

namespace {

/// Cubic Lagrange interpolant of 1D samples; periodic axes wrap, bounded
/// axes use the nearest in-range 4-point stencil.
double cubic_at(std::span<const double> f, const GridSpec& g, double x)
{
    const double h = g.spacing(0);
    const long n = static_cast<long>(g.points(0));
    const double u = (x - g.lower(0)) / h - 0.5;
    long j = static_cast<long>(std::floor(u));
    long first = j - 1;
    if (!g.periodic(0)) first = std::clamp(first, 0L, n - 4);
    const double t = u - static_cast<double>(first);
    double out = 0.0;
    for (int a = 0; a < 4; ++a) {
        double l = 1.0;
        for (int b = 0; b < 4; ++b)
            if (b != a) l *= (t - b) / static_cast<double>(a - b);
        long idx = first + a;
        if (g.periodic(0)) idx = ((idx % n) + n) % n;
        out += l * f[static_cast<std::size_t>(idx)];
    }
    return out;
}

double interval_integral(std::span<const double> f, const GridSpec& g, double lo, double hi)
{
    const double h = g.spacing(0);
    if (!g.periodic(0)) {
        lo = std::max(lo, g.lower(0));
        hi = std::min(hi, g.upper(0));
    }
    if (!(hi > lo)) return 0.0;
    // Breakpoints at cell centres; 3-point Gauss is exact for the cubic.
    static const double gx[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
    static const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    double sum = 0.0;
    double a = lo;
    while (a < hi) {
        const double node = g.lower(0) + (std::floor((a - g.lower(0)) / h - 0.5) + 1.5) * h;
        const double b = std::min(hi, node);
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (int q = 0; q < 3; ++q) sum += gw[q] * half * cubic_at(f, g, mid + half * gx[q]);
        if (b >= hi) break;
        a = b;
    }
    return sum;
}

} // namespace

double region_integral(const ScalarField& f, const ScalarField& rho, const RegionGeometry& region, int supersample)
{
    const GridSpec& g = rho.grid();
    std::vector<double> prod(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) prod[i] = f[i] * rho[i];
    if (region.dim == 1) {
        double sum = 0.0;
        for (const auto& iv : region.intervals) sum += interval_integral(prod, g, iv.lo, iv.hi);
        return sum;
    }
    const ScalarField w = coverage(region, g, supersample);
    double sum = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) sum += w[i] * prod[i];
    return sum * g.cell_volume();
}

double probability_over_region(const MadelungState& state, const RegionMask& region)
{
    return integrate(state.rho, region);
}

double probability_over_region(const MadelungState& state, const RegionGeometry& region, int supersample)
{
    const ScalarField one(state.grid(), 0.0, 1.0);
    return region_integral(one, state.rho, region, supersample);
}

// ---------------------------------------------------------------------------
// Region transport

namespace {

bool segments_cross(const std::array<double, 2>& p1, const std::array<double, 2>& p2, const std::array<double, 2>& q1,
                    const std::array<double, 2>& q2)
{
    const auto orient = [](const auto& a, const auto& b, const auto& c) {
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    };
    const double d1 = orient(q1, q2, p1), d2 = orient(q1, q2, p2);
    const double d3 = orient(p1, p2, q1), d4 = orient(p1, p2, q2);
    return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

void check_loops(const std::vector<Polygon>& loops)
{
    struct Seg {
        std::array<double, 2> a, b;
        std::size_t loop, index, size;
    };
    std::vector<Seg> segs;
    for (std::size_t l = 0; l < loops.size(); ++l) {
        const auto& v = loops[l].vertices;
        for (std::size_t e = 0; e < v.size(); ++e) segs.push_back({v[e], v[(e + 1) % v.size()], l, e, v.size()});
    }
    std::sort(segs.begin(), segs.end(),
              [](const Seg& x, const Seg& y) { return std::min(x.a[0], x.b[0]) < std::min(y.a[0], y.b[0]); });
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const double xmax = std::max(segs[i].a[0], segs[i].b[0]);
        for (std::size_t j = i + 1; j < segs.size(); ++j) {
            if (std::min(segs[j].a[0], segs[j].b[0]) > xmax) break;
            const Seg& s = segs[i];
            const Seg& t = segs[j];
            if (s.loop == t.loop) {
                const std::size_t d = s.index > t.index ? s.index - t.index : t.index - s.index;
                if (d <= 1 || d + 1 == s.size) continue;
            }
            if (segments_cross(s.a, s.b, t.a, t.b))
                throw Error(ErrorCode::BoundaryDegenerate, "transported boundary intersects itself");
        }
    }
}

std::vector<Polygon> refine_loops(const std::vector<Polygon>& loops, double max_len)
{
    std::vector<Polygon> out;
    for (const auto& poly : loops) {
        Polygon p;
        const auto& v = poly.vertices;
        for (std::size_t e = 0; e < v.size(); ++e) {
            const auto& a = v[e];
            const auto& b = v[(e + 1) % v.size()];
            const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
            const int pieces = std::max(1, static_cast<int>(std::ceil(len / max_len)));
            for (int k = 0; k < pieces; ++k) {
                const double s = static_cast<double>(k) / pieces;
                p.vertices.push_back({a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])});
            }
        }
        out.push_back(std::move(p));
    }
    return out;
}

AdvectOptions boundary_advect(const RegionTransportOptions& o)
{
    // Boundary points may sit in the masked tails, where the drift is zero.
    AdvectOptions a = o.advect;
    a.require_support = false;
    return a;
}

} // namespace

TransportedRegion transport_region(std::span<const MadelungState> snapshots, const RegionGeometry& region,
                                   const RegionTransportOptions& options)
{
    require_snapshots(snapshots, 1);
    const GridSpec& g = snapshots.front().grid();
    if (region.dim != g.dim()) throw Error(ErrorCode::InvalidArgument, "region and grid dimension differ");
    TransportedRegion out;
    for (const auto& s : snapshots) out.times.push_back(s.time);
    const AdvectOptions adv = boundary_advect(options);

    if (g.dim() == 1) {
        std::vector<Point> seeds;
        for (const auto& iv : region.intervals) {
            if (!(iv.hi > iv.lo)) throw Error(ErrorCode::BoundaryDegenerate, "interval with hi <= lo");
            seeds.push_back({iv.lo, 0, 0});
            seeds.push_back({iv.hi, 0, 0});
        }
        const auto traj = advect_points(snapshots, seeds, adv);
        for (std::size_t k = 0; k < snapshots.size(); ++k) {
            RegionGeometry geo;
            geo.dim = 1;
            for (std::size_t i = 0; i < region.intervals.size(); ++i) {
                const Interval iv{traj.positions[2 * i][k][0], traj.positions[2 * i + 1][k][0]};
                if (!(iv.hi > iv.lo) || (!geo.intervals.empty() && iv.lo < geo.intervals.back().hi))
                    throw Error(ErrorCode::BoundaryDegenerate, "transported intervals reversed or overlapping");
                geo.intervals.push_back(iv);
            }
            out.masks.push_back(rasterize(geo, g));
            out.geometry.push_back(std::move(geo));
        }
        return out;
    }

    if (g.dim() == 2) {
        const double max_len = options.max_edge_cells * std::min(g.spacing(0), g.spacing(1));
        const auto loops = refine_loops(region.loops, max_len);
        std::vector<Point> seeds;
        for (const auto& poly : loops)
            for (const auto& v : poly.vertices) seeds.push_back({v[0], v[1], 0});
        const auto traj = advect_points(snapshots, seeds, adv);
        for (std::size_t k = 0; k < snapshots.size(); ++k) {
            RegionGeometry geo;
            geo.dim = 2;
            std::size_t s = 0;
            for (const auto& poly : loops) {
                Polygon p;
                for (std::size_t v = 0; v < poly.vertices.size(); ++v, ++s)
                    p.vertices.push_back({traj.positions[s][k][0], traj.positions[s][k][1]});
                geo.loops.push_back(std::move(p));
            }
            check_loops(geo.loops);
            out.masks.push_back(rasterize(geo, g));
            out.geometry.push_back(std::move(geo));
        }
        return out;
    }

    // 3D: backward tracing of cell centres plus a forward surface cloud.
    if (!region.mask) throw Error(ErrorCode::InvalidArgument, "3D region carries no mask");
    std::vector<Point> centres(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) centres[i] = g.position(i);
    const auto surface = advect_points(snapshots, region.surface, adv);
    for (std::size_t k = 0; k < snapshots.size(); ++k) {
        RegionGeometry geo;
        geo.dim = 3;
        RegionMask m(g);
        if (k == 0) {
            m = *region.mask;
        } else {
            std::vector<MadelungState> back(snapshots.begin(), snapshots.begin() + static_cast<long>(k) + 1);
            std::reverse(back.begin(), back.end());
            const auto traced = advect_points(back, centres, adv);
            for (std::size_t i = 0; i < g.size(); ++i) {
                const auto cell = locate(g, traced.positions[i].back());
                m.set(i, cell && region.mask->contains(*cell));
            }
        }
        for (std::size_t s = 0; s < region.surface.size(); ++s) geo.surface.push_back(surface.positions[s][k]);
        geo.mask = m;
        out.masks.push_back(m);
        out.geometry.push_back(std::move(geo));
    }
    return out;
}

TransportedRegion transport_region(std::span<const MadelungState> snapshots, const RegionMask& region,
                                   const RegionTransportOptions& options)
{
    return transport_region(snapshots, boundary_of(region), options);
}

ConservationReport conservation_check(std::span<const MadelungState> snapshots, const RegionGeometry& region,
                                      const RegionTransportOptions& options)
{
    const auto tr = transport_region(snapshots, region, options);
    ConservationReport r;
    r.times = tr.times;
    for (std::size_t k = 0; k < snapshots.size(); ++k) {
        r.probabilities.push_back(probability_over_region(snapshots[k], tr.geometry[k], options.supersample));
        r.max_drift = std::max(r.max_drift, std::abs(r.probabilities.back() - r.probabilities.front()));
    }
    return r;
}

namespace {

Point region_moment(const MadelungState& s, const RegionGeometry& geo, int supersample)
{
    const GridSpec& g = s.grid();
    Point out{0, 0, 0};
    for (int a = 0; a < g.dim(); ++a) {
        const ScalarField x = sample(g, [a](const Point& p) { return p[a]; });
        out[a] = region_integral(x, s.rho, geo, supersample);
    }
    return out;
}

Point region_drift(const MadelungState& s, const RegionGeometry& geo, int supersample)
{
    Point out{0, 0, 0};
    for (int a = 0; a < s.grid().dim(); ++a) out[a] = region_integral(s.drift[a], s.rho, geo, supersample);
    return out;
}

} // namespace

ExpectationDriftReport expectation_drift_check(std::span<const MadelungState> snapshots,
                                               const RegionGeometry& region, const RegionTransportOptions& options)
{
    require_snapshots(snapshots, 3);
    const auto tr = transport_region(snapshots, region, options);
    std::vector<Point> moments;
    for (std::size_t k = 0; k < snapshots.size(); ++k)
        moments.push_back(region_moment(snapshots[k], tr.geometry[k], options.supersample));
    ExpectationDriftReport r;
    for (std::size_t k = 1; k + 1 < snapshots.size(); ++k) {
        const double span = snapshots[k + 1].time - snapshots[k - 1].time;
        Point lhs{0, 0, 0};
        for (int a = 0; a < 3; ++a) lhs[a] = (moments[k + 1][a] - moments[k - 1][a]) / span;
        const Point rhs = region_drift(snapshots[k], tr.geometry[k], options.supersample);
        r.times.push_back(snapshots[k].time);
        r.lhs.push_back(lhs);
        r.rhs.push_back(rhs);
        r.max_gap = std::max(r.max_gap, std::hypot(lhs[0] - rhs[0], lhs[1] - rhs[1], lhs[2] - rhs[2]));
    }
    return r;
}

LocalDriftReport local_drift_estimate(std::span<const MadelungState> snapshots, std::size_t center_index,
                                      const Point& center, std::span<const double> radii,
                                      const RegionTransportOptions& options)
{
    require_snapshots(snapshots, 3);
    const GridSpec& g = snapshots.front().grid();
    if (g.dim() == 3) throw Error(ErrorCode::InvalidArgument, "local drift estimate supports 1D and 2D grids");
    if (center_index == 0 || center_index + 1 >= snapshots.size())
        throw Error(ErrorCode::InvalidArgument, "centre snapshot needs a neighbour on each side");
    if (radii.empty()) throw Error(ErrorCode::InvalidArgument, "no radii given");
    double hmax = 0.0;
    for (int a = 0; a < g.dim(); ++a) hmax = std::max(hmax, g.spacing(a));
    if (*std::min_element(radii.begin(), radii.end()) < 2.0 * hmax)
        throw Error(ErrorCode::RadiusBelowGrid, "smallest radius is below two grid spacings");

    const MadelungState& mid = snapshots[center_index];
    const std::vector<MadelungState> forward{mid, snapshots[center_index + 1]};
    const std::vector<MadelungState> backward{mid, snapshots[center_index - 1]};
    const double span = snapshots[center_index + 1].time - snapshots[center_index - 1].time;

    LocalDriftReport r;
    for (double eps : radii) {
        const RegionGeometry ball = g.dim() == 1 ? interval_region(center[0] - eps, center[0] + eps)
                                                 : disk_region({center[0], center[1]}, eps, 512);
        const auto fw = transport_region(forward, ball, options);
        const auto bw = transport_region(backward, ball, options);
        const Point ep = region_moment(forward[1], fw.geometry[1], options.supersample);
        const Point em = region_moment(backward[1], bw.geometry[1], options.supersample);
        const double p = probability_over_region(mid, ball, options.supersample);
        if (!(p > 0.0)) throw Error(ErrorCode::EmptyRegion, "ball carries no probability");
        Point ratio{0, 0, 0};
        for (int a = 0; a < g.dim(); ++a) ratio[a] = (ep[a] - em[a]) / span / p;
        r.radii.push_back(eps);
        r.ratios.push_back(ratio);
    }

    // Least squares in eps^2, degree up to 2.
    const int n = static_cast<int>(radii.size());
    const int degree = std::min(2, n - 1);
    Eigen::MatrixXd A(n, degree + 1);
    for (int i = 0; i < n; ++i) {
        const double e2 = radii[static_cast<std::size_t>(i)] * radii[static_cast<std::size_t>(i)];
        for (int d = 0; d <= degree; ++d) A(i, d) = std::pow(e2, d);
    }
    const auto qr = A.colPivHouseholderQr();
    for (int a = 0; a < g.dim(); ++a) {
        Eigen::VectorXd b(n);
        for (int i = 0; i < n; ++i) b(i) = r.ratios[static_cast<std::size_t>(i)][a];
        r.extrapolated[a] = qr.solve(b)(0);
    }
    if (auto v = interpolate(mid.drift, center)) r.interpolated_drift = *v;
    r.error = std::hypot(r.extrapolated[0] - r.interpolated_drift[0], r.extrapolated[1] - r.interpolated_drift[1]);
    return r;
}

// ---------------------------------------------------------------------------
// Classical limit

double weighted_force_norm(const VectorField& force, const MadelungState& state)
{
    const GridSpec& g = state.grid();
    double sum = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!state.support.contains(i)) continue;
        double f2 = 0.0;
        for (int a = 0; a < force.components(); ++a) f2 += force[a][i] * force[a][i];
        sum += f2 * state.rho[i];
    }
    return std::sqrt(sum * g.cell_volume());
}

ClassicalLimitReport classical_limit_run(std::span<const double> masses, const ClassicalScenario& sc)
{
    if (masses.empty()) throw Error(ErrorCode::InvalidArgument, "empty mass sequence");
    for (std::size_t i = 1; i < masses.size(); ++i)
        if (!(masses[i] > masses[i - 1])) throw Error(ErrorCode::InvalidArgument, "masses must increase");
    const GridSpec g = GridSpec::cube(1, sc.points, -sc.half_width, sc.half_width, true);
    ClassicalLimitReport rep;
    for (double m : masses) {
        SimParams p;
        p.mass = m;
        p.hbar = sc.hbar;
        p.dt = sc.dt;
        p.t_final = sc.t_final;
        p.snapshot_every = sc.snapshot_every;
        p.solver = SolverKind::SplitStepFourier;
        Potential V = sc.kind == ClassicalScenario::Kind::Harmonic ? Potential(HarmonicPotential{sc.omega, {0, 0, 0}})
                                                                   : Potential::free();
        WaveState init;
        if (sc.kind == ClassicalScenario::Kind::Harmonic) {
            GaussianPacketInit gi;
            gi.x0 = {sc.x0, 0, 0};
            gi.sigma = sc.sigma0;
            init = initialize(gi, g, p);
        } else {
            init = initialize(CustomInit{ComplexField(g, 0.0, Complex(1.0, 0.0))}, g, p);
        }
        const Trajectory traj = evolve(init, V, sc.t_final);
        const VectorField F = V.force(g, m);
        ClassicalLimitRow row;
        row.mass = m;
        DecomposeOptions dop;
        dop.rho_floor_relative = 1e-8;
        double bohm_sum = 0.0;
        for (const auto& snap : traj.snapshots) {
            const MadelungState s = decompose(snap, dop);
            QuantumPotentialOptions q;
            q.support = s.support;
            const VectorField fb = bohm_force(s.rho, p, q);
            const double nb = weighted_force_norm(fb, s);
            const double nf = weighted_force_norm(F, s);
            row.times.push_back(s.time);
            row.ratios.push_back(nf > 0.0 ? nb / nf : (nb > 0.0 ? INFINITY : 0.0));
            bohm_sum += nb;
        }
        for (double r : row.ratios) row.mean_ratio += r;
        row.mean_ratio /= static_cast<double>(row.ratios.size());
        row.mean_bohm_norm = bohm_sum / static_cast<double>(row.ratios.size());
        rep.rows.push_back(std::move(row));
    }
    rep.strictly_decreasing = true;
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        if (!(rep.rows[i].mean_ratio < rep.rows[i - 1].mean_ratio)) rep.strictly_decreasing = false;
    return rep;
}

} // namespace madelung
