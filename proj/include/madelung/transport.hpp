#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "madelung/bridge.hpp"
#include "madelung/dynamics.hpp"

namespace madelung {

// ---------------------------------------------------------------------------
// Trajectories of the drift field

struct TrajectoryBundle {
    int dim = 1;
    std::vector<Point> seeds;
    std::vector<double> times;
    /// positions[seed][time]
    std::vector<std::vector<Point>> positions;
    /// in_domain[seed][time]; once false the seed stays frozen.
    std::vector<std::vector<bool>> in_domain;

    /// Columns: t, seed_id, x[, y, z], in_domain
    void write_csv(std::ostream& out) const;
};

struct AdvectOptions {
    /// RK4 steps per snapshot interval.
    int substeps = 4;
    /// Freeze seeds whose nearest cell leaves the support.
    bool require_support = true;
};

/// RK4 in time, multilinear in space, linear in time between snapshots.
/// Snapshots must share a grid and be ordered in time (either direction).
TrajectoryBundle advect_points(std::span<const MadelungState> snapshots, std::span<const Point> seeds,
                               const AdvectOptions& options = {});

// ---------------------------------------------------------------------------
// Regions with explicit boundaries

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Closed loop of (axis 0, axis 1) vertices. Outer loops and holes are
/// told apart by the even-odd rule.
struct Polygon {
    std::vector<std::array<double, 2>> vertices;
};

/// 1D: disjoint intervals. 2D: boundary loops. 3D: a rasterised mask plus
/// the advected boundary-point cloud.
struct RegionGeometry {
    int dim = 1;
    std::vector<Interval> intervals;
    std::vector<Polygon> loops;
    std::optional<RegionMask> mask;
    std::vector<Point> surface;
};

/// Exact boundary of a cell mask (cell faces).
RegionGeometry boundary_of(const RegionMask& mask);

/// Interval [lo, hi] on a 1D grid; circle with `vertices` vertices in 2D.
RegionGeometry interval_region(double lo, double hi);
RegionGeometry disk_region(const std::array<double, 2>& center, double radius, int vertices = 256);

/// Cell-centre membership.
RegionMask rasterize(const RegionGeometry& region, const GridSpec& grid);

/// Fraction of each cell covered by the region: exact in 1D, from a
/// supersample x supersample point lattice per cell in 2D, 0/1 in 3D.
ScalarField coverage(const RegionGeometry& region, const GridSpec& grid, int supersample = 8);

struct RegionTransportOptions {
    AdvectOptions advect;
    int supersample = 8;
    /// Vertices are inserted on 2D loop edges longer than this many cells.
    double max_edge_cells = 1.0;
};

struct TransportedRegion {
    std::vector<double> times;
    std::vector<RegionGeometry> geometry;
    std::vector<RegionMask> masks;
};

/// Advects the region boundary with the drift flow and rasterises it at
/// every snapshot. 3D regions are rasterised by tracing cell centres back to
/// the initial time. Throws BoundaryDegenerate if an interval reverses or a
/// loop self-intersects.
TransportedRegion transport_region(std::span<const MadelungState> snapshots, const RegionGeometry& region,
                                   const RegionTransportOptions& options = {});
TransportedRegion transport_region(std::span<const MadelungState> snapshots, const RegionMask& region,
                                   const RegionTransportOptions& options = {});

// ---------------------------------------------------------------------------
// Probabilities and expectations over regions

/// Riemann sum of rho over the mask.
double probability_over_region(const MadelungState& state, const RegionMask& region);
/// Sub-cell quadrature: piecewise-cubic interpolation of rho in 1D,
/// coverage-weighted sums in 2D, mask sum in 3D.
double probability_over_region(const MadelungState& state, const RegionGeometry& region, int supersample = 8);

/// Integral of f rho over the region (same quadrature as above).
double region_integral(const ScalarField& f, const ScalarField& rho, const RegionGeometry& region, int supersample = 8);

struct ConservationReport {
    std::vector<double> times;
    std::vector<double> probabilities;
    double max_drift = 0.0;
};

ConservationReport conservation_check(std::span<const MadelungState> snapshots, const RegionGeometry& region,
                                      const RegionTransportOptions& options = {});

struct ExpectationDriftReport {
    /// Interior snapshot times (centred differences).
    std::vector<double> times;
    /// lhs[k][axis] = d/dt E[x, N_t]; rhs[k][axis] = E[X, N_t].
    std::vector<Point> lhs;
    std::vector<Point> rhs;
    double max_gap = 0.0;
};

ExpectationDriftReport expectation_drift_check(std::span<const MadelungState> snapshots,
                                               const RegionGeometry& region,
                                               const RegionTransportOptions& options = {});

struct LocalDriftReport {
    std::vector<double> radii;
    /// Per radius: (d/dt E[x, N^eps]) / P(N^eps) at the centre snapshot.
    std::vector<Point> ratios;
    Point extrapolated{0, 0, 0};
    Point interpolated_drift{0, 0, 0};
    double error = 0.0;
};

/// Balls of the given radii around `center` at snapshot `center_index` are
/// transported one snapshot forward and back; the ratio uses the centred
/// difference. The ratios are fitted by a polynomial in eps^2 and evaluated
/// at eps = 0. 1D and 2D only. Throws RadiusBelowGrid if min radius < 2h.
LocalDriftReport local_drift_estimate(std::span<const MadelungState> snapshots, std::size_t center_index,
                                      const Point& center, std::span<const double> radii,
                                      const RegionTransportOptions& options = {});

// ---------------------------------------------------------------------------
// Classical limit

struct ClassicalScenario {
    enum class Kind { Harmonic, FreeUniform } kind = Kind::Harmonic;
    double omega = 1.0;
    /// Initial Gaussian width and offset, held fixed for every mass.
    double sigma0 = 1.0;
    double x0 = 1.0;
    std::size_t points = 256;
    double half_width = 10.0;
    double dt = 1e-3;
    double t_final = 0.2;
    std::size_t snapshot_every = 20;
    double hbar = 1.0;
};

struct ClassicalLimitRow {
    double mass = 1.0;
    std::vector<double> times;
    /// rho-weighted L2 norm of F_B over that of F, per snapshot.
    std::vector<double> ratios;
    double mean_ratio = 0.0;
    double mean_bohm_norm = 0.0;
};

struct ClassicalLimitReport {
    std::vector<ClassicalLimitRow> rows;
    bool strictly_decreasing = false;
};

ClassicalLimitReport classical_limit_run(std::span<const double> masses, const ClassicalScenario& scenario);

/// sqrt(integral |F|^2 rho) over the support.
double weighted_force_norm(const VectorField& force, const MadelungState& state);

} // namespace madelung
