#pragma once

#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "madelung/grid.hpp"

namespace madelung {

enum class SolverKind { SplitStepFourier, CrankNicolson };

struct SimParams {
    double mass = 1.0;
    double hbar = 1.0;
    double dt = 1e-3;
    double t_final = 1.0;
    SolverKind solver = SolverKind::SplitStepFourier;
    /// Record every k-th step in evolve().
    std::size_t snapshot_every = 1;
    /// Crank-Nicolson linear-solve controls (2D/3D iterative path).
    double cn_tolerance = 1e-12;
    int cn_max_iterations = 1000;
    /// Warn when the mass in the two outermost layers of a bounded axis
    /// exceeds this.
    double boundary_mass_warning = 1e-8;

    void validate() const;
    friend bool operator==(const SimParams&, const SimParams&) = default;
};

// ---------------------------------------------------------------------------
// Potentials

struct FreePotential {};
/// V = m omega^2 |x - center|^2 / 2 (isotropic).
struct HarmonicPotential {
    double omega = 1.0;
    Point center{0, 0, 0};
};
/// V = -q / sqrt(|x - center|^2 + eps^2).
struct SoftCoulombPotential {
    double charge = 1.0;
    double epsilon = 0.1;
    Point center{0, 0, 0};
};
struct Slab {
    int axis = 0;
    double lo = 0.0;
    double hi = 0.0;
    double height = 0.0;
};
struct BarrierPotential {
    std::vector<Slab> slabs;
};
/// Wall perpendicular to axis 0 at [wall_x - thickness/2, wall_x + thickness/2],
/// with two openings centred at +-separation/2 along axis 1.
struct DoubleSlitPotential {
    double wall_x = 0.0;
    double thickness = 0.2;
    double height = 100.0;
    double separation = 2.0;
    double slit_width = 0.5;
};

using PotentialKind =
    std::variant<FreePotential, HarmonicPotential, SoftCoulombPotential, BarrierPotential, DoubleSlitPotential>;

/// A time-independent external potential. Values and the conservative force
/// F = -grad V are produced on demand for a grid; the force is analytic for
/// the smooth kinds and a local finite difference for barrier/slit walls.
class Potential {
public:
    Potential() = default;
    explicit Potential(PotentialKind kind) : kind_(std::move(kind)) {}

    static Potential free() { return Potential(FreePotential{}); }
    static Potential harmonic(double omega) { return Potential(HarmonicPotential{omega, {0, 0, 0}}); }

    const PotentialKind& kind() const { return kind_; }
    std::string name() const;

    double value(const Point& x, int dim, double mass) const;
    ScalarField values(const GridSpec& grid, double mass) const;
    VectorField force(const GridSpec& grid, double mass) const;

private:
    PotentialKind kind_ = FreePotential{};
};

// ---------------------------------------------------------------------------
// Wave states

struct WaveState {
    ComplexField psi;
    double time = 0.0;
    SimParams params;
    /// L2 norm squared at construction; unitary steps are checked against it.
    double initial_norm = 1.0;
    /// Non-fatal conditions encountered so far (e.g. "BoundaryLeak").
    std::vector<std::string> warnings;

    double norm() const;
    const GridSpec& grid() const { return psi.grid(); }
    void add_warning(const std::string& w);
};

/// Real positive Gaussian with a plane-wave boost, per axis:
/// psi ~ exp(-(x-x0)^2 / (4 sigma^2) + i p0 x / hbar).
struct GaussianPacketInit {
    Point x0{0, 0, 0};
    Point p0{0, 0, 0};
    double sigma = 1.0;
};
struct HarmonicEigenstateInit {
    std::array<int, 3> n{0, 0, 0};
    double omega = 1.0;
};
struct CoherentStateInit {
    std::array<Complex, 3> alpha{};
    double omega = 1.0;
};
struct CustomInit {
    ComplexField field;
};

using InitialKind = std::variant<GaussianPacketInit, HarmonicEigenstateInit, CoherentStateInit, CustomInit>;

/// Samples the initial wave function and normalises it once.
/// Throws NonNormalizable if the norm is below 1e-300 or not finite.
WaveState initialize(const InitialKind& kind, const GridSpec& grid, const SimParams& params);

/// Pre-computed single-step propagator for one grid, potential and parameter
/// set. Not thread-safe for concurrent step() calls on the same instance;
/// construct one per thread.
class Propagator {
public:
    Propagator(const GridSpec& grid, const Potential& potential, const SimParams& params);
    ~Propagator();
    Propagator(Propagator&&) noexcept;
    Propagator& operator=(Propagator&&) noexcept;

    /// Advances by params.dt. SplitStepFourier: Strang splitting
    /// (half potential, full kinetic in frequency space, half potential).
    /// CrankNicolson: implicit midpoint with a 2nd-order Laplacian and
    /// homogeneous Dirichlet walls.
    WaveState step(const WaveState& state) const;

    /// In-place variant used by long runs.
    void advance(ComplexField& psi) const;

    const SimParams& params() const { return params_; }
    const ScalarField& potential_values() const { return potential_; }

private:
    struct CrankNicolsonSystem;
    GridSpec grid_;
    SimParams params_;
    ScalarField potential_;
    std::vector<Complex> half_potential_phase_;
    std::vector<Complex> kinetic_phase_;
    std::unique_ptr<CrankNicolsonSystem> cn_;
};

WaveState step(const WaveState& state, const Potential& potential);

using Observer = std::function<void(const WaveState&, std::size_t step_index)>;

struct Trajectory {
    std::vector<WaveState> snapshots;
    /// |psi|^2 integral after every step (index 0 = initial state).
    std::vector<double> norm_series;
    std::vector<double> norm_times;
    std::vector<std::string> warnings;

    double max_norm_deviation() const;
};

/// Repeated step() until t_final (rounded to a whole number of steps).
/// Snapshots are taken every params.snapshot_every steps plus the initial
/// and final states.
Trajectory evolve(const WaveState& initial, const Potential& potential, double t_final,
                  const std::vector<Observer>& observers = {});

/// Fraction of |psi|^2 in the two outermost layers of every bounded axis.
double boundary_mass(const ComplexField& psi);

} // namespace madelung
