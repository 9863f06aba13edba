#pragma once

#include "madelung/dynamics.hpp"
#include "madelung/grid.hpp"

namespace madelung::analytic {

// ---------------------------------------------------------------------------
// Free spreading Gaussian packet (per axis, product over axes)

/// sigma(t) = sigma0 sqrt(1 + (hbar t / (2 m sigma0^2))^2), the standard
/// deviation of |psi|^2.
double gaussian_width(double t, double sigma0, double mass, double hbar);

/// Closed-form free packet on one axis whose t = 0 value is
/// (2 pi sigma0^2)^(-1/4) exp(-(x-x0)^2/(4 sigma0^2) + i p0 x / hbar).
Complex gaussian_packet_value(double x, double t, double x0, double p0, double sigma0, double mass, double hbar);

/// Drift field of the packet: p0/m + (x - x0 - p0 t/m) sigma'(t)/sigma(t).
double gaussian_packet_drift(double x, double t, double x0, double p0, double sigma0, double mass, double hbar);

struct GaussianPacketSolution {
    WaveState state;
    ScalarField rho;
    VectorField drift;
    double sigma = 0.0;
};

GaussianPacketSolution gaussian_packet(double t, const Point& x0, const Point& p0, double sigma0,
                                       const GridSpec& grid, const SimParams& params);

// ---------------------------------------------------------------------------
// Harmonic oscillator

/// Normalised Hermite function of order n in physical units,
/// ell^(-1/2) pi^(-1/4) (2^n n!)^(-1/2) H_n(x/ell) exp(-x^2 / (2 ell^2)),
/// ell = sqrt(hbar / (m omega)). Uses the stable three-term recurrence.
double hermite_function(int n, double x, double mass, double omega, double hbar);

/// E_n = hbar omega (n + 1/2) for one axis.
double oscillator_energy(int n, double omega, double hbar);

/// Eigenstate value including the exp(-i E_n t / hbar) factor.
Complex oscillator_eigenstate_value(int n, double x, double t, double mass, double omega, double hbar);

/// Coherent state |alpha(t)> with alpha(t) = alpha exp(-i omega t) and the
/// exact exp(-i omega t / 2) prefactor.
Complex coherent_state_value(Complex alpha, double x, double t, double mass, double omega, double hbar);

/// Classical centre sqrt(2 hbar / (m omega)) Re(alpha exp(-i omega t)).
double coherent_center(Complex alpha, double t, double mass, double omega, double hbar);

/// Product eigenstate with quantum numbers n[a] per active axis.
WaveState oscillator_eigenstate(const std::array<int, 3>& n, double t, const GridSpec& grid,
                                const SimParams& params, double omega);

/// Product coherent state.
WaveState coherent_state(const std::array<Complex, 3>& alpha, double t, const GridSpec& grid,
                         const SimParams& params, double omega);

// ---------------------------------------------------------------------------
// Hydrogen-type azimuthal drift field

struct HydrogenDriftParams {
    double m_tilde = 1.0;
    double mass = 1.0;
    double hbar = 1.0;
    /// Points closer than this to the z-axis are masked out.
    double r_min = 0.2;
};

struct HydrogenDriftField {
    VectorField drift;
    /// Points at cylindrical radius >= r_min.
    RegionMask valid;
};

/// X = hbar m~ / (m (x^2 + y^2)) (-y, x, 0), zero within r_min of the axis.
/// Requires a 3D grid; throws AxisTooClose if r_min < 2 h.
HydrogenDriftField hydrogen_drift_field(const HydrogenDriftParams& params, const GridSpec& grid);

/// Exact value of the field at a point (no masking).
Point hydrogen_drift_value(const HydrogenDriftParams& params, const Point& x);

/// Circle in the plane normal to `normal_axis`, traversed counter-clockwise
/// when viewed from the positive normal.
struct CircleLoop {
    Point center{0, 0, 0};
    double radius = 1.0;
    int normal_axis = 2;
};

/// (m / (2 pi hbar)) times the loop integral of v, using multilinear
/// interpolation and the periodic trapezoid rule over `samples` points.
/// Throws LoopLeavesGrid if any sample falls outside the grid.
double circulation(const VectorField& v, const CircleLoop& loop, int samples, double mass, double hbar);

} // namespace madelung::analytic
