#include "madelung/analytic.hpp"

#include <cmath>
#include <numbers>

namespace madelung::analytic {

namespace {
constexpr double kPi = std::numbers::pi;
}

double gaussian_width(double t, double sigma0, double mass, double hbar)
{
    const double tau = hbar * t / (2.0 * mass * sigma0 * sigma0);
    return sigma0 * std::sqrt(1.0 + tau * tau);
}

Complex gaussian_packet_value(double x, double t, double x0, double p0, double sigma0, double mass, double hbar)
{
    const double tau = hbar * t / (2.0 * mass * sigma0 * sigma0);
    const Complex one_plus(1.0, tau);
    const double xi = x - x0 - p0 * t / mass;
    const Complex envelope = std::exp(-xi * xi / (4.0 * sigma0 * sigma0 * one_plus));
    const Complex boost = std::exp(Complex(0.0, (p0 * x - p0 * p0 * t / (2.0 * mass)) / hbar));
    return std::pow(2.0 * kPi * sigma0 * sigma0, -0.25) / std::sqrt(one_plus) * envelope * boost;
}

double gaussian_packet_drift(double x, double t, double x0, double p0, double sigma0, double mass, double hbar)
{
    const double tau = hbar * t / (2.0 * mass * sigma0 * sigma0);
    const double rate = tau * hbar / (2.0 * mass * sigma0 * sigma0) / (1.0 + tau * tau);
    return p0 / mass + (x - x0 - p0 * t / mass) * rate;
}

GaussianPacketSolution gaussian_packet(double t, const Point& x0, const Point& p0, double sigma0,
                                       const GridSpec& grid, const SimParams& params)
{
    const int dim = grid.dim();
    GaussianPacketSolution sol;
    sol.sigma = gaussian_width(t, sigma0, params.mass, params.hbar);
    ComplexField psi(grid, t);
    sol.drift = VectorField(grid, dim, t);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Point x = grid.position(i);
        Complex v = 1.0;
        for (int a = 0; a < dim; ++a) {
            v *= gaussian_packet_value(x[a], t, x0[a], p0[a], sigma0, params.mass, params.hbar);
            sol.drift[a][i] = gaussian_packet_drift(x[a], t, x0[a], p0[a], sigma0, params.mass, params.hbar);
        }
        psi[i] = v;
    }
    sol.rho = abs_squared(psi);
    sol.state.psi = std::move(psi);
    sol.state.time = t;
    sol.state.params = params;
    sol.state.initial_norm = sol.state.norm();
    return sol;
}

double hermite_function(int n, double x, double mass, double omega, double hbar)
{
    const double ell = std::sqrt(hbar / (mass * omega));
    const double xi = x / ell;
    double prev = 0.0;
    double cur = std::pow(kPi, -0.25) * std::exp(-0.5 * xi * xi);
    for (int k = 0; k < n; ++k) {
        const double next = std::sqrt(2.0 / (k + 1)) * xi * cur - std::sqrt(static_cast<double>(k) / (k + 1)) * prev;
        prev = cur;
        cur = next;
    }
    return cur / std::sqrt(ell);
}

double oscillator_energy(int n, double omega, double hbar) { return hbar * omega * (n + 0.5); }

Complex oscillator_eigenstate_value(int n, double x, double t, double mass, double omega, double hbar)
{
    const double phase = -oscillator_energy(n, omega, hbar) * t / hbar;
    return hermite_function(n, x, mass, omega, hbar) * std::exp(Complex(0.0, phase));
}

Complex coherent_state_value(Complex alpha, double x, double t, double mass, double omega, double hbar)
{
    const double ell = std::sqrt(hbar / (mass * omega));
    const double xi = x / ell;
    const Complex at = alpha * std::exp(Complex(0.0, -omega * t));
    const Complex exponent = -0.5 * xi * xi + std::sqrt(2.0) * at * xi - 0.5 * at * at - 0.5 * std::norm(at) +
                             Complex(0.0, -0.5 * omega * t);
    return std::pow(kPi, -0.25) / std::sqrt(ell) * std::exp(exponent);
}

double coherent_center(Complex alpha, double t, double mass, double omega, double hbar)
{
    return std::sqrt(2.0 * hbar / (mass * omega)) * (alpha * std::exp(Complex(0.0, -omega * t))).real();
}

WaveState oscillator_eigenstate(const std::array<int, 3>& n, double t, const GridSpec& grid,
                                const SimParams& params, double omega)
{
    WaveState s;
    s.psi = sample_complex(
        grid,
        [&](const Point& x) {
            Complex v = 1.0;
            for (int a = 0; a < grid.dim(); ++a)
                v *= oscillator_eigenstate_value(n[a], x[a], t, params.mass, omega, params.hbar);
            return v;
        },
        t);
    s.time = t;
    s.params = params;
    s.initial_norm = s.norm();
    return s;
}

WaveState coherent_state(const std::array<Complex, 3>& alpha, double t, const GridSpec& grid,
                         const SimParams& params, double omega)
{
    WaveState s;
    s.psi = sample_complex(
        grid,
        [&](const Point& x) {
            Complex v = 1.0;
            for (int a = 0; a < grid.dim(); ++a)
                v *= coherent_state_value(alpha[a], x[a], t, params.mass, omega, params.hbar);
            return v;
        },
        t);
    s.time = t;
    s.params = params;
    s.initial_norm = s.norm();
    return s;
}

// ---------------------------------------------------------------------------

Point hydrogen_drift_value(const HydrogenDriftParams& p, const Point& x)
{
    const double r2 = x[0] * x[0] + x[1] * x[1];
    const double scale = p.hbar * p.m_tilde / (p.mass * r2);
    return {-x[1] * scale, x[0] * scale, 0.0};
}

HydrogenDriftField hydrogen_drift_field(const HydrogenDriftParams& params, const GridSpec& grid)
{
    if (grid.dim() != 3) throw Error(ErrorCode::InvalidArgument, "hydrogen drift field needs a 3D grid");
    if (!(params.mass > 0.0) || !(params.hbar > 0.0))
        throw Error(ErrorCode::InvalidArgument, "mass and hbar must be positive");
    const double h = std::max(grid.spacing(0), grid.spacing(1));
    if (params.r_min < 2.0 * h)
        throw Error(ErrorCode::AxisTooClose, "r_min must be at least twice the grid spacing");
    HydrogenDriftField out{VectorField(grid, 3), RegionMask(grid)};
    const double rmin2 = params.r_min * params.r_min;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Point x = grid.position(i);
        if (x[0] * x[0] + x[1] * x[1] < rmin2) continue;
        const Point v = hydrogen_drift_value(params, x);
        for (int c = 0; c < 3; ++c) out.drift[c][i] = v[c];
        out.valid.set(i, true);
    }
    return out;
}

double circulation(const VectorField& v, const CircleLoop& loop, int samples, double mass, double hbar)
{
    if (samples < 3) throw Error(ErrorCode::InvalidArgument, "circulation needs at least 3 samples");
    const int a = (loop.normal_axis + 1) % 3;
    const int b = (loop.normal_axis + 2) % 3;
    const double dtheta = 2.0 * kPi / samples;
    double sum = 0.0;
    for (int s = 0; s < samples; ++s) {
        const double theta = s * dtheta;
        Point p = loop.center;
        p[a] += loop.radius * std::cos(theta);
        p[b] += loop.radius * std::sin(theta);
        auto val = interpolate(v, p);
        if (!val) throw Error(ErrorCode::LoopLeavesGrid, "loop sample outside the grid");
        // dl/dtheta
        Point tangent{0, 0, 0};
        tangent[a] = -loop.radius * std::sin(theta);
        tangent[b] = loop.radius * std::cos(theta);
        sum += (*val)[0] * tangent[0] + (*val)[1] * tangent[1] + (*val)[2] * tangent[2];
    }
    return mass / (2.0 * kPi * hbar) * sum * dtheta;
}

} // namespace madelung::analytic
