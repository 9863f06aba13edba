#include "madelung/observables.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "fft.hpp"

namespace madelung {

double expectation(const ScalarField& f, const MadelungState& state, const RegionMask& region)
{
    ScalarField w(state.grid(), state.time);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = f[i] * state.rho[i];
    return integrate(w, region);
}

Point momentum_kolmogorov(const MadelungState& state, const RegionMask& region)
{
    Point p{0, 0, 0};
    for (int a = 0; a < state.grid().dim(); ++a) p[a] = state.params.mass * expectation(state.drift[a], state, region);
    return p;
}

OperatorValue momentum_operator(const WaveState& psi, const std::optional<RegionMask>& region)
{
    const GridSpec& g = psi.grid();
    if (region && !(*region == RegionMask::full(g)))
        throw Error(ErrorCode::RegionNotSupported, "momentum operator expectation is only defined on the full domain");
    OperatorValue out;
    for (int a = 0; a < g.dim(); ++a) {
        const ComplexField d = derivative(psi.psi, a);
        Complex sum = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) sum += std::conj(psi.psi[i]) * d[i];
        const Complex v = Complex(0.0, -psi.params.hbar) * sum * g.cell_volume();
        out.value[a] = v.real();
        out.imaginary_residue[a] = v.imag();
    }
    return out;
}

EnergyField energy_field(const MadelungState& state, const ScalarField& potential, QuantumPotentialRoute route)
{
    const GridSpec& g = state.grid();
    if (!(potential.grid() == g)) throw Error(ErrorCode::InvalidArgument, "potential grid differs");
    const bool wave = route == QuantumPotentialRoute::Wave ||
                      (route == QuantumPotentialRoute::Auto && state.wave_quantum_potential.has_value());
    if (wave && !state.wave_quantum_potential)
        throw Error(ErrorCode::InvalidArgument, "state carries no wave-route quantum potential");
    ScalarField u;
    if (wave) {
        u = *state.wave_quantum_potential;
    } else {
        QuantumPotentialOptions q;
        q.support = state.support;
        u = quantum_potential(state.rho, state.params, q);
    }
    EnergyField e{ScalarField(g, state.time), state.support};
    const double half_m = 0.5 * state.params.mass;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!state.support.contains(i)) continue;
        double x2 = 0.0;
        for (int a = 0; a < g.dim(); ++a) x2 += state.drift[a][i] * state.drift[a][i];
        e.values[i] = half_m * x2 + potential[i] + u[i];
    }
    return e;
}

double kolmogorov_energy_probability(const MadelungState& state, const ScalarField& potential, double lo, double hi,
                                     QuantumPotentialRoute route)
{
    if (hi < lo) throw Error(ErrorCode::InvalidArgument, "energy interval has hi < lo");
    const EnergyField e = energy_field(state, potential, route);
    double sum = 0.0;
    for (std::size_t i = 0; i < e.values.size(); ++i)
        if (e.support.contains(i) && e.values[i] >= lo && e.values[i] <= hi) sum += state.rho[i];
    return sum * state.grid().cell_volume();
}

// ---------------------------------------------------------------------------
// Operator spectrum

namespace {

Eigen::MatrixXd kinetic_matrix(const GridSpec& g)
{
    const auto n = static_cast<Eigen::Index>(g.size());
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    if (g.fully_periodic()) {
        ScalarField unit(g);
        for (Eigen::Index j = 0; j < n; ++j) {
            unit[static_cast<std::size_t>(j)] = 1.0;
            const ScalarField col = laplacian(unit);
            for (Eigen::Index i = 0; i < n; ++i) L(i, j) = col[static_cast<std::size_t>(i)];
            unit[static_cast<std::size_t>(j)] = 0.0;
        }
        return 0.5 * (L + L.transpose());
    }
    static const double c[3] = {-2.5, 4.0 / 3.0, -1.0 / 12.0};
    for (std::size_t p = 0; p < g.size(); ++p) {
        const auto i = static_cast<Eigen::Index>(p);
        for (int a = 0; a < g.dim(); ++a) {
            const double inv = 1.0 / (g.spacing(a) * g.spacing(a));
            L(i, i) += c[0] * inv;
            for (int off = 1; off <= 2; ++off)
                for (int s : {-1, 1}) {
                    // Stop at a non-periodic wall: beyond it psi is zero.
                    auto q = g.neighbor(p, a, s);
                    if (q && off == 2) q = g.neighbor(*q, a, s);
                    if (q) L(i, static_cast<Eigen::Index>(*q)) += c[off] * inv;
                }
        }
    }
    return L;
}

} // namespace

double NeumannSpectrum::probability(double lo, double hi) const
{
    double sum = 0.0;
    for (std::size_t n = 0; n < energies.size(); ++n)
        if (energies[n] >= lo && energies[n] <= hi) sum += weights[n];
    return sum;
}

NeumannSpectrum neumann_spectrum(const WaveState& psi, const ScalarField& potential, const NeumannOptions& options)
{
    const GridSpec& g = psi.grid();
    if (!(potential.grid() == g)) throw Error(ErrorCode::InvalidArgument, "potential grid differs");
    if (g.size() > options.max_points)
        throw Error(ErrorCode::EigenSolveFailure,
                    "grid has " + std::to_string(g.size()) + " points, above the dense eigensolver limit");
    const double pref = -psi.params.hbar * psi.params.hbar / (2.0 * psi.params.mass);
    Eigen::MatrixXd H = pref * kinetic_matrix(g);
    for (std::size_t i = 0; i < g.size(); ++i) H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += potential[i];

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(H);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::EigenSolveFailure, "eigen decomposition did not converge");

    const double scale = std::sqrt(g.cell_volume());
    const double norm = psi.norm();
    if (!(norm > 0.0)) throw Error(ErrorCode::VanishingState, "zero wave function");
    Eigen::VectorXd re(static_cast<Eigen::Index>(g.size())), im(static_cast<Eigen::Index>(g.size()));
    for (std::size_t i = 0; i < g.size(); ++i) {
        re(static_cast<Eigen::Index>(i)) = psi.psi[i].real() * scale;
        im(static_cast<Eigen::Index>(i)) = psi.psi[i].imag() * scale;
    }
    NeumannSpectrum out;
    const auto k = static_cast<Eigen::Index>(std::min(options.modes, g.size()));
    double total = 0.0;
    for (Eigen::Index n = 0; n < k; ++n) {
        const auto v = solver.eigenvectors().col(n);
        const double cr = v.dot(re), ci = v.dot(im);
        const double w = (cr * cr + ci * ci) / norm;
        out.energies.push_back(solver.eigenvalues()(n));
        out.weights.push_back(w);
        total += w;
    }
    out.completeness_deficit = std::max(0.0, 1.0 - total);
    if (out.completeness_deficit > options.deficit_warning)
        out.warnings.push_back("CompletenessDeficit: " + std::to_string(out.completeness_deficit));
    return out;
}

double neumann_energy_probability(const WaveState& psi, const ScalarField& potential, double lo, double hi,
                                  const NeumannOptions& options)
{
    if (hi < lo) throw Error(ErrorCode::InvalidArgument, "energy interval has hi < lo");
    return neumann_spectrum(psi, potential, options).probability(lo, hi);
}

// ---------------------------------------------------------------------------
// Uncertainty

HeisenbergReport heisenberg_report(const WaveState& psi, const MadelungState& state)
{
    const GridSpec& g = psi.grid();
    const int dim = g.dim();
    HeisenbergReport r;
    const double m = psi.params.mass, hbar = psi.params.hbar;

    // Position and Madelung momentum under rho.
    double mass0 = 0.0;
    Point x1{0, 0, 0}, x2{0, 0, 0}, p1{0, 0, 0}, p2{0, 0, 0};
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double rho = state.rho[i];
        const Point x = g.position(i);
        mass0 += rho;
        for (int a = 0; a < dim; ++a) {
            x1[a] += x[a] * rho;
            x2[a] += x[a] * x[a] * rho;
            if (state.support.contains(i)) {
                const double mx = m * state.drift[a][i];
                p1[a] += mx * rho;
                p2[a] += mx * mx * rho;
            }
        }
    }
    if (!(mass0 > 0.0)) throw Error(ErrorCode::VanishingState, "zero density");

    // Momentum-space density.
    std::vector<Complex> hat(psi.psi.values().begin(), psi.psi.values().end());
    detail::transform_all(hat, g, -1);
    std::array<std::vector<double>, 3> k;
    for (int a = 0; a < dim; ++a) k[a] = detail::wavenumbers(g.points(a), g.upper(a) - g.lower(a));
    double w0 = 0.0;
    Point k1{0, 0, 0}, k2{0, 0, 0};
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double w = std::norm(hat[i]);
        const Index3 idx = g.unflat(i);
        w0 += w;
        for (int a = 0; a < dim; ++a) {
            const double kk = k[a][idx[a]];
            k1[a] += kk * w;
            k2[a] += kk * kk * w;
        }
    }

    for (int a = 0; a < dim; ++a) {
        const double mx = x1[a] / mass0;
        r.dx[a] = std::sqrt(std::max(0.0, x2[a] / mass0 - mx * mx));
        const double mk = k1[a] / w0;
        r.dp_fourier[a] = hbar * std::sqrt(std::max(0.0, k2[a] / w0 - mk * mk));
        const double mp = p1[a] / mass0;
        r.dp_madelung[a] = std::sqrt(std::max(0.0, p2[a] / mass0 - mp * mp));
        r.product_fourier[a] = r.dx[a] * r.dp_fourier[a];
        r.product_madelung[a] = r.dx[a] * r.dp_madelung[a];
    }
    return r;
}

// ---------------------------------------------------------------------------
// Angular momentum and energy

Point angular_momentum_expectation(const MadelungState& state, const RegionMask& region)
{
    const GridSpec& g = state.grid();
    if (g.dim() != 3) throw Error(ErrorCode::InvalidArgument, "angular momentum needs a 3D grid");
    Point L{0, 0, 0};
    bool any = false;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!region.contains(i)) continue;
        any = true;
        if (!state.support.contains(i)) continue;
        const Point x = g.position(i);
        const double X = state.drift[0][i], Y = state.drift[1][i], Z = state.drift[2][i];
        const double w = state.params.mass * state.rho[i];
        L[0] += w * (x[1] * Z - x[2] * Y);
        L[1] += w * (x[2] * X - x[0] * Z);
        L[2] += w * (x[0] * Y - x[1] * X);
    }
    if (!any) throw Error(ErrorCode::EmptyRegion, "region has no member points");
    for (double& v : L) v *= g.cell_volume();
    return L;
}

OperatorValue angular_momentum_operator(const WaveState& psi)
{
    const GridSpec& g = psi.grid();
    if (g.dim() < 2) throw Error(ErrorCode::InvalidArgument, "angular momentum needs at least two axes");
    std::array<ComplexField, 3> d;
    for (int a = 0; a < g.dim(); ++a) d[a] = derivative(psi.psi, a);
    std::array<Complex, 3> sum{};
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Point x = g.position(i);
        const Complex c = std::conj(psi.psi[i]);
        if (g.dim() == 3) {
            sum[0] += c * (x[1] * d[2][i] - x[2] * d[1][i]);
            sum[1] += c * (x[2] * d[0][i] - x[0] * d[2][i]);
        }
        sum[2] += c * (x[0] * d[1][i] - x[1] * d[0][i]);
    }
    OperatorValue out;
    for (int a = 0; a < 3; ++a) {
        const Complex v = Complex(0.0, -psi.params.hbar) * sum[a] * g.cell_volume();
        out.value[a] = v.real();
        out.imaginary_residue[a] = v.imag();
    }
    return out;
}

OperatorValue energy_operator_expectation(const WaveState& psi, const ScalarField& potential)
{
    const GridSpec& g = psi.grid();
    const ComplexField lap = laplacian(psi.psi);
    const double pref = -psi.params.hbar * psi.params.hbar / (2.0 * psi.params.mass);
    Complex sum = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        sum += std::conj(psi.psi[i]) * (pref * lap[i] + potential[i] * psi.psi[i]);
    sum *= g.cell_volume();
    OperatorValue out;
    out.value[0] = sum.real();
    out.imaginary_residue[0] = sum.imag();
    return out;
}

std::vector<ObservableReport> equivalence_reports(const WaveState& psi, const MadelungState& state,
                                                  const ScalarField& potential)
{
    static const char* axes[3] = {"x", "y", "z"};
    const GridSpec& g = psi.grid();
    const RegionMask full = RegionMask::full(g);
    std::vector<ObservableReport> rows;
    for (int a = 0; a < g.dim(); ++a) {
        const ScalarField x = sample(g, [a](const Point& p) { return p[a]; });
        Complex op = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) op += std::conj(psi.psi[i]) * x[i] * psi.psi[i];
        op *= g.cell_volume();
        ObservableReport r{std::string("position_") + axes[a], expectation(x, state, full), op, "full", psi.time, 0};
        r.gap = std::abs(r.operator_value - r.kolmogorov_value);
        rows.push_back(r);
    }
    const Point pk = momentum_kolmogorov(state, full);
    const OperatorValue po = momentum_operator(psi);
    for (int a = 0; a < g.dim(); ++a) {
        ObservableReport r{std::string("momentum_") + axes[a], pk[a], Complex(po.value[a], po.imaginary_residue[a]),
                           "full", psi.time, 0};
        r.gap = std::abs(r.operator_value - r.kolmogorov_value);
        rows.push_back(r);
    }
    const EnergyField e = energy_field(state, potential);
    const OperatorValue eo = energy_operator_expectation(psi, potential);
    ObservableReport r{"energy", expectation(e.values, state, full), Complex(eo.value[0], eo.imaginary_residue[0]),
                       "full", psi.time, 0};
    r.gap = std::abs(r.operator_value - r.kolmogorov_value);
    rows.push_back(r);
    return rows;
}

} // namespace madelung
