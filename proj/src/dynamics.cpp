#include "madelung/dynamics.hpp"

#include <Eigen/Sparse>
#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <cmath>

#include "fft.hpp"
#include "madelung/analytic.hpp"

namespace madelung {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double dist2(const Point& x, const Point& c, int dim)
{
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
    return r2;
}

} // namespace

void SimParams::validate() const
{
    if (!(mass > 0.0) || !std::isfinite(mass)) throw Error(ErrorCode::InvalidArgument, "mass must be positive");
    if (!(hbar > 0.0) || !std::isfinite(hbar)) throw Error(ErrorCode::InvalidArgument, "hbar must be positive");
    if (dt == 0.0 || !std::isfinite(dt)) throw Error(ErrorCode::InvalidArgument, "dt must be non-zero and finite");
    if (snapshot_every == 0) throw Error(ErrorCode::InvalidArgument, "snapshot_every must be at least 1");
}

// ---------------------------------------------------------------------------
// Potential

std::string Potential::name() const
{
    return std::visit(Overloaded{
                          [](const FreePotential&) { return std::string("free"); },
                          [](const HarmonicPotential&) { return std::string("harmonic"); },
                          [](const SoftCoulombPotential&) { return std::string("soft_coulomb"); },
                          [](const BarrierPotential&) { return std::string("barrier"); },
                          [](const DoubleSlitPotential&) { return std::string("double_slit"); },
                      },
                      kind_);
}

double Potential::value(const Point& x, int dim, double mass) const
{
    return std::visit(Overloaded{
                          [](const FreePotential&) { return 0.0; },
                          [&](const HarmonicPotential& p) {
                              return 0.5 * mass * p.omega * p.omega * dist2(x, p.center, dim);
                          },
                          [&](const SoftCoulombPotential& p) {
                              return -p.charge / std::sqrt(dist2(x, p.center, dim) + p.epsilon * p.epsilon);
                          },
                          [&](const BarrierPotential& p) {
                              double v = 0.0;
                              for (const Slab& s : p.slabs)
                                  if (s.axis < dim && x[s.axis] >= s.lo && x[s.axis] <= s.hi) v += s.height;
                              return v;
                          },
                          [&](const DoubleSlitPotential& p) {
                              if (std::abs(x[0] - p.wall_x) > 0.5 * p.thickness) return 0.0;
                              if (dim < 2) return p.height;
                              const double y = x[1];
                              const bool open = std::abs(y - 0.5 * p.separation) < 0.5 * p.slit_width ||
                                                std::abs(y + 0.5 * p.separation) < 0.5 * p.slit_width;
                              return open ? 0.0 : p.height;
                          },
                      },
                      kind_);
}

ScalarField Potential::values(const GridSpec& grid, double mass) const
{
    ScalarField v(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = value(grid.position(i), grid.dim(), mass);
    require_finite(v, "potential");
    return v;
}

VectorField Potential::force(const GridSpec& grid, double mass) const
{
    const int dim = grid.dim();
    VectorField f(grid, dim);
    auto fill = [&](auto&& fn) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const Point x = grid.position(i);
            const Point g = fn(x);
            for (int a = 0; a < dim; ++a) f[a][i] = g[a];
        }
    };
    std::visit(Overloaded{
                   [&](const FreePotential&) {},
                   [&](const HarmonicPotential& p) {
                       const double k = mass * p.omega * p.omega;
                       fill([&](const Point& x) {
                           return Point{-k * (x[0] - p.center[0]), -k * (x[1] - p.center[1]),
                                        -k * (x[2] - p.center[2])};
                       });
                   },
                   [&](const SoftCoulombPotential& p) {
                       fill([&](const Point& x) {
                           const double r2 = dist2(x, p.center, dim) + p.epsilon * p.epsilon;
                           const double s = -p.charge / (r2 * std::sqrt(r2));
                           return Point{s * (x[0] - p.center[0]), s * (x[1] - p.center[1]), s * (x[2] - p.center[2])};
                       });
                   },
                   [&](const auto&) {
                       // Piecewise-constant walls: local differences of V.
                       const VectorField g = gradient(values(grid, mass), DerivativeScheme::FiniteDifference);
                       for (int a = 0; a < dim; ++a)
                           for (std::size_t i = 0; i < grid.size(); ++i) f[a][i] = -g[a][i];
                   },
               },
               kind_);
    return f;
}

// ---------------------------------------------------------------------------
// WaveState

double WaveState::norm() const { return integrate(abs_squared(psi)); }

void WaveState::add_warning(const std::string& w)
{
    if (std::find(warnings.begin(), warnings.end(), w) == warnings.end()) warnings.push_back(w);
}

WaveState initialize(const InitialKind& kind, const GridSpec& grid, const SimParams& params)
{
    params.validate();
    WaveState s;
    s.params = params;
    s.psi = std::visit(
        Overloaded{
            [&](const GaussianPacketInit& g) {
                if (!(g.sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
                return analytic::gaussian_packet(0.0, g.x0, g.p0, g.sigma, grid, params).state.psi;
            },
            [&](const HarmonicEigenstateInit& h) {
                return analytic::oscillator_eigenstate(h.n, 0.0, grid, params, h.omega).psi;
            },
            [&](const CoherentStateInit& c) {
                return analytic::coherent_state(c.alpha, 0.0, grid, params, c.omega).psi;
            },
            [&](const CustomInit& c) {
                if (!(c.field.grid() == grid))
                    throw Error(ErrorCode::InvalidArgument, "custom field grid differs from the run grid");
                return c.field;
            },
        },
        kind);
    s.psi.set_time(0.0);
    const double n2 = s.norm();
    if (!std::isfinite(n2) || n2 < 1e-300) throw Error(ErrorCode::NonNormalizable, "initial state has no norm");
    const double scale = 1.0 / std::sqrt(n2);
    for (auto& v : s.psi.values()) v *= scale;
    s.initial_norm = s.norm();
    return s;
}

double boundary_mass(const ComplexField& psi)
{
    const GridSpec& g = psi.grid();
    double edge = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double r = std::norm(psi[i]);
        total += r;
        const Index3 idx = g.unflat(i);
        bool on_edge = false;
        for (int a = 0; a < g.dim() && !on_edge; ++a)
            if (!g.periodic(a) && (idx[a] < 2 || idx[a] + 2 >= g.points(a))) on_edge = true;
        if (on_edge) edge += r;
    }
    return total > 0.0 ? edge / total : 0.0;
}

// ---------------------------------------------------------------------------
// Crank-Nicolson system

struct Propagator::CrankNicolsonSystem {
    // 1D: Thomas factorisation of A = I + i dt H / (2 hbar).
    bool tridiagonal = false;
    Complex off{};                 // A sub/super diagonal
    std::vector<Complex> diag;     // A diagonal
    std::vector<Complex> cprime;   // forward-sweep coefficients
    std::vector<Complex> denom;
    // 2D/3D
    Eigen::SparseMatrix<Complex, Eigen::RowMajor> a_matrix;
    Eigen::SparseMatrix<Complex, Eigen::RowMajor> b_matrix;
    double tolerance = 1e-12;
    int max_iterations = 1000;
};

Propagator::Propagator(const GridSpec& grid, const Potential& potential, const SimParams& params)
    : grid_(grid), params_(params), potential_(potential.values(grid, params.mass))
{
    params_.validate();
    const double dt = params_.dt;
    const double hbar = params_.hbar;
    const double m = params_.mass;

    if (params_.solver == SolverKind::SplitStepFourier) {
        if (!grid.fully_periodic())
            throw Error(ErrorCode::InvalidArgument, "split-step Fourier needs a fully periodic grid");
        half_potential_phase_.resize(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
            half_potential_phase_[i] = std::exp(Complex(0.0, -0.5 * potential_[i] * dt / hbar));
        std::array<std::vector<double>, 3> k;
        for (int a = 0; a < grid.dim(); ++a) k[a] = detail::wavenumbers(grid.points(a), grid.upper(a) - grid.lower(a));
        kinetic_phase_.resize(grid.size());
        const double inv_n = 1.0 / static_cast<double>(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const Index3 idx = grid.unflat(i);
            double k2 = 0.0;
            for (int a = 0; a < grid.dim(); ++a) k2 += k[a][idx[a]] * k[a][idx[a]];
            kinetic_phase_[i] = std::exp(Complex(0.0, -hbar * k2 * dt / (2.0 * m))) * inv_n;
        }
        return;
    }

    if (grid.any_periodic())
        throw Error(ErrorCode::InvalidArgument, "Crank-Nicolson needs non-periodic (Dirichlet) axes");
    cn_ = std::make_unique<CrankNicolsonSystem>();
    cn_->tolerance = params_.cn_tolerance;
    cn_->max_iterations = params_.cn_max_iterations;
    const Complex coef(0.0, dt / (2.0 * hbar));
    const double kin = hbar * hbar / (2.0 * m);

    if (grid.dim() == 1) {
        const std::size_t n = grid.size();
        const double h2 = grid.spacing(0) * grid.spacing(0);
        cn_->tridiagonal = true;
        cn_->off = coef * (-kin / h2);
        cn_->diag.resize(n);
        for (std::size_t i = 0; i < n; ++i) cn_->diag[i] = 1.0 + coef * (2.0 * kin / h2 + potential_[i]);
        cn_->cprime.resize(n);
        cn_->denom.resize(n);
        cn_->denom[0] = cn_->diag[0];
        cn_->cprime[0] = cn_->off / cn_->denom[0];
        for (std::size_t i = 1; i < n; ++i) {
            cn_->denom[i] = cn_->diag[i] - cn_->off * cn_->cprime[i - 1];
            cn_->cprime[i] = cn_->off / cn_->denom[i];
        }
        return;
    }

    const auto n = static_cast<Eigen::Index>(grid.size());
    std::vector<Eigen::Triplet<Complex>> ta, tb;
    ta.reserve(static_cast<std::size_t>(n) * 7);
    tb.reserve(static_cast<std::size_t>(n) * 7);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double diag = potential_[i];
        for (int a = 0; a < grid.dim(); ++a) {
            const double h2 = grid.spacing(a) * grid.spacing(a);
            diag += 2.0 * kin / h2;
            for (int s : {-1, 1}) {
                if (auto nb = grid.neighbor(i, a, s)) {
                    const Complex hv = -kin / h2;
                    ta.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(*nb), coef * hv);
                    tb.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(*nb), -coef * hv);
                }
            }
        }
        ta.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i), 1.0 + coef * diag);
        tb.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i), 1.0 - coef * diag);
    }
    cn_->a_matrix.resize(n, n);
    cn_->b_matrix.resize(n, n);
    cn_->a_matrix.setFromTriplets(ta.begin(), ta.end());
    cn_->b_matrix.setFromTriplets(tb.begin(), tb.end());
}

Propagator::~Propagator() = default;
Propagator::Propagator(Propagator&&) noexcept = default;
Propagator& Propagator::operator=(Propagator&&) noexcept = default;

void Propagator::advance(ComplexField& psi) const
{
    std::vector<Complex>& v = psi.storage();
    if (params_.solver == SolverKind::SplitStepFourier) {
        for (std::size_t i = 0; i < v.size(); ++i) v[i] *= half_potential_phase_[i];
        detail::transform_all(v, grid_, -1);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] *= kinetic_phase_[i];
        detail::transform_all(v, grid_, +1);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] *= half_potential_phase_[i];
    } else if (cn_->tridiagonal) {
        const std::size_t n = v.size();
        // rhs = B psi, B = 2 I - A
        std::vector<Complex> rhs(n);
        for (std::size_t i = 0; i < n; ++i) {
            Complex r = (2.0 - cn_->diag[i]) * v[i];
            if (i > 0) r -= cn_->off * v[i - 1];
            if (i + 1 < n) r -= cn_->off * v[i + 1];
            rhs[i] = r;
        }
        std::vector<Complex> d(n);
        d[0] = rhs[0] / cn_->denom[0];
        for (std::size_t i = 1; i < n; ++i) d[i] = (rhs[i] - cn_->off * d[i - 1]) / cn_->denom[i];
        v[n - 1] = d[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) v[i] = d[i] - cn_->cprime[i] * v[i + 1];
        // Residual of the solve.
        double rnorm = 0.0, bnorm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            Complex a = cn_->diag[i] * v[i];
            if (i > 0) a += cn_->off * v[i - 1];
            if (i + 1 < n) a += cn_->off * v[i + 1];
            rnorm += std::norm(a - rhs[i]);
            bnorm += std::norm(rhs[i]);
        }
        if (!(std::sqrt(rnorm) <= cn_->tolerance * std::sqrt(bnorm) + 1e-300))
            throw Error(ErrorCode::SolverDivergence, "tridiagonal solve residual above tolerance");
    } else {
        Eigen::Map<Eigen::VectorXcd> x(v.data(), static_cast<Eigen::Index>(v.size()));
        const Eigen::VectorXcd rhs = cn_->b_matrix * x;
        Eigen::BiCGSTAB<Eigen::SparseMatrix<Complex, Eigen::RowMajor>, Eigen::DiagonalPreconditioner<Complex>> solver;
        solver.setTolerance(cn_->tolerance);
        solver.setMaxIterations(cn_->max_iterations);
        solver.compute(cn_->a_matrix);
        const Eigen::VectorXcd guess = x;
        const Eigen::VectorXcd sol = solver.solveWithGuess(rhs, guess);
        if (solver.info() != Eigen::Success)
            throw Error(ErrorCode::SolverDivergence,
                        "BiCGSTAB did not converge in " + std::to_string(cn_->max_iterations) + " iterations");
        x = sol;
    }
    psi.set_time(psi.time() + params_.dt);
}

WaveState Propagator::step(const WaveState& state) const
{
    if (!(state.psi.grid() == grid_)) throw Error(ErrorCode::InvalidArgument, "state grid differs from propagator grid");
    WaveState next = state;
    next.psi.set_time(state.time);
    advance(next.psi);
    next.time = state.time + params_.dt;
    next.params = params_;
    if (!next.psi.all_finite()) throw Error(ErrorCode::SolverDivergence, "wave function became non-finite");
    if (params_.solver == SolverKind::CrankNicolson &&
        boundary_mass(next.psi) > params_.boundary_mass_warning)
        next.add_warning("BoundaryLeak");
    double vmax = 0.0;
    for (double v : potential_.values()) vmax = std::max(vmax, std::abs(v));
    if (std::abs(params_.dt) * vmax / params_.hbar >= 0.5) next.add_warning("LargePotentialPhase");
    return next;
}

WaveState step(const WaveState& state, const Potential& potential)
{
    return Propagator(state.grid(), potential, state.params).step(state);
}

double Trajectory::max_norm_deviation() const
{
    double m = 0.0;
    if (norm_series.empty()) return 0.0;
    for (double n : norm_series) m = std::max(m, std::abs(n - norm_series.front()));
    return m;
}

Trajectory evolve(const WaveState& initial, const Potential& potential, double t_final,
                  const std::vector<Observer>& observers)
{
    const SimParams& p = initial.params;
    p.validate();
    const double span = t_final - initial.time;
    const long steps = std::lround(span / p.dt);
    if (steps < 0) throw Error(ErrorCode::InvalidArgument, "t_final lies before the initial time");

    Trajectory traj;
    traj.snapshots.push_back(initial);
    traj.norm_series.push_back(initial.norm());
    traj.norm_times.push_back(initial.time);
    for (const auto& obs : observers) obs(initial, 0);
    if (steps == 0) return traj;

    Propagator prop(initial.grid(), potential, p);
    WaveState cur = initial;
    bool leak_checked = p.solver == SolverKind::CrankNicolson;
    double vmax = 0.0;
    for (double v : prop.potential_values().values()) vmax = std::max(vmax, std::abs(v));
    if (std::abs(p.dt) * vmax / p.hbar >= 0.5) cur.add_warning("LargePotentialPhase");

    for (long s = 1; s <= steps; ++s) {
        prop.advance(cur.psi);
        cur.time = initial.time + static_cast<double>(s) * p.dt;
        cur.psi.set_time(cur.time);
        if (!cur.psi.all_finite()) throw Error(ErrorCode::SolverDivergence, "wave function became non-finite");
        if (leak_checked && boundary_mass(cur.psi) > p.boundary_mass_warning) {
            cur.add_warning("BoundaryLeak");
            leak_checked = false;
        }
        traj.norm_series.push_back(cur.norm());
        traj.norm_times.push_back(cur.time);
        for (const auto& obs : observers) obs(cur, static_cast<std::size_t>(s));
        if (s % static_cast<long>(p.snapshot_every) == 0 || s == steps) traj.snapshots.push_back(cur);
    }
    traj.warnings = cur.warnings;
    return traj;
}

} // namespace madelung
