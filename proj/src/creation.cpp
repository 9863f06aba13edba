#include "madelung/creation.hpp"

#include <algorithm>
#include <cmath>

namespace madelung {

std::string SourceModel::name() const
{
    switch (kind) {
    case Kind::None: return "none";
    case Kind::UniformDecay: return "uniform_decay";
    case Kind::UniformGain: return "uniform_gain";
    case Kind::LocalizedSink: return "localized_sink";
    case Kind::DensityQuadratic: return "density_quadratic";
    }
    return "unknown";
}

void SourceModel::validate() const
{
    if (!std::isfinite(gamma) || gamma < 0.0) throw Error(ErrorCode::InvalidArgument, "source rate must be >= 0");
    if (kind == Kind::LocalizedSink && !profile && !(width > 0.0))
        throw Error(ErrorCode::InvalidArgument, "sink width must be positive");
}

namespace {

/// Signed linear rate r(x) with u = r(x) rho, for the linear models.
ScalarField linear_rate(const SourceModel& s, const GridSpec& g)
{
    ScalarField r(g);
    switch (s.kind) {
    case SourceModel::Kind::UniformDecay:
        for (std::size_t i = 0; i < g.size(); ++i) r[i] = -s.gamma;
        break;
    case SourceModel::Kind::UniformGain:
        for (std::size_t i = 0; i < g.size(); ++i) r[i] = s.gamma;
        break;
    case SourceModel::Kind::LocalizedSink:
        if (s.profile) {
            if (!(s.profile->grid() == g)) throw Error(ErrorCode::InvalidArgument, "sink profile grid differs");
            for (std::size_t i = 0; i < g.size(); ++i) r[i] = -(*s.profile)[i];
        } else {
            for (std::size_t i = 0; i < g.size(); ++i) {
                const Point x = g.position(i);
                double d2 = 0.0;
                for (int a = 0; a < g.dim(); ++a) d2 += (x[a] - s.center[a]) * (x[a] - s.center[a]);
                r[i] = -s.gamma * std::exp(-d2 / (2.0 * s.width * s.width));
            }
        }
        break;
    default: break;
    }
    return r;
}

/// xi on every grid point (no masking); the amplitude factor uses this.
ScalarField xi_everywhere(const SourceModel& s, const ComplexField& psi, double hbar)
{
    const GridSpec& g = psi.grid();
    ScalarField xi(g, psi.time());
    if (s.kind == SourceModel::Kind::None) return xi;
    if (s.kind == SourceModel::Kind::DensityQuadratic) {
        for (std::size_t i = 0; i < g.size(); ++i) xi[i] = -0.5 * hbar * s.gamma * std::norm(psi[i]);
        return xi;
    }
    const ScalarField r = linear_rate(s, g);
    for (std::size_t i = 0; i < g.size(); ++i) xi[i] = 0.5 * hbar * r[i];
    return xi;
}

void apply_amplitude(ComplexField& psi, const ScalarField& xi, double dt, double hbar)
{
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= std::exp(xi[i] * dt / hbar);
}

} // namespace

ScalarField source_term(const SourceModel& source, const ScalarField& rho)
{
    source.validate();
    const GridSpec& g = rho.grid();
    ScalarField u(g, rho.time());
    if (source.kind == SourceModel::Kind::None) return u;
    if (source.kind == SourceModel::Kind::DensityQuadratic) {
        for (std::size_t i = 0; i < g.size(); ++i) u[i] = -source.gamma * rho[i] * rho[i];
        return u;
    }
    const ScalarField r = linear_rate(source, g);
    for (std::size_t i = 0; i < g.size(); ++i) u[i] = r[i] * rho[i];
    return u;
}

ScalarField xi_from_u(const SourceModel& source, const WaveState& psi, double rho_floor_relative)
{
    source.validate();
    const ScalarField rho = abs_squared(psi.psi);
    double rmax = 0.0;
    for (double v : rho.values()) rmax = std::max(rmax, v);
    const double floor = rho_floor_relative * rmax;
    if (!(rmax > 0.0)) throw Error(ErrorCode::VanishingDensity, "density vanishes everywhere");
    const ScalarField all = xi_everywhere(source, psi.psi, psi.params.hbar);
    ScalarField xi(psi.grid(), psi.time);
    for (std::size_t i = 0; i < rho.size(); ++i)
        if (rho[i] >= floor && rho[i] > 0.0) xi[i] = all[i];
    return xi;
}

WaveState step_with_source(const WaveState& state, const Propagator& propagator, const SourceModel& source,
                           const SourceStepOptions& options)
{
    source.validate();
    if (source.kind == SourceModel::Kind::None) return propagator.step(state);
    const double dt = propagator.params().dt;
    const double hbar = propagator.params().hbar;
    WaveState half = state;
    apply_amplitude(half.psi, xi_everywhere(source, half.psi, hbar), 0.5 * dt, hbar);
    WaveState next = propagator.step(half);
    apply_amplitude(next.psi, xi_everywhere(source, next.psi, hbar), 0.5 * dt, hbar);
    if (!next.psi.all_finite()) throw Error(ErrorCode::SolverDivergence, "wave function became non-finite");
    if (options.check_overflow) {
        const double mass = next.norm();
        if (mass > 1.0 + options.overflow_tolerance)
            throw Error(ErrorCode::ProbabilityOverflow, "total probability would reach " + std::to_string(mass));
    }
    return next;
}

WaveState step_with_source(const WaveState& state, const Potential& potential, const SourceModel& source,
                           const SourceStepOptions& options)
{
    return step_with_source(state, Propagator(state.grid(), potential, state.params), source, options);
}

SourceRun evolve_with_source(const WaveState& initial, const Potential& potential, const SourceModel& source,
                             double t_final)
{
    source.validate();
    const SimParams& p = initial.params;
    p.validate();
    const long steps = std::lround((t_final - initial.time) / p.dt);
    if (steps < 0) throw Error(ErrorCode::InvalidArgument, "t_final lies before the initial time");
    if (source.kind == SourceModel::Kind::UniformGain && !(initial.norm() < 1.0))
        throw Error(ErrorCode::ProbabilityOverflow, "a gain run must start with total probability below 1");

    const Propagator prop(initial.grid(), potential, p);
    SourceRun run;
    WaveState cur = initial;
    const auto record = [&](const WaveState& s) {
        run.times.push_back(s.time);
        run.masses.push_back(s.norm());
        run.source_integrals.push_back(integrate(source_term(source, abs_squared(s.psi))));
    };
    run.snapshots.push_back(cur);
    record(cur);
    for (long s = 1; s <= steps; ++s) {
        WaveState next;
        try {
            next = step_with_source(cur, prop, source);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ProbabilityOverflow) throw;
            run.halted = true;
            run.warnings.push_back("Halted: total probability reached 1 at t = " + std::to_string(cur.time));
            break;
        }
        next.time = initial.time + static_cast<double>(s) * p.dt;
        next.psi.set_time(next.time);
        cur = std::move(next);
        record(cur);
        if (s % static_cast<long>(p.snapshot_every) == 0 || s == steps) run.snapshots.push_back(cur);
    }
    if (run.snapshots.back().time != cur.time) run.snapshots.push_back(cur);
    for (const auto& w : cur.warnings) run.warnings.push_back(w);
    return run;
}

ProbabilitySeries probability_series(const SourceRun& run)
{
    ProbabilitySeries s;
    s.times = run.times;
    s.masses = run.masses;
    for (std::size_t k = 1; k + 1 < run.times.size(); ++k) {
        const double rate = (run.masses[k + 1] - run.masses[k - 1]) / (run.times[k + 1] - run.times[k - 1]);
        s.rate_times.push_back(run.times[k]);
        s.mass_rates.push_back(rate);
        s.source_integrals.push_back(run.source_integrals[k]);
        s.max_rate_gap = std::max(s.max_rate_gap, std::abs(rate - run.source_integrals[k]));
    }
    // Linear regression of log(mass) on t.
    const std::size_t n = run.times.size();
    if (n >= 2) {
        double st = 0, sy = 0, stt = 0, sty = 0;
        for (std::size_t k = 0; k < n; ++k) {
            const double t = run.times[k];
            const double y = std::log(run.masses[k]);
            st += t;
            sy += y;
            stt += t * t;
            sty += t * y;
        }
        const double dn = static_cast<double>(n);
        const double den = dn * stt - st * st;
        if (den > 0.0) {
            const double slope = (dn * sty - st * sy) / den;
            s.fitted_rate = -slope;
            s.fitted_amplitude = std::exp((sy - slope * st) / dn);
        }
    }
    return s;
}

NonlinearityReport nonlinearity_witness(const WaveState& psi1, const WaveState& psi2, const Potential& potential,
                                        const SourceModel& source)
{
    if (!(psi1.grid() == psi2.grid())) throw Error(ErrorCode::InvalidArgument, "packets do not share a grid");
    const auto scaled = [](const WaveState& w) {
        WaveState s = w;
        const double n = w.norm();
        if (!(n > 0.0)) throw Error(ErrorCode::VanishingState, "zero packet");
        const double f = 1.0 / std::sqrt(2.0 * n);
        for (auto& v : s.psi.values()) v *= f;
        return s;
    };
    const WaveState a = scaled(psi1);
    const WaveState b = scaled(psi2);
    WaveState sum = a;
    for (std::size_t i = 0; i < sum.psi.size(); ++i) sum.psi[i] += b.psi[i];

    const Propagator prop(a.grid(), potential, a.params);
    const SourceStepOptions opts{false, 0.0};
    const WaveState sa = step_with_source(a, prop, source, opts);
    const WaveState sb = step_with_source(b, prop, source, opts);
    const WaveState ss = step_with_source(sum, prop, source, opts);
    ScalarField d(a.grid());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::norm(ss.psi[i] - sa.psi[i] - sb.psi[i]);
    NonlinearityReport r;
    r.defect = std::sqrt(integrate(d));
    r.norm_sum = sum.norm();
    return r;
}

} // namespace madelung
