#include "madelung/bridge.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace madelung {

namespace {

/// Excluded regions enclosed by the support (nodes of psi), as opposed to the
/// low-density tails that reach the grid edge.
int count_interior_holes(const RegionMask& support)
{
    const RegionMask outside = support.complement();
    int count = 0;
    const std::vector<int> label = outside.components(count);
    if (count == 0) return 0;
    const GridSpec& g = support.grid();
    if (g.fully_periodic()) return count - 1;
    std::vector<bool> touches(static_cast<std::size_t>(count), false);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (label[i] < 0) continue;
        const Index3 idx = g.unflat(i);
        for (int a = 0; a < g.dim(); ++a)
            if (!g.periodic(a) && (idx[a] == 0 || idx[a] + 1 == g.points(a))) touches[static_cast<std::size_t>(label[i])] = true;
    }
    return static_cast<int>(std::count(touches.begin(), touches.end(), false));
}

double max_value(const ScalarField& f)
{
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, v);
    return m;
}

RegionMask floor_support(const ScalarField& rho, double relative)
{
    const double floor = relative * max_value(rho);
    RegionMask s(rho.grid());
    for (std::size_t i = 0; i < rho.size(); ++i) s.set(i, rho[i] >= floor && rho[i] > 0.0);
    return s;
}

/// R = sqrt(rho / max rho)
ScalarField scaled_amplitude(const ScalarField& rho)
{
    const double m = max_value(rho);
    if (!(m > 0.0)) throw Error(ErrorCode::VanishingDensity, "density is identically zero");
    ScalarField r(rho.grid(), rho.time());
    for (std::size_t i = 0; i < rho.size(); ++i) r[i] = std::sqrt(std::max(rho[i], 0.0) / m);
    return r;
}

} // namespace

MadelungState decompose(const WaveState& wave, const DecomposeOptions& options)
{
    require_finite(wave.psi, "psi");
    const GridSpec& g = wave.grid();
    const SimParams& p = wave.params;
    MadelungState s;
    s.rho = abs_squared(wave.psi);
    s.time = wave.time;
    s.params = p;
    s.rho_floor = std::max(options.rho_floor_absolute, options.rho_floor_relative * max_value(s.rho));
    s.support = RegionMask(g);
    for (std::size_t i = 0; i < g.size(); ++i) s.support.set(i, s.rho[i] >= s.rho_floor && s.rho[i] > 0.0);
    if (s.support.empty()) throw Error(ErrorCode::VanishingState, "no grid point above the density floor");

    const ComplexVectorField grad = gradient(wave.psi, options.scheme);
    const ComplexField lap = laplacian(wave.psi, options.scheme);
    s.drift = VectorField(g, g.dim(), wave.time);
    ScalarField uwave(g, wave.time);
    const double hm = p.hbar / p.mass;
    const double pref = -p.hbar * p.hbar / (2.0 * p.mass);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!s.support.contains(i)) continue;
        const Complex c = std::conj(wave.psi[i]);
        const double rho = s.rho[i];
        double j2 = 0.0;
        for (int a = 0; a < g.dim(); ++a) {
            const double j = (c * grad[a][i]).imag();
            s.drift[a][i] = hm * j / rho;
            j2 += j * j;
        }
        uwave[i] = pref * ((c * lap[i]).real() / rho + j2 / (rho * rho));
    }
    s.rho.set_time(wave.time);
    s.drift.set_time(wave.time);
    require_finite(s.drift, "drift field");
    require_finite(uwave, "quantum potential");
    s.wave_quantum_potential = std::move(uwave);
    if (const int holes = count_interior_holes(s.support); holes > 0)
        s.warnings.push_back("MaskedSupport: " + std::to_string(holes) +
                             " interior node region(s) below the density floor excluded");
    return s;
}

ScalarField quantum_potential(const ScalarField& rho, const SimParams& params, const QuantumPotentialOptions& options)
{
    const RegionMask support = options.support ? *options.support : floor_support(rho, options.rho_floor_relative);
    const ScalarField r = scaled_amplitude(rho);
    const ScalarField lap = laplacian(r, options.scheme);
    const double pref = -params.hbar * params.hbar / (2.0 * params.mass);
    ScalarField u(rho.grid(), rho.time());
    for (std::size_t i = 0; i < rho.size(); ++i)
        if (support.contains(i) && r[i] > 0.0) u[i] = pref * lap[i] / r[i];
    require_finite(u, "quantum potential");
    return u;
}

VectorField bohm_force(const ScalarField& rho, const SimParams& params, const QuantumPotentialOptions& options)
{
    const GridSpec& g = rho.grid();
    const RegionMask support = options.support ? *options.support : floor_support(rho, options.rho_floor_relative);
    const ScalarField r = scaled_amplitude(rho);
    const ScalarField lap = laplacian(r, options.scheme);
    const VectorField grad_lap = gradient(lap, options.scheme);
    const VectorField grad_r = gradient(r, options.scheme);
    const double pref = params.hbar * params.hbar / (2.0 * params.mass);
    VectorField f(g, g.dim(), rho.time());
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!support.contains(i) || !(r[i] > 0.0)) continue;
        const double inv = 1.0 / r[i];
        for (int a = 0; a < g.dim(); ++a) f[a][i] = pref * (grad_lap[a][i] * inv - lap[i] * grad_r[a][i] * inv * inv);
    }
    require_finite(f, "Bohm force");
    return f;
}

// ---------------------------------------------------------------------------
// Weber identity

std::pair<VectorField, VectorField> weber_sides(const VectorField& v, DerivativeScheme scheme)
{
    const GridSpec& g = v.grid();
    const int dim = g.dim();
    VectorField lhs(g, dim, v.time());
    VectorField rhs(g, dim, v.time());
    // (v . grad) v
    for (int i = 0; i < dim; ++i) {
        const VectorField gi = gradient(v[i], scheme);
        for (std::size_t p = 0; p < g.size(); ++p) {
            double s = 0.0;
            for (int j = 0; j < dim; ++j) s += v[j][p] * gi[j][p];
            lhs[i][p] = s;
        }
    }
    // grad(v^2/2) - v x curl v
    ScalarField half_sq(g, v.time());
    for (std::size_t p = 0; p < g.size(); ++p) {
        double s = 0.0;
        for (int j = 0; j < dim; ++j) s += v[j][p] * v[j][p];
        half_sq[p] = 0.5 * s;
    }
    const VectorField gk = gradient(half_sq, scheme);
    const VectorField w = curl(v, scheme);
    for (std::size_t p = 0; p < g.size(); ++p) {
        Point cross{0, 0, 0};
        if (dim == 2) {
            cross = {v[1][p] * w[0][p], -v[0][p] * w[0][p], 0.0};
        } else if (dim == 3) {
            cross = {v[1][p] * w[2][p] - v[2][p] * w[1][p], v[2][p] * w[0][p] - v[0][p] * w[2][p],
                     v[0][p] * w[1][p] - v[1][p] * w[0][p]};
        }
        for (int i = 0; i < dim; ++i) rhs[i][p] = gk[i][p] - cross[i];
    }
    return {std::move(lhs), std::move(rhs)};
}

double weber_residual(const VectorField& v, DerivativeScheme scheme, const std::optional<RegionMask>& region)
{
    auto [lhs, rhs] = weber_sides(v, scheme);
    VectorField diff(v.grid(), lhs.components(), v.time());
    for (int c = 0; c < lhs.components(); ++c)
        for (std::size_t p = 0; p < v.grid().size(); ++p) diff[c][p] = lhs[c][p] - rhs[c][p];
    return l2_norm(diff, region ? *region : RegionMask::full(v.grid()));
}

// ---------------------------------------------------------------------------
// Residuals

namespace {

double wrap_angle(double a)
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    a = std::fmod(a + std::numbers::pi, two_pi);
    if (a < 0) a += two_pi;
    return a - std::numbers::pi;
}

struct Accumulator {
    double sq_sum = 0.0; // sum over centres of L2^2
    double max = 0.0;
    void add(double l2, double mx)
    {
        sq_sum += l2 * l2;
        max = std::max(max, mx);
    }
    double rms(std::size_t n) const { return n ? std::sqrt(sq_sum / static_cast<double>(n)) : 0.0; }
};

} // namespace

ResidualReport residuals(const ResidualInputs& in, const ResidualOptions& opt)
{
    const auto n = in.snapshots.size();
    if (n < 3) throw Error(ErrorCode::InsufficientSnapshots, "need at least three snapshots for centred differences");
    const GridSpec& g = in.snapshots[0].grid();
    for (const auto& s : in.snapshots)
        if (!(s.grid() == g)) throw Error(ErrorCode::InvalidArgument, "snapshots do not share a grid");
    const double dts = in.snapshots[1].time - in.snapshots[0].time;
    if (!(std::abs(dts) > 0.0)) throw Error(ErrorCode::InvalidArgument, "snapshot times must differ");
    for (std::size_t k = 1; k < n; ++k) {
        const double d = in.snapshots[k].time - in.snapshots[k - 1].time;
        if (std::abs(d - dts) > 1e-9 * std::max(1.0, std::abs(dts)))
            throw Error(ErrorCode::InvalidArgument, "snapshots are not uniformly spaced in time");
    }
    const bool with_phase = !in.phases.empty();
    if (with_phase && in.phases.size() != n)
        throw Error(ErrorCode::InvalidArgument, "phase snapshots must match density snapshots");
    const bool with_source = !in.source.empty();
    if (with_source && in.source.size() != n)
        throw Error(ErrorCode::InvalidArgument, "source snapshots must match density snapshots");
    if (!(in.potential.grid() == g) || !(in.force.grid() == g))
        throw Error(ErrorCode::InvalidArgument, "potential/force grid differs from snapshot grid");

    const int dim = g.dim();
    const SimParams& p = in.snapshots[0].params;
    const double m = p.mass;
    Accumulator newton, cont, irrot, bern, weber;
    std::size_t points = 0;

    for (std::size_t k = 1; k + 1 < n; ++k) {
        const MadelungState& prev = in.snapshots[k - 1];
        const MadelungState& cur = in.snapshots[k];
        const MadelungState& next = in.snapshots[k + 1];
        const RegionMask region =
            prev.support.intersect(cur.support).intersect(next.support).eroded(opt.erosion_cells);
        if (region.empty()) throw Error(ErrorCode::VanishingState, "eroded mutual support is empty");
        points = region.count();
        const double inv2dt = 1.0 / (2.0 * dts);

        QuantumPotentialOptions qopt;
        qopt.scheme = opt.density_scheme;
        qopt.support = cur.support;
        const VectorField fb = bohm_force(cur.rho, p, qopt);

        // Newton-Madelung
        VectorField res_n(g, dim);
        std::vector<VectorField> grad_x;
        grad_x.reserve(static_cast<std::size_t>(dim));
        for (int i = 0; i < dim; ++i) grad_x.push_back(gradient(cur.drift[i], opt.drift_scheme));
        for (std::size_t q = 0; q < g.size(); ++q) {
            if (!region.contains(q)) continue;
            for (int i = 0; i < dim; ++i) {
                double adv = 0.0;
                for (int j = 0; j < dim; ++j) adv += cur.drift[j][q] * grad_x[static_cast<std::size_t>(i)][j][q];
                const double dxdt = (next.drift[i][q] - prev.drift[i][q]) * inv2dt;
                res_n[i][q] = m * (dxdt + adv) - in.force[i][q] - fb[i][q];
            }
        }
        newton.add(l2_norm(res_n, region), max_norm(res_n, region));

        // Continuity. rho X inherits the mask edge of the drift, so it gets
        // the local stencil too.
        VectorField flux(g, dim);
        for (int i = 0; i < dim; ++i)
            for (std::size_t q = 0; q < g.size(); ++q) flux[i][q] = cur.rho[q] * cur.drift[i][q];
        const ScalarField divj = divergence(flux, opt.drift_scheme);
        ScalarField res_c(g);
        for (std::size_t q = 0; q < g.size(); ++q) {
            if (!region.contains(q)) continue;
            res_c[q] = (next.rho[q] - prev.rho[q]) * inv2dt + divj[q];
            if (with_source) res_c[q] -= in.source[k][q];
        }
        cont.add(l2_norm(res_c, region), max_norm(res_c, region));

        // Irrotationality
        const VectorField w = curl(cur.drift, opt.drift_scheme);
        irrot.add(l2_norm(w, region), max_norm(w, region));

        // Weber identity on the current drift field
        {
            auto [lhs, rhs] = weber_sides(cur.drift, opt.drift_scheme);
            VectorField d(g, dim);
            for (int i = 0; i < dim; ++i)
                for (std::size_t q = 0; q < g.size(); ++q) d[i][q] = lhs[i][q] - rhs[i][q];
            weber.add(l2_norm(d, region), max_norm(d, region));
        }

        // Bernoulli
        if (with_phase) {
            const ScalarField u = quantum_potential(cur.rho, p, qopt);
            ScalarField res_b(g);
            for (std::size_t q = 0; q < g.size(); ++q) {
                if (!region.contains(q)) continue;
                double x2 = 0.0;
                for (int i = 0; i < dim; ++i) x2 += cur.drift[i][q] * cur.drift[i][q];
                const double dphi = wrap_angle(in.phases[k + 1].phi[q] - in.phases[k - 1].phi[q]) * inv2dt;
                res_b[q] = 0.5 * m * x2 + in.potential[q] - p.hbar * dphi + u[q];
            }
            bern.add(l2_norm(res_b, region), max_norm(res_b, region));
        }
    }

    const std::size_t centres = n - 2;
    ResidualReport r;
    r.newton_madelung_l2 = newton.rms(centres);
    r.newton_madelung_max = newton.max;
    r.continuity_l2 = cont.rms(centres);
    r.continuity_max = cont.max;
    r.irrotationality_l2 = irrot.rms(centres);
    r.irrotationality_max = irrot.max;
    r.bernoulli_evaluated = with_phase;
    r.bernoulli_l2 = bern.rms(centres);
    r.bernoulli_max = bern.max;
    r.weber_l2 = weber.rms(centres);
    r.weber_max = weber.max;
    r.time = in.snapshots[n / 2].time;
    r.snapshot_spacing = dts;
    r.centres = centres;
    r.points = points;
    r.grid = g;
    return r;
}

// ---------------------------------------------------------------------------
// Isolated ensembles

IsolatedEnsembleReport isolated_ensemble_check(const MadelungState& first, const MadelungState& second)
{
    const GridSpec& g = first.grid();
    if (!(second.grid() == g)) throw Error(ErrorCode::InvalidArgument, "states do not share a grid");
    if (!first.support.intersect(second.support).empty())
        throw Error(ErrorCode::OverlappingSupports, "supports of the two ensembles intersect");

    ScalarField mix(g, first.time);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (first.support.contains(i)) mix[i] = 0.5 * first.rho[i];
        else if (second.support.contains(i)) mix[i] = 0.5 * second.rho[i];
    }
    auto ratio = [](const ScalarField& rho) {
        ScalarField r(rho.grid());
        for (std::size_t i = 0; i < rho.size(); ++i) r[i] = std::sqrt(std::max(rho[i], 0.0));
        ScalarField lap = laplacian(r, DerivativeScheme::FiniteDifference);
        for (std::size_t i = 0; i < rho.size(); ++i) lap[i] = r[i] > 0.0 ? lap[i] / r[i] : 0.0;
        return lap;
    };
    const ScalarField q_mix = ratio(mix);
    const ScalarField q1 = ratio(first.rho);
    const ScalarField q2 = ratio(second.rho);
    // The composed Laplacian reaches two first-derivative stencils (4 cells).
    const RegionMask core1 = first.support.eroded(4);
    const RegionMask core2 = second.support.eroded(4);

    IsolatedEnsembleReport rep;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (core1.contains(i)) {
            rep.max_deviation_first = std::max(rep.max_deviation_first, std::abs(q_mix[i] - q1[i]) / (1.0 + std::abs(q1[i])));
            ++rep.points_first;
        }
        if (core2.contains(i)) {
            rep.max_deviation_second = std::max(rep.max_deviation_second, std::abs(q_mix[i] - q2[i]) / (1.0 + std::abs(q2[i])));
            ++rep.points_second;
        }
    }
    return rep;
}

PhaseComparison compare_up_to_phase(const ComplexField& a, const ComplexField& b, const RegionMask& region)
{
    Complex overlap = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (region.contains(i)) overlap += a[i] * std::conj(b[i]);
    PhaseComparison out;
    out.global_phase = std::arg(overlap);
    const Complex rot = std::polar(1.0, out.global_phase);
    for (std::size_t i = 0; i < a.size(); ++i)
        if (region.contains(i)) out.max_deviation = std::max(out.max_deviation, std::abs(a[i] - rot * b[i]));
    return out;
}

} // namespace madelung
