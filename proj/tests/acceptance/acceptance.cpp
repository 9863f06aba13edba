// Acceptance suite: one PASS/FAIL line per criterion, with the measured
// quantities. Exit status is non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "madelung/analytic.hpp"
#include "madelung/bridge.hpp"
#include "madelung/creation.hpp"
#include "madelung/observables.hpp"
#include "madelung/transport.hpp"

using namespace madelung;
using std::numbers::pi;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok) { pass = pass && ok; }
};

std::string sci(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

GridSpec line(std::size_t n, double half, bool periodic = true)
{
    return GridSpec::cube(1, n, -half, half, periodic);
}

double max_abs_diff(const ComplexField& a, const ComplexField& b)
{
    double e = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
    return e;
}

double mean_position(const WaveState& w, int axis)
{
    const GridSpec& g = w.grid();
    double m = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) m += g.position(i)[axis] * std::norm(w.psi[i]);
    return m * g.cell_volume() / w.norm();
}

// ---------------------------------------------------------------------------

void unitarity(Outcome& o)
{
    SimParams p;
    p.dt = 1e-3;
    const WaveState s = initialize(GaussianPacketInit{{0, 0, 0}, {1, 0, 0}, 1.0}, line(512, 20), p);
    const Trajectory t = evolve(s, Potential::free(), 2000 * p.dt);
    double split = 0.0;
    for (double n : t.norm_series) split = std::max(split, std::abs(n - 1.0));

    SimParams c = p;
    c.solver = SolverKind::CrankNicolson;
    const WaveState h = initialize(CoherentStateInit{{Complex(1.0, 0.5), 0, 0}, 1.0}, line(512, 10, false), c);
    const Trajectory tc = evolve(h, Potential::harmonic(1.0), 2000 * c.dt);
    double cn = 0.0;
    for (double n : tc.norm_series) cn = std::max(cn, std::abs(n - 1.0));

    o.require(t.norm_series.size() == 2001 && split < 1e-12);
    o.require(cn < 1e-10);
    o.detail << "split-step max|N-1| " << sci(split) << " (< 1e-12); Crank-Nicolson harmonic max|N-1| " << sci(cn)
             << " (< 1e-10)";
}

void solver_oracle(Outcome& o)
{
    SimParams p;
    p.dt = 1e-3;
    const GridSpec g = line(512, 12);
    const WaveState s = initialize(GaussianPacketInit{{0, 0, 0}, {1, 0, 0}, 1.0}, g, p);
    const Trajectory t = evolve(s, Potential::free(), 1.0);
    const auto exact = analytic::gaussian_packet(1.0, {0, 0, 0}, {1, 0, 0}, 1.0, g, p);
    const double packet = max_abs_diff(t.snapshots.back().psi, exact.state.psi);

    SimParams q;
    const double period = 2 * pi;
    const int steps = 20000;
    q.dt = period / steps;
    q.snapshot_every = steps / 40;
    const Complex alpha(1.2, -0.6);
    const WaveState c = initialize(CoherentStateInit{{alpha, 0, 0}, 1.0}, line(256, 12), q);
    const Trajectory tc = evolve(c, Potential::harmonic(1.0), period);
    double centre = 0.0;
    for (const auto& w : tc.snapshots)
        centre = std::max(centre, std::abs(mean_position(w, 0) - analytic::coherent_center(alpha, w.time, 1, 1, 1)));

    o.require(packet < 1e-6);
    o.require(centre < 1e-6);
    o.detail << "free packet max|dPsi| at t=1 " << sci(packet) << " (< 1e-6); coherent centre max error over one period "
             << sci(centre) << " (< 1e-6)";
}

std::vector<WaveState> stock_zoo()
{
    SimParams p;
    std::vector<WaveState> z;
    const GridSpec g1 = line(256, 12);
    const GridSpec g2 = GridSpec::cube(2, 96, -12, 12, true);
    const GridSpec g3 = GridSpec::cube(3, 64, -10, 10, true);
    for (double x0 : {-1.0, 0.0, 1.5})
        for (double p0 : {0.0, 1.0})
            z.push_back(initialize(GaussianPacketInit{{x0, 0, 0}, {p0, 0, 0}, x0 == 0.0 ? 0.8 : 1.2}, g1, p));
    for (Complex a : {Complex(1, 0), Complex(0.5, 1.0), Complex(-1.5, 0.3)})
        z.push_back(initialize(CoherentStateInit{{a, 0, 0}, 1.0}, g1, p));
    z.push_back(initialize(HarmonicEigenstateInit{{0, 0, 0}, 1.0}, g1, p));
    z.push_back(initialize(HarmonicEigenstateInit{{0, 0, 0}, 2.0}, g1, p));
    z.push_back(initialize(GaussianPacketInit{{0.5, -0.5, 0}, {1, 0.5, 0}, 1.0}, g2, p));
    z.push_back(initialize(GaussianPacketInit{{-1, 1, 0}, {0, -1, 0}, 0.9}, g2, p));
    z.push_back(initialize(CoherentStateInit{{Complex(1, 0.5), Complex(-0.5, 0.3), 0}, 1.0}, g2, p));
    z.push_back(initialize(CoherentStateInit{{Complex(0, 1), Complex(0.8, 0), 0}, 1.0}, g2, p));
    z.push_back(initialize(HarmonicEigenstateInit{{0, 0, 0}, 1.0}, g2, p));
    z.push_back(initialize(GaussianPacketInit{{0.3, 0, -0.3}, {0.5, -0.5, 1}, 1.0}, g3, p));
    z.push_back(initialize(CoherentStateInit{{Complex(0.5, 0.5), Complex(0, -0.7), Complex(0.3, 0)}, 1.0}, g3, p));
    z.push_back(initialize(HarmonicEigenstateInit{{0, 0, 0}, 1.0}, g3, p));
    z.push_back(initialize(GaussianPacketInit{{-0.5, 0.5, 0.5}, {0, 0.5, 0}, 1.0}, g3, p));
    return z;
}

void round_trip(Outcome& o)
{
    const auto zoo = stock_zoo();
    double worst = 0.0;
    for (const auto& s : zoo) {
        const MadelungState m = decompose(s);
        const WaveState back = reconstruct_wave(m, anchored_phase(s, m));
        worst = std::max(worst, compare_up_to_phase(back.psi, s.psi, m.support).max_deviation);
    }
    o.require(zoo.size() == 20 && worst < 1e-10);
    o.detail << zoo.size() << " node-free states, max deviation up to a global phase " << sci(worst) << " (< 1e-10)";
}

ResidualReport coherent_residuals(std::size_t n, double dt)
{
    const GridSpec g = GridSpec::cube(2, n, -8, 8, true);
    SimParams p;
    p.dt = dt;
    const Potential v = Potential::harmonic(1.0);
    WaveState w = initialize(CoherentStateInit{{Complex(1.0, 0.3), Complex(0.2, -0.7), 0}, 1.0}, g, p);
    const Propagator prop(g, v, p);
    const int spacing = 4;
    const long lead = std::lround((0.5 - spacing * dt) / dt);
    for (long i = 0; i < lead; ++i) prop.advance(w.psi);
    DecomposeOptions dopt;
    dopt.rho_floor_relative = 1e-4;
    std::vector<MadelungState> snaps;
    std::vector<PhaseField> phases;
    for (int k = 0; k < 3; ++k) {
        w.time = static_cast<double>(lead + k * spacing) * dt;
        w.psi.set_time(w.time);
        snaps.push_back(decompose(w, dopt));
        phases.push_back(anchored_phase(w, snaps.back()));
        if (k < 2)
            for (int i = 0; i < spacing; ++i) prop.advance(w.psi);
    }
    ResidualInputs in;
    in.snapshots = snaps;
    in.potential = v.values(g, p.mass);
    in.force = v.force(g, p.mass);
    in.phases = phases;
    return residuals(in);
}

void madelung_residuals(Outcome& o)
{
    std::vector<ResidualReport> r;
    for (int level = 0; level < 3; ++level) r.push_back(coherent_residuals(128u << level, 0.01 / (1 << level)));
    const auto band = [](double ratio) { return ratio >= 3.0 && ratio <= 5.0; };
    struct Row {
        const char* name;
        double ResidualReport::*field;
    };
    const Row rows[] = {{"newton-madelung", &ResidualReport::newton_madelung_l2},
                        {"continuity", &ResidualReport::continuity_l2},
                        {"irrotationality", &ResidualReport::irrotationality_l2},
                        {"bernoulli", &ResidualReport::bernoulli_l2}};
    bool first = true;
    for (const Row& row : rows) {
        const double a = r[0].*row.field, b = r[1].*row.field, c = r[2].*row.field;
        const double q1 = a / b, q2 = b / c;
        o.require(band(q1) && band(q2));
        o.detail << (first ? "" : "; ") << row.name << " " << sci(a) << "," << sci(b) << "," << sci(c) << " ratios "
                 << sci(q1) << "," << sci(q2) << (band(q1) && band(q2) ? "" : " [outside 3..5]");
        first = false;
    }
}

void stationary_cancellation(Outcome& o)
{
    SimParams p;
    const GridSpec g = line(256, 10);
    const WaveState s = initialize(HarmonicEigenstateInit{{0, 0, 0}, 1.0}, g, p);
    const VectorField fb = bohm_force(abs_squared(s.psi), p);
    const VectorField f = Potential::harmonic(1.0).force(g, p.mass);
    const double sigma = std::sqrt(p.hbar / (2 * p.mass * 1.0));
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (std::abs(g.coord(0, i)) <= 4 * sigma) worst = std::max(worst, std::abs(fb[0][i] + f[0][i]));
    o.require(worst < 1e-6);
    o.detail << "max|F + F_B| on the 4 sigma core " << sci(worst) << " (< 1e-6)";
}

void transport_theorems(Outcome& o)
{
    const auto states = [](std::size_t n, double dt) {
        SimParams p;
        p.dt = dt;
        p.snapshot_every = 20;
        const WaveState s = initialize(GaussianPacketInit{{0, 0, 0}, {0, 0, 0}, 1.0}, line(n, 12), p);
        const Trajectory t = evolve(s, Potential::free(), 2.0);
        std::vector<MadelungState> m;
        for (const auto& w : t.snapshots) m.push_back(decompose(w));
        return m;
    };
    const auto coarse = states(512, 1e-3);
    const auto fine = states(1024, 5e-4);
    const double q = 0.6744897501960817;
    const auto cons = conservation_check(coarse, interval_region(-q, q));
    const auto gap_c = expectation_drift_check(coarse, interval_region(0, 6)).max_gap;
    const auto gap_f = expectation_drift_check(fine, interval_region(0, 6)).max_gap;
    const std::vector<double> radii{0.6, 0.45, 0.3, 0.2};
    const std::size_t k = coarse.size() / 2;
    const auto local = local_drift_estimate(coarse, k, {1.0, 0, 0}, radii);
    const double exact = analytic::gaussian_packet_drift(1.0, coarse[k].time, 0, 0, 1, 1, 1);
    const double local_err = std::abs(local.extrapolated[0] - exact);

    o.require(std::abs(cons.probabilities.front() - 0.5) < 1e-3);
    o.require(cons.max_drift < 1e-3);
    o.require(gap_c < 5e-3 && gap_c / gap_f >= 3.0 && gap_c / gap_f <= 5.0);
    o.require(local_err < 1e-3);
    o.detail << "(a) P(N_0) " << sci(cons.probabilities.front()) << ", max drift " << sci(cons.max_drift)
             << " (< 1e-3); (b) gap " << sci(gap_c) << " -> " << sci(gap_f) << ", ratio " << sci(gap_c / gap_f)
             << " (< 5e-3, ~4); (c) extrapolated " << sci(local.extrapolated[0]) << " vs " << sci(exact) << ", error "
             << sci(local_err) << " (< 1e-3)";
}

std::vector<std::pair<WaveState, ScalarField>> schroedinger_solutions()
{
    SimParams p;
    std::vector<std::pair<WaveState, ScalarField>> out;
    const GridSpec g1 = line(256, 12);
    const GridSpec g2 = GridSpec::cube(2, 64, -8, 8, true);
    const Potential h = Potential::harmonic(1.0);
    const ScalarField free1(g1);
    out.emplace_back(initialize(GaussianPacketInit{{0, 0, 0}, {1, 0, 0}, 1.0}, g1, p), free1);
    out.emplace_back(initialize(GaussianPacketInit{{-1, 0, 0}, {-0.5, 0, 0}, 0.7}, g1, p), free1);
    for (int n = 0; n <= 3; ++n)
        out.emplace_back(initialize(HarmonicEigenstateInit{{n, 0, 0}, 1.0}, g1, p), h.values(g1, 1.0));
    out.emplace_back(initialize(CoherentStateInit{{Complex(1.0, 0.7), 0, 0}, 1.0}, g1, p), h.values(g1, 1.0));
    out.emplace_back(initialize(CoherentStateInit{{Complex(1, 0.5), Complex(-0.5, 0.3), 0}, 1.0}, g2, p),
                     h.values(g2, 1.0));
    out.emplace_back(initialize(HarmonicEigenstateInit{{1, 0, 0}, 1.0}, g2, p), h.values(g2, 1.0));
    out.emplace_back(initialize(GaussianPacketInit{{0.5, -0.5, 0}, {1, 0.5, 0}, 1.0}, g2, p), ScalarField(g2));
    return out;
}

void observable_equivalence(Outcome& o)
{
    double worst_p = 0.0, worst_e = 0.0;
    const auto cases = schroedinger_solutions();
    for (const auto& [psi, v] : cases) {
        const MadelungState m = decompose(psi);
        for (const auto& r : equivalence_reports(psi, m, v)) {
            if (r.name.rfind("momentum", 0) == 0) worst_p = std::max(worst_p, r.gap);
            if (r.name == "energy") worst_e = std::max(worst_e, r.gap);
        }
    }
    o.require(worst_p < 1e-8 && worst_e < 1e-6);
    o.detail << cases.size() << " states: max|<p> - E[mX]| " << sci(worst_p) << " (< 1e-8); max|<H> - int E rho| "
             << sci(worst_e) << " (< 1e-6)";
}

void kolmogorov_neumann(Outcome& o)
{
    SimParams p;
    const GridSpec g = line(256, 10);
    const ScalarField v = Potential::harmonic(1.0).values(g, 1.0);
    double worst = 0.0;
    for (int n = 0; n <= 2; ++n) {
        const WaveState s = initialize(HarmonicEigenstateInit{{n, 0, 0}, 1.0}, g, p);
        const MadelungState m = decompose(s);
        const double e = n + 0.5;
        const NeumannSpectrum spec = neumann_spectrum(s, v);
        for (const auto& [lo, hi, expect] : {std::tuple{e - 0.3, e + 0.3, 1.0}, std::tuple{e + 0.2, e + 0.8, 0.0},
                                             std::tuple{e - 0.8, e - 0.2, 0.0}}) {
            worst = std::max(worst, std::abs(kolmogorov_energy_probability(m, v, lo, hi) - expect));
            worst = std::max(worst, std::abs(spec.probability(lo, hi) - expect));
        }
    }
    const WaveState a = initialize(HarmonicEigenstateInit{{0, 0, 0}, 1.0}, g, p);
    const WaveState b = initialize(HarmonicEigenstateInit{{1, 0, 0}, 1.0}, g, p);
    ComplexField sum(g);
    for (std::size_t i = 0; i < g.size(); ++i) sum[i] = a.psi[i] + b.psi[i];
    const WaveState s = initialize(CustomInit{sum}, g, p);
    const double neumann = neumann_energy_probability(s, v, 0.0, 1.0);
    const double kolmo = kolmogorov_energy_probability(decompose(s), v, 0.0, 1.0);
    o.require(worst < 1e-8);
    o.require(std::abs(neumann - 0.5) < 1e-6);
    o.detail << "eigenstates n=0..2 max deviation from 1/0 " << sci(worst) << " (< 1e-8); (0,1) superposition, J=[0,1]: "
             << "Neumann " << sci(neumann) << " (0.5 within 1e-6), Kolmogorov " << sci(kolmo) << " (reported only)";
}

void heisenberg(Outcome& o)
{
    double min_ratio = 1e300;
    for (const auto& s : stock_zoo()) {
        const auto h = heisenberg_report(s, decompose(s));
        for (int a = 0; a < s.grid().dim(); ++a) min_ratio = std::min(min_ratio, h.product_fourier[a] / (0.5 * s.params.hbar));
    }
    for (const auto& [s, v] : schroedinger_solutions()) {
        const auto h = heisenberg_report(s, decompose(s));
        for (int a = 0; a < s.grid().dim(); ++a) min_ratio = std::min(min_ratio, h.product_fourier[a] / (0.5 * s.params.hbar));
    }
    SimParams p;
    const WaveState g = initialize(GaussianPacketInit{{0.3, 0, 0}, {1, 0, 0}, 0.9}, line(512, 16), p);
    const double equality = std::abs(heisenberg_report(g, decompose(g)).product_fourier[0] - 0.5);
    double madelung = 0.0;
    for (int n = 0; n <= 3; ++n) {
        const WaveState e = initialize(HarmonicEigenstateInit{{n, 0, 0}, 1.0}, line(256, 10), p);
        madelung = std::max(madelung, heisenberg_report(e, decompose(e)).dp_madelung[0]);
    }
    o.require(min_ratio >= 1.0 - 1e-9);
    o.require(equality < 1e-6);
    o.require(madelung <= 1e-12);
    o.detail << "min dx dp / (hbar/2) " << sci(min_ratio) << " (>= 1 - 1e-9); Gaussian |dx dp - hbar/2| " << sci(equality)
             << " (< 1e-6); real eigenstates max dp_madelung " << sci(madelung) << " (<= 1e-12)";
}

void hydrogen(Outcome& o)
{
    const std::size_t n[3] = {400, 400, 8};
    const double lo[3] = {-1.2, -1.2, -0.1}, hi[3] = {1.2, 1.2, 0.1};
    const bool per[3] = {false, false, false};
    const GridSpec g(3, n, lo, hi, per);
    double winding_err = 0.0, off_err = 0.0, recorded_err = 0.0;
    bool all_raised = true;
    for (double mt : {1.0, 2.0, 0.5}) {
        analytic::HydrogenDriftParams hp;
        hp.m_tilde = mt;
        hp.r_min = 0.3;
        const auto f = analytic::hydrogen_drift_field(hp, g);
        for (double r : {0.6, 1.0})
            winding_err = std::max(winding_err, std::abs(analytic::circulation(f.drift, {{0, 0, 0}, r, 2}, 4096, 1, 1) - mt));
        for (const Point c : {Point{0.6, 0.6, 0}, Point{-0.7, 0.2, 0}})
            off_err = std::max(off_err, std::abs(analytic::circulation(f.drift, {c, 0.3, 2}, 4096, 1, 1)));
        MadelungState s;
        s.rho = ScalarField(g);
        for (std::size_t i = 0; i < g.size(); ++i) s.rho[i] = f.valid.contains(i) ? 1.0 : 0.0;
        s.drift = f.drift;
        s.support = f.valid;
        try {
            reconstruct_phase(s);
            all_raised = false;
        } catch (const TopologyError& e) {
            recorded_err = std::max(recorded_err, std::abs(e.winding() - mt) / mt);
        }
    }
    o.require(winding_err < 1e-6 && off_err < 1e-6);
    o.require(all_raised && recorded_err < 1e-4);
    o.detail << "winding loops max|C - m~| " << sci(winding_err) << " (< 1e-6); non-winding max|C| " << sci(off_err)
             << " (< 1e-6); reconstruction raised for all m~: " << (all_raised ? "yes" : "no")
             << ", recorded winding relative error " << sci(recorded_err) << " (< 1e-4)";
}

void creation(Outcome& o)
{
    SimParams p;
    p.dt = 1e-2;
    const GridSpec g = line(256, 12);
    const WaveState s = initialize(GaussianPacketInit{{0.5, 0, 0}, {0, 0, 0}, 1.0}, g, p);
    const SourceRun run = evolve_with_source(s, Potential::harmonic(1.0), SourceModel::uniform_decay(0.1), 5.0);
    const double rel = std::abs(run.masses.back() - std::exp(-0.5)) / std::exp(-0.5);
    const ProbabilitySeries series = probability_series(run);
    const double rate_err = std::abs(series.fitted_rate - 0.1);

    SimParams w = p;
    w.dt = 0.05;
    const auto packet = [&](double x0) {
        return initialize(GaussianPacketInit{{x0, 0, 0}, {0, 0, 0}, 1.0}, line(512, 24), w);
    };
    const SourceModel quad = SourceModel::density_quadratic(5.0);
    const double overlap = nonlinearity_witness(packet(-0.5), packet(0.5), Potential::free(), quad).defect;
    const double disjoint = nonlinearity_witness(packet(-12), packet(12), Potential::free(), quad).defect;

    o.require(rel < 1e-6 && rate_err < 1e-4);
    o.require(overlap > 1e-4 && disjoint < 1e-8);
    o.detail << "P(5) relative error " << sci(rel) << " (< 1e-6); fitted rate error " << sci(rate_err)
             << " (< 1e-4); witness overlapping " << sci(overlap) << " (> 1e-4), disjoint " << sci(disjoint)
             << " (< 1e-8)";
}

VectorField band_limited(const GridSpec& g, std::uint32_t seed)
{
    std::mt19937 rng(seed);
    std::normal_distribution<double> amp(0.0, 1.0);
    std::uniform_real_distribution<double> phase(0.0, 2 * pi);
    VectorField v(g, 3);
    for (int c = 0; c < 3; ++c)
        for (int kx = -2; kx <= 2; ++kx)
            for (int ky = -2; ky <= 2; ++ky)
                for (int kz = -2; kz <= 2; ++kz) {
                    if (kx * kx + ky * ky + kz * kz > 4) continue;
                    const double a = amp(rng) / (1 + kx * kx + ky * ky + kz * kz);
                    const double ph = phase(rng);
                    for (std::size_t i = 0; i < g.size(); ++i) {
                        const Point x = g.position(i);
                        v[c][i] += a * std::cos(kx * x[0] + ky * x[1] + kz * x[2] + ph);
                    }
                }
    return v;
}

void weber(Outcome& o)
{
    std::vector<double> cs;
    for (std::size_t n : {16u, 32u, 64u}) {
        const GridSpec g = GridSpec::cube(3, n, 0, 2 * pi, true);
        const double r = weber_residual(band_limited(g, 7), DerivativeScheme::FiniteDifference);
        const double h = g.spacing(0);
        cs.push_back(r / (h * h));
        o.detail << (n == 16 ? "" : ", ") << "n=" << n << " residual " << sci(r) << " C " << sci(cs.back());
    }
    const GridSpec gs = GridSpec::cube(3, 32, 0, 2 * pi, true);
    o.detail << "; spectral n=32 residual " << sci(weber_residual(band_limited(gs, 7), DerivativeScheme::Auto));
    for (std::size_t i = 1; i < cs.size(); ++i) o.require(std::abs(cs[i] / cs[i - 1] - 1.0) <= 0.25);
    o.detail << " (C within +-25% across refinements required)";
}

void classical_limit(Outcome& o)
{
    const std::vector<double> masses{1, 10, 100, 1000};
    const auto rep = classical_limit_run(masses, ClassicalScenario{});
    o.detail << "mean ratios";
    for (const auto& r : rep.rows) o.detail << " " << sci(r.mean_ratio);
    o.require(rep.strictly_decreasing);

    SimParams p;
    const GridSpec g = line(256, 10);
    const ScalarField rho = abs_squared(initialize(CoherentStateInit{{Complex(1, 0.4), 0, 0}, 1.0}, g, p).psi);
    SimParams heavy = p;
    heavy.mass = 4.0 * p.mass;
    const VectorField a = bohm_force(rho, p);
    const VectorField b = bohm_force(rho, heavy);
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < g.size(); ++i) mismatches += (b[0][i] != 0.25 * a[0][i]);
    o.require(mismatches == 0);
    o.detail << " (strictly decreasing: " << (rep.strictly_decreasing ? "yes" : "no")
             << "); F_B(4m) == F_B(m)/4 at " << g.size() - mismatches << "/" << g.size() << " points";
}

} // namespace

int main()
{
    struct Criterion {
        const char* name;
        std::function<void(Outcome&)> run;
    };
    const Criterion criteria[] = {
        {"unitarity", unitarity},
        {"solver vs closed form", solver_oracle},
        {"picture round-trip", round_trip},
        {"Madelung residual convergence", madelung_residuals},
        {"stationary cancellation", stationary_cancellation},
        {"transport theorems", transport_theorems},
        {"observable equivalence", observable_equivalence},
        {"Kolmogorov vs Neumann", kolmogorov_neumann},
        {"Heisenberg report", heisenberg},
        {"hydrogen circulation", hydrogen},
        {"creation and annihilation", creation},
        {"Weber identity", weber},
        {"classical limit", classical_limit},
    };
    int failed = 0;
    int index = 1;
    for (const auto& c : criteria) {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.run(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "exception: " << e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += o.pass ? 0 : 1;
        std::printf("%s %2d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", index++, c.name, o.detail.str().c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d of %d criteria pass\n", index - 1 - failed, index - 1);
    return failed == 0 ? 0 : 1;
}
