#include <doctest.h>

#include <cmath>
#include <numbers>

#include "madelung/analytic.hpp"
#include "madelung/bridge.hpp"

using namespace madelung;

namespace {

GridSpec line(std::size_t n, double half, bool periodic = true)
{
    return GridSpec::cube(1, n, -half, half, periodic);
}

} // namespace

TEST_CASE("decompose recovers the drift of a boosted packet")
{
    SimParams p;
    p.mass = 2.0;
    const GridSpec g = line(256, 12);
    const WaveState s = initialize(GaussianPacketInit{{0, 0, 0}, {3, 0, 0}, 1.0}, g, p);
    const MadelungState m = decompose(s);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (m.support.contains(i) && std::abs(g.coord(0, i)) < 5) err = std::max(err, std::abs(m.drift[0][i] - 1.5));
    CHECK(err < 1e-9);
}

TEST_CASE("decompose rejects an empty state")
{
    SimParams p;
    WaveState s;
    s.psi = ComplexField(line(64, 5));
    s.params = p;
    CHECK_THROWS_AS(decompose(s), Error);
}

TEST_CASE("quantum potential of a Gaussian matches the closed form")
{
    SimParams p;
    const double sigma = 1.3;
    const GridSpec g = line(256, 12);
    const ScalarField rho = sample(g, [&](const Point& x) { return std::exp(-x[0] * x[0] / (2 * sigma * sigma)); });
    const ScalarField u = quantum_potential(rho, p);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.coord(0, i);
        if (std::abs(x) > 4 * sigma) continue;
        const double exact = -0.5 * (x * x / (4 * std::pow(sigma, 4)) - 1 / (2 * sigma * sigma));
        err = std::max(err, std::abs(u[i] - exact));
    }
    CHECK(err < 1e-9);
}

TEST_CASE("quantum potential is invariant under density scaling")
{
    SimParams p;
    const GridSpec g = line(128, 8);
    const ScalarField rho = sample(g, [](const Point& x) { return std::exp(-x[0] * x[0]) * (1.2 + std::sin(x[0])); });
    const ScalarField a = quantum_potential(rho, p);
    const VectorField fa = bohm_force(rho, p);
    for (double lambda : {0.5, 2.0, 8.0, 10.0}) {
        ScalarField scaled = rho;
        for (double& v : scaled.values()) v *= lambda;
        const ScalarField b = quantum_potential(scaled, p);
        const VectorField fb = bohm_force(scaled, p);
        const bool exact = lambda != 10.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (exact) {
                CHECK(a[i] == b[i]);
                CHECK(fa[0][i] == fb[0][i]);
            } else {
                // Rounding of rho / max rho is amplified by 1/R^2 towards the support floor.
                const double tol = rho[i] >= 1e-6 ? 1e-10 : 1e-6;
                CHECK(std::abs(a[i] - b[i]) <= tol * (1.0 + std::abs(a[i])));
                CHECK(std::abs(fa[0][i] - fb[0][i]) <= tol * (1.0 + std::abs(fa[0][i])));
            }
        }
    }
}

TEST_CASE("Bohm force is minus the gradient of the quantum potential")
{
    SimParams p;
    const GridSpec g = line(256, 10);
    const ScalarField rho = sample(g, [](const Point& x) { return std::exp(-x[0] * x[0] / 2) * (1 + 0.3 * std::cos(x[0])); });
    const VectorField f = bohm_force(rho, p);
    const VectorField grad_u = gradient(quantum_potential(rho, p), DerivativeScheme::FiniteDifference);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (std::abs(g.coord(0, i)) < 3) err = std::max(err, std::abs(f[0][i] + grad_u[0][i]));
    CHECK(err < 1e-5);
}

TEST_CASE("Bohm force cancels the trap force for the ground state")
{
    SimParams p;
    const GridSpec g = line(256, 10);
    const WaveState s = initialize(HarmonicEigenstateInit{{0, 0, 0}, 1.0}, g, p);
    const VectorField fb = bohm_force(abs_squared(s.psi), p);
    const VectorField f = Potential::harmonic(1.0).force(g, 1.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (std::abs(g.coord(0, i)) <= 4 / std::sqrt(2.0)) worst = std::max(worst, std::abs(fb[0][i] + f[0][i]));
    CHECK(worst < 1e-6);
}

TEST_CASE("phase reconstruction round-trips node-free states")
{
    SimParams p;
    const GridSpec g = GridSpec::cube(2, 64, -8, 8, true);
    const WaveState s = initialize(CoherentStateInit{{Complex(0.8, -0.4), Complex(0.2, 0.9), 0}, 1.0}, g, p);
    const MadelungState m = decompose(s);
    const PhaseField ph = anchored_phase(s, m);
    const WaveState back = reconstruct_wave(m, ph);
    CHECK(compare_up_to_phase(back.psi, s.psi, m.support).max_deviation < 1e-10);
    CHECK(ph.path_discrepancy < 1e-6);
}

TEST_CASE("a vortex is reported as a topological obstruction")
{
    SimParams p;
    const GridSpec g = GridSpec::cube(2, 96, -4, 4, false);
    WaveState s;
    s.params = p;
    s.psi = sample_complex(g, [](const Point& x) {
        const double r2 = x[0] * x[0] + x[1] * x[1];
        return Complex(x[0], x[1]) * std::exp(-r2 / 2);
    });
    DecomposeOptions o;
    o.rho_floor_relative = 0.1;
    const MadelungState m = decompose(s, o);
    bool masked = false;
    for (const auto& w : m.warnings) masked = masked || w.find("MaskedSupport") != std::string::npos;
    CHECK(masked);
    try {
        reconstruct_phase(m);
        FAIL("no topology error");
    } catch (const TopologyError& e) {
        CHECK(e.winding() == doctest::Approx(1.0).epsilon(1e-2));
    }
}

TEST_CASE("residuals need three uniformly spaced snapshots")
{
    SimParams p;
    const GridSpec g = line(64, 8);
    const WaveState s = initialize(GaussianPacketInit{}, g, p);
    std::vector<MadelungState> two{decompose(s), decompose(s)};
    ResidualInputs in;
    in.snapshots = two;
    in.potential = ScalarField(g);
    in.force = VectorField(g, 1);
    CHECK_THROWS_AS(residuals(in), Error);
}

TEST_CASE("residuals of exact snapshots are small and shrink under refinement")
{
    const auto run = [](std::size_t n, double dt) {
        SimParams p;
        const GridSpec g = line(n, 10);
        const Complex alpha(1.0, 0.5);
        std::vector<WaveState> w;
        std::vector<MadelungState> m;
        std::vector<PhaseField> ph;
        DecomposeOptions o;
        o.rho_floor_relative = 1e-4;
        for (int k = 0; k < 3; ++k) {
            w.push_back(analytic::coherent_state({alpha, 0, 0}, 0.3 + k * dt, g, p, 1.0));
            w.back().time = 0.3 + k * dt;
            m.push_back(decompose(w.back(), o));
        }
        for (int k = 0; k < 3; ++k) ph.push_back(anchored_phase(w[k], m[k]));
        ResidualInputs in;
        in.snapshots = m;
        in.phases = ph;
        const Potential v = Potential::harmonic(1.0);
        in.potential = v.values(g, 1.0);
        in.force = v.force(g, 1.0);
        return residuals(in);
    };
    const ResidualReport a = run(128, 0.02);
    const ResidualReport b = run(256, 0.01);
    CHECK(a.bernoulli_evaluated);
    CHECK(a.newton_madelung_l2 < 1e-2);
    CHECK(a.continuity_l2 / b.continuity_l2 > 3.0);
    CHECK(a.newton_madelung_l2 / b.newton_madelung_l2 > 3.0);
    CHECK(a.bernoulli_l2 / b.bernoulli_l2 > 3.0);
}

TEST_CASE("Weber identity holds for smooth fields")
{
    const GridSpec g = GridSpec::cube(3, 24, 0, 2 * std::numbers::pi, true);
    VectorField v(g, 3);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Point x = g.position(i);
        v[0][i] = std::sin(x[1]) + 0.5 * std::cos(x[2]);
        v[1][i] = std::sin(x[2]) * std::cos(x[0]);
        v[2][i] = std::cos(x[0] + x[1]);
    }
    CHECK(weber_residual(v) < 1e-10);
}

TEST_CASE("isolated ensembles keep their own quantum potential")
{
    SimParams p;
    const GridSpec g = line(512, 20, false);
    const WaveState a = initialize(GaussianPacketInit{{-8, 0, 0}, {0, 0, 0}, 0.6}, g, p);
    const WaveState b = initialize(GaussianPacketInit{{8, 0, 0}, {0, 0, 0}, 0.6}, g, p);
    DecomposeOptions o;
    o.rho_floor_relative = 1e-10;
    const auto rep = isolated_ensemble_check(decompose(a, o), decompose(b, o));
    CHECK(rep.max_deviation_first < 1e-6);
    CHECK(rep.max_deviation_second < 1e-6);

    const WaveState c = initialize(GaussianPacketInit{{-7.5, 0, 0}, {0, 0, 0}, 0.6}, g, p);
    CHECK_THROWS_AS(isolated_ensemble_check(decompose(a, o), decompose(c, o)), Error);
}

TEST_CASE("continuity residual detects a corrupted density")
{
    SimParams p;
    const GridSpec g = line(256, 10);
    const double dt = 0.01;
    std::vector<MadelungState> m;
    for (int k = 0; k < 3; ++k) {
        WaveState w = analytic::coherent_state({Complex(1.0, 0.5), 0, 0}, 0.3 + k * dt, g, p, 1.0);
        w.time = 0.3 + k * dt;
        m.push_back(decompose(w));
    }
    for (std::size_t i = 0; i < g.size(); ++i) m[1].rho[i] *= 1.0 + 0.1 * std::sin(2.0 * g.coord(0, i));
    ResidualInputs in;
    in.snapshots = m;
    const Potential v = Potential::harmonic(1.0);
    in.potential = v.values(g, 1.0);
    in.force = v.force(g, 1.0);
    CHECK(residuals(in).continuity_l2 > 1e-2);
}

TEST_CASE("Weber identity for a rigid rotation")
{
    const GridSpec g = GridSpec::cube(3, 24, -1, 1, false);
    VectorField v(g, 3);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Point x = g.position(i);
        v[0][i] = -x[1];
        v[1][i] = x[0];
    }
    const double h = g.spacing(0);
    CHECK(weber_residual(v) < h * h);
}

TEST_CASE("a constant phase shift leaves density and drift unchanged")
{
    SimParams p;
    const GridSpec g = GridSpec::cube(2, 64, -8, 8, true);
    const WaveState s = initialize(CoherentStateInit{{Complex(0.8, -0.4), Complex(0.2, 0.9), 0}, 1.0}, g, p);
    const MadelungState m = decompose(s);
    for (const Complex turn : {Complex(0, 1), Complex(-1, 0), Complex(0, -1)}) {
        WaveState t = s;
        for (std::size_t i = 0; i < g.size(); ++i) t.psi[i] = turn * s.psi[i];
        const MadelungState mt = decompose(t);
        bool same = true;
        for (std::size_t i = 0; i < g.size(); ++i) {
            same = same && mt.rho[i] == m.rho[i];
            for (int a = 0; a < 2; ++a) same = same && mt.drift[a][i] == m.drift[a][i];
        }
        CHECK(same);
    }
}

TEST_CASE("exact stationary ground-state snapshots have vanishing residuals")
{
    SimParams p;
    const GridSpec g = line(256, 10);
    const double dt = 0.01;
    std::vector<WaveState> w;
    std::vector<MadelungState> m;
    std::vector<PhaseField> ph;
    DecomposeOptions o;
    o.rho_floor_relative = 1e-4;
    for (int k = 0; k < 3; ++k) {
        w.push_back(analytic::oscillator_eigenstate({0, 0, 0}, 0.2 + k * dt, g, p, 1.0));
        w.back().time = 0.2 + k * dt;
        m.push_back(decompose(w.back(), o));
    }
    for (int k = 0; k < 3; ++k) ph.push_back(anchored_phase(w[k], m[k]));
    ResidualInputs in;
    in.snapshots = m;
    in.phases = ph;
    const Potential v = Potential::harmonic(1.0);
    in.potential = v.values(g, 1.0);
    in.force = v.force(g, 1.0);
    const ResidualReport r = residuals(in);
    MESSAGE("NM ", r.newton_madelung_l2, " C ", r.continuity_l2, " I ", r.irrotationality_l2, " B ", r.bernoulli_l2);
    CHECK(r.bernoulli_evaluated);
    CHECK(r.newton_madelung_l2 < 1e-6);
    CHECK(r.continuity_l2 < 1e-6);
    CHECK(r.irrotationality_l2 < 1e-6);
    CHECK(r.bernoulli_l2 < 1e-6);
}
