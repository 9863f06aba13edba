#include <doctest.h>

#include <cmath>
#include <numbers>

#include "madelung/analytic.hpp"
#include "madelung/dynamics.hpp"

using namespace madelung;

namespace {

GridSpec line(std::size_t n, double half, bool periodic = true)
{
    return GridSpec::cube(1, n, -half, half, periodic);
}

double max_diff(const ComplexField& a, const ComplexField& b)
{
    double e = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::abs(a[i] - b[i]));
    return e;
}

} // namespace

TEST_CASE("parameters are validated")
{
    SimParams p;
    p.mass = -1.0;
    CHECK_THROWS_AS(p.validate(), Error);
    p = SimParams{};
    p.snapshot_every = 0;
    CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("initial states are normalised once")
{
    SimParams p;
    const WaveState s = initialize(GaussianPacketInit{{1, 0, 0}, {2, 0, 0}, 0.7}, line(256, 12), p);
    CHECK(s.norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(initialize(CustomInit{ComplexField(line(64, 1))}, line(64, 1), p), Error);
}

TEST_CASE("split-step evolution is unitary")
{
    SimParams p;
    p.dt = 1e-3;
    const WaveState s = initialize(GaussianPacketInit{{0, 0, 0}, {1, 0, 0}, 1.0}, line(512, 20), p);
    const Trajectory t = evolve(s, Potential::free(), 0.5);
    CHECK(t.max_norm_deviation() < 1e-12);
    CHECK(t.norm_series.size() == 501);
}

TEST_CASE("free packet follows the closed-form spreading solution")
{
    SimParams p;
    p.dt = 2e-3;
    const GridSpec g = line(512, 20);
    const WaveState s = initialize(GaussianPacketInit{{-1, 0, 0}, {1.5, 0, 0}, 0.8}, g, p);
    const Trajectory t = evolve(s, Potential::free(), 1.0);
    const auto exact = analytic::gaussian_packet(1.0, {-1, 0, 0}, {1.5, 0, 0}, 0.8, g, p);
    CHECK(max_diff(t.snapshots.back().psi, exact.state.psi) < 1e-9);
}

TEST_CASE("Crank-Nicolson conserves the norm and keeps a discrete eigenstate")
{
    SimParams p;
    p.dt = 1e-2;
    p.solver = SolverKind::CrankNicolson;
    const GridSpec g = line(256, 10, false);
    const WaveState s = initialize(HarmonicEigenstateInit{{0, 0, 0}, 1.0}, g, p);
    const Trajectory t = evolve(s, Potential::harmonic(1.0), 1.0);
    CHECK(t.max_norm_deviation() < 1e-10);
    double overlap_loss = 0.0;
    Complex ov = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) ov += std::conj(s.psi[i]) * t.snapshots.back().psi[i];
    overlap_loss = 1.0 - std::abs(ov) * g.cell_volume();
    CHECK(overlap_loss < 1e-3);
}

TEST_CASE("coherent state centre follows the classical orbit")
{
    SimParams p;
    const double period = 2 * std::numbers::pi;
    p.dt = period / 2000;
    p.snapshot_every = 500;
    const GridSpec g = line(256, 12);
    const Complex alpha(1.2, 0.4);
    const WaveState s = initialize(CoherentStateInit{{alpha, 0, 0}, 1.0}, g, p);
    const Trajectory t = evolve(s, Potential::harmonic(1.0), period);
    for (const auto& snap : t.snapshots) {
        double mean = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) mean += g.coord(0, i) * std::norm(snap.psi[i]) * g.cell_volume();
        CHECK(std::abs(mean - analytic::coherent_center(alpha, snap.time, 1, 1, 1)) < 1e-5);
    }
}

TEST_CASE("mass reaching a bounded edge raises a warning")
{
    SimParams p;
    p.dt = 1e-2;
    p.solver = SolverKind::CrankNicolson;
    const WaveState s = initialize(GaussianPacketInit{{3, 0, 0}, {4, 0, 0}, 0.5}, line(128, 5, false), p);
    const Trajectory t = evolve(s, Potential::free(), 1.0);
    bool leak = false;
    for (const auto& w : t.warnings) leak = leak || w.find("BoundaryLeak") != std::string::npos;
    CHECK(leak);
}

TEST_CASE("potentials and their forces")
{
    const GridSpec g = GridSpec::cube(2, 32, -3, 3, false);
    const Potential h = Potential::harmonic(2.0);
    const ScalarField v = h.values(g, 1.5);
    const VectorField f = h.force(g, 1.5);
    const std::size_t i = g.flat(5, 20);
    const Point x = g.position(i);
    CHECK(v[i] == doctest::Approx(0.5 * 1.5 * 4.0 * (x[0] * x[0] + x[1] * x[1])));
    CHECK(f[0][i] == doctest::Approx(-1.5 * 4.0 * x[0]));

    const Potential slit(DoubleSlitPotential{});
    CHECK(slit.value({0.0, 0.0, 0}, 2, 1.0) == doctest::Approx(100.0));
    CHECK(slit.value({0.0, 1.0, 0}, 2, 1.0) == doctest::Approx(0.0));
    CHECK(slit.name() == "double_slit");
}
