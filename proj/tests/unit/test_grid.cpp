#include <doctest.h>

#include <cmath>
#include <numbers>

#include "madelung/grid.hpp"

using namespace madelung;
using std::numbers::pi;

TEST_CASE("grid construction validates its inputs")
{
    const std::size_t n[1] = {4};
    const double lo[1] = {0.0}, hi[1] = {1.0};
    const bool per[1] = {true};
    CHECK_THROWS_AS(GridSpec(1, n, lo, hi, per), Error);
    CHECK_THROWS_AS(GridSpec::cube(4, 16, 0, 1, true), Error);
    CHECK_THROWS_AS(GridSpec::cube(1, 16, 1, 0, true), Error);

    const GridSpec g = GridSpec::cube(2, 16, -1, 1, false);
    CHECK(g.size() == 256);
    CHECK(g.spacing(0) == doctest::Approx(0.125));
    CHECK(g.coord(0, 0) == doctest::Approx(-1.0 + 0.0625));
    for (std::size_t i : {0ul, 17ul, 255ul}) CHECK(g.flat(g.unflat(i)[0], g.unflat(i)[1]) == i);
}

TEST_CASE("neighbours wrap only on periodic axes")
{
    const GridSpec p = GridSpec::cube(1, 8, 0, 1, true);
    const GridSpec w = GridSpec::cube(1, 8, 0, 1, false);
    CHECK(p.neighbor(0, 0, -1).value() == 7);
    CHECK_FALSE(w.neighbor(0, 0, -1).has_value());
}

TEST_CASE("spectral derivative is exact for resolved periodic modes")
{
    const GridSpec g = GridSpec::cube(1, 64, 0, 2 * pi, true);
    const ScalarField f = sample(g, [](const Point& x) { return std::sin(3 * x[0]) + std::cos(5 * x[0]); });
    const ScalarField d = derivative(f, 0);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.coord(0, i);
        err = std::max(err, std::abs(d[i] - (3 * std::cos(3 * x) - 5 * std::sin(5 * x))));
    }
    CHECK(err < 1e-12);
}

TEST_CASE("finite differences converge at fourth order in the interior")
{
    const auto error = [](std::size_t n) {
        const GridSpec g = GridSpec::cube(1, n, 0, 1, false);
        const ScalarField f = sample(g, [](const Point& x) { return std::exp(std::sin(2 * x[0])); });
        const ScalarField d = derivative(f, 0);
        double err = 0.0;
        for (std::size_t i = 2; i + 2 < g.size(); ++i) {
            const double x = g.coord(0, i);
            err = std::max(err, std::abs(d[i] - 2 * std::cos(2 * x) * std::exp(std::sin(2 * x))));
        }
        return err;
    };
    const double ratio = error(64) / error(128);
    CHECK(ratio > 12.0);
    CHECK(ratio < 20.0);
}

TEST_CASE("boundary closures are second order")
{
    const auto error = [](std::size_t n) {
        const GridSpec g = GridSpec::cube(1, n, 0, 1, false);
        const ScalarField f = sample(g, [](const Point& x) { return std::exp(x[0]); });
        const ScalarField d = derivative(f, 0);
        return std::abs(d[0] - std::exp(g.coord(0, 0)));
    };
    const double ratio = error(64) / error(128);
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
}

TEST_CASE("curl of a gradient vanishes and laplacian routes agree")
{
    const GridSpec g = GridSpec::cube(3, 24, 0, 2 * pi, true);
    const ScalarField f =
        sample(g, [](const Point& x) { return std::sin(x[0]) * std::cos(2 * x[1]) + std::sin(x[2] + x[0]); });
    const VectorField c = curl(gradient(f));
    CHECK(max_norm(c, RegionMask::full(g)) < 1e-11);
    const ScalarField a = laplacian(f, DerivativeScheme::Auto, LaplacianRoute::Composed);
    const ScalarField b = laplacian(f, DerivativeScheme::Auto, LaplacianRoute::Spectral);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(a[i] - b[i]));
    CHECK(err < 1e-10);
}

TEST_CASE("divergence of a vector field matches the closed form in 2D")
{
    const GridSpec g = GridSpec::cube(2, 48, 0, 2 * pi, true);
    VectorField v(g, 2);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Point x = g.position(i);
        v[0][i] = std::sin(x[0]) * std::cos(x[1]);
        v[1][i] = std::sin(2 * x[1]);
    }
    const ScalarField d = divergence(v);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Point x = g.position(i);
        err = std::max(err, std::abs(d[i] - (std::cos(x[0]) * std::cos(x[1]) + 2 * std::cos(2 * x[1]))));
    }
    CHECK(err < 1e-11);
}

TEST_CASE("integration and interpolation")
{
    const GridSpec g = GridSpec::cube(1, 200, -10, 10, false);
    const ScalarField f = sample(g, [](const Point& x) { return std::exp(-x[0] * x[0]); });
    CHECK(integrate(f) == doctest::Approx(std::sqrt(pi)).epsilon(1e-12));
    CHECK_THROWS_AS(integrate(f, RegionMask(g)), Error);

    const ScalarField lin = sample(g, [](const Point& x) { return 3 * x[0] - 1; });
    CHECK(interpolate(lin, {0.123, 0, 0}).value() == doctest::Approx(3 * 0.123 - 1));
    CHECK_FALSE(interpolate(lin, {9.99, 0, 0}).has_value());
}

TEST_CASE("mask erosion and components")
{
    const GridSpec g = GridSpec::cube(2, 20, 0, 1, false);
    const RegionMask two = RegionMask::where(g, [](const Point& x, std::size_t) {
        return (x[0] < 0.4 || x[0] > 0.6) && x[1] > 0.2 && x[1] < 0.8;
    });
    int count = 0;
    two.components(count);
    CHECK(count == 2);
    const RegionMask e = RegionMask::full(g).eroded(2);
    CHECK(e.count() == 16 * 16);
    CHECK(two.unite(two.complement()) == RegionMask::full(g));
}

TEST_CASE("non-finite samples are rejected")
{
    const GridSpec g = GridSpec::cube(1, 16, 0, 1, true);
    ScalarField f(g);
    f[3] = std::nan("");
    CHECK_THROWS_AS(require_finite(f, "f"), Error);
}

TEST_CASE("rotation field has constant curl and the identity field constant divergence")
{
    const GridSpec g = GridSpec::cube(3, 16, -1, 1, false);
    VectorField rot(g, 3), id(g, 3);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Point x = g.position(i);
        rot[0][i] = -x[1];
        rot[1][i] = x[0];
        for (int a = 0; a < 3; ++a) id[a][i] = x[a];
    }
    const VectorField c = curl(rot);
    const ScalarField d = divergence(id);
    for (std::size_t i = 0; i < g.size(); i += 13) {
        CHECK(c[2][i] == doctest::Approx(2.0));
        CHECK(std::abs(c[0][i]) < 1e-12);
        CHECK(d[i] == doctest::Approx(3.0));
    }
    const VectorField c1 = curl(VectorField(GridSpec::cube(1, 16, 0, 1, false), 1));
    CHECK(max_norm(c1, RegionMask::full(c1.grid())) == 0.0);
}

TEST_CASE("Gaussian laplacian converges at fourth order and normalises")
{
    const double s = 0.7;
    const auto error = [&](std::size_t n) {
        const GridSpec g = GridSpec::cube(1, n, -8 * s, 8 * s, false);
        const ScalarField f = sample(g, [&](const Point& x) { return std::exp(-x[0] * x[0] / (2 * s * s)); });
        const ScalarField l = laplacian(f);
        double err = 0.0;
        for (std::size_t i = 4; i + 4 < g.size(); ++i) {
            const double x = g.coord(0, i);
            err = std::max(err, std::abs(l[i] - (x * x - s * s) / std::pow(s, 4) * f[i]));
        }
        return err;
    };
    const double ratio = error(128) / error(256);
    CHECK(ratio > 12.0);
    CHECK(ratio < 20.0);

    const GridSpec g = GridSpec::cube(1, 256, -8 * s, 8 * s, false);
    const ScalarField n = sample(g, [&](const Point& x) { return std::exp(-x[0] * x[0] / (2 * s * s)) / (std::sqrt(2 * pi) * s); });
    CHECK(integrate(n) == doctest::Approx(1.0).epsilon(1e-8));
    const ScalarField odd = sample(g, [](const Point& x) { return x[0]; });
    CHECK(std::abs(integrate(odd)) < 1e-12);
}

TEST_CASE("discrete identities hold for band-limited fields")
{
    const GridSpec g = GridSpec::cube(3, 16, 0, 2 * pi, true);
    VectorField w(g, 3);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Point x = g.position(i);
        w[0][i] = std::sin(x[1] + 2 * x[2]);
        w[1][i] = std::cos(3 * x[0]) * std::sin(x[2]);
        w[2][i] = std::sin(x[0] - x[1]);
    }
    CHECK(max_norm(divergence(curl(w)), RegionMask::full(g)) < 1e-11);
    CHECK(max_norm(divergence(curl(w, DerivativeScheme::FiniteDifference), DerivativeScheme::FiniteDifference),
                   RegionMask::full(g)) < 1e-11);
}
