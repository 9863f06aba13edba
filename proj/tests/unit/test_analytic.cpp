#include <doctest.h>

#include <cmath>
#include <numbers>

#include "madelung/analytic.hpp"

using namespace madelung;
using namespace madelung::analytic;

TEST_CASE("Hermite functions are orthonormal")
{
    const GridSpec g = GridSpec::cube(1, 2000, -15, 15, false);
    for (int a = 0; a <= 5; ++a)
        for (int b = 0; b <= 5; ++b) {
            const ScalarField f = sample(g, [&](const Point& x) {
                return hermite_function(a, x[0], 1.3, 0.8, 1.0) * hermite_function(b, x[0], 1.3, 0.8, 1.0);
            });
            CHECK(integrate(f) == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-10));
        }
}

TEST_CASE("eigenstates satisfy the stationary equation")
{
    const double m = 1.0, w = 1.0, hb = 1.0, h = 1e-3;
    for (int n = 0; n <= 3; ++n)
        for (double x : {-1.3, 0.2, 0.9}) {
            const double f = hermite_function(n, x, m, w, hb);
            const double d2 = (hermite_function(n, x + h, m, w, hb) - 2 * f + hermite_function(n, x - h, m, w, hb)) / (h * h);
            const double hf = -0.5 * hb * hb / m * d2 + 0.5 * m * w * w * x * x * f;
            CHECK(hf == doctest::Approx(oscillator_energy(n, w, hb) * f).epsilon(1e-5));
        }
}

TEST_CASE("free packet width and drift")
{
    CHECK(gaussian_width(0.0, 0.7, 1.0, 1.0) == doctest::Approx(0.7));
    CHECK(gaussian_width(2.0, 1.0, 1.0, 1.0) == doctest::Approx(std::sqrt(2.0)));
    CHECK(gaussian_packet_drift(0.0, 0.0, 0.0, 1.5, 1.0, 1.0, 1.0) == doctest::Approx(1.5));
    // Drift from the phase of the closed form, by central differences.
    const double x = 0.8, t = 1.2, e = 1e-5;
    const Complex a = gaussian_packet_value(x - e, t, 0.3, 0.5, 0.9, 2.0, 1.0);
    const Complex b = gaussian_packet_value(x + e, t, 0.3, 0.5, 0.9, 2.0, 1.0);
    const double dphase = std::arg(b / a) / (2 * e);
    CHECK(0.5 * dphase == doctest::Approx(gaussian_packet_drift(x, t, 0.3, 0.5, 0.9, 2.0, 1.0)).epsilon(1e-6));
}

TEST_CASE("coherent state centre oscillates classically")
{
    const Complex alpha(1.0, 0.0);
    CHECK(coherent_center(alpha, 0.0, 1, 1, 1) == doctest::Approx(std::sqrt(2.0)));
    CHECK(coherent_center(alpha, std::numbers::pi, 1, 1, 1) == doctest::Approx(-std::sqrt(2.0)));
}

TEST_CASE("azimuthal drift circulation is quantised")
{
    const std::size_t n[3] = {200, 200, 8};
    const double lo[3] = {-1.2, -1.2, -0.1}, hi[3] = {1.2, 1.2, 0.1};
    const bool per[3] = {false, false, false};
    const GridSpec g(3, n, lo, hi, per);
    for (double mt : {1.0, 2.0, 0.5}) {
        HydrogenDriftParams p;
        p.m_tilde = mt;
        p.r_min = 0.3;
        const auto f = hydrogen_drift_field(p, g);
        CHECK(circulation(f.drift, {{0, 0, 0}, 1.0, 2}, 4096, 1, 1) == doctest::Approx(mt).epsilon(1e-5));
        CHECK(std::abs(circulation(f.drift, {{0.6, 0.6, 0}, 0.3, 2}, 4096, 1, 1)) < 1e-5);
    }
    HydrogenDriftParams tight;
    tight.r_min = 0.001;
    CHECK_THROWS_AS(hydrogen_drift_field(tight, g), Error);
    HydrogenDriftParams p;
    const auto f = hydrogen_drift_field(p, g);
    CHECK_THROWS_AS(circulation(f.drift, {{0, 0, 0}, 2.0, 2}, 256, 1, 1), Error);
}

TEST_CASE("azimuthal drift value")
{
    HydrogenDriftParams p;
    p.m_tilde = 2.0;
    const Point v = hydrogen_drift_value(p, {0.0, 0.5, 0.0});
    CHECK(v[0] == doctest::Approx(-4.0));
    CHECK(v[1] == doctest::Approx(0.0));
}
