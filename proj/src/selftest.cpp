#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>
#include <sstream>

#include "madelung/analytic.hpp"
#include "madelung/bridge.hpp"
#include "madelung/creation.hpp"
#include "madelung/field_io.hpp"
#include "madelung/observables.hpp"
#include "madelung/runner.hpp"
#include "madelung/transport.hpp"

namespace madelung {

namespace {

struct Property {
    const char* name;
    std::function<bool(std::string&)> check;
};

GridSpec line(std::size_t n, double half, bool periodic)
{
    return GridSpec::cube(1, n, -half, half, periodic);
}

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

std::vector<Property> properties()
{
    std::vector<Property> p;

    p.push_back({"config round-trip", [](std::string& info) {
                     RunConfig c;
                     c.grid = {2, {32, 32}, {-4, -4}, {4, 4}, {true, false}};
                     c.potential.kind = "harmonic";
                     c.source.kind = "uniform_decay";
                     c.source.gamma = 0.1;
                     c.experiments.push_back({"decay", "d", {{"fit", true}}});
                     const RunConfig back = RunConfig::parse(c.to_json().dump());
                     info = "sections compared field by field";
                     return back == c;
                 }});

    p.push_back({"config rejects unknown keys", [](std::string& info) {
                     try {
                         RunConfig::parse(R"({"grid": {"dim": 1, "nn": [64]}})");
                     } catch (const Error& e) {
                         info = e.what();
                         return e.code() == ErrorCode::ConfigError &&
                                std::string(e.what()).find("grid.nn") != std::string::npos;
                     }
                     return false;
                 }});

    p.push_back({"field file round-trip", [](std::string& info) {
                     const GridSpec g = GridSpec::cube(2, 16, -1, 1, false);
                     const ComplexField f = sample_complex(g, [](const Point& x) {
                         return Complex(std::sin(3 * x[0]), x[1] * x[1]);
                     });
                     std::stringstream buf;
                     field_io::write(buf, f);
                     const auto back = std::get<ComplexField>(field_io::read(buf));
                     bool same = back.grid() == g;
                     for (std::size_t i = 0; i < g.size() && same; ++i) same = back[i] == f[i];
                     info = "bitwise comparison";
                     return same;
                 }});

    p.push_back({"split-step unitarity", [](std::string& info) {
                     SimParams sp;
                     sp.dt = 1e-3;
                     const WaveState s = initialize(GaussianPacketInit{{0, 0, 0}, {1, 0, 0}, 1.0}, line(256, 12, true), sp);
                     const Trajectory t = evolve(s, Potential::free(), 0.2);
                     info = "max |norm - 1| = " + fmt(t.max_norm_deviation());
                     return t.max_norm_deviation() < 1e-12;
                 }});

    p.push_back({"free packet matches closed form", [](std::string& info) {
                     SimParams sp;
                     sp.dt = 1e-3;
                     const GridSpec g = line(512, 16, true);
                     const WaveState s = initialize(GaussianPacketInit{{0, 0, 0}, {0.5, 0, 0}, 1.0}, g, sp);
                     const Trajectory t = evolve(s, Potential::free(), 0.5);
                     const auto exact = analytic::gaussian_packet(0.5, {0, 0, 0}, {0.5, 0, 0}, 1.0, g, sp);
                     double err = 0.0;
                     for (std::size_t i = 0; i < g.size(); ++i)
                         err = std::max(err, std::abs(t.snapshots.back().psi[i] - exact.state.psi[i]));
                     info = "max |dpsi| = " + fmt(err);
                     return err < 1e-6;
                 }});

    p.push_back({"decompose/reconstruct round-trip", [](std::string& info) {
                     SimParams sp;
                     const GridSpec g = GridSpec::cube(2, 64, -8, 8, true);
                     const WaveState s = initialize(CoherentStateInit{{Complex(1, 0.5), Complex(-0.5, 0.3), 0}, 1.0}, g, sp);
                     const MadelungState m = decompose(s);
                     const WaveState back = reconstruct_wave(m, anchored_phase(s, m));
                     const auto cmp = compare_up_to_phase(back.psi, s.psi, m.support);
                     info = "max deviation = " + fmt(cmp.max_deviation);
                     return cmp.max_deviation < 1e-10;
                 }});

    p.push_back({"stationary force cancellation", [](std::string& info) {
                     SimParams sp;
                     const GridSpec g = line(256, 10, true);
                     const WaveState s = initialize(HarmonicEigenstateInit{{0, 0, 0}, 1.0}, g, sp);
                     const MadelungState m = decompose(s);
                     const VectorField fb = bohm_force(m.rho, sp);
                     const VectorField f = Potential::harmonic(1.0).force(g, sp.mass);
                     double worst = 0.0;
                     for (std::size_t i = 0; i < g.size(); ++i)
                         if (std::abs(g.position(i)[0]) <= 4.0 / std::sqrt(2.0))
                             worst = std::max(worst, std::abs(fb[0][i] + f[0][i]));
                     info = "max |F + F_B| = " + fmt(worst);
                     return worst < 1e-6;
                 }});

    p.push_back({"momentum and energy equivalence", [](std::string& info) {
                     SimParams sp;
                     const GridSpec g = line(256, 10, true);
                     const WaveState s = initialize(CoherentStateInit{{Complex(1.0, 0.7), 0, 0}, 1.0}, g, sp);
                     const MadelungState m = decompose(s);
                     const ScalarField v = Potential::harmonic(1.0).values(g, sp.mass);
                     double worst_p = 0.0, worst_e = 0.0;
                     for (const auto& r : equivalence_reports(s, m, v)) {
                         if (r.name.rfind("momentum", 0) == 0) worst_p = std::max(worst_p, r.gap);
                         if (r.name == "energy") worst_e = std::max(worst_e, r.gap);
                     }
                     info = "momentum gap " + fmt(worst_p) + ", energy gap " + fmt(worst_e);
                     return worst_p < 1e-8 && worst_e < 1e-6;
                 }});

    p.push_back({"eigenstate energy probabilities", [](std::string& info) {
                     SimParams sp;
                     const GridSpec g = line(256, 10, true);
                     const ScalarField v = Potential::harmonic(1.0).values(g, sp.mass);
                     double worst = 0.0;
                     for (int n = 0; n <= 2; ++n) {
                         const WaveState s = initialize(HarmonicEigenstateInit{{n, 0, 0}, 1.0}, g, sp);
                         const MadelungState m = decompose(s);
                         const double e = n + 0.5;
                         worst = std::max(worst, std::abs(kolmogorov_energy_probability(m, v, e - 0.25, e + 0.25) - 1.0));
                         worst = std::max(worst, std::abs(neumann_energy_probability(s, v, e - 0.25, e + 0.25) - 1.0));
                         worst = std::max(worst, std::abs(neumann_energy_probability(s, v, e + 0.5, e + 0.9)));
                     }
                     info = "max deviation = " + fmt(worst);
                     return worst < 1e-8;
                 }});

    p.push_back({"uncertainty bound", [](std::string& info) {
                     SimParams sp;
                     const GridSpec g = line(512, 16, true);
                     const WaveState s = initialize(GaussianPacketInit{{0, 0, 0}, {1, 0, 0}, 1.0}, g, sp);
                     const auto h = heisenberg_report(s, decompose(s));
                     info = "dx dp = " + fmt(h.product_fourier[0]);
                     return std::abs(h.product_fourier[0] - 0.5) < 1e-6;
                 }});

    p.push_back({"hydrogen circulation", [](std::string& info) {
                     const std::size_t n[3] = {160, 160, 8};
                     const double lo[3] = {-1.2, -1.2, -0.1}, hi[3] = {1.2, 1.2, 0.1};
                     const bool per[3] = {false, false, false};
                     const GridSpec g(3, n, lo, hi, per);
                     analytic::HydrogenDriftParams hp;
                     hp.m_tilde = 2.0;
                     hp.r_min = 0.3;
                     const auto f = analytic::hydrogen_drift_field(hp, g);
                     const double c = analytic::circulation(f.drift, {{0, 0, 0}, 1.0, 2}, 4096, 1.0, 1.0);
                     info = "normalised circulation = " + fmt(c);
                     return std::abs(c - 2.0) < 1e-3;
                 }});

    p.push_back({"uniform decay law", [](std::string& info) {
                     SimParams sp;
                     sp.dt = 1e-2;
                     const WaveState s = initialize(GaussianPacketInit{{0, 0, 0}, {0, 0, 0}, 1.0}, line(128, 10, true), sp);
                     const auto run = evolve_with_source(s, Potential::harmonic(1.0), SourceModel::uniform_decay(0.1), 1.0);
                     const double rel = std::abs(run.masses.back() - std::exp(-0.1)) / std::exp(-0.1);
                     info = "relative deviation = " + fmt(rel);
                     return rel < 1e-9;
                 }});

    p.push_back({"linear source is linear", [](std::string& info) {
                     SimParams sp;
                     sp.dt = 1e-2;
                     const GridSpec g = line(128, 10, true);
                     const WaveState a = initialize(GaussianPacketInit{{-1, 0, 0}, {0, 0, 0}, 1.0}, g, sp);
                     const WaveState b = initialize(GaussianPacketInit{{1, 0, 0}, {0, 0, 0}, 1.0}, g, sp);
                     const auto r = nonlinearity_witness(a, b, Potential::free(), SourceModel::uniform_decay(0.5));
                     info = "defect = " + fmt(r.defect);
                     return r.defect < 1e-12;
                 }});

    p.push_back({"transported probability conserved", [](std::string& info) {
                     SimParams sp;
                     sp.dt = 1e-3;
                     sp.snapshot_every = 50;
                     const WaveState s = initialize(GaussianPacketInit{{0, 0, 0}, {0.5, 0, 0}, 1.0}, line(256, 12, true), sp);
                     const Trajectory t = evolve(s, Potential::free(), 0.5);
                     std::vector<MadelungState> m;
                     for (const auto& w : t.snapshots) m.push_back(decompose(w));
                     const auto r = conservation_check(m, interval_region(-0.67, 0.67));
                     info = "max drift = " + fmt(r.max_drift);
                     return r.max_drift < 1e-3;
                 }});

    p.push_back({"Bohm force scaling", [](std::string& info) {
                     SimParams sp;
                     const GridSpec g = line(128, 8, true);
                     const ScalarField rho = abs_squared(initialize(GaussianPacketInit{}, g, sp).psi);
                     SimParams heavy = sp;
                     heavy.mass = 4.0;
                     const VectorField a = bohm_force(rho, sp);
                     const VectorField b = bohm_force(rho, heavy);
                     double worst = 0.0;
                     for (std::size_t i = 0; i < g.size(); ++i)
                         worst = std::max(worst, std::abs(b[0][i] - 0.25 * a[0][i]));
                     info = "max |F_B(4m) - F_B(m)/4| = " + fmt(worst);
                     return worst == 0.0;
                 }});

    return p;
}

} // namespace

int selftest(std::ostream& out)
{
    int failed = 0;
    for (const auto& prop : properties()) {
        std::string info;
        bool ok = false;
        try {
            ok = prop.check(info);
        } catch (const std::exception& e) {
            info = e.what();
        }
        if (!ok) ++failed;
        out << (ok ? "PASS " : "FAIL ") << prop.name;
        if (!info.empty()) out << " (" << info << ")";
        out << '\n';
    }
    out << (failed == 0 ? "all properties pass" : std::to_string(failed) + " propert" + (failed == 1 ? "y" : "ies") + " failed")
        << '\n';
    return failed == 0 ? 0 : 1;
}

} // namespace madelung
