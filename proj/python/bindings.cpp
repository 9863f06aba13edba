#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "madelung/analytic.hpp"
#include "madelung/bridge.hpp"
#include "madelung/creation.hpp"
#include "madelung/observables.hpp"
#include "madelung/runner.hpp"
#include "madelung/transport.hpp"

namespace py = pybind11;
using namespace madelung;

namespace {

std::vector<py::ssize_t> shape_of(const GridSpec& g)
{
    std::vector<py::ssize_t> s;
    for (int a = 0; a < g.dim(); ++a) s.push_back(static_cast<py::ssize_t>(g.points(a)));
    return s;
}

template <class T>
py::array_t<T> to_array(const BasicScalarField<T>& f)
{
    py::array_t<T> out(shape_of(f.grid()));
    std::copy(f.values().begin(), f.values().end(), out.mutable_data());
    return out;
}

py::array_t<double> to_array(const VectorField& v)
{
    auto shape = shape_of(v.grid());
    shape.insert(shape.begin(), v.components());
    py::array_t<double> out(shape);
    double* dst = out.mutable_data();
    for (int c = 0; c < v.components(); ++c)
        dst = std::copy(v[c].values().begin(), v[c].values().end(), dst);
    return out;
}

py::array_t<bool> to_array(const RegionMask& m)
{
    py::array_t<bool> out(shape_of(m.grid()));
    bool* dst = out.mutable_data();
    for (std::size_t i = 0; i < m.grid().size(); ++i) dst[i] = m.contains(i);
    return out;
}

template <class T>
BasicScalarField<T> from_array(const GridSpec& g, const py::array_t<T, py::array::c_style | py::array::forcecast>& a)
{
    if (static_cast<std::size_t>(a.size()) != g.size())
        throw Error(ErrorCode::InvalidArgument, "array has " + std::to_string(a.size()) + " values, grid has " +
                                                    std::to_string(g.size()));
    return BasicScalarField<T>(g, std::vector<T>(a.data(), a.data() + a.size()));
}

VectorField vector_from_array(const GridSpec& g, const py::array_t<double, py::array::c_style | py::array::forcecast>& a)
{
    if (a.ndim() < 1 || static_cast<std::size_t>(a.size()) != g.size() * static_cast<std::size_t>(a.shape(0)))
        throw Error(ErrorCode::InvalidArgument, "vector array must have shape (components, *grid)");
    VectorField v(g, static_cast<int>(a.shape(0)));
    const double* src = a.data();
    for (int c = 0; c < v.components(); ++c)
        for (std::size_t i = 0; i < g.size(); ++i) v[c][i] = *src++;
    return v;
}

Point point_of(const std::vector<double>& v)
{
    Point p{0, 0, 0};
    for (std::size_t i = 0; i < v.size() && i < 3; ++i) p[i] = v[i];
    return p;
}

std::vector<double> listed(const Point& p, int dim)
{
    return {p.begin(), p.begin() + dim};
}

py::object json_to_py(const nlohmann::json& j)
{
    return py::module_::import("json").attr("loads")(j.dump());
}

py::dict residual_dict(const ResidualReport& r)
{
    py::dict d;
    d["newton_madelung_l2"] = r.newton_madelung_l2;
    d["newton_madelung_max"] = r.newton_madelung_max;
    d["continuity_l2"] = r.continuity_l2;
    d["continuity_max"] = r.continuity_max;
    d["irrotationality_l2"] = r.irrotationality_l2;
    d["irrotationality_max"] = r.irrotationality_max;
    d["bernoulli_l2"] = r.bernoulli_l2;
    d["bernoulli_max"] = r.bernoulli_max;
    d["bernoulli_evaluated"] = r.bernoulli_evaluated;
    d["weber_l2"] = r.weber_l2;
    d["weber_max"] = r.weber_max;
    d["time"] = r.time;
    d["snapshot_spacing"] = r.snapshot_spacing;
    d["centres"] = r.centres;
    d["points"] = r.points;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Wave-function and Madelung-picture quantum dynamics";

    static py::exception<Error> error(m, "Error");
    static py::exception<TopologyError> topology(m, "TopologyError", error.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const TopologyError& e) {
            py::object exc = py::handle(topology.ptr())(e.what());
            exc.attr("code") = std::string(to_string(e.code()));
            exc.attr("circulation") = e.circulation();
            exc.attr("winding") = e.winding();
            PyErr_SetObject(topology.ptr(), exc.ptr());
        } catch (const Error& e) {
            py::object exc = py::handle(error.ptr())(e.what());
            exc.attr("code") = std::string(to_string(e.code()));
            PyErr_SetObject(error.ptr(), exc.ptr());
        }
    });

    py::class_<GridSpec>(m, "Grid")
        .def(py::init([](int dim, std::vector<std::size_t> n, std::vector<double> lower, std::vector<double> upper,
                         std::vector<bool> periodic) {
                 const auto broadcast = [dim](auto v) {
                     if (v.size() == 1) v.resize(static_cast<std::size_t>(dim), v.front());
                     return v;
                 };
                 n = broadcast(n);
                 lower = broadcast(lower);
                 upper = broadcast(upper);
                 periodic = broadcast(periodic);
                 bool flags[3] = {false, false, false};
                 for (std::size_t i = 0; i < periodic.size() && i < 3; ++i) flags[i] = periodic[i];
                 return GridSpec(dim, n, lower, upper, std::span<const bool>(flags, periodic.size()));
             }),
             py::arg("dim"), py::arg("n"), py::arg("lower"), py::arg("upper"), py::arg("periodic"))
        .def_static("cube", &GridSpec::cube, py::arg("dim"), py::arg("n"), py::arg("lower"), py::arg("upper"),
                    py::arg("periodic") = true)
        .def_property_readonly("dim", &GridSpec::dim)
        .def_property_readonly("shape", [](const GridSpec& g) { return py::tuple(py::cast(shape_of(g))); })
        .def_property_readonly("spacing",
                               [](const GridSpec& g) {
                                   std::vector<double> h;
                                   for (int a = 0; a < g.dim(); ++a) h.push_back(g.spacing(a));
                                   return h;
                               })
        .def_property_readonly("cell_volume", &GridSpec::cell_volume)
        .def("coords",
             [](const GridSpec& g, int axis) {
                 if (axis < 0 || axis >= g.dim()) throw Error(ErrorCode::InvalidArgument, "axis out of range");
                 py::array_t<double> x(static_cast<py::ssize_t>(g.points(axis)));
                 double* dst = x.mutable_data();
                 for (std::size_t i = 0; i < g.points(axis); ++i) dst[i] = g.coord(axis, i);
                 return x;
             })
        .def("__repr__", [](const GridSpec& g) {
            std::ostringstream os;
            os << "Grid(dim=" << g.dim() << ", shape=(";
            for (int a = 0; a < g.dim(); ++a) os << (a ? ", " : "") << g.points(a);
            os << "))";
            return os.str();
        });

    py::class_<SimParams>(m, "SimParams")
        .def(py::init([](double mass, double hbar, double dt, std::size_t snapshot_every, const std::string& solver) {
                 SimParams p;
                 p.mass = mass;
                 p.hbar = hbar;
                 p.dt = dt;
                 p.snapshot_every = snapshot_every;
                 if (solver == "crank_nicolson")
                     p.solver = SolverKind::CrankNicolson;
                 else if (solver != "split_step")
                     throw Error(ErrorCode::InvalidArgument, "solver must be split_step or crank_nicolson");
                 p.validate();
                 return p;
             }),
             py::arg("mass") = 1.0, py::arg("hbar") = 1.0, py::arg("dt") = 1e-3, py::arg("snapshot_every") = 1,
             py::arg("solver") = "split_step")
        .def_readwrite("mass", &SimParams::mass)
        .def_readwrite("hbar", &SimParams::hbar)
        .def_readwrite("dt", &SimParams::dt)
        .def_readwrite("snapshot_every", &SimParams::snapshot_every);

    py::class_<Potential>(m, "Potential")
        .def_static("free", &Potential::free)
        .def_static(
            "harmonic",
            [](double omega, std::vector<double> center) { return Potential(HarmonicPotential{omega, point_of(center)}); },
            py::arg("omega") = 1.0, py::arg("center") = std::vector<double>{})
        .def_static(
            "soft_coulomb",
            [](double charge, double epsilon, std::vector<double> center) {
                return Potential(SoftCoulombPotential{charge, epsilon, point_of(center)});
            },
            py::arg("charge") = 1.0, py::arg("epsilon") = 0.1, py::arg("center") = std::vector<double>{})
        .def_property_readonly("name", &Potential::name)
        .def("values", [](const Potential& v, const GridSpec& g, double mass) { return to_array(v.values(g, mass)); },
             py::arg("grid"), py::arg("mass") = 1.0)
        .def("force", [](const Potential& v, const GridSpec& g, double mass) { return to_array(v.force(g, mass)); },
             py::arg("grid"), py::arg("mass") = 1.0);

    py::class_<WaveState>(m, "WaveState")
        .def_property_readonly("psi", [](const WaveState& w) { return to_array(w.psi); })
        .def_property_readonly("grid", &WaveState::grid)
        .def_readonly("time", &WaveState::time)
        .def_readonly("params", &WaveState::params)
        .def_readonly("warnings", &WaveState::warnings)
        .def("norm", &WaveState::norm);

    m.def(
        "gaussian",
        [](const GridSpec& g, std::vector<double> x0, std::vector<double> p0, double sigma, const SimParams& p) {
            return initialize(GaussianPacketInit{point_of(x0), point_of(p0), sigma}, g, p);
        },
        py::arg("grid"), py::arg("x0") = std::vector<double>{}, py::arg("p0") = std::vector<double>{},
        py::arg("sigma") = 1.0, py::arg("params") = SimParams{});
    m.def(
        "eigenstate",
        [](const GridSpec& g, std::vector<int> n, double omega, const SimParams& p) {
            std::array<int, 3> q{0, 0, 0};
            for (std::size_t i = 0; i < n.size() && i < 3; ++i) q[i] = n[i];
            return initialize(HarmonicEigenstateInit{q, omega}, g, p);
        },
        py::arg("grid"), py::arg("n"), py::arg("omega") = 1.0, py::arg("params") = SimParams{});
    m.def(
        "coherent",
        [](const GridSpec& g, std::vector<Complex> alpha, double omega, const SimParams& p) {
            std::array<Complex, 3> a{};
            for (std::size_t i = 0; i < alpha.size() && i < 3; ++i) a[i] = alpha[i];
            return initialize(CoherentStateInit{a, omega}, g, p);
        },
        py::arg("grid"), py::arg("alpha"), py::arg("omega") = 1.0, py::arg("params") = SimParams{});
    m.def(
        "from_array",
        [](const GridSpec& g, const py::array_t<Complex, py::array::c_style | py::array::forcecast>& psi,
           const SimParams& p) { return initialize(CustomInit{from_array<Complex>(g, psi)}, g, p); },
        py::arg("grid"), py::arg("psi"), py::arg("params") = SimParams{},
        "Normalised wave state from samples in C order");

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("snapshots", &Trajectory::snapshots)
        .def_readonly("norm_series", &Trajectory::norm_series)
        .def_readonly("norm_times", &Trajectory::norm_times)
        .def_readonly("warnings", &Trajectory::warnings)
        .def("max_norm_deviation", &Trajectory::max_norm_deviation);

    m.def(
        "evolve",
        [](const WaveState& s, const Potential& v, double t_final) {
            py::gil_scoped_release release;
            return evolve(s, v, t_final);
        },
        py::arg("state"), py::arg("potential"), py::arg("t_final"));

    py::class_<MadelungState>(m, "MadelungState")
        .def_property_readonly("rho", [](const MadelungState& s) { return to_array(s.rho); })
        .def_property_readonly("drift", [](const MadelungState& s) { return to_array(s.drift); })
        .def_property_readonly("support", [](const MadelungState& s) { return to_array(s.support); })
        .def_property_readonly("grid", &MadelungState::grid)
        .def_readonly("time", &MadelungState::time)
        .def_readonly("rho_floor", &MadelungState::rho_floor)
        .def_readonly("warnings", &MadelungState::warnings);

    m.def(
        "decompose",
        [](const WaveState& s, double floor) {
            DecomposeOptions o;
            o.rho_floor_relative = floor;
            return decompose(s, o);
        },
        py::arg("state"), py::arg("rho_floor_relative") = 1e-12);

    py::class_<PhaseField>(m, "PhaseField")
        .def_property_readonly("phi", [](const PhaseField& p) { return to_array(p.phi); })
        .def_readonly("reference_index", &PhaseField::reference_index)
        .def_readonly("reference_value", &PhaseField::reference_value)
        .def_readonly("path_discrepancy", &PhaseField::path_discrepancy);

    m.def(
        "reconstruct_phase",
        [](const MadelungState& s, double tol) {
            PhaseOptions o;
            o.path_tolerance = tol;
            return reconstruct_phase(s, o);
        },
        py::arg("state"), py::arg("path_tolerance") = 1e-3);
    m.def(
        "anchored_phase",
        [](const WaveState& w, const MadelungState& s, double tol) {
            PhaseOptions o;
            o.path_tolerance = tol;
            return anchored_phase(w, s, o);
        },
        py::arg("wave"), py::arg("state"), py::arg("path_tolerance") = 1e-3);
    m.def("reconstruct_wave", &reconstruct_wave, py::arg("state"), py::arg("phase"));
    m.def(
        "max_deviation_up_to_phase",
        [](const WaveState& a, const WaveState& b, const MadelungState& s) {
            return compare_up_to_phase(a.psi, b.psi, s.support).max_deviation;
        },
        py::arg("a"), py::arg("b"), py::arg("state"));

    m.def(
        "quantum_potential", [](const MadelungState& s) { return to_array(quantum_potential(s.rho, s.params)); },
        py::arg("state"));
    m.def(
        "bohm_force",
        [](const GridSpec& g, const py::array_t<double, py::array::c_style | py::array::forcecast>& rho,
           const SimParams& p) { return to_array(bohm_force(from_array<double>(g, rho), p)); },
        py::arg("grid"), py::arg("rho"), py::arg("params") = SimParams{});

    m.def(
        "residuals",
        [](const std::vector<WaveState>& waves, const Potential& v, double floor, bool bernoulli) {
            if (waves.empty()) throw Error(ErrorCode::InsufficientSnapshots, "no snapshots");
            const GridSpec& g = waves.front().grid();
            const double mass = waves.front().params.mass;
            DecomposeOptions o;
            o.rho_floor_relative = floor;
            std::vector<MadelungState> snaps;
            std::vector<PhaseField> phases;
            for (const auto& w : waves) snaps.push_back(decompose(w, o));
            if (bernoulli)
                for (std::size_t k = 0; k < waves.size(); ++k) phases.push_back(anchored_phase(waves[k], snaps[k]));
            ResidualInputs in;
            in.snapshots = snaps;
            in.potential = v.values(g, mass);
            in.force = v.force(g, mass);
            in.phases = phases;
            return residual_dict(residuals(in));
        },
        py::arg("snapshots"), py::arg("potential"), py::arg("rho_floor_relative") = 1e-4, py::arg("bernoulli") = true,
        "Madelung residual norms over at least three uniformly spaced wave snapshots");

    m.def(
        "weber_residual",
        [](const GridSpec& g, const py::array_t<double, py::array::c_style | py::array::forcecast>& v,
           bool finite_difference) {
            return weber_residual(vector_from_array(g, v),
                                  finite_difference ? DerivativeScheme::FiniteDifference : DerivativeScheme::Auto);
        },
        py::arg("grid"), py::arg("v"), py::arg("finite_difference") = false);

    m.def(
        "equivalence",
        [](const WaveState& w, const Potential& v) {
            const MadelungState s = decompose(w);
            py::list out;
            for (const auto& r : equivalence_reports(w, s, v.values(w.grid(), w.params.mass))) {
                py::dict d;
                d["name"] = r.name;
                d["kolmogorov"] = r.kolmogorov_value;
                d["operator"] = r.operator_value;
                d["gap"] = r.gap;
                out.append(d);
            }
            return out;
        },
        py::arg("state"), py::arg("potential"));
    m.def(
        "energy_probability",
        [](const WaveState& w, const Potential& v, double lo, double hi) {
            const ScalarField values = v.values(w.grid(), w.params.mass);
            return py::make_tuple(kolmogorov_energy_probability(decompose(w), values, lo, hi),
                                  neumann_energy_probability(w, values, lo, hi));
        },
        py::arg("state"), py::arg("potential"), py::arg("lo"), py::arg("hi"),
        "(Kolmogorov, Neumann) probabilities of the energy interval [lo, hi]");
    m.def(
        "heisenberg",
        [](const WaveState& w) {
            const HeisenbergReport h = heisenberg_report(w, decompose(w));
            const int d = w.grid().dim();
            py::dict out;
            out["dx"] = listed(h.dx, d);
            out["dp_fourier"] = listed(h.dp_fourier, d);
            out["dp_madelung"] = listed(h.dp_madelung, d);
            out["product_fourier"] = listed(h.product_fourier, d);
            out["product_madelung"] = listed(h.product_madelung, d);
            return out;
        },
        py::arg("state"));

    m.def(
        "decay",
        [](const WaveState& w, const Potential& v, double gamma, double t_final) {
            SourceRun run;
            {
                py::gil_scoped_release release;
                run = evolve_with_source(w, v, SourceModel::uniform_decay(gamma), t_final);
            }
            const ProbabilitySeries s = probability_series(run);
            py::dict out;
            out["times"] = s.times;
            out["masses"] = s.masses;
            out["fitted_rate"] = s.fitted_rate;
            out["max_rate_gap"] = s.max_rate_gap;
            out["halted"] = run.halted;
            return out;
        },
        py::arg("state"), py::arg("potential"), py::arg("gamma"), py::arg("t_final"),
        "Evolution under the uniform decay source and its probability series");
    m.def(
        "nonlinearity_defect",
        [](const WaveState& a, const WaveState& b, const Potential& v, double gamma) {
            return nonlinearity_witness(a, b, v, SourceModel::density_quadratic(gamma)).defect;
        },
        py::arg("first"), py::arg("second"), py::arg("potential"), py::arg("gamma"),
        "One-step superposition defect under the density-quadratic source");

    m.def(
        "hydrogen_circulation",
        [](const GridSpec& g, double m_tilde, std::vector<double> center, double radius, double r_min, int samples) {
            analytic::HydrogenDriftParams hp;
            hp.m_tilde = m_tilde;
            hp.r_min = r_min;
            const auto f = analytic::hydrogen_drift_field(hp, g);
            return analytic::circulation(f.drift, {point_of(center), radius, 2}, samples, hp.mass, hp.hbar);
        },
        py::arg("grid"), py::arg("m_tilde"), py::arg("center") = std::vector<double>{}, py::arg("radius") = 1.0,
        py::arg("r_min") = 0.3, py::arg("samples") = 4096,
        "Normalised circulation of the azimuthal drift field around a circle in the xy-plane");

    m.def(
        "classical_limit",
        [](const std::vector<double>& masses) {
            const auto rep = classical_limit_run(masses, ClassicalScenario{});
            py::list rows;
            for (const auto& r : rep.rows) {
                py::dict d;
                d["mass"] = r.mass;
                d["mean_ratio"] = r.mean_ratio;
                d["ratios"] = r.ratios;
                rows.append(d);
            }
            return py::make_tuple(rows, rep.strictly_decreasing);
        },
        py::arg("masses"));

    m.def(
        "run_config",
        [](const std::string& text) {
            RunResult r;
            {
                const RunConfig cfg = RunConfig::parse(text);
                py::gil_scoped_release release;
                r = run(cfg);
            }
            return py::make_tuple(r.exit_code, json_to_py(r.report), r.files);
        },
        py::arg("config_json"), "Runs a JSON configuration; returns (exit_code, report, files)");
    m.def("selftest", []() {
        std::ostringstream os;
        const int code = selftest(os);
        return py::make_tuple(code, os.str());
    });
}
