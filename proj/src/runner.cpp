#include "madelung/runner.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "madelung/analytic.hpp"
#include "madelung/bridge.hpp"
#include "madelung/creation.hpp"
#include "madelung/field_io.hpp"
#include "madelung/observables.hpp"
#include "madelung/transport.hpp"

namespace madelung {

using nlohmann::json;

namespace {

[[noreturn]] void config_fail(const std::string& message)
{
    throw Error(ErrorCode::ConfigError, message);
}

template <class T>
T param(const ExperimentConfig& e, const char* key, T fallback)
{
    if (!e.params.contains(key)) return fallback;
    try {
        return e.params.at(key).get<T>();
    } catch (const json::exception&) {
        config_fail("experiment '" + e.name + "': bad value for '" + key + "'");
    }
}

Point to_point(const std::vector<double>& v)
{
    Point p{0, 0, 0};
    for (std::size_t a = 0; a < v.size() && a < 3; ++a) p[a] = v[a];
    return p;
}

json point_json(const Point& p, int dim)
{
    json a = json::array();
    for (int i = 0; i < dim; ++i) a.push_back(p[i]);
    return a;
}

json complex_json(const Complex& c)
{
    return json::array({c.real(), c.imag()});
}

/// Collects CSV sidecars and field files; nothing touches the disk until
/// `flush`, so a config error never leaves partial output behind.
class OutputSet {
public:
    std::ostringstream& csv(const std::string& file, const std::string& header)
    {
        auto& s = csv_[file];
        s << std::setprecision(17);
        s << header << '\n';
        order_.push_back(file);
        return s;
    }

    void field(const std::string& file, field_io::AnyField f) { fields_.emplace_back(file, std::move(f)); }

    std::vector<std::string> flush(const OutputConfig& out, const json& report) const
    {
        std::vector<std::string> written;
        const std::filesystem::path dir(out.directory);
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) throw Error(ErrorCode::IoError, "cannot create output directory " + dir.string());
        const auto write_text = [&](const std::string& name, const std::string& text) {
            std::ofstream f(dir / name, std::ios::binary);
            if (!f || !(f << text)) throw Error(ErrorCode::IoError, "cannot write " + (dir / name).string());
            written.push_back(name);
        };
        if (out.wants("json")) write_text("report.json", report.dump(2) + "\n");
        if (out.wants("csv"))
            for (const auto& name : order_) write_text(name, csv_.at(name).str());
        if (out.wants("field"))
            for (const auto& [name, f] : fields_) {
                field_io::write_file(dir / name, f);
                written.push_back(name);
            }
        return written;
    }

private:
    std::map<std::string, std::ostringstream> csv_;
    std::vector<std::string> order_;
    std::vector<std::pair<std::string, field_io::AnyField>> fields_;
};

struct Evolution {
    std::vector<WaveState> snapshots;
    std::vector<double> norm_times;
    std::vector<double> norms;
    std::vector<std::string> warnings;
    std::optional<SourceRun> source_run;
};

Evolution evolve_config(const RunConfig& cfg, const WaveState& initial, const Potential& potential,
                        const SourceModel& source)
{
    Evolution evo;
    if (source.kind == SourceModel::Kind::None) {
        Trajectory t = evolve(initial, potential, cfg.sim.t_final);
        evo.snapshots = std::move(t.snapshots);
        evo.norm_times = std::move(t.norm_times);
        evo.norms = std::move(t.norm_series);
        evo.warnings = std::move(t.warnings);
    } else {
        SourceRun r = evolve_with_source(initial, potential, source, cfg.sim.t_final);
        evo.snapshots = r.snapshots;
        evo.norm_times = r.times;
        evo.norms = r.masses;
        evo.warnings = r.warnings;
        evo.source_run = std::move(r);
    }
    return evo;
}

std::vector<MadelungState> decompose_all(const std::vector<WaveState>& snaps, double floor)
{
    DecomposeOptions opt;
    opt.rho_floor_relative = floor;
    std::vector<MadelungState> out;
    out.reserve(snaps.size());
    for (const auto& s : snaps) out.push_back(decompose(s, opt));
    return out;
}

json residual_json(const ResidualReport& r)
{
    json j = {{"newton_madelung_l2", r.newton_madelung_l2},
              {"newton_madelung_max", r.newton_madelung_max},
              {"continuity_l2", r.continuity_l2},
              {"continuity_max", r.continuity_max},
              {"irrotationality_l2", r.irrotationality_l2},
              {"irrotationality_max", r.irrotationality_max},
              {"weber_l2", r.weber_l2},
              {"weber_max", r.weber_max},
              {"snapshot_spacing", r.snapshot_spacing},
              {"centres", r.centres},
              {"eroded_support_points", r.points}};
    if (r.bernoulli_evaluated) {
        j["bernoulli_l2"] = r.bernoulli_l2;
        j["bernoulli_max"] = r.bernoulli_max;
    } else {
        j["bernoulli_l2"] = nullptr;
        j["bernoulli_max"] = nullptr;
    }
    return j;
}

// ---------------------------------------------------------------------------
// Experiments

struct Context {
    const RunConfig& cfg;
    const Evolution& evo;
    const Potential& potential;
    const SourceModel& source;
    OutputSet& out;
};

json residuals_experiment(const ExperimentConfig& e, Context& c)
{
    const double floor = param(e, "rho_floor_relative", 1e-12);
    ResidualOptions ropt;
    ropt.erosion_cells = param(e, "erosion_cells", 4);
    PhaseOptions popt;
    popt.path_tolerance = param(e, "path_tolerance", 1e-3);

    const auto states = decompose_all(c.evo.snapshots, floor);
    json result;
    json warnings = json::array();
    for (const auto& s : states)
        for (const auto& w : s.warnings) warnings.push_back(w);

    std::vector<PhaseField> phases;
    try {
        for (std::size_t k = 0; k < states.size(); ++k)
            phases.push_back(anchored_phase(c.evo.snapshots[k], states[k], popt));
    } catch (const Error& err) {
        phases.clear();
        warnings.push_back(std::string("Bernoulli residual skipped: ") + err.what());
    }
    std::vector<ScalarField> sources;
    if (c.source.kind != SourceModel::Kind::None)
        for (const auto& s : states) sources.push_back(source_term(c.source, s.rho));

    const GridSpec& g = states.front().grid();
    ResidualInputs in;
    in.snapshots = states;
    in.potential = c.potential.values(g, c.cfg.sim.mass);
    in.force = c.potential.force(g, c.cfg.sim.mass);
    in.phases = phases;
    in.source = sources;
    result = residual_json(residuals(in, ropt));
    result["warnings"] = warnings;
    return result;
}

RegionGeometry default_region(const MadelungState& s, const ExperimentConfig& e)
{
    const GridSpec& g = s.grid();
    const int dim = g.dim();
    Point mean{0, 0, 0};
    double var = 0.0;
    const double total = integrate(s.rho);
    for (int a = 0; a < dim; ++a) {
        const ScalarField x = sample(g, [a](const Point& p) { return p[a]; });
        ScalarField w(g);
        for (std::size_t i = 0; i < g.size(); ++i) w[i] = x[i] * s.rho[i];
        mean[a] = integrate(w) / total;
        for (std::size_t i = 0; i < g.size(); ++i) w[i] = (x[i] - mean[a]) * (x[i] - mean[a]) * s.rho[i];
        var += integrate(w) / total;
    }
    const double sigma = std::sqrt(var / dim);
    if (dim == 1) {
        const auto iv = param(e, "interval", std::vector<double>{mean[0] - 0.6744897501960817 * sigma,
                                                                  mean[0] + 0.6744897501960817 * sigma});
        if (iv.size() != 2) config_fail("experiment '" + e.name + "': interval needs two entries");
        return interval_region(iv[0], iv[1]);
    }
    const Point centre = to_point(param(e, "disk_center", std::vector<double>(mean.begin(), mean.begin() + dim)));
    // Radius holding half the mass of an isotropic Gaussian.
    const double r50 = dim == 2 ? sigma * std::sqrt(2.0 * std::numbers::ln2) : 1.5381722 * sigma;
    const double radius = param(e, "disk_radius", r50);
    if (dim == 2) return disk_region({centre[0], centre[1]}, radius);
    RegionGeometry geo;
    geo.dim = 3;
    geo.mask = RegionMask::where(g, [&](const Point& p, std::size_t) {
        double d2 = 0.0;
        for (int a = 0; a < 3; ++a) d2 += (p[a] - centre[a]) * (p[a] - centre[a]);
        return d2 <= radius * radius;
    });
    const int n = 24;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < 2 * n; ++j) {
            const double th = std::numbers::pi * (i + 0.5) / n;
            const double ph = std::numbers::pi * j / n;
            geo.surface.push_back({centre[0] + radius * std::sin(th) * std::cos(ph),
                                   centre[1] + radius * std::sin(th) * std::sin(ph), centre[2] + radius * std::cos(th)});
        }
    return geo;
}

json transport_experiment(const ExperimentConfig& e, Context& c)
{
    const auto states = decompose_all(c.evo.snapshots, 1e-12);
    const int dim = states.front().grid().dim();
    RegionTransportOptions opt;
    opt.advect.substeps = param(e, "substeps", 4);
    opt.supersample = param(e, "supersample", 8);
    const RegionGeometry region = default_region(states.front(), e);

    json result;
    const auto cons = conservation_check(states, region, opt);
    result["initial_probability"] = cons.probabilities.front();
    result["max_probability_drift"] = cons.max_drift;
    auto& pc = c.out.csv("conservation_" + e.name + ".csv", "t,probability");
    for (std::size_t k = 0; k < cons.times.size(); ++k) pc << cons.times[k] << ',' << cons.probabilities[k] << '\n';

    if (states.size() >= 3) {
        const auto ed = expectation_drift_check(states, region, opt);
        result["expectation_drift_max_gap"] = ed.max_gap;
        std::string header = "t";
        for (int a = 0; a < dim; ++a) header += ",lhs_" + std::to_string(a) + ",rhs_" + std::to_string(a);
        auto& ec = c.out.csv("expectation_drift_" + e.name + ".csv", header);
        for (std::size_t k = 0; k < ed.times.size(); ++k) {
            ec << ed.times[k];
            for (int a = 0; a < dim; ++a) ec << ',' << ed.lhs[k][a] << ',' << ed.rhs[k][a];
            ec << '\n';
        }
    }

    std::vector<Point> seeds;
    for (const auto& s : param(e, "seeds", std::vector<std::vector<double>>{})) seeds.push_back(to_point(s));
    if (seeds.empty()) {
        if (dim == 1)
            for (const auto& iv : region.intervals) {
                seeds.push_back({iv.lo, 0, 0});
                seeds.push_back({0.5 * (iv.lo + iv.hi), 0, 0});
                seeds.push_back({iv.hi, 0, 0});
            }
        else if (dim == 2)
            for (std::size_t v = 0; v < region.loops.front().vertices.size(); v += 16)
                seeds.push_back({region.loops.front().vertices[v][0], region.loops.front().vertices[v][1], 0});
        else
            for (std::size_t v = 0; v < region.surface.size(); v += 37) seeds.push_back(region.surface[v]);
    }
    const auto traj = advect_points(states, seeds, opt.advect);
    std::ostringstream buf;
    traj.write_csv(buf);
    const std::string text = buf.str();
    const auto nl = text.find('\n');
    c.out.csv("trajectories_" + e.name + ".csv", text.substr(0, nl)) << text.substr(nl + 1);
    result["seeds"] = seeds.size();

    if (e.params.contains("local_point")) {
        const Point p = to_point(param(e, "local_point", std::vector<double>{}));
        const std::size_t k = param(e, "local_snapshot", states.size() / 2);
        const double h = states.front().grid().min_spacing();
        const auto radii = param(e, "local_radii", std::vector<double>{4 * h, 6 * h, 8 * h});
        const auto ld = local_drift_estimate(states, k, p, radii, opt);
        result["local_drift"] = {{"time", states.at(k).time},
                                 {"point", point_json(p, dim)},
                                 {"radii", ld.radii},
                                 {"extrapolated", point_json(ld.extrapolated, dim)},
                                 {"interpolated_drift", point_json(ld.interpolated_drift, dim)},
                                 {"error", ld.error}};
    }
    return result;
}

json observables_experiment(const ExperimentConfig& e, Context& c)
{
    NeumannOptions nopt;
    nopt.modes = param(e, "modes", nopt.modes);
    nopt.max_points = param(e, "max_points", nopt.max_points);
    nopt.deficit_warning = param(e, "deficit_warning", nopt.deficit_warning);
    const auto intervals = param(e, "intervals", std::vector<std::vector<double>>{});
    for (const auto& iv : intervals)
        if (iv.size() != 2 || !(iv[1] >= iv[0])) config_fail("experiment '" + e.name + "': bad energy interval");

    json rows = json::array();
    json heis = json::array();
    json warnings = json::array();
    std::ostringstream unused;
    auto& ec = intervals.empty() ? unused : c.out.csv("energy_probability_" + e.name + ".csv", "t,lo,hi,kolmogorov,neumann");
    std::vector<const WaveState*> picks{&c.evo.snapshots.front()};
    if (c.evo.snapshots.size() > 1) picks.push_back(&c.evo.snapshots.back());
    for (const WaveState* psi : picks) {
        const MadelungState st = decompose(*psi);
        const ScalarField v = c.potential.values(psi->grid(), psi->params.mass);
        for (const auto& r : equivalence_reports(*psi, st, v))
            rows.push_back({{"name", r.name},
                            {"time", r.time},
                            {"kolmogorov", r.kolmogorov_value},
                            {"operator", complex_json(r.operator_value)},
                            {"gap", r.gap}});
        const auto h = heisenberg_report(*psi, st);
        const int dim = psi->grid().dim();
        heis.push_back({{"time", psi->time},
                        {"dx", point_json(h.dx, dim)},
                        {"dp_fourier", point_json(h.dp_fourier, dim)},
                        {"dp_madelung", point_json(h.dp_madelung, dim)},
                        {"product_fourier", point_json(h.product_fourier, dim)},
                        {"product_madelung", point_json(h.product_madelung, dim)}});
        if (intervals.empty()) continue;
        std::optional<NeumannSpectrum> spec;
        if (psi->grid().size() <= nopt.max_points) {
            spec = neumann_spectrum(*psi, v, nopt);
            for (const auto& w : spec->warnings) warnings.push_back(w);
        } else {
            warnings.push_back("Neumann probabilities skipped: grid exceeds max_points");
        }
        for (const auto& iv : intervals) {
            ec << psi->time << ',' << iv[0] << ',' << iv[1] << ','
               << kolmogorov_energy_probability(st, v, iv[0], iv[1]) << ',';
            if (spec) ec << spec->probability(iv[0], iv[1]);
            else ec << "nan";
            ec << '\n';
        }
    }
    return {{"equivalence", rows}, {"heisenberg", heis}, {"warnings", warnings}};
}

json hydrogen_experiment(const ExperimentConfig& e, const RunConfig& cfg, OutputSet& out)
{
    const auto m_values = param(e, "m_values", std::vector<double>{1.0, 2.0, 0.5});
    const double loop_radius = param(e, "loop_radius", 1.0);
    const int samples = param(e, "loop_samples", 4096);
    const std::size_t n = param(e, "points", std::size_t{400});
    const double half = param(e, "half_width", 1.2);
    const std::size_t nz = param(e, "z_points", std::size_t{8});
    const double zhalf = param(e, "z_half_width", 0.1);
    const double r_min = param(e, "r_min", 0.3);
    const Point off_c = to_point(param(e, "offaxis_center", std::vector<double>{0.6, 0.6, 0.0}));
    const double off_r = param(e, "offaxis_radius", 0.3);
    const bool check = param(e, "check_reconstruction", true);

    const std::size_t ns[3] = {n, n, nz};
    const double lo[3] = {-half, -half, -zhalf};
    const double hi[3] = {half, half, zhalf};
    const bool per[3] = {false, false, false};
    const GridSpec g(3, ns, lo, hi, per);

    json rows = json::array();
    auto& csv = out.csv("hydrogen_" + e.name + ".csv",
                        "m_tilde,circulation,non_winding_circulation,reconstruction_raised,recorded_winding");
    for (const double mt : m_values) {
        analytic::HydrogenDriftParams p;
        p.m_tilde = mt;
        p.mass = cfg.sim.mass;
        p.hbar = cfg.sim.hbar;
        p.r_min = r_min;
        const auto field = analytic::hydrogen_drift_field(p, g);
        const double circ = analytic::circulation(field.drift, {{0, 0, 0}, loop_radius, 2}, samples, p.mass, p.hbar);
        const double off = analytic::circulation(field.drift, {off_c, off_r, 2}, samples, p.mass, p.hbar);
        json row = {{"m_tilde", mt}, {"circulation", circ}, {"non_winding_circulation", off}};
        bool raised = false;
        double winding = std::nan("");
        if (check) {
            MadelungState s;
            s.rho = ScalarField(g);
            for (std::size_t i = 0; i < g.size(); ++i) s.rho[i] = field.valid.contains(i) ? 1.0 : 0.0;
            s.drift = field.drift;
            s.support = field.valid;
            s.params.mass = p.mass;
            s.params.hbar = p.hbar;
            try {
                reconstruct_phase(s);
            } catch (const TopologyError& err) {
                raised = true;
                winding = err.winding();
                row["recorded_circulation"] = err.circulation();
                row["recorded_winding"] = err.winding();
            }
            row["reconstruction_raised"] = raised;
        }
        csv << mt << ',' << circ << ',' << off << ',' << (raised ? 1 : 0) << ',' << winding << '\n';
        rows.push_back(row);
    }
    return {{"loops", rows}};
}

json decay_experiment(const ExperimentConfig& e, Context& c)
{
    if (!c.evo.source_run) config_fail("experiment '" + e.name + "' needs a source other than 'none'");
    const auto series = probability_series(*c.evo.source_run);
    json result = {{"source", c.source.name()},
                   {"gamma", c.source.gamma},
                   {"final_time", series.times.back()},
                   {"final_probability", series.masses.back()},
                   {"max_rate_gap", series.max_rate_gap},
                   {"halted", c.evo.source_run->halted}};
    if (param(e, "fit", true)) {
        result["fitted_rate"] = series.fitted_rate;
        result["fitted_amplitude"] = series.fitted_amplitude;
    }
    if (c.source.kind == SourceModel::Kind::UniformDecay || c.source.kind == SourceModel::Kind::UniformGain) {
        const double sign = c.source.kind == SourceModel::Kind::UniformDecay ? -1.0 : 1.0;
        const double m0 = series.masses.front();
        double worst = 0.0;
        for (std::size_t k = 0; k < series.times.size(); ++k) {
            const double expect = m0 * std::exp(sign * c.source.gamma * (series.times[k] - series.times.front()));
            worst = std::max(worst, std::abs(series.masses[k] - expect) / expect);
        }
        result["max_relative_deviation_from_exponential"] = worst;
    }
    auto& csv = c.out.csv("probability_" + e.name + ".csv", "t,probability,source_integral");
    for (std::size_t k = 0; k < series.times.size(); ++k)
        csv << series.times[k] << ',' << series.masses[k] << ',' << c.evo.source_run->source_integrals[k] << '\n';
    return result;
}

json classical_experiment(const ExperimentConfig& e, const RunConfig& cfg, OutputSet& out)
{
    ClassicalScenario sc;
    const std::string kind = param(e, "scenario", std::string("harmonic"));
    if (kind == "harmonic") sc.kind = ClassicalScenario::Kind::Harmonic;
    else if (kind == "free_uniform") sc.kind = ClassicalScenario::Kind::FreeUniform;
    else config_fail("experiment '" + e.name + "': unknown scenario '" + kind + "'");
    sc.omega = param(e, "omega", sc.omega);
    sc.sigma0 = param(e, "sigma0", sc.sigma0);
    sc.x0 = param(e, "x0", sc.x0);
    sc.points = param(e, "points", sc.points);
    sc.half_width = param(e, "half_width", sc.half_width);
    sc.dt = param(e, "dt", sc.dt);
    sc.t_final = param(e, "t_final", sc.t_final);
    sc.snapshot_every = param(e, "snapshot_every", sc.snapshot_every);
    sc.hbar = cfg.sim.hbar;
    const auto masses = param(e, "masses", std::vector<double>{1.0, 10.0, 100.0, 1000.0});
    const auto rep = classical_limit_run(masses, sc);
    json rows = json::array();
    auto& csv = out.csv("classical_limit_" + e.name + ".csv", "mass,t,ratio");
    for (const auto& r : rep.rows) {
        rows.push_back({{"mass", r.mass}, {"mean_ratio", r.mean_ratio}, {"mean_bohm_norm", r.mean_bohm_norm}});
        for (std::size_t k = 0; k < r.times.size(); ++k) csv << r.mass << ',' << r.times[k] << ',' << r.ratios[k] << '\n';
    }
    return {{"scenario", kind}, {"rows", rows}, {"strictly_decreasing", rep.strictly_decreasing}};
}

bool needs_evolution(const RunConfig& cfg)
{
    if (cfg.experiments.empty()) return true;
    for (const auto& e : cfg.experiments)
        if (e.type != "hydrogen" && e.type != "classical_limit") return true;
    return false;
}

} // namespace

int exit_code_for(ErrorCode code)
{
    switch (code) {
    case ErrorCode::ConfigError: return ExitConfigError;
    case ErrorCode::IoError: return ExitIoError;
    default: return ExitNumericalFailure;
    }
}

WaveState build_initial(const RunConfig& cfg)
{
    const GridSpec g = cfg.grid.build();
    const SimParams p = cfg.sim.build();
    const auto& in = cfg.initial;
    if (in.kind == "gaussian") return initialize(GaussianPacketInit{to_point(in.x0), to_point(in.p0), in.sigma}, g, p);
    if (in.kind == "harmonic_eigenstate") {
        std::array<int, 3> n{0, 0, 0};
        for (std::size_t a = 0; a < in.n.size() && a < 3; ++a) n[a] = in.n[a];
        return initialize(HarmonicEigenstateInit{n, in.omega}, g, p);
    }
    if (in.kind == "coherent") {
        std::array<Complex, 3> alpha{};
        for (std::size_t a = 0; a < 3; ++a)
            alpha[a] = Complex(a < in.alpha_re.size() ? in.alpha_re[a] : 0.0, a < in.alpha_im.size() ? in.alpha_im[a] : 0.0);
        return initialize(CoherentStateInit{alpha, in.omega}, g, p);
    }
    if (in.kind == "field_file") {
        auto any = field_io::read_file(in.path);
        auto* psi = std::get_if<ComplexField>(&any);
        if (!psi) config_fail("initial field file must hold a complex field");
        if (!(psi->grid() == g)) config_fail("initial field file grid differs from the grid section");
        return initialize(CustomInit{*psi}, g, p);
    }
    config_fail("unsupported initial kind '" + in.kind + "'");
}

RunResult run(const RunConfig& cfg)
{
    // Validate every section up front so config errors never reach the numerics.
    const Potential potential = cfg.potential.build();
    const SourceModel source = cfg.source.build();
    cfg.grid.build();
    cfg.sim.build();
    for (const auto& e : cfg.experiments) {
        experiment_keys(e.type);
        if (e.type == "decay" && source.kind == SourceModel::Kind::None)
            config_fail("experiment '" + e.name + "' needs a source other than 'none'");
        if (e.type == "residuals" || e.type == "transport")
            if (cfg.sim.snapshot_every == 0) config_fail("sim.snapshot_every must be positive");
    }

    RunResult result;
    OutputSet out;
    json report;
    report["schema_version"] = kReportSchemaVersion;
    report["config"] = cfg.to_json();
    json failures = json::array();
    json experiments = json::array();

    Evolution evo;
    bool evolved = false;
    if (needs_evolution(cfg)) {
        try {
            const WaveState initial = build_initial(cfg);
            evo = evolve_config(cfg, initial, potential, source);
            evolved = true;
            json evo_json = {{"steps", evo.norms.size() - 1},
                             {"snapshots", evo.snapshots.size()},
                             {"final_time", evo.norm_times.back()},
                             {"initial_norm", evo.norms.front()},
                             {"final_norm", evo.norms.back()},
                             {"warnings", evo.warnings}};
            double dev = 0.0;
            for (double v : evo.norms) dev = std::max(dev, std::abs(v - evo.norms.front()));
            if (source.kind == SourceModel::Kind::None) evo_json["max_norm_deviation"] = dev;
            report["evolution"] = evo_json;
            auto& csv = out.csv("norm_series.csv", "t,norm");
            for (std::size_t k = 0; k < evo.norms.size(); ++k) csv << evo.norm_times[k] << ',' << evo.norms[k] << '\n';
            out.field("initial.mdlg", evo.snapshots.front().psi);
            out.field("final.mdlg", evo.snapshots.back().psi);
        } catch (const Error& err) {
            if (err.code() == ErrorCode::ConfigError || err.code() == ErrorCode::IoError) throw;
            failures.push_back({{"stage", "evolution"}, {"code", to_string(err.code())}, {"message", err.what()}});
        }
    }

    for (const auto& e : cfg.experiments) {
        json entry = {{"name", e.name}, {"type", e.type}};
        try {
            Context ctx{cfg, evo, potential, source, out};
            const bool uses_snapshots = e.type != "hydrogen" && e.type != "classical_limit";
            if (uses_snapshots && !evolved) throw Error(ErrorCode::SolverDivergence, "no snapshots available");
            json r;
            if (e.type == "residuals") r = residuals_experiment(e, ctx);
            else if (e.type == "transport") r = transport_experiment(e, ctx);
            else if (e.type == "observables") r = observables_experiment(e, ctx);
            else if (e.type == "hydrogen") r = hydrogen_experiment(e, cfg, out);
            else if (e.type == "decay") r = decay_experiment(e, ctx);
            else if (e.type == "classical_limit") r = classical_experiment(e, cfg, out);
            entry["status"] = "ok";
            entry["result"] = r;
        } catch (const Error& err) {
            if (err.code() == ErrorCode::ConfigError || err.code() == ErrorCode::IoError) throw;
            entry["status"] = "failed";
            entry["error"] = {{"code", to_string(err.code())}, {"message", err.what()}};
            if (const auto* topo = dynamic_cast<const TopologyError*>(&err)) {
                entry["error"]["circulation"] = topo->circulation();
                entry["error"]["winding"] = topo->winding();
            }
            failures.push_back({{"stage", e.name}, {"code", to_string(err.code())}, {"message", err.what()}});
        }
        experiments.push_back(entry);
    }
    report["experiments"] = experiments;
    report["failures"] = failures;
    result.exit_code = failures.empty() ? ExitSuccess : ExitNumericalFailure;
    report["exit_code"] = result.exit_code;
    result.files = out.flush(cfg.output, report);
    result.report = std::move(report);
    return result;
}

int run_file(const std::filesystem::path& config_path, std::ostream& err)
{
    try {
        const RunConfig cfg = RunConfig::load(config_path);
        return run(cfg).exit_code;
    } catch (const Error& e) {
        err << e.what() << '\n';
        return exit_code_for(e.code());
    }
}

RunConfig restrict_to(const RunConfig& config, const std::string& type)
{
    experiment_keys(type);
    RunConfig c = config;
    c.experiments.clear();
    for (const auto& e : config.experiments)
        if (e.type == type) c.experiments.push_back(e);
    if (c.experiments.empty()) c.experiments.push_back({type, type, json::object()});
    return c;
}

RunResult bridge_files(const std::vector<std::filesystem::path>& fields, const BridgeOptions& options)
{
    if (fields.empty()) config_fail("bridge needs at least one field file");
    const SimParams params = options.sim.build();
    std::vector<WaveState> snaps;
    for (const auto& path : fields) {
        auto any = field_io::read_file(path);
        auto* psi = std::get_if<ComplexField>(&any);
        if (!psi) config_fail(path.string() + " does not hold a complex field");
        WaveState w;
        w.psi = *psi;
        w.time = psi->time();
        w.params = params;
        w.initial_norm = w.norm();
        snaps.push_back(std::move(w));
    }
    const Potential potential = options.potential.build();
    if (snaps.size() < 3) {
        snaps.resize(1);
        const Propagator prop(snaps.front().grid(), potential, params);
        while (snaps.size() < 3) {
            WaveState next = prop.step(snaps.back());
            next.time = snaps.back().time + params.dt;
            next.psi.set_time(next.time);
            snaps.push_back(std::move(next));
        }
    }

    RunResult result;
    json report;
    report["schema_version"] = kReportSchemaVersion;
    json failures = json::array();
    json per = json::array();
    DecomposeOptions dopt;
    dopt.rho_floor_relative = options.rho_floor_relative;
    PhaseOptions popt;
    popt.path_tolerance = options.path_tolerance;
    std::vector<MadelungState> states;
    std::vector<PhaseField> phases;
    bool phases_ok = true;
    try {
        for (const auto& s : snaps) states.push_back(decompose(s, dopt));
        for (std::size_t k = 0; k < states.size(); ++k) {
            json entry = {{"time", states[k].time},
                          {"support_points", states[k].support.count()},
                          {"grid_points", states[k].grid().size()},
                          {"warnings", states[k].warnings}};
            try {
                const PhaseField ph = anchored_phase(snaps[k], states[k], popt);
                const WaveState back = reconstruct_wave(states[k], ph);
                const auto cmp = compare_up_to_phase(back.psi, snaps[k].psi, states[k].support);
                entry["reconstruction"] = {{"max_deviation", cmp.max_deviation},
                                           {"path_discrepancy", ph.path_discrepancy}};
                phases.push_back(ph);
            } catch (const Error& err) {
                phases_ok = false;
                entry["reconstruction"] = {{"error", to_string(err.code())}, {"message", err.what()}};
            }
            per.push_back(entry);
        }
        ResidualInputs in;
        in.snapshots = states;
        in.potential = potential.values(states.front().grid(), params.mass);
        in.force = potential.force(states.front().grid(), params.mass);
        if (phases_ok) in.phases = phases;
        ResidualOptions ropt;
        ropt.erosion_cells = options.erosion_cells;
        report["residuals"] = residual_json(residuals(in, ropt));
    } catch (const Error& err) {
        if (err.code() == ErrorCode::ConfigError || err.code() == ErrorCode::IoError) throw;
        failures.push_back({{"stage", "bridge"}, {"code", to_string(err.code())}, {"message", err.what()}});
    }
    report["snapshots"] = per;
    report["failures"] = failures;
    result.exit_code = failures.empty() ? ExitSuccess : ExitNumericalFailure;
    report["exit_code"] = result.exit_code;

    std::error_code ec;
    std::filesystem::create_directories(options.output_directory, ec);
    std::ofstream f(options.output_directory / "bridge_report.json", std::ios::binary);
    if (ec || !f || !(f << report.dump(2) << '\n'))
        throw Error(ErrorCode::IoError, "cannot write " + (options.output_directory / "bridge_report.json").string());
    result.files = {"bridge_report.json"};
    result.report = std::move(report);
    return result;
}

} // namespace madelung
