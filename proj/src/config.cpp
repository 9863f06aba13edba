#include "madelung/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace madelung {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& message)
{
    throw Error(ErrorCode::ConfigError, message);
}

/// Reads keys from one JSON object, remembering which were consumed so that
/// leftovers can be reported as unknown.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) fail("'" + path_ + "' must be an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    template <class T>
    void read(const std::string& key, T& out)
    {
        used_.insert(key);
        if (!j_.contains(key)) return;
        out = convert<T>(j_.at(key), key_path(key));
    }

    template <class T>
    T require(const std::string& key)
    {
        used_.insert(key);
        if (!j_.contains(key)) fail("missing key '" + key_path(key) + "'");
        return convert<T>(j_.at(key), key_path(key));
    }

    const json& child(const std::string& key)
    {
        used_.insert(key);
        return j_.at(key);
    }

    void finish() const
    {
        for (const auto& item : j_.items())
            if (!used_.count(item.key())) fail("unknown key '" + key_path(item.key()) + "'");
    }

    std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    template <class T>
    static T convert(const json& v, const std::string& where)
    {
        try {
            if constexpr (std::is_same_v<T, double>) {
                if (!v.is_number()) fail("'" + where + "' must be a number");
            } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
                if (!v.is_number_integer() && !v.is_number_unsigned()) fail("'" + where + "' must be an integer");
                if constexpr (std::is_unsigned_v<T>)
                    if (v.is_number_integer() && v.get<long long>() < 0) fail("'" + where + "' must be non-negative");
            } else if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) fail("'" + where + "' must be true or false");
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) fail("'" + where + "' must be a string");
            } else {
                if (!v.is_array()) fail("'" + where + "' must be an array");
                T out;
                for (std::size_t i = 0; i < v.size(); ++i)
                    out.push_back(convert<typename T::value_type>(v[i], where + "[" + std::to_string(i) + "]"));
                return out;
            }
            return v.get<T>();
        } catch (const json::exception& e) {
            fail("'" + where + "': " + e.what());
        }
    }

    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

template <class T>
void expect_one_of(const T& value, std::initializer_list<T> allowed, const std::string& where)
{
    if (std::find(allowed.begin(), allowed.end(), value) != allowed.end()) return;
    std::ostringstream os;
    os << "'" << where << "' has unsupported value '" << value << "'";
    fail(os.str());
}

Point to_point(const std::vector<double>& v)
{
    Point p{0, 0, 0};
    for (std::size_t a = 0; a < v.size() && a < 3; ++a) p[a] = v[a];
    return p;
}

GridConfig parse_grid(const json& j)
{
    Section s(j, "grid");
    GridConfig g;
    g.dim = s.require<int>("dim");
    if (g.dim < 1 || g.dim > 3) fail("'grid.dim' must be 1, 2 or 3");
    const auto per_axis = [&](const std::string& key, auto& out) {
        s.read(key, out);
        if (out.size() == 1 && g.dim > 1) out.resize(static_cast<std::size_t>(g.dim), out.front());
        if (out.size() != static_cast<std::size_t>(g.dim))
            fail("'grid." + key + "' needs " + std::to_string(g.dim) + " entries");
    };
    per_axis("n", g.n);
    per_axis("lower", g.lower);
    per_axis("upper", g.upper);
    per_axis("periodic", g.periodic);
    s.finish();
    return g;
}

SimConfig parse_sim(const json& j)
{
    Section s(j, "sim");
    SimConfig c;
    s.read("mass", c.mass);
    s.read("hbar", c.hbar);
    s.read("dt", c.dt);
    s.read("t_final", c.t_final);
    s.read("solver", c.solver);
    expect_one_of<std::string>(c.solver, {"split_step", "crank_nicolson"}, "sim.solver");
    s.read("snapshot_every", c.snapshot_every);
    s.read("cn_tolerance", c.cn_tolerance);
    s.read("cn_max_iterations", c.cn_max_iterations);
    s.read("boundary_mass_warning", c.boundary_mass_warning);
    s.finish();
    return c;
}

InitialConfig parse_initial(const json& j)
{
    Section s(j, "initial");
    InitialConfig c;
    c.kind = s.require<std::string>("kind");
    if (c.kind == "gaussian") {
        s.read("x0", c.x0);
        s.read("p0", c.p0);
        s.read("sigma", c.sigma);
    } else if (c.kind == "harmonic_eigenstate") {
        s.read("n", c.n);
        s.read("omega", c.omega);
    } else if (c.kind == "coherent") {
        s.read("alpha_re", c.alpha_re);
        s.read("alpha_im", c.alpha_im);
        s.read("omega", c.omega);
    } else if (c.kind == "field_file") {
        c.path = s.require<std::string>("path");
    } else {
        fail("'initial.kind' has unsupported value '" + c.kind + "'");
    }
    s.finish();
    return c;
}

PotentialConfig parse_potential(const json& j)
{
    Section s(j, "potential");
    PotentialConfig c;
    c.kind = s.require<std::string>("kind");
    if (c.kind == "free") {
    } else if (c.kind == "harmonic") {
        s.read("omega", c.omega);
        s.read("center", c.center);
    } else if (c.kind == "soft_coulomb") {
        s.read("charge", c.charge);
        s.read("epsilon", c.epsilon);
        s.read("center", c.center);
    } else if (c.kind == "barrier") {
        const json& slabs = s.child("slabs");
        if (!slabs.is_array()) fail("'potential.slabs' must be an array");
        for (std::size_t i = 0; i < slabs.size(); ++i) {
            Section b(slabs[i], "potential.slabs[" + std::to_string(i) + "]");
            SlabConfig slab;
            b.read("axis", slab.axis);
            slab.lo = b.require<double>("lo");
            slab.hi = b.require<double>("hi");
            slab.height = b.require<double>("height");
            b.finish();
            c.slabs.push_back(slab);
        }
    } else if (c.kind == "double_slit") {
        s.read("wall_x", c.wall_x);
        s.read("thickness", c.thickness);
        s.read("height", c.height);
        s.read("separation", c.separation);
        s.read("slit_width", c.slit_width);
    } else {
        fail("'potential.kind' has unsupported value '" + c.kind + "'");
    }
    s.finish();
    return c;
}

SourceConfig parse_source(const json& j)
{
    Section s(j, "source");
    SourceConfig c;
    c.kind = s.require<std::string>("kind");
    expect_one_of<std::string>(c.kind, {"none", "uniform_decay", "uniform_gain", "localized_sink", "density_quadratic"},
                               "source.kind");
    if (c.kind != "none") s.read("gamma", c.gamma);
    if (c.kind == "localized_sink") {
        s.read("center", c.center);
        s.read("width", c.width);
    }
    s.finish();
    return c;
}

ExperimentConfig parse_experiment(const json& j, std::size_t index)
{
    const std::string where = "experiments[" + std::to_string(index) + "]";
    Section s(j, where);
    ExperimentConfig e;
    e.type = s.require<std::string>("type");
    const auto& keys = experiment_keys(e.type);
    e.name = e.type;
    s.read("name", e.name);
    if (s.has("params")) {
        const json& p = s.child("params");
        if (!p.is_object()) fail("'" + where + ".params' must be an object");
        for (const auto& item : p.items())
            if (std::find(keys.begin(), keys.end(), item.key()) == keys.end())
                fail("unknown key '" + where + ".params." + item.key() + "'");
        e.params = p;
    }
    s.finish();
    return e;
}

OutputConfig parse_output(const json& j)
{
    Section s(j, "output");
    OutputConfig c;
    s.read("directory", c.directory);
    s.read("formats", c.formats);
    for (const auto& f : c.formats) expect_one_of<std::string>(f, {"json", "csv", "field"}, "output.formats");
    s.finish();
    return c;
}

} // namespace

const std::vector<std::string>& experiment_keys(const std::string& type)
{
    static const std::vector<std::pair<std::string, std::vector<std::string>>> table = {
        {"residuals", {"rho_floor_relative", "erosion_cells", "path_tolerance"}},
        {"transport",
         {"interval", "disk_center", "disk_radius", "seeds", "substeps", "supersample", "local_point", "local_radii",
          "local_snapshot"}},
        {"observables", {"intervals", "modes", "max_points", "deficit_warning"}},
        {"hydrogen",
         {"m_values", "loop_radius", "loop_samples", "points", "half_width", "z_points", "z_half_width",
          "r_min", "offaxis_center", "offaxis_radius", "check_reconstruction"}},
        {"decay", {"fit"}},
        {"classical_limit",
         {"scenario", "masses", "omega", "sigma0", "x0", "points", "half_width", "dt", "t_final", "snapshot_every"}},
    };
    for (const auto& [name, keys] : table)
        if (name == type) return keys;
    fail("unknown experiment type '" + type + "'");
}

GridSpec GridConfig::build() const
{
    try {
        const std::vector<char> per(periodic.begin(), periodic.end());
        std::array<bool, 3> p{false, false, false};
        for (std::size_t a = 0; a < per.size() && a < 3; ++a) p[a] = per[a] != 0;
        return GridSpec(dim, n, lower, upper, std::span<const bool>(p.data(), periodic.size()));
    } catch (const Error& e) {
        fail(std::string("grid: ") + e.what());
    }
}

SimParams SimConfig::build() const
{
    SimParams p;
    p.mass = mass;
    p.hbar = hbar;
    p.dt = dt;
    p.t_final = t_final;
    p.solver = solver == "crank_nicolson" ? SolverKind::CrankNicolson : SolverKind::SplitStepFourier;
    p.snapshot_every = snapshot_every;
    p.cn_tolerance = cn_tolerance;
    p.cn_max_iterations = cn_max_iterations;
    p.boundary_mass_warning = boundary_mass_warning;
    try {
        p.validate();
    } catch (const Error& e) {
        fail(std::string("sim: ") + e.what());
    }
    return p;
}

Potential PotentialConfig::build() const
{
    if (kind == "harmonic") return Potential(HarmonicPotential{omega, to_point(center)});
    if (kind == "soft_coulomb") return Potential(SoftCoulombPotential{charge, epsilon, to_point(center)});
    if (kind == "barrier") {
        BarrierPotential b;
        for (const auto& s : slabs) b.slabs.push_back(Slab{s.axis, s.lo, s.hi, s.height});
        return Potential(b);
    }
    if (kind == "double_slit") return Potential(DoubleSlitPotential{wall_x, thickness, height, separation, slit_width});
    return Potential::free();
}

SourceModel SourceConfig::build() const
{
    SourceModel s;
    if (kind == "uniform_decay") s = SourceModel::uniform_decay(gamma);
    else if (kind == "uniform_gain") s = SourceModel::uniform_gain(gamma);
    else if (kind == "localized_sink") s = SourceModel::localized_sink(gamma, to_point(center), width);
    else if (kind == "density_quadratic") s = SourceModel::density_quadratic(gamma);
    try {
        s.validate();
    } catch (const Error& e) {
        fail(std::string("source: ") + e.what());
    }
    return s;
}

bool OutputConfig::wants(const std::string& format) const
{
    return std::find(formats.begin(), formats.end(), format) != formats.end();
}

RunConfig RunConfig::from_json(const json& j)
{
    Section s(j, "");
    RunConfig c;
    c.grid = parse_grid(s.child("grid"));
    if (s.has("sim")) c.sim = parse_sim(s.child("sim"));
    if (s.has("initial")) c.initial = parse_initial(s.child("initial"));
    if (s.has("potential")) c.potential = parse_potential(s.child("potential"));
    if (s.has("source")) c.source = parse_source(s.child("source"));
    if (s.has("experiments")) {
        const json& ex = s.child("experiments");
        if (!ex.is_array()) fail("'experiments' must be an array");
        for (std::size_t i = 0; i < ex.size(); ++i) c.experiments.push_back(parse_experiment(ex[i], i));
    }
    if (s.has("output")) c.output = parse_output(s.child("output"));
    s.finish();
    return c;
}

RunConfig RunConfig::parse(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(std::string("malformed config: ") + e.what());
    }
    if (!j.contains("grid")) fail("missing key 'grid'");
    return from_json(j);
}

RunConfig RunConfig::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

json RunConfig::to_json() const
{
    json j;
    j["grid"] = {{"dim", grid.dim}, {"n", grid.n}, {"lower", grid.lower}, {"upper", grid.upper},
                 {"periodic", grid.periodic}};
    j["sim"] = {{"mass", sim.mass},
                {"hbar", sim.hbar},
                {"dt", sim.dt},
                {"t_final", sim.t_final},
                {"solver", sim.solver},
                {"snapshot_every", sim.snapshot_every},
                {"cn_tolerance", sim.cn_tolerance},
                {"cn_max_iterations", sim.cn_max_iterations},
                {"boundary_mass_warning", sim.boundary_mass_warning}};

    json init = {{"kind", initial.kind}};
    if (initial.kind == "gaussian") {
        init["x0"] = initial.x0;
        init["p0"] = initial.p0;
        init["sigma"] = initial.sigma;
    } else if (initial.kind == "harmonic_eigenstate") {
        init["n"] = initial.n;
        init["omega"] = initial.omega;
    } else if (initial.kind == "coherent") {
        init["alpha_re"] = initial.alpha_re;
        init["alpha_im"] = initial.alpha_im;
        init["omega"] = initial.omega;
    } else if (initial.kind == "field_file") {
        init["path"] = initial.path;
    }
    j["initial"] = init;

    json pot = {{"kind", potential.kind}};
    if (potential.kind == "harmonic") {
        pot["omega"] = potential.omega;
        pot["center"] = potential.center;
    } else if (potential.kind == "soft_coulomb") {
        pot["charge"] = potential.charge;
        pot["epsilon"] = potential.epsilon;
        pot["center"] = potential.center;
    } else if (potential.kind == "barrier") {
        pot["slabs"] = json::array();
        for (const auto& s : potential.slabs)
            pot["slabs"].push_back({{"axis", s.axis}, {"lo", s.lo}, {"hi", s.hi}, {"height", s.height}});
    } else if (potential.kind == "double_slit") {
        pot["wall_x"] = potential.wall_x;
        pot["thickness"] = potential.thickness;
        pot["height"] = potential.height;
        pot["separation"] = potential.separation;
        pot["slit_width"] = potential.slit_width;
    }
    j["potential"] = pot;

    json src = {{"kind", source.kind}};
    if (source.kind != "none") src["gamma"] = source.gamma;
    if (source.kind == "localized_sink") {
        src["center"] = source.center;
        src["width"] = source.width;
    }
    j["source"] = src;

    j["experiments"] = json::array();
    for (const auto& e : experiments)
        j["experiments"].push_back({{"type", e.type}, {"name", e.name}, {"params", e.params}});
    j["output"] = {{"directory", output.directory}, {"formats", output.formats}};
    return j;
}

} // namespace madelung
