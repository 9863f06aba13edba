#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "madelung/config.hpp"
#include "madelung/field_io.hpp"
#include "madelung/runner.hpp"

using namespace madelung;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({
  "grid": {"dim": 1, "n": [128], "lower": [-10], "upper": [10], "periodic": [true]},
  "sim": {"dt": 0.01, "t_final": 0.2, "snapshot_every": 5},
  "initial": {"kind": "gaussian", "x0": [0], "p0": [1], "sigma": 1},
  "potential": {"kind": "free"}
})";

std::string config_error(const std::string& text)
{
    try {
        RunConfig::parse(text);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigError) return e.what();
    }
    return "";
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("madelung_unit_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

} // namespace

TEST_CASE("config round-trips through JSON")
{
    RunConfig c = RunConfig::parse(kMinimal);
    c.potential.kind = "barrier";
    c.potential.slabs.push_back({0, -1, 1, 5});
    c.source.kind = "localized_sink";
    c.source.gamma = 0.4;
    c.experiments.push_back({"transport", "t", {{"interval", {-1, 1}}}});
    c.experiments.push_back({"classical_limit", "c", {{"masses", {1, 10}}}});
    const RunConfig back = RunConfig::parse(c.to_json().dump());
    CHECK(back == c);
    CHECK(RunConfig::parse(back.to_json().dump()).to_json() == c.to_json());
}

TEST_CASE("unknown keys are rejected with their path")
{
    CHECK(config_error(R"({"grid": {"dim": 1, "n": [64]}, "sim": {"dtt": 0.1}})").find("sim.dtt") != std::string::npos);
    CHECK(config_error(R"({"grid": {"dim": 1}, "extra": 1})").find("'extra'") != std::string::npos);
    CHECK(config_error(R"({"grid": {"dim": 1}, "experiments": [{"type": "decay", "params": {"fitt": true}}]})")
              .find("experiments[0].params.fitt") != std::string::npos);
    CHECK(config_error(R"({"grid": {"dim": 1}, "initial": {"kind": "harmonic_eigenstate", "sigma": 1}})")
              .find("initial.sigma") != std::string::npos);
    CHECK(config_error(R"({"grid": {"dim": 1}, "experiments": [{"type": "plot"}]})").find("plot") != std::string::npos);
}

TEST_CASE("type errors and malformed documents are config errors")
{
    CHECK_FALSE(config_error(R"({"grid": {"dim": "one"}})").empty());
    CHECK_FALSE(config_error(R"({"grid": {"dim": 1, "n": [-4]}})").empty());
    CHECK_FALSE(config_error(R"({"grid": )").empty());
    CHECK_FALSE(config_error(R"({"grid": {"dim": 2, "n": [64, 64, 64]}})").empty());
    CHECK_FALSE(config_error(R"({"sim": {}})").empty());
}

TEST_CASE("per-axis values broadcast")
{
    const RunConfig c = RunConfig::parse(R"({"grid": {"dim": 3, "n": [16], "lower": [-1], "upper": [1], "periodic": [false]}})");
    CHECK(c.grid.n == std::vector<std::size_t>{16, 16, 16});
    CHECK(c.grid.build().size() == 4096);
}

TEST_CASE("field files round-trip bit for bit")
{
    const std::size_t n[2] = {12, 9};
    const double lo[2] = {-1, 0}, hi[2] = {1, 3};
    const bool per[2] = {true, false};
    const GridSpec g(2, n, lo, hi, per);
    const ComplexField f = sample_complex(g, [](const Point& x) { return Complex(std::exp(x[0]), std::sin(x[1])); }, 0.75);
    VectorField v(g, 2, 1.5);
    for (std::size_t i = 0; i < g.size(); ++i) {
        v[0][i] = static_cast<double>(i);
        v[1][i] = -1.0 / (1.0 + i);
    }
    std::stringstream a, b;
    field_io::write(a, f);
    field_io::write(b, v);
    const std::string bytes = a.str();
    CHECK(bytes.substr(0, 4) == "MDLG");
    const auto back = std::get<ComplexField>(field_io::read(a));
    CHECK(back.grid() == g);
    CHECK(back.time() == 0.75);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(back[i] == f[i]);
    std::stringstream again;
    field_io::write(again, back);
    CHECK(again.str() == bytes);
    const auto vb = std::get<VectorField>(field_io::read(b));
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(vb[1][i] == v[1][i]);

    std::stringstream bad("MDLX");
    CHECK_THROWS_AS(field_io::read(bad), Error);
    std::stringstream truncated(bytes.substr(0, 30));
    CHECK_THROWS_AS(field_io::read(truncated), Error);
}

TEST_CASE("run writes a report and maps failures to exit codes")
{
    const fs::path dir = scratch("run");
    RunConfig c = RunConfig::parse(kMinimal);
    c.output.directory = (dir / "out").string();
    c.output.formats = {"json", "csv", "field"};
    c.experiments.push_back({"transport", "t", nlohmann::json::object()});
    const RunResult r = run(c);
    CHECK(r.exit_code == ExitSuccess);
    CHECK(fs::exists(dir / "out" / "norm_series.csv"));
    CHECK(fs::exists(dir / "out" / "final.mdlg"));
    CHECK(r.report["schema_version"] == kReportSchemaVersion);
    CHECK(RunConfig::from_json(r.report["config"]) == c);

    // Identical config gives identical bytes.
    std::ifstream f1(dir / "out" / "report.json");
    std::stringstream s1;
    s1 << f1.rdbuf();
    run(c);
    std::ifstream f2(dir / "out" / "report.json");
    std::stringstream s2;
    s2 << f2.rdbuf();
    CHECK(s1.str() == s2.str());

    std::ofstream(dir / "typo.json") << R"({"grid": {"dim": 1, "nn": [8]}})";
    std::ostringstream err;
    CHECK(run_file(dir / "typo.json", err) == ExitConfigError);
    CHECK(err.str().find("grid.nn") != std::string::npos);
    CHECK(run_file(dir / "missing.json", err) == ExitIoError);
}

TEST_CASE("decay experiments need a source")
{
    RunConfig c = RunConfig::parse(kMinimal);
    c.experiments.push_back({"decay", "d", nlohmann::json::object()});
    CHECK_THROWS_AS(run(c), Error);
}

TEST_CASE("numerical failures are named in the report")
{
    const fs::path dir = scratch("fail");
    RunConfig c = RunConfig::parse(kMinimal);
    c.output.directory = (dir / "out").string();
    c.experiments.push_back({"transport", "bad", {{"interval", {1.0, -1.0}}}});
    const RunResult r = run(c);
    CHECK(r.exit_code == ExitNumericalFailure);
    CHECK(r.report["failures"][0]["code"] == "BoundaryDegenerate");
}

TEST_CASE("bridge reports a masked support for a state with a node")
{
    const fs::path dir = scratch("bridge");
    SimParams p;
    const GridSpec g = GridSpec::cube(1, 129, -8, 8, true);
    const ComplexField psi = sample_complex(g, [](const Point& x) { return Complex(x[0] * std::exp(-x[0] * x[0] / 2), 0); });
    field_io::write_file(dir / "node.mdlg", psi);
    BridgeOptions o;
    o.rho_floor_relative = 1e-3;
    o.output_directory = dir / "out";
    o.sim.dt = 1e-3;
    const RunResult r = bridge_files({dir / "node.mdlg"}, o);
    bool masked = false;
    for (const auto& s : r.report["snapshots"])
        for (const auto& w : s["warnings"]) masked = masked || w.get<std::string>().find("MaskedSupport") != std::string::npos;
    CHECK(masked);
    CHECK(r.report.contains("residuals"));
    CHECK(fs::exists(dir / "out" / "bridge_report.json"));
}

TEST_CASE("selftest passes")
{
    std::ostringstream out;
    CHECK(selftest(out) == 0);
}
