#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "madelung/runner.hpp"

using namespace madelung;

namespace {

int run_restricted(const std::string& config_path, const std::string& type, const std::string& out_dir)
{
    RunConfig cfg = RunConfig::load(config_path);
    if (!type.empty()) cfg = restrict_to(cfg, type);
    if (!out_dir.empty()) cfg.output.directory = out_dir;
    const RunResult r = run(cfg);
    for (const auto& f : r.report["failures"]) std::cerr << f["stage"].get<std::string>() << ": " << f["message"].get<std::string>() << '\n';
    std::cout << "wrote " << r.files.size() << " file(s) to " << cfg.output.directory << '\n';
    return r.exit_code;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Madelung-picture quantum dynamics runner"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;

    auto* run_cmd = app.add_subcommand("run", "Evolve and run every configured experiment");
    run_cmd->add_option("config", config_path, "JSON run configuration")->required();
    run_cmd->add_option("-o,--output", out_dir, "Override output.directory");

    auto* evolve_cmd = app.add_subcommand("evolve", "Evolve only; writes the norm series and field files");
    evolve_cmd->add_option("config", config_path, "JSON run configuration")->required();
    evolve_cmd->add_option("-o,--output", out_dir, "Override output.directory");

    struct Typed {
        const char* name;
        const char* help;
        const char* type;
    };
    const std::vector<Typed> typed = {
        {"transport", "Trajectories and transported-region probabilities", "transport"},
        {"observe", "Kolmogorov vs operator observables and energy probabilities", "observables"},
        {"hydrogen", "Circulation of the azimuthal drift field", "hydrogen"},
        {"decay", "Probability series under the configured source", "decay"},
    };
    std::vector<std::pair<CLI::App*, std::string>> typed_cmds;
    std::vector<std::vector<std::string>> intervals(typed.size());
    for (std::size_t i = 0; i < typed.size(); ++i) {
        auto* cmd = app.add_subcommand(typed[i].name, typed[i].help);
        cmd->add_option("config", config_path, "JSON run configuration")->required();
        cmd->add_option("-o,--output", out_dir, "Override output.directory");
        if (std::string(typed[i].type) == "observables")
            cmd->add_option("-J,--interval", intervals[i], "Energy interval lo:hi (repeatable)");
        typed_cmds.emplace_back(cmd, typed[i].type);
    }

    std::vector<std::string> fields;
    BridgeOptions bopt;
    std::string bridge_out = bopt.output_directory.string();
    std::string bridge_potential = "free";
    double bridge_omega = 1.0;
    auto* bridge_cmd = app.add_subcommand("bridge", "decompose / reconstruct / residuals on stored field files");
    bridge_cmd->add_option("fields", fields, "Complex field files (time ordered)")->required()->check(CLI::ExistingFile);
    bridge_cmd->add_option("--rho-floor", bopt.rho_floor_relative, "Support floor relative to max density");
    bridge_cmd->add_option("--erosion", bopt.erosion_cells, "Support erosion in cells");
    bridge_cmd->add_option("--path-tolerance", bopt.path_tolerance, "Phase path tolerance (radians)");
    bridge_cmd->add_option("--mass", bopt.sim.mass, "Particle mass");
    bridge_cmd->add_option("--hbar", bopt.sim.hbar, "Reduced Planck constant");
    bridge_cmd->add_option("--dt", bopt.sim.dt, "Step used to generate missing snapshots");
    bridge_cmd->add_option("--potential", bridge_potential, "free or harmonic")
        ->check(CLI::IsMember({"free", "harmonic"}));
    bridge_cmd->add_option("--omega", bridge_omega, "Harmonic frequency");
    bridge_cmd->add_option("-o,--output", bridge_out, "Output directory");

    auto* selftest_cmd = app.add_subcommand("selftest", "Run the built-in property suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : ExitConfigError;
    }

    try {
        if (*selftest_cmd) return selftest(std::cout);
        if (*run_cmd) return run_restricted(config_path, "", out_dir);
        if (*evolve_cmd) {
            RunConfig cfg = RunConfig::load(config_path);
            cfg.experiments.clear();
            if (!out_dir.empty()) cfg.output.directory = out_dir;
            if (!cfg.output.wants("field")) cfg.output.formats.push_back("field");
            const RunResult r = run(cfg);
            std::cout << "wrote " << r.files.size() << " file(s) to " << cfg.output.directory << '\n';
            return r.exit_code;
        }
        if (*bridge_cmd) {
            bopt.potential.kind = bridge_potential;
            bopt.potential.omega = bridge_omega;
            bopt.output_directory = bridge_out;
            std::vector<std::filesystem::path> paths(fields.begin(), fields.end());
            const RunResult r = bridge_files(paths, bopt);
            for (const auto& s : r.report["snapshots"])
                for (const auto& w : s["warnings"]) std::cout << w.get<std::string>() << '\n';
            if (r.report.contains("residuals")) std::cout << r.report["residuals"].dump(2) << '\n';
            for (const auto& f : r.report["failures"]) std::cerr << f["message"].get<std::string>() << '\n';
            return r.exit_code;
        }
        for (std::size_t i = 0; i < typed_cmds.size(); ++i) {
            auto [cmd, type] = typed_cmds[i];
            if (!*cmd) continue;
            if (type == "observables" && !intervals[i].empty()) {
                RunConfig cfg = restrict_to(RunConfig::load(config_path), type);
                nlohmann::json list = nlohmann::json::array();
                for (const auto& s : intervals[i]) {
                    const auto colon = s.find(':');
                    if (colon == std::string::npos) throw Error(ErrorCode::ConfigError, "interval '" + s + "' is not lo:hi");
                    try {
                        list.push_back({std::stod(s.substr(0, colon)), std::stod(s.substr(colon + 1))});
                    } catch (const std::exception&) {
                        throw Error(ErrorCode::ConfigError, "interval '" + s + "' is not lo:hi");
                    }
                }
                for (auto& e : cfg.experiments) e.params["intervals"] = list;
                if (!out_dir.empty()) cfg.output.directory = out_dir;
                const RunResult r = run(cfg);
                std::cout << "wrote " << r.files.size() << " file(s) to " << cfg.output.directory << '\n';
                return r.exit_code;
            }
            return run_restricted(config_path, type, out_dir);
        }
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return ExitNumericalFailure;
    }
    return ExitSuccess;
}
