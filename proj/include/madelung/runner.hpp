#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "madelung/config.hpp"
#include "madelung/error.hpp"

namespace madelung {

inline constexpr int kReportSchemaVersion = 1;

enum ExitCode : int { ExitSuccess = 0, ExitConfigError = 1, ExitNumericalFailure = 2, ExitIoError = 3 };

/// ConfigError -> 1, IoError -> 3, anything else -> 2.
int exit_code_for(ErrorCode code);

/// Samples the configured initial state (or reads it from a field file).
WaveState build_initial(const RunConfig& config);

struct RunResult {
    int exit_code = ExitSuccess;
    nlohmann::json report;
    /// Paths of every file written, relative to the output directory.
    std::vector<std::string> files;
};

/// Evolves, runs every experiment block and writes the report plus sidecars
/// into config.output.directory. A failing experiment is recorded in the
/// report under "failures" with its error code and gives exit code 2;
/// the remaining experiments still run.
RunResult run(const RunConfig& config);

/// Loads the config and runs it; config and I/O errors become exit codes
/// with a one-line message on `err`.
int run_file(const std::filesystem::path& config_path, std::ostream& err);

/// Keeps only experiment blocks of `type`; adds a default block when none
/// is configured.
RunConfig restrict_to(const RunConfig& config, const std::string& type);

struct BridgeOptions {
    double rho_floor_relative = 1e-12;
    int erosion_cells = 4;
    double path_tolerance = 1e-3;
    /// Used to generate extra snapshots when fewer than three files are given.
    PotentialConfig potential;
    SimConfig sim;
    std::filesystem::path output_directory = "madelung_out";
};

/// decompose / reconstruct / residuals on stored complex field files. With
/// fewer than three files the last one is stepped forward to obtain the
/// snapshots the residuals need.
RunResult bridge_files(const std::vector<std::filesystem::path>& fields, const BridgeOptions& options);

/// Runs the built-in property suite, printing one PASS/FAIL line per
/// property. Returns 0 when every property passes.
int selftest(std::ostream& out);

} // namespace madelung
