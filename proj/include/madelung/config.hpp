#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "madelung/creation.hpp"
#include "madelung/dynamics.hpp"
#include "madelung/grid.hpp"

namespace madelung {

struct GridConfig {
    int dim = 1;
    std::vector<std::size_t> n{256};
    std::vector<double> lower{-10.0};
    std::vector<double> upper{10.0};
    std::vector<bool> periodic{true};

    GridSpec build() const;
    friend bool operator==(const GridConfig&, const GridConfig&) = default;
};

struct SimConfig {
    double mass = 1.0;
    double hbar = 1.0;
    double dt = 1e-3;
    double t_final = 1.0;
    /// "split_step" or "crank_nicolson"
    std::string solver = "split_step";
    std::size_t snapshot_every = 100;
    double cn_tolerance = 1e-12;
    int cn_max_iterations = 1000;
    double boundary_mass_warning = 1e-8;

    SimParams build() const;
    friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

struct InitialConfig {
    /// "gaussian", "harmonic_eigenstate", "coherent", "field_file"
    std::string kind = "gaussian";
    std::vector<double> x0{0.0};
    std::vector<double> p0{0.0};
    double sigma = 1.0;
    std::vector<int> n{0};
    double omega = 1.0;
    std::vector<double> alpha_re{0.0};
    std::vector<double> alpha_im{0.0};
    std::string path;

    friend bool operator==(const InitialConfig&, const InitialConfig&) = default;
};

struct SlabConfig {
    int axis = 0;
    double lo = 0.0;
    double hi = 0.0;
    double height = 0.0;
    friend bool operator==(const SlabConfig&, const SlabConfig&) = default;
};

struct PotentialConfig {
    /// "free", "harmonic", "soft_coulomb", "barrier", "double_slit"
    std::string kind = "free";
    double omega = 1.0;
    std::vector<double> center{0.0, 0.0, 0.0};
    double charge = 1.0;
    double epsilon = 0.1;
    std::vector<SlabConfig> slabs;
    double wall_x = 0.0;
    double thickness = 0.2;
    double height = 100.0;
    double separation = 2.0;
    double slit_width = 0.5;

    Potential build() const;
    friend bool operator==(const PotentialConfig&, const PotentialConfig&) = default;
};

struct SourceConfig {
    /// "none", "uniform_decay", "uniform_gain", "localized_sink", "density_quadratic"
    std::string kind = "none";
    double gamma = 0.0;
    std::vector<double> center{0.0, 0.0, 0.0};
    double width = 1.0;

    SourceModel build() const;
    friend bool operator==(const SourceConfig&, const SourceConfig&) = default;
};

/// One experiment block. `params` holds the type-specific keys, validated
/// against the type's key list at parse time.
struct ExperimentConfig {
    /// "residuals", "transport", "observables", "hydrogen", "decay", "classical_limit"
    std::string type;
    std::string name;
    nlohmann::json params = nlohmann::json::object();

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

struct OutputConfig {
    std::string directory = "madelung_out";
    /// Any of "json", "csv", "field".
    std::vector<std::string> formats{"json", "csv"};

    bool wants(const std::string& format) const;
    friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct RunConfig {
    GridConfig grid;
    SimConfig sim;
    InitialConfig initial;
    PotentialConfig potential;
    SourceConfig source;
    std::vector<ExperimentConfig> experiments;
    OutputConfig output;

    /// Throws Error(ConfigError) naming the offending key.
    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig parse(const std::string& text);
    static RunConfig load(const std::filesystem::path& path);
    nlohmann::json to_json() const;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Allowed parameter keys per experiment type.
const std::vector<std::string>& experiment_keys(const std::string& type);

} // namespace madelung
