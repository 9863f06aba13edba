#pragma once

#include <optional>
#include <string>
#include <vector>

#include "madelung/bridge.hpp"
#include "madelung/dynamics.hpp"

namespace madelung {

/// One Kolmogorov-vs-operator comparison row.
struct ObservableReport {
    std::string name;
    double kolmogorov_value = 0.0;
    Complex operator_value{0.0, 0.0};
    std::string region = "full";
    double time = 0.0;
    double gap = 0.0;
};

/// Integral of f rho over the region.
double expectation(const ScalarField& f, const MadelungState& state, const RegionMask& region);

/// Per component, integral of m X^i rho over the region (any region).
Point momentum_kolmogorov(const MadelungState& state, const RegionMask& region);

struct OperatorValue {
    Point value{0, 0, 0};
    /// Imaginary part of the integral, which vanishes on the full domain.
    Point imaginary_residue{0, 0, 0};
};

/// -i hbar integral psi* d_i psi. Only the full grid is accepted; a proper
/// subregion throws RegionNotSupported.
OperatorValue momentum_operator(const WaveState& psi, const std::optional<RegionMask>& region = std::nullopt);

enum class QuantumPotentialRoute {
    /// Wave route when the state carries it, density route otherwise.
    Auto,
    /// -(hbar^2/2m) Delta sqrt(rho) / sqrt(rho)
    Density,
    /// Same quantity evaluated from psi; smooth through real nodes.
    Wave,
};

struct EnergyField {
    ScalarField values;
    RegionMask support;
};

/// E = (m/2) X^2 + V + U on the support, zero elsewhere.
EnergyField energy_field(const MadelungState& state, const ScalarField& potential,
                         QuantumPotentialRoute route = QuantumPotentialRoute::Auto);

/// Integral of rho over {x in support : E(x) in [lo, hi]}.
double kolmogorov_energy_probability(const MadelungState& state, const ScalarField& potential, double lo, double hi,
                                     QuantumPotentialRoute route = QuantumPotentialRoute::Auto);

struct NeumannOptions {
    std::size_t modes = 64;
    /// Dense eigensolves above this many grid points are refused.
    std::size_t max_points = 4096;
    double deficit_warning = 1e-6;
};

/// Lowest eigenpairs of the discrete Hamiltonian and the weights
/// |<Phi_n|psi>|^2 / <psi|psi>. The kinetic matrix is the spectral Laplacian
/// on fully periodic grids and the symmetric 4th-order stencil (zero outside)
/// otherwise.
struct NeumannSpectrum {
    std::vector<double> energies;
    std::vector<double> weights;
    double completeness_deficit = 0.0;
    std::vector<std::string> warnings;

    double probability(double lo, double hi) const;
};

NeumannSpectrum neumann_spectrum(const WaveState& psi, const ScalarField& potential, const NeumannOptions& options = {});
double neumann_energy_probability(const WaveState& psi, const ScalarField& potential, double lo, double hi,
                                  const NeumannOptions& options = {});

struct HeisenbergReport {
    Point dx{0, 0, 0};
    Point dp_fourier{0, 0, 0};
    Point dp_madelung{0, 0, 0};
    Point product_fourier{0, 0, 0};
    Point product_madelung{0, 0, 0};
};

/// Per axis: position spread under rho, momentum spread from |psi-hat|^2 and
/// the spread of m X under rho.
HeisenbergReport heisenberg_report(const WaveState& psi, const MadelungState& state);

/// Integral of m (x cross X) rho over the region; 3D grids only.
Point angular_momentum_expectation(const MadelungState& state, const RegionMask& region);
/// <psi| L_z |psi> with spectral or finite-difference derivatives (full grid).
OperatorValue angular_momentum_operator(const WaveState& psi);

/// <psi|H psi> with H = -(hbar^2/2m) Delta + V.
OperatorValue energy_operator_expectation(const WaveState& psi, const ScalarField& potential);

/// Position, momentum and energy rows over the full grid.
std::vector<ObservableReport> equivalence_reports(const WaveState& psi, const MadelungState& state,
                                                  const ScalarField& potential);

} // namespace madelung
