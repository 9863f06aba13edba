#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "madelung/dynamics.hpp"
#include "madelung/grid.hpp"

namespace madelung {

/// The hydrodynamic state (rho, X) at one time. `drift` is the spacelike
/// part of the observer field; it is zero off `support`.
struct MadelungState {
    ScalarField rho;
    VectorField drift;
    RegionMask support;
    double time = 0.0;
    SimParams params;
    double rho_floor = 0.0;
    /// -(hbar^2/2m) Delta|psi| / |psi| evaluated from the wave function
    /// (Re(psi* Delta psi)/rho + |Im(psi* grad psi)|^2/rho^2 form), which
    /// stays smooth through real nodes. Absent for states not built from psi.
    std::optional<ScalarField> wave_quantum_potential;
    std::vector<std::string> warnings;

    const GridSpec& grid() const { return rho.grid(); }
};

struct DecomposeOptions {
    /// Support = {rho >= max(rho_floor_absolute, rho_floor_relative * max rho)}.
    double rho_floor_relative = 1e-12;
    double rho_floor_absolute = 0.0;
    DerivativeScheme scheme = DerivativeScheme::Auto;
};

/// rho = |psi|^2, X = (hbar/m) Im(psi* grad psi) / rho on the support.
/// Throws VanishingState if the support is empty.
MadelungState decompose(const WaveState& psi, const DecomposeOptions& options = {});

/// Real phase phi with psi = sqrt(rho) exp(-i phi); X = -(hbar/m) grad phi.
struct PhaseField {
    ScalarField phi;
    std::size_t reference_index = 0;
    double reference_value = 0.0;
    /// Largest disagreement between the two spanning-tree integrations and
    /// the closure mismatch over non-tree edges (radians).
    double path_discrepancy = 0.0;
};

struct PhaseOptions {
    /// Defaults to the point of maximum density.
    std::optional<std::size_t> reference_index;
    double reference_value = 0.0;
    /// Allowed path dependence (radians) before the support is declared
    /// non-simply-connected.
    double path_tolerance = 1e-3;
    /// Allowed max|curl X| * h / max|X| on the eroded support.
    double curl_tolerance = 1e-3;
};

/// Line integration of -(m/hbar) X . dl over a breadth-first spanning tree of
/// the support, re-integrated over a second tree rooted at the far end of
/// the first. Throws DisconnectedSupport, RotationalDrift or TopologyError.
PhaseField reconstruct_phase(const MadelungState& state, const PhaseOptions& options = {});

/// reconstruct_phase with the reference value taken from the wave function
/// itself, so successive snapshots share a common phase origin.
PhaseField anchored_phase(const WaveState& psi, const MadelungState& state, PhaseOptions options = {});

/// psi = sqrt(rho) exp(-i phi) on the support, zero elsewhere.
WaveState reconstruct_wave(const MadelungState& state, const PhaseField& phase);

struct QuantumPotentialOptions {
    double rho_floor_relative = 1e-12;
    DerivativeScheme scheme = DerivativeScheme::Auto;
    /// Restrict evaluation to this mask instead of the floor-derived support.
    std::optional<RegionMask> support;
};

/// U(rho) = -(hbar^2/2m) Delta sqrt(rho) / sqrt(rho) on the support, zero
/// elsewhere. rho is rescaled by its maximum first, so U(lambda rho) is
/// bit-identical to U(rho) for powers of two.
ScalarField quantum_potential(const ScalarField& rho, const SimParams& params,
                              const QuantumPotentialOptions& options = {});

/// F_B = -grad U(rho), evaluated in quotient form
/// (hbar^2/2m) [grad(Delta R)/R - Delta R grad R / R^2], R = sqrt(rho/max rho),
/// so only the smooth amplitude is differentiated.
VectorField bohm_force(const ScalarField& rho, const SimParams& params, const QuantumPotentialOptions& options = {});

struct ResidualReport {
    double newton_madelung_l2 = 0.0;
    double newton_madelung_max = 0.0;
    double continuity_l2 = 0.0;
    double continuity_max = 0.0;
    double irrotationality_l2 = 0.0;
    double irrotationality_max = 0.0;
    double bernoulli_l2 = 0.0;
    double bernoulli_max = 0.0;
    bool bernoulli_evaluated = false;
    double weber_l2 = 0.0;
    double weber_max = 0.0;
    double time = 0.0;
    double snapshot_spacing = 0.0;
    std::size_t centres = 0;
    std::size_t points = 0;
    GridSpec grid;
};

struct ResidualInputs {
    /// At least three snapshots at uniform time spacing.
    std::span<const MadelungState> snapshots;
    ScalarField potential;
    VectorField force;
    /// Optional; one per snapshot. Enables the Bernoulli residual.
    std::span<const PhaseField> phases;
    /// Optional; one per snapshot. Source term u subtracted from the
    /// continuity residual.
    std::span<const ScalarField> source;
};

struct ResidualOptions {
    /// Support erosion applied before any norm is taken.
    int erosion_cells = 4;
    /// Used for derivatives of the (masked) drift field.
    DerivativeScheme drift_scheme = DerivativeScheme::FiniteDifference;
    /// Used for derivatives of rho, sqrt(rho) and rho X.
    DerivativeScheme density_scheme = DerivativeScheme::Auto;
};

/// Centred time differences at every interior snapshot. Norms are discrete
/// L2 over the eroded mutual support, RMS-combined over centres; max norms
/// are maxima over centres. Throws InsufficientSnapshots.
ResidualReport residuals(const ResidualInputs& inputs, const ResidualOptions& options = {});

/// L2 norm (over `region`, or the whole grid) of
/// (v.grad)v - [grad(v^2/2) - v x curl v], both sides computed independently.
double weber_residual(const VectorField& v, DerivativeScheme scheme = DerivativeScheme::Auto,
                      const std::optional<RegionMask>& region = std::nullopt);
/// Same pair of sides, returned as (lhs, rhs).
std::pair<VectorField, VectorField> weber_sides(const VectorField& v, DerivativeScheme scheme);

struct IsolatedEnsembleReport {
    double max_deviation_first = 0.0;
    double max_deviation_second = 0.0;
    std::size_t points_first = 0;
    std::size_t points_second = 0;
};

/// Compares Delta sqrt(rho)/sqrt(rho) of the half-half mixture of two
/// disjointly supported states with each component's own value, away from
/// a buffer of two derivative stencils. Deviations are |a - b| / (1 + |b|).
/// Throws OverlappingSupports.
IsolatedEnsembleReport isolated_ensemble_check(const MadelungState& first, const MadelungState& second);

struct PhaseComparison {
    double global_phase = 0.0;
    double max_deviation = 0.0;
};

/// Best global phase theta with a ~ exp(i theta) b over `region` and the
/// resulting max |a - exp(i theta) b|.
PhaseComparison compare_up_to_phase(const ComplexField& a, const ComplexField& b, const RegionMask& region);

} // namespace madelung
