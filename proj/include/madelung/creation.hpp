#pragma once

#include <optional>
#include <string>
#include <vector>

#include "madelung/dynamics.hpp"

namespace madelung {

/// Local source term u of the modified continuity equation
/// d rho/dt + div(rho X) = u.
struct SourceModel {
    enum class Kind {
        None,
        /// u = -gamma rho
        UniformDecay,
        /// u = +gamma rho
        UniformGain,
        /// u = -gamma(x) rho, gamma(x) = gamma exp(-|x - center|^2 / (2 width^2))
        /// or a caller-supplied profile.
        LocalizedSink,
        /// u = -gamma rho^2 (density-dependent; used by the nonlinearity witness)
        DensityQuadratic,
    };

    Kind kind = Kind::None;
    double gamma = 0.0;
    Point center{0, 0, 0};
    double width = 1.0;
    std::optional<ScalarField> profile;

    static SourceModel none() { return {}; }
    static SourceModel uniform_decay(double gamma) { return {Kind::UniformDecay, gamma, {0, 0, 0}, 1.0, {}}; }
    static SourceModel uniform_gain(double gamma) { return {Kind::UniformGain, gamma, {0, 0, 0}, 1.0, {}}; }
    static SourceModel localized_sink(double gamma, const Point& center, double width)
    {
        return {Kind::LocalizedSink, gamma, center, width, {}};
    }
    static SourceModel density_quadratic(double gamma) { return {Kind::DensityQuadratic, gamma, {0, 0, 0}, 1.0, {}}; }

    std::string name() const;
    void validate() const;
};

/// u(rho) on every grid point.
ScalarField source_term(const SourceModel& source, const ScalarField& rho);

/// xi = hbar u / (2 |psi|^2) on the support {rho >= rho_floor_relative max rho},
/// zero elsewhere. The density cancels algebraically for the linear models,
/// so xi = -hbar gamma(x) / 2 there. Throws VanishingDensity if no point
/// reaches the floor.
ScalarField xi_from_u(const SourceModel& source, const WaveState& psi, double rho_floor_relative = 1e-12);

struct SourceStepOptions {
    /// Throw ProbabilityOverflow when the total probability would exceed
    /// 1 + overflow_tolerance.
    bool check_overflow = true;
    double overflow_tolerance = 1e-9;
};

/// Strang splitting: amplitude factor exp(xi dt / (2 hbar)), unitary step,
/// amplitude factor again. With no source this is exactly Propagator::step.
WaveState step_with_source(const WaveState& state, const Propagator& propagator, const SourceModel& source,
                           const SourceStepOptions& options = {});
WaveState step_with_source(const WaveState& state, const Potential& potential, const SourceModel& source,
                           const SourceStepOptions& options = {});

struct SourceRun {
    std::vector<WaveState> snapshots;
    /// Total probability after every step (index 0 = initial).
    std::vector<double> times;
    std::vector<double> masses;
    /// Integral of u at every recorded step.
    std::vector<double> source_integrals;
    bool halted = false;
    std::vector<std::string> warnings;
};

/// Repeated step_with_source; a ProbabilityOverflow halts the run (the state
/// before the offending step is kept and `halted` is set).
SourceRun evolve_with_source(const WaveState& initial, const Potential& potential, const SourceModel& source,
                             double t_final);

struct ProbabilitySeries {
    std::vector<double> times;
    std::vector<double> masses;
    /// Centred d/dt of the mass at interior times, and the source integral there.
    std::vector<double> rate_times;
    std::vector<double> mass_rates;
    std::vector<double> source_integrals;
    double max_rate_gap = 0.0;
    /// Least-squares fit of log(mass) = log(A) - rate t.
    double fitted_rate = 0.0;
    double fitted_amplitude = 1.0;
};

ProbabilitySeries probability_series(const SourceRun& run);

struct NonlinearityReport {
    /// L2 norm of step(psi1 + psi2) - step(psi1) - step(psi2).
    double defect = 0.0;
    double norm_sum = 0.0;
};

/// Each packet is scaled to norm^2 = 1/2 before the three one-step runs; the
/// sum is not renormalised.
NonlinearityReport nonlinearity_witness(const WaveState& psi1, const WaveState& psi2, const Potential& potential,
                                        const SourceModel& source);

} // namespace madelung
