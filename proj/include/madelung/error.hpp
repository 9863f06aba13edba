#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace madelung {

enum class ErrorCode {
    InvalidArgument,
    NonFinite,
    EmptyRegion,
    NonNormalizable,
    SolverDivergence,
    VanishingState,
    VanishingDensity,
    NonSimplyConnectedSupport,
    DisconnectedSupport,
    RotationalDrift,
    InsufficientSnapshots,
    OverlappingSupports,
    BoundaryDegenerate,
    RadiusBelowGrid,
    RegionNotSupported,
    EigenSolveFailure,
    AxisTooClose,
    LoopLeavesGrid,
    ProbabilityOverflow,
    ConfigError,
    IoError,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every failure raised by the library. The code is stable
/// and is what the CLI maps onto exit codes and report entries.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Raised by phase reconstruction when the drift field has a non-zero loop
/// integral on the support. Carries the measured circulation.
class TopologyError : public Error {
public:
    TopologyError(const std::string& message, double circulation, double winding)
        : Error(ErrorCode::NonSimplyConnectedSupport, message),
          circulation_(circulation), winding_(winding) {}

    /// Loop integral of the drift field, in length^2/time.
    double circulation() const noexcept { return circulation_; }
    /// circulation * m / (2 pi hbar)
    double winding() const noexcept { return winding_; }

private:
    double circulation_;
    double winding_;
};

inline std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::EmptyRegion: return "EmptyRegion";
    case ErrorCode::NonNormalizable: return "NonNormalizable";
    case ErrorCode::SolverDivergence: return "SolverDivergence";
    case ErrorCode::VanishingState: return "VanishingState";
    case ErrorCode::VanishingDensity: return "VanishingDensity";
    case ErrorCode::NonSimplyConnectedSupport: return "NonSimplyConnectedSupport";
    case ErrorCode::DisconnectedSupport: return "DisconnectedSupport";
    case ErrorCode::RotationalDrift: return "RotationalDrift";
    case ErrorCode::InsufficientSnapshots: return "InsufficientSnapshots";
    case ErrorCode::OverlappingSupports: return "OverlappingSupports";
    case ErrorCode::BoundaryDegenerate: return "BoundaryDegenerate";
    case ErrorCode::RadiusBelowGrid: return "RadiusBelowGrid";
    case ErrorCode::RegionNotSupported: return "RegionNotSupported";
    case ErrorCode::EigenSolveFailure: return "EigenSolveFailure";
    case ErrorCode::AxisTooClose: return "AxisTooClose";
    case ErrorCode::LoopLeavesGrid: return "LoopLeavesGrid";
    case ErrorCode::ProbabilityOverflow: return "ProbabilityOverflow";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

} // namespace madelung
