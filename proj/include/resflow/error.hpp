#pragma once

#include <stdexcept>
#include <string>

namespace resflow {

enum class ErrorCode {
    InvalidArgument,
    DimensionMismatch,
    NonHermitianInput,
    NumericallySingular,
    NotPositiveSemidefinite,
    LambdaInSpectrum,
    ResonantParameter,
    BasePointResonant,
    ResonantEndpoint,
    ClusterSeparationFailure,
    UnstableIndex,
    CrossingAtEndpoint,
    MatchingAmbiguous,
    PhaseOnTarget,
    GapTooWide,
    ThetaDependence,
    ZeroOnContour,
    RefinementExhausted,
    CriticalPointNearContour,
    CollisionDetected,
    Io,
};

const char* to_string(ErrorCode code) noexcept;

// Every numerical contract violation surfaces as an Error carrying its code,
// so the CLI can map it to a structured message and exit status.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace resflow
