#include "oukit/errors.hpp"

namespace oukit {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidInput: return "InvalidInput";
        case ErrorCode::NotDiagonalizable: return "NotDiagonalizable";
        case ErrorCode::NotSimultaneous: return "NotSimultaneous";
        case ErrorCode::NonEllipticA: return "NonEllipticA";
        case ErrorCode::NotSkew: return "NotSkew";
        case ErrorCode::BranchCutHit: return "BranchCutHit";
        case ErrorCode::PoleHit: return "PoleHit";
        case ErrorCode::ParameterPole: return "ParameterPole";
        case ErrorCode::SystemNotScalar: return "SystemNotScalar";
        case ErrorCode::QuadratureNotConverged: return "QuadratureNotConverged";
        case ErrorCode::EmptyGrid: return "EmptyGrid";
        case ErrorCode::TooCloseToBoundary: return "TooCloseToBoundary";
        case ErrorCode::SpectralMarginTooSmall: return "SpectralMarginTooSmall";
        case ErrorCode::HypothesisViolated: return "HypothesisViolated";
        case ErrorCode::NonDecayingB: return "NonDecayingB";
        case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void raise(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace oukit
