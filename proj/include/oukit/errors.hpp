#pragma once

#include <stdexcept>
#include <string>

namespace oukit {

enum class ErrorCode {
    InvalidInput,
    NotDiagonalizable,
    NotSimultaneous,
    NonEllipticA,
    NotSkew,
    BranchCutHit,
    PoleHit,
    ParameterPole,
    SystemNotScalar,
    QuadratureNotConverged,
    EmptyGrid,
    TooCloseToBoundary,
    SpectralMarginTooSmall,
    HypothesisViolated,
    NonDecayingB,
    ConfigInvalid,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& message);

}  // namespace oukit
