#ifndef GLOBENV_ERROR_HPP
#define GLOBENV_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace globenv {

enum class ErrorCode {
    DimensionMismatch,
    NonFinite,
    TooFewCurves,
    InconsistentCurveCount,
    InconsistentObsCount,
    InvalidGrid,
    DegenerateScale,
    BetaTooSmall,
    AlphaInfeasible,
    InvalidArgument,
    NoObservedCurve,
    InconsistentReplicates,
    DegenerateData,
    DegenerateGroupVariance,
    GroupTooSmall,
    EmptyGroup,
    RankDeficient,
    UnknownTerm,
    ParseError,
    HeaderError,
    IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it onto an exit status.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace globenv

#endif
