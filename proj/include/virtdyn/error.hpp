#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace virtdyn {

enum class ErrorCode {
    NonPositiveParameter,
    VelocityAtSignalSpeed,
    DegenerateGeometry,
    NumericOverflow,
    ToleranceUnachievable,
    SingularIntegrand,
    InsufficientTrajectory,
    OutOfRange,
    InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::NonPositiveParameter: return "NonPositiveParameter";
    case ErrorCode::VelocityAtSignalSpeed: return "VelocityAtSignalSpeed";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::NumericOverflow: return "NumericOverflow";
    case ErrorCode::ToleranceUnachievable: return "ToleranceUnachievable";
    case ErrorCode::SingularIntegrand: return "SingularIntegrand";
    case ErrorCode::InsufficientTrajectory: return "InsufficientTrajectory";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// front ends can map it to an exit status without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message)
{
    throw Error(code, message);
}

} // namespace virtdyn
