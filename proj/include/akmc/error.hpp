#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace akmc {

enum class Errc {
    NoConvergence,
    WrongSignature,
    InsideBasin,
    NonFinite,
    MaxStepsExceeded,
    MaxCyclesExceeded,
    OutOfRange,
    BadCurvature,
    TooFewSamples,
    InvalidArgument,
    Io,
};

[[nodiscard]] constexpr std::string_view to_string(Errc code) noexcept {
    switch (code) {
        case Errc::NoConvergence: return "NoConvergence";
        case Errc::WrongSignature: return "WrongSignature";
        case Errc::InsideBasin: return "InsideBasin";
        case Errc::NonFinite: return "NonFinite";
        case Errc::MaxStepsExceeded: return "MaxStepsExceeded";
        case Errc::MaxCyclesExceeded: return "MaxCyclesExceeded";
        case Errc::OutOfRange: return "OutOfRange";
        case Errc::BadCurvature: return "BadCurvature";
        case Errc::TooFewSamples: return "TooFewSamples";
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::Io: return "Io";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace akmc
