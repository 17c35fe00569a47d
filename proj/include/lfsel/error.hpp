#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lfsel {

enum class ErrorCode {
    InvalidArgument,
    Io,
    MalformedRow,
    NonUniformGrid,
    EmptyFile,
    Upsample,
    NonIntegralRatio,
    GridMismatch,
    TooShort,
    DegenerateSeries,
    LagOutOfRange,
    Infeasible,
    NonConvergence,
    LengthMismatch,
    AllInfeasible,
    SingleClass,
    TooFewSamples,
    TooFew,
    EmptySpec,
    StoreVersion,
    Config,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure surfaced by the library carries one of the codes above so
// callers (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace lfsel
