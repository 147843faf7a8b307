#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sqopen {

enum class ErrorCode {
    InvalidArgument,
    DimensionObstruction,
    BoundaryHullViolation,
    ExhaustedRetries,
    DegenerateDenominator,
    DegenerateInterface,
    DegenerateSpectrum,
    AmbiguousSampling,
    SyntaxError,
    UnknownIdentifier,
    ArityMismatch,
};

inline std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::DimensionObstruction: return "dimension-obstruction";
    case ErrorCode::BoundaryHullViolation: return "boundary-hull-violation";
    case ErrorCode::ExhaustedRetries: return "exhausted-retries";
    case ErrorCode::DegenerateDenominator: return "degenerate-denominator";
    case ErrorCode::DegenerateInterface: return "degenerate-interface";
    case ErrorCode::DegenerateSpectrum: return "degenerate-spectrum";
    case ErrorCode::AmbiguousSampling: return "ambiguous-sampling";
    case ErrorCode::SyntaxError: return "syntax-error";
    case ErrorCode::UnknownIdentifier: return "unknown-identifier";
    case ErrorCode::ArityMismatch: return "arity-mismatch";
    }
    return "unknown";
}

/// Library error. `index()` carries the offending vertex, simplex or text
/// offset when the failure can be pinned to one.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what, std::optional<std::size_t> index = std::nullopt)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), index_(index)
    {
    }

    ErrorCode code() const noexcept { return code_; }
    std::optional<std::size_t> index() const noexcept { return index_; }

private:
    ErrorCode code_;
    std::optional<std::size_t> index_;
};

inline void require(bool condition, const std::string& what)
{
    if (!condition)
        throw Error(ErrorCode::InvalidArgument, what);
}

} // namespace sqopen
