// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace funcloc {

enum class ErrorCode {
    MalformedCoverage,
    EmptyCoverage,
    UnsupportedLanguage,
    ParseFailure,
    ProviderUnavailable,
    RateLimited,
    ContextOverflow,
    DimensionMismatch,
    EmptyBundle,
    EmptyResponse,
    EmptyInput,
    NormalizationError,
    ZeroVector,
    EmptyIndex,
    DuplicateMethodId,
    NoJsonFound,
    SchemaViolation,
    EmptyRelevantSet,
    EmptyBugset,
    InvalidArgument,
    InvalidConfig,
    Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers can branch on the kind without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace funcloc
