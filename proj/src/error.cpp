// SPDX-License-Identifier: Apache-2.0
#include "funcloc/error.hpp"

namespace funcloc {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::MalformedCoverage: return "MalformedCoverage";
        case ErrorCode::EmptyCoverage: return "EmptyCoverage";
        case ErrorCode::UnsupportedLanguage: return "UnsupportedLanguage";
        case ErrorCode::ParseFailure: return "ParseFailure";
        case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
        case ErrorCode::RateLimited: return "RateLimited";
        case ErrorCode::ContextOverflow: return "ContextOverflow";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::EmptyBundle: return "EmptyBundle";
        case ErrorCode::EmptyResponse: return "EmptyResponse";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::NormalizationError: return "NormalizationError";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::EmptyIndex: return "EmptyIndex";
        case ErrorCode::DuplicateMethodId: return "DuplicateMethodId";
        case ErrorCode::NoJsonFound: return "NoJsonFound";
        case ErrorCode::SchemaViolation: return "SchemaViolation";
        case ErrorCode::EmptyRelevantSet: return "EmptyRelevantSet";
        case ErrorCode::EmptyBugset: return "EmptyBugset";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace funcloc
