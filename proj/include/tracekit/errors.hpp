#pragma once

#include <stdexcept>
#include <string>

namespace tracekit {

// Base for every domain error thrown by this library. Callers that just
// want "something went wrong in tracekit" can catch this one type.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// trace parsing
struct FormatInvalid : Error { using Error::Error; };
struct CitationParseError : Error { using Error::Error; };

// rewards
struct EmptyGoldSupports : Error { using Error::Error; };
struct MissingComponent : Error { using Error::Error; };
struct ExtraComponent : Error { using Error::Error; };

// judge
struct VariantMismatch : Error { using Error::Error; };
struct VariantInapplicable : Error { using Error::Error; };
struct JudgeFailure : Error { using Error::Error; };
struct TransportError : Error { using Error::Error; };
struct ResponseParseError : Error { using Error::Error; };

// group optimization
struct GroupTooSmall : Error { using Error::Error; };

// statistics
struct EmptyConfusion : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct ConstantSeries : Error { using Error::Error; };
struct MixedVariants : Error { using Error::Error; };

// dataset IO
struct FileMissing : Error { using Error::Error; };
struct SchemaError : Error { using Error::Error; };
struct InvariantViolation : Error { using Error::Error; };
struct QuotaExceedsSource : Error { using Error::Error; };
struct IdMismatch : Error { using Error::Error; };

} // namespace tracekit
