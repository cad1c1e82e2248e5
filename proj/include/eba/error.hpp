#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace eba {

enum class ErrorKind {
    FileNotFound,
    DecodeError,
    TooSmall,
    IoError,
    ParseError,
    DuplicateId,
    DimMismatch,
    BadMagic,
    TruncatedRecord,
    ZeroNormEmbedding,
    ProviderUnavailable,
    TooFewSamples,
    EmptyAssignment,
    LengthMismatch,
    EmptyInput,
    PerplexityTooLarge,
    MissingProfile,
    WindowTooLarge,
    InvalidParams,
    PlanMismatch,
    EmptyScores,
    MissingResult,
    DimensionMismatch,
    SerializationError,
    ManifestMismatch,
    InconsistentReport,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every failure raised by the library carries a kind so callers (and the CLI
// exit-code mapping) can branch without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace eba
