#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace insightd {

enum class ErrorCode {
    MalformedInput,
    EmptyTable,
    DuplicateHeader,
    KindMismatch,
    UnknownField,
    TooFewValues,
    ZeroVariance,
    LengthMismatch,
    SingularSystem,
    UnrenderableCardinality,
    InvalidChart,
    DuplicateId,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (the engine, the HTTP layer, the CLI) can map it without parsing
/// messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Analytics signal "nothing to report" rather than a fault with these codes.
inline bool is_skip_signal(ErrorCode code) noexcept {
    return code == ErrorCode::TooFewValues || code == ErrorCode::ZeroVariance ||
           code == ErrorCode::SingularSystem;
}

}  // namespace insightd
