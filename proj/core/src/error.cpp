#include "insightd/error.hpp"

namespace insightd {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::MalformedInput: return "MalformedInput";
        case ErrorCode::EmptyTable: return "EmptyTable";
        case ErrorCode::DuplicateHeader: return "DuplicateHeader";
        case ErrorCode::KindMismatch: return "KindMismatch";
        case ErrorCode::UnknownField: return "UnknownField";
        case ErrorCode::TooFewValues: return "TooFewValues";
        case ErrorCode::ZeroVariance: return "ZeroVariance";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::SingularSystem: return "SingularSystem";
        case ErrorCode::UnrenderableCardinality: return "UnrenderableCardinality";
        case ErrorCode::InvalidChart: return "InvalidChart";
        case ErrorCode::DuplicateId: return "DuplicateId";
    }
    return "Unknown";
}

}  // namespace insightd
