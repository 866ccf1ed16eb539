#include "lear/error.hpp"

namespace lear {

std::string_view error_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidGrid: return "InvalidGrid";
        case ErrorCode::DegenerateGrid: return "DegenerateGrid";
        case ErrorCode::InvalidParams: return "InvalidParams";
        case ErrorCode::InvalidSize: return "InvalidSize";
        case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
        case ErrorCode::NotSpecialCase: return "NotSpecialCase";
        case ErrorCode::DegenerateRange: return "DegenerateRange";
        case ErrorCode::Unidentifiable: return "Unidentifiable";
        case ErrorCode::OutsideLearImage: return "OutsideLearImage";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::SingularFit: return "SingularFit";
        case ErrorCode::FitFailed: return "FitFailed";
        case ErrorCode::InvalidData: return "InvalidData";
        case ErrorCode::DuplicateMeasurement: return "DuplicateMeasurement";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
    }
    return "Unknown";
}

// 1 is reserved for unexpected failures, 2 for usage errors.
int exit_code(ErrorCode code) noexcept {
    return 10 + static_cast<int>(code);
}

}  // namespace lear
