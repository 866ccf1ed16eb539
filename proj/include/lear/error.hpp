#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lear {

/// Error classes raised by the library. Each maps to a stable name and a
/// distinct process exit code used by the command-line tool.
enum class ErrorCode {
    InvalidGrid,
    DegenerateGrid,
    InvalidParams,
    InvalidSize,
    NotPositiveDefinite,
    NotSpecialCase,
    DegenerateRange,
    Unidentifiable,
    OutsideLearImage,
    RankDeficient,
    SingularFit,
    FitFailed,
    InvalidData,
    DuplicateMeasurement,
    ParseError,
    IoError,
    InvalidSpec,
};

std::string_view error_name(ErrorCode code) noexcept;
int exit_code(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace lear
