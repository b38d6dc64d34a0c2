#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tfwi {

enum class ErrorCode {
    invalid_argument,
    not_found,
    out_of_range,
    dimension_mismatch,
    invalid_material,
    singular_matrix,
    parse_error,
    validation_error,
    io_error,
    line_search_failure,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception type thrown by every module. The code is stable and is what the
/// command-line tool prints in its machine-readable error line.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace tfwi
