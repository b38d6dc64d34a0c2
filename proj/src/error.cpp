#include "tfwi/error.hpp"

namespace tfwi {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::out_of_range: return "out_of_range";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::invalid_material: return "invalid_material";
    case ErrorCode::singular_matrix: return "singular_matrix";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::validation_error: return "validation_error";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::line_search_failure: return "line_search_failure";
    }
    return "unknown";
}

Error::Error(ErrorCode code, const std::string& message) : std::runtime_error(message), code_(code) {}

}  // namespace tfwi
