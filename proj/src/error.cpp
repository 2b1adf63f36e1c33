#include "psdn/error.hpp"

namespace psdn {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::UnknownEntity: return "UnknownEntity";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::DuplicateEntity: return "DuplicateEntity";
    case ErrorCode::UnknownTopic: return "UnknownTopic";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::InvalidOperation: return "InvalidOperation";
    case ErrorCode::NoSuchEntry: return "NoSuchEntry";
    case ErrorCode::DuplicateEntry: return "DuplicateEntry";
    case ErrorCode::SliceViolation: return "SliceViolation";
    case ErrorCode::ValidationError: return "ValidationError";
    }
    return "Unknown";
}

namespace {
std::string describe(std::size_t offset, const std::set<std::string> &expected, const std::string &detail) {
    std::string out = "at offset " + std::to_string(offset) + ": " + detail;
    if (!expected.empty()) {
        out += " (expected one of:";
        for (const auto &e : expected) {
            out += ' ';
            out += e;
        }
        out += ')';
    }
    return out;
}
} // namespace

ParseError::ParseError(std::size_t offset, std::set<std::string> expected, const std::string &detail)
    : Error(ErrorCode::ParseError, describe(offset, expected, detail)), _offset(offset), _expected(std::move(expected)) {}

} // namespace psdn
