#pragma once

#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

namespace psdn {

enum class ErrorCode {
    UnknownEntity,
    BudgetExceeded,
    ParseError,
    MissingField,
    TypeMismatch,
    DuplicateEntity,
    UnknownTopic,
    SchemaMismatch,
    InvalidOperation,
    NoSuchEntry,
    DuplicateEntry,
    SliceViolation,
    ValidationError,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string &what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), _code(code) {}

    ErrorCode code() const noexcept { return _code; }

private:
    ErrorCode _code;
};

/// Filter-language syntax error. `offset` is the 1-based byte position of the
/// offending token; end of input reports size + 1.
class ParseError : public Error {
public:
    ParseError(std::size_t offset, std::set<std::string> expected, const std::string &detail);

    std::size_t                  offset() const noexcept { return _offset; }
    const std::set<std::string> &expected() const noexcept { return _expected; }

private:
    std::size_t           _offset;
    std::set<std::string> _expected;
};

/// Document validation failure; `path` points into the offending document
/// (e.g. "links[2].b.node").
class ValidationError : public Error {
public:
    ValidationError(std::string path, const std::string &detail)
        : Error(ErrorCode::ValidationError, path.empty() ? detail : path + ": " + detail), _path(std::move(path)), _detail(detail) {}

    const std::string &path() const noexcept { return _path; }
    const std::string &detail() const noexcept { return _detail; }

private:
    std::string _path;
    std::string _detail;
};

} // namespace psdn
