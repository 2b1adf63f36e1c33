#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>

namespace psdn {

enum class FieldKind : std::uint8_t { Integer, Decimal, String };

/// Scalar carried by a sample field or a filter literal. Index order matches
/// FieldKind.
using Value = std::variant<std::int64_t, double, std::string>;

/// Sample fields keyed by dotted field path. std::map keeps the lexicographic
/// ordering that payload serialization relies on.
using FieldMap = std::map<std::string, Value, std::less<>>;

inline FieldKind kind_of(const Value &v) noexcept { return static_cast<FieldKind>(v.index()); }

std::string_view to_string(FieldKind kind) noexcept;
FieldKind        parse_field_kind(std::string_view text); // throws Error(ValidationError)

/// Canonical literal text: integers in decimal, decimals in shortest
/// round-trip fixed notation with a mandatory '.', strings single-quoted with
/// '' escaping.
std::string format_value(const Value &v);

/// Equality with integer→decimal promotion; string vs number is never equal.
bool values_equal(const Value &a, const Value &b) noexcept;

} // namespace psdn
