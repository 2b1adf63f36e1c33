#include "psdn/value.hpp"

#include "psdn/error.hpp"

#include <array>
#include <charconv>

namespace psdn {

std::string_view to_string(FieldKind kind) noexcept {
    switch (kind) {
    case FieldKind::Integer: return "integer";
    case FieldKind::Decimal: return "decimal";
    case FieldKind::String: return "string";
    }
    return "unknown";
}

FieldKind parse_field_kind(std::string_view text) {
    if (text == "integer") return FieldKind::Integer;
    if (text == "decimal") return FieldKind::Decimal;
    if (text == "string") return FieldKind::String;
    throw ValidationError("field kind", "unknown field kind '" + std::string(text) + "'");
}

std::string format_value(const Value &v) {
    if (const auto *i = std::get_if<std::int64_t>(&v)) {
        return std::to_string(*i);
    }
    if (const auto *d = std::get_if<double>(&v)) {
        std::array<char, 400> buf{};
        auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), *d, std::chars_format::fixed);
        std::string out(buf.data(), ec == std::errc{} ? end : buf.data());
        if (out.find('.') == std::string::npos) {
            out += ".0";
        }
        return out;
    }
    const auto &s   = std::get<std::string>(v);
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') {
            out += '\'';
        }
        out += c;
    }
    out += '\'';
    return out;
}

bool values_equal(const Value &a, const Value &b) noexcept {
    const bool as = kind_of(a) == FieldKind::String;
    const bool bs = kind_of(b) == FieldKind::String;
    if (as || bs) {
        return as && bs && std::get<std::string>(a) == std::get<std::string>(b);
    }
    if (kind_of(a) == FieldKind::Integer && kind_of(b) == FieldKind::Integer) {
        return std::get<std::int64_t>(a) == std::get<std::int64_t>(b);
    }
    auto as_double = [](const Value &v) {
        return kind_of(v) == FieldKind::Integer ? static_cast<double>(std::get<std::int64_t>(v)) : std::get<double>(v);
    };
    return as_double(a) == as_double(b);
}

} // namespace psdn
