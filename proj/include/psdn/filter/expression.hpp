#pragma once

#include "psdn/value.hpp"

#include <compare>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace psdn::filter {

/// Dotted field reference, e.g. `reading.celsius`.
struct FieldPath {
    std::vector<std::string> segments;

    std::string str() const;
    /// Throws ParseError if `text` is not a dot-separated identifier list.
    static FieldPath parse(std::string_view text);

    auto operator<=>(const FieldPath &) const = default;
};

enum class CompareOp : std::uint8_t { Eq, Ne, Lt, Le, Gt, Ge };

std::string_view to_string(CompareOp op) noexcept;

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Comparison {
    FieldPath field;
    CompareOp op = CompareOp::Eq;
    Value     literal;
};

struct Node {
    enum class Kind : std::uint8_t { Compare, And, Or, Not };

    Kind       kind = Kind::Compare;
    Comparison comparison; // Kind::Compare only
    NodePtr    lhs;        // And, Or, Not
    NodePtr    rhs;        // And, Or
};

bool structurally_equal(const Node &a, const Node &b) noexcept;

/// Parsed, immutable content-filter predicate.
///
/// Grammar (keywords are case-sensitive):
///
///     expr    := or
///     or      := and ("OR" and)*
///     and     := not ("AND" not)*
///     not     := "NOT" not | primary
///     primary := "(" expr ")" | fieldpath op literal
///     op      := = | <> | < | <= | > | >=
///     literal := integer | decimal | 'string'
///
/// AND/OR chains associate to the left.
class FilterExpression {
public:
    /// Throws ParseError with a 1-based offset and the expected-token set.
    static FilterExpression parse(std::string_view text);

    static FilterExpression compare(FieldPath field, CompareOp op, Value literal);
    static FilterExpression conjunction(const FilterExpression &lhs, const FilterExpression &rhs);
    static FilterExpression disjunction(const FilterExpression &lhs, const FilterExpression &rhs);
    static FilterExpression negation(const FilterExpression &inner);

    const Node        &root() const noexcept { return *_root; }
    const std::string &source_text() const noexcept { return _source; }

    /// Structural equality; source text is ignored.
    friend bool operator==(const FilterExpression &a, const FilterExpression &b) noexcept {
        return structurally_equal(*a._root, *b._root);
    }

private:
    FilterExpression(NodePtr root, std::string source) : _root(std::move(root)), _source(std::move(source)) {}

    NodePtr     _root;
    std::string _source;
};

/// Strict evaluation: both operands of AND/OR are always evaluated, so a
/// missing field raises MissingField regardless of the other branch. Ordering
/// operators on strings and string/number comparisons raise TypeMismatch.
bool evaluate(const FilterExpression &expr, const FieldMap &fields);

std::set<FieldPath> referenced_fields(const FilterExpression &expr);

/// Fully parenthesized text; parse(print_canonical(e)) == e.
std::string print_canonical(const FilterExpression &expr);

} // namespace psdn::filter
