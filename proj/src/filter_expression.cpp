#include "psdn/filter/expression.hpp"

#include "psdn/error.hpp"

#include <cctype>
#include <charconv>
#include <optional>

namespace psdn::filter {

namespace {

enum class Tok : std::uint8_t { Ident, Dot, Integer, Decimal, String, Op, LParen, RParen, And, Or, Not, End };

struct Token {
    Tok         type;
    std::size_t offset; // 1-based
    std::string text;   // identifier text, string contents, or operator spelling
    Value       value;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::vector<Token> lex(std::string_view text) {
    std::vector<Token> out;
    std::size_t        i = 0;
    while (i < text.size()) {
        const char c   = text[i];
        const auto pos = i + 1;
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (ident_start(c)) {
            std::size_t j = i;
            while (j < text.size() && ident_char(text[j])) {
                ++j;
            }
            std::string word(text.substr(i, j - i));
            Tok         type = Tok::Ident;
            if (word == "AND") {
                type = Tok::And;
            } else if (word == "OR") {
                type = Tok::Or;
            } else if (word == "NOT") {
                type = Tok::Not;
            }
            out.push_back(Token{type, pos, std::move(word), {}});
            i = j;
            continue;
        }
        if (digit(c) || (c == '-' && i + 1 < text.size() && digit(text[i + 1]))) {
            std::size_t j = i + 1;
            while (j < text.size() && digit(text[j])) {
                ++j;
            }
            bool is_decimal = false;
            if (j + 1 < text.size() && text[j] == '.' && digit(text[j + 1])) {
                is_decimal = true;
                j += 1;
                while (j < text.size() && digit(text[j])) {
                    ++j;
                }
            }
            const auto literal = text.substr(i, j - i);
            if (is_decimal) {
                double d   = 0;
                auto   res = std::from_chars(literal.data(), literal.data() + literal.size(), d);
                if (res.ec != std::errc{}) {
                    throw ParseError(pos, {"literal"}, "bad decimal literal '" + std::string(literal) + "'");
                }
                out.push_back(Token{Tok::Decimal, pos, std::string(literal), Value{d}});
            } else {
                std::int64_t n   = 0;
                auto         res = std::from_chars(literal.data(), literal.data() + literal.size(), n);
                if (res.ec != std::errc{}) {
                    throw ParseError(pos, {"literal"}, "integer literal out of range '" + std::string(literal) + "'");
                }
                out.push_back(Token{Tok::Integer, pos, std::string(literal), Value{n}});
            }
            i = j;
            continue;
        }
        if (c == '\'') {
            std::string contents;
            std::size_t j      = i + 1;
            bool        closed = false;
            while (j < text.size()) {
                if (text[j] == '\'') {
                    if (j + 1 < text.size() && text[j + 1] == '\'') {
                        contents += '\'';
                        j += 2;
                        continue;
                    }
                    closed = true;
                    ++j;
                    break;
                }
                contents += text[j++];
            }
            if (!closed) {
                throw ParseError(text.size() + 1, {"'"}, "unterminated string literal");
            }
            out.push_back(Token{Tok::String, pos, contents, Value{contents}});
            i = j;
            continue;
        }
        switch (c) {
        case '(': out.push_back(Token{Tok::LParen, pos, "(", {}}); ++i; continue;
        case ')': out.push_back(Token{Tok::RParen, pos, ")", {}}); ++i; continue;
        case '.': out.push_back(Token{Tok::Dot, pos, ".", {}}); ++i; continue;
        case '=': out.push_back(Token{Tok::Op, pos, "=", {}}); ++i; continue;
        case '<':
            if (i + 1 < text.size() && (text[i + 1] == '=' || text[i + 1] == '>')) {
                out.push_back(Token{Tok::Op, pos, std::string(text.substr(i, 2)), {}});
                i += 2;
            } else {
                out.push_back(Token{Tok::Op, pos, "<", {}});
                ++i;
            }
            continue;
        case '>':
            if (i + 1 < text.size() && text[i + 1] == '=') {
                out.push_back(Token{Tok::Op, pos, ">=", {}});
                i += 2;
            } else {
                out.push_back(Token{Tok::Op, pos, ">", {}});
                ++i;
            }
            continue;
        default: break;
        }
        throw ParseError(pos, {}, std::string("unexpected character '") + c + "'");
    }
    out.push_back(Token{Tok::End, text.size() + 1, "", {}});
    return out;
}

CompareOp op_from(std::string_view s) {
    if (s == "=") return CompareOp::Eq;
    if (s == "<>") return CompareOp::Ne;
    if (s == "<") return CompareOp::Lt;
    if (s == "<=") return CompareOp::Le;
    if (s == ">") return CompareOp::Gt;
    return CompareOp::Ge;
}

NodePtr make_binary(Node::Kind kind, NodePtr lhs, NodePtr rhs) {
    auto node  = std::make_shared<Node>();
    node->kind = kind;
    node->lhs  = std::move(lhs);
    node->rhs  = std::move(rhs);
    return node;
}

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : _tokens(std::move(tokens)) {}

    NodePtr parse_top() {
        auto root = parse_or();
        if (peek().type != Tok::End) {
            fail({"AND", "OR", "end of input"});
        }
        return root;
    }

    FieldPath parse_path_only() {
        auto path = parse_path();
        if (peek().type != Tok::End) {
            fail({".", "end of input"});
        }
        return path;
    }

private:
    const Token &peek() const { return _tokens[_pos]; }
    const Token &next() { return _tokens[_pos++]; }

    [[noreturn]] void fail(std::set<std::string> expected) const {
        const auto &t     = peek();
        std::string found = t.type == Tok::End ? "end of input" : "'" + t.text + "'";
        throw ParseError(t.offset, std::move(expected), "unexpected " + found);
    }

    NodePtr parse_or() {
        auto lhs = parse_and();
        while (peek().type == Tok::Or) {
            next();
            lhs = make_binary(Node::Kind::Or, lhs, parse_and());
        }
        return lhs;
    }

    NodePtr parse_and() {
        auto lhs = parse_not();
        while (peek().type == Tok::And) {
            next();
            lhs = make_binary(Node::Kind::And, lhs, parse_not());
        }
        return lhs;
    }

    NodePtr parse_not() {
        if (peek().type == Tok::Not) {
            next();
            auto node  = std::make_shared<Node>();
            node->kind = Node::Kind::Not;
            node->lhs  = parse_not();
            return node;
        }
        return parse_primary();
    }

    NodePtr parse_primary() {
        if (peek().type == Tok::LParen) {
            next();
            auto inner = parse_or();
            if (peek().type != Tok::RParen) {
                fail({")", "AND", "OR"});
            }
            next();
            return inner;
        }
        if (peek().type != Tok::Ident) {
            fail({"(", "NOT", "field"});
        }
        auto node              = std::make_shared<Node>();
        node->kind             = Node::Kind::Compare;
        node->comparison.field = parse_path();
        if (peek().type != Tok::Op) {
            fail({".", "comparison operator"});
        }
        node->comparison.op = op_from(next().text);
        const auto &lit     = peek();
        if (lit.type != Tok::Integer && lit.type != Tok::Decimal && lit.type != Tok::String) {
            fail({"literal"});
        }
        node->comparison.literal = next().value;
        return node;
    }

    FieldPath parse_path() {
        FieldPath path;
        if (peek().type != Tok::Ident) {
            fail({"field"});
        }
        path.segments.push_back(next().text);
        while (peek().type == Tok::Dot) {
            next();
            if (peek().type != Tok::Ident) {
                fail({"field"});
            }
            path.segments.push_back(next().text);
        }
        return path;
    }

    std::vector<Token> _tokens;
    std::size_t        _pos = 0;
};

int three_way(const Value &field, const Value &literal, CompareOp op, const std::string &path) {
    const bool fs = kind_of(field) == FieldKind::String;
    const bool ls = kind_of(literal) == FieldKind::String;
    if (fs != ls) {
        throw Error(ErrorCode::TypeMismatch, "field '" + path + "' is " + std::string(to_string(kind_of(field))) + ", literal is " + std::string(to_string(kind_of(literal))));
    }
    if (fs) {
        if (op != CompareOp::Eq && op != CompareOp::Ne) {
            throw Error(ErrorCode::TypeMismatch, "ordering operator " + std::string(to_string(op)) + " on string field '" + path + "'");
        }
        return std::get<std::string>(field) == std::get<std::string>(literal) ? 0 : 1;
    }
    if (kind_of(field) == FieldKind::Integer && kind_of(literal) == FieldKind::Integer) {
        const auto a = std::get<std::int64_t>(field);
        const auto b = std::get<std::int64_t>(literal);
        return a < b ? -1 : (a > b ? 1 : 0);
    }
    auto as_double = [](const Value &v) {
        return kind_of(v) == FieldKind::Integer ? static_cast<double>(std::get<std::int64_t>(v)) : std::get<double>(v);
    };
    const double a = as_double(field);
    const double b = as_double(literal);
    return a < b ? -1 : (a > b ? 1 : 0);
}

bool eval_node(const Node &node, const FieldMap &fields) {
    switch (node.kind) {
    case Node::Kind::Compare: {
        const auto &cmp  = node.comparison;
        const auto  path = cmp.field.str();
        auto        it   = fields.find(path);
        if (it == fields.end()) {
            throw Error(ErrorCode::MissingField, "sample has no field '" + path + "'");
        }
        const int c = three_way(it->second, cmp.literal, cmp.op, path);
        switch (cmp.op) {
        case CompareOp::Eq: return c == 0;
        case CompareOp::Ne: return c != 0;
        case CompareOp::Lt: return c < 0;
        case CompareOp::Le: return c <= 0;
        case CompareOp::Gt: return c > 0;
        case CompareOp::Ge: return c >= 0;
        }
        return false;
    }
    case Node::Kind::And: {
        const bool l = eval_node(*node.lhs, fields);
        const bool r = eval_node(*node.rhs, fields);
        return l && r;
    }
    case Node::Kind::Or: {
        const bool l = eval_node(*node.lhs, fields);
        const bool r = eval_node(*node.rhs, fields);
        return l || r;
    }
    case Node::Kind::Not: return !eval_node(*node.lhs, fields);
    }
    return false;
}

void collect(const Node &node, std::set<FieldPath> &out) {
    if (node.kind == Node::Kind::Compare) {
        out.insert(node.comparison.field);
        return;
    }
    collect(*node.lhs, out);
    if (node.rhs) {
        collect(*node.rhs, out);
    }
}

void print(const Node &node, std::string &out) {
    switch (node.kind) {
    case Node::Kind::Compare:
        out += '(';
        out += node.comparison.field.str();
        out += ' ';
        out += to_string(node.comparison.op);
        out += ' ';
        out += format_value(node.comparison.literal);
        out += ')';
        return;
    case Node::Kind::And:
    case Node::Kind::Or:
        out += '(';
        print(*node.lhs, out);
        out += node.kind == Node::Kind::And ? " AND " : " OR ";
        print(*node.rhs, out);
        out += ')';
        return;
    case Node::Kind::Not:
        out += "(NOT ";
        print(*node.lhs, out);
        out += ')';
        return;
    }
}

} // namespace

std::string FieldPath::str() const {
    std::string out;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (i != 0) {
            out += '.';
        }
        out += segments[i];
    }
    return out;
}

FieldPath FieldPath::parse(std::string_view text) {
    return Parser(lex(text)).parse_path_only();
}

std::string_view to_string(CompareOp op) noexcept {
    switch (op) {
    case CompareOp::Eq: return "=";
    case CompareOp::Ne: return "<>";
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
    }
    return "?";
}

bool structurally_equal(const Node &a, const Node &b) noexcept {
    if (a.kind != b.kind) {
        return false;
    }
    switch (a.kind) {
    case Node::Kind::Compare:
        return a.comparison.field == b.comparison.field && a.comparison.op == b.comparison.op && a.comparison.literal == b.comparison.literal;
    case Node::Kind::Not: return structurally_equal(*a.lhs, *b.lhs);
    case Node::Kind::And:
    case Node::Kind::Or: return structurally_equal(*a.lhs, *b.lhs) && structurally_equal(*a.rhs, *b.rhs);
    }
    return false;
}

FilterExpression FilterExpression::parse(std::string_view text) {
    return FilterExpression(Parser(lex(text)).parse_top(), std::string(text));
}

FilterExpression FilterExpression::compare(FieldPath field, CompareOp op, Value literal) {
    auto node        = std::make_shared<Node>();
    node->kind       = Node::Kind::Compare;
    node->comparison = Comparison{std::move(field), op, std::move(literal)};
    FilterExpression out(node, {});
    out._source = print_canonical(out);
    return out;
}

FilterExpression FilterExpression::conjunction(const FilterExpression &lhs, const FilterExpression &rhs) {
    FilterExpression out(make_binary(Node::Kind::And, lhs._root, rhs._root), {});
    out._source = print_canonical(out);
    return out;
}

FilterExpression FilterExpression::disjunction(const FilterExpression &lhs, const FilterExpression &rhs) {
    FilterExpression out(make_binary(Node::Kind::Or, lhs._root, rhs._root), {});
    out._source = print_canonical(out);
    return out;
}

FilterExpression FilterExpression::negation(const FilterExpression &inner) {
    auto node  = std::make_shared<Node>();
    node->kind = Node::Kind::Not;
    node->lhs  = inner._root;
    FilterExpression out(node, {});
    out._source = print_canonical(out);
    return out;
}

bool evaluate(const FilterExpression &expr, const FieldMap &fields) { return eval_node(expr.root(), fields); }

std::set<FieldPath> referenced_fields(const FilterExpression &expr) {
    std::set<FieldPath> out;
    collect(expr.root(), out);
    return out;
}

std::string print_canonical(const FilterExpression &expr) {
    std::string out;
    print(expr.root(), out);
    return out;
}

} // namespace psdn::filter
