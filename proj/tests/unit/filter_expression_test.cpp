#include "psdn/error.hpp"
#include "psdn/filter/expression.hpp"

#include <gtest/gtest.h>

#include <functional>
#include <memory>
#include <random>

namespace psdn::filter {
namespace {

FilterExpression cmp(std::string field, CompareOp op, Value v) {
    return FilterExpression::compare(FieldPath::parse(field), op, std::move(v));
}

TEST(FilterParse, SingleComparison) {
    auto e = FilterExpression::parse("temperature > 50");
    EXPECT_EQ(e, cmp("temperature", CompareOp::Gt, std::int64_t{50}));
    EXPECT_EQ(e.source_text(), "temperature > 50");
}

TEST(FilterParse, AndBindsTighterThanOr) {
    auto e        = FilterExpression::parse("a = 1 OR b = 2 AND c = 3");
    auto expected = FilterExpression::disjunction(
        cmp("a", CompareOp::Eq, std::int64_t{1}),
        FilterExpression::conjunction(cmp("b", CompareOp::Eq, std::int64_t{2}), cmp("c", CompareOp::Eq, std::int64_t{3})));
    EXPECT_EQ(e, expected);
}

TEST(FilterParse, ParenthesesOverridePrecedence) {
    auto e        = FilterExpression::parse("(a = 1 OR b = 2) AND c = 3");
    auto expected = FilterExpression::conjunction(
        FilterExpression::disjunction(cmp("a", CompareOp::Eq, std::int64_t{1}), cmp("b", CompareOp::Eq, std::int64_t{2})),
        cmp("c", CompareOp::Eq, std::int64_t{3}));
    EXPECT_EQ(e, expected);
}

TEST(FilterParse, NotBindsTighterThanAnd) {
    auto e        = FilterExpression::parse("NOT a = 1 AND b = 2");
    auto expected = FilterExpression::conjunction(FilterExpression::negation(cmp("a", CompareOp::Eq, std::int64_t{1})),
                                                  cmp("b", CompareOp::Eq, std::int64_t{2}));
    EXPECT_EQ(e, expected);
}

TEST(FilterParse, MissingLiteralReportsOffsetAndExpectation) {
    try {
        FilterExpression::parse("temperature >");
        FAIL() << "expected ParseError";
    } catch (const ParseError &e) {
        EXPECT_EQ(e.offset(), 14U);
        EXPECT_EQ(e.expected(), std::set<std::string>{"literal"});
        EXPECT_EQ(e.code(), ErrorCode::ParseError);
    }
}

TEST(FilterParse, Errors) {
    auto offset_of = [](std::string_view text) -> std::size_t {
        try {
            FilterExpression::parse(text);
        } catch (const ParseError &e) {
            return e.offset();
        }
        return 0;
    };
    EXPECT_EQ(offset_of(""), 1U);
    EXPECT_EQ(offset_of("a = 1 AND"), 10U);
    EXPECT_EQ(offset_of("(a = 1"), 7U);
    EXPECT_EQ(offset_of("a = 1 b = 2"), 7U);
    EXPECT_EQ(offset_of("a ~ 1"), 3U);
    EXPECT_EQ(offset_of("a = 'open"), 10U);
    // Keywords are case-sensitive: lowercase "and" is a field name.
    EXPECT_EQ(offset_of("a = 1 and b = 2"), 7U);
    EXPECT_EQ(offset_of("a. = 1"), 4U);
}

TEST(FilterParse, Literals) {
    auto e = FilterExpression::parse("x.y = 'it''s' OR z < -3.25 OR w >= -7");
    EXPECT_EQ(print_canonical(e), "(((x.y = 'it''s') OR (z < -3.25)) OR (w >= -7))");
}

TEST(FilterEvaluate, StrictInequality) {
    auto e = FilterExpression::parse("temperature > 50");
    EXPECT_TRUE(evaluate(e, {{"temperature", std::int64_t{72}}}));
    EXPECT_FALSE(evaluate(e, {{"temperature", std::int64_t{50}}}));
}

TEST(FilterEvaluate, IntegerPromotesToDecimal) {
    auto e = FilterExpression::parse("t >= 49.5");
    EXPECT_TRUE(evaluate(e, {{"t", std::int64_t{50}}}));
    EXPECT_FALSE(evaluate(e, {{"t", 49.4}}));
    EXPECT_TRUE(evaluate(FilterExpression::parse("t = 3"), {{"t", 3.0}}));
}

TEST(FilterEvaluate, MissingFieldIsAnError) {
    auto e = FilterExpression::parse("temperature > 50 OR sensor = 'a'");
    try {
        evaluate(e, {{"sensor", std::string("a")}});
        FAIL() << "expected MissingField";
    } catch (const Error &err) {
        EXPECT_EQ(err.code(), ErrorCode::MissingField);
    }
}

TEST(FilterEvaluate, TypeMismatches) {
    auto code_of = [](std::string_view text, FieldMap fields) {
        try {
            evaluate(FilterExpression::parse(text), fields);
        } catch (const Error &e) {
            return e.code();
        }
        return ErrorCode::InvalidOperation;
    };
    EXPECT_EQ(code_of("s < 'b'", {{"s", std::string("a")}}), ErrorCode::TypeMismatch);
    EXPECT_EQ(code_of("s = 1", {{"s", std::string("a")}}), ErrorCode::TypeMismatch);
    EXPECT_EQ(code_of("n = 'x'", {{"n", std::int64_t{1}}}), ErrorCode::TypeMismatch);
    EXPECT_TRUE(evaluate(FilterExpression::parse("s <> 'b'"), {{"s", std::string("a")}}));
}

TEST(FilterEvaluate, ThresholdOverTemperatureRange) {
    // 0..100 degree samples; the filter keeps exactly the values above the threshold.
    auto e = FilterExpression::parse("temperature > 70");
    for (std::int64_t t = 0; t <= 100; ++t) {
        EXPECT_EQ(evaluate(e, {{"temperature", t}}), t > 70) << t;
    }
}

TEST(FilterFields, ReferencedFields) {
    EXPECT_EQ(referenced_fields(FilterExpression::parse("temperature > 50")), (std::set<FieldPath>{FieldPath::parse("temperature")}));
    EXPECT_EQ(referenced_fields(FilterExpression::parse("a=1 AND a=2")), (std::set<FieldPath>{FieldPath::parse("a")}));
    EXPECT_EQ(referenced_fields(FilterExpression::parse("x.y = 'k' OR z < 3")),
              (std::set<FieldPath>{FieldPath::parse("x.y"), FieldPath::parse("z")}));
}

TEST(FilterPrint, CanonicalForms) {
    EXPECT_EQ(print_canonical(cmp("t", CompareOp::Gt, std::int64_t{50})), "(t > 50)");
    EXPECT_EQ(print_canonical(FilterExpression::parse("a = 1 OR b = 2")), "((a = 1) OR (b = 2))");
    EXPECT_EQ(print_canonical(FilterExpression::parse("NOT a = 1")), "(NOT (a = 1))");
    EXPECT_EQ(print_canonical(FilterExpression::parse("d = 2.0")), "(d = 2.0)");
}

// ---- generated-expression properties ------------------------------------

/// Test-side expression model, independent of the library's tree.
struct Model {
    enum Kind { Cmp, And, Or, Not } kind;
    std::string            field;
    CompareOp              op{};
    Value                  literal;
    std::shared_ptr<Model> lhs;
    std::shared_ptr<Model> rhs;
};

std::string render(const Model &m) {
    switch (m.kind) {
    case Model::Cmp: return m.field + " " + std::string(to_string(m.op)) + " " + format_value(m.literal);
    case Model::And: return "(" + render(*m.lhs) + ") AND (" + render(*m.rhs) + ")";
    case Model::Or: return "(" + render(*m.lhs) + ") OR (" + render(*m.rhs) + ")";
    case Model::Not: return "NOT (" + render(*m.lhs) + ")";
    }
    return {};
}

std::shared_ptr<Model> generate(std::mt19937_64 &gen, int depth, bool boolean_fields) {
    std::uniform_int_distribution<int> pick(0, depth > 0 ? 3 : 0);
    auto                               m = std::make_shared<Model>();
    m->kind                              = static_cast<Model::Kind>(pick(gen));
    if (m->kind == Model::Cmp) {
        static const char *names[] = {"a", "b", "c"};
        m->field                   = names[gen() % 3];
        if (boolean_fields) {
            m->op      = gen() % 2 ? CompareOp::Eq : CompareOp::Ne;
            m->literal = std::int64_t(gen() % 2);
        } else {
            m->op = static_cast<CompareOp>(gen() % 6);
            switch (gen() % 3) {
            case 0: m->literal = static_cast<std::int64_t>(gen() % 2001) - 1000; break;
            case 1: m->literal = static_cast<double>(static_cast<std::int64_t>(gen() % 20001) - 10000) / 8.0; break;
            default: m->literal = std::string(1 + gen() % 4, static_cast<char>('a' + gen() % 3)) + (gen() % 4 == 0 ? "'" : ""); break;
            }
            if (gen() % 4 == 0) m->field += ".sub";
        }
        return m;
    }
    m->lhs = generate(gen, depth - 1, boolean_fields);
    if (m->kind != Model::Not) {
        m->rhs = generate(gen, depth - 1, boolean_fields);
    }
    return m;
}

bool truth(const Model &m, const std::map<std::string, int> &assignment) {
    switch (m.kind) {
    case Model::Cmp: {
        const bool eq = assignment.at(m.field) == std::get<std::int64_t>(m.literal);
        return m.op == CompareOp::Eq ? eq : !eq;
    }
    case Model::And: return truth(*m.lhs, assignment) && truth(*m.rhs, assignment);
    case Model::Or: return truth(*m.lhs, assignment) || truth(*m.rhs, assignment);
    case Model::Not: return !truth(*m.lhs, assignment);
    }
    return false;
}

TEST(FilterProperty, CanonicalRoundTrip) {
    std::mt19937_64 gen(42);
    for (int i = 0; i < 500; ++i) {
        auto       model = generate(gen, 4, false);
        const auto text  = render(*model);
        auto       e     = FilterExpression::parse(text);
        auto       again = FilterExpression::parse(print_canonical(e));
        ASSERT_EQ(e, again) << text << " => " << print_canonical(e);
        ASSERT_EQ(print_canonical(again), print_canonical(e));
    }
}

TEST(FilterProperty, AgreesWithTruthTableOracle) {
    std::mt19937_64 gen(7);
    for (int i = 0; i < 300; ++i) {
        auto model = generate(gen, 4, true);
        auto e     = FilterExpression::parse(render(*model));
        for (int bits = 0; bits < 8; ++bits) {
            std::map<std::string, int> assignment{{"a", bits & 1}, {"b", (bits >> 1) & 1}, {"c", (bits >> 2) & 1}};
            FieldMap                   fields;
            for (const auto &[k, v] : assignment) fields[k] = std::int64_t{v};
            ASSERT_EQ(evaluate(e, fields), truth(*model, assignment)) << render(*model) << " bits=" << bits;
        }
    }
}

TEST(FilterProperty, GreaterThanIsMonotoneThreshold) {
    for (std::int64_t k = -20; k <= 20; ++k) {
        auto e = FilterExpression::parse("f > " + std::to_string(k));
        for (std::int64_t v = -25; v <= 25; ++v) {
            ASSERT_EQ(evaluate(e, {{"f", v}}), v > k) << "k=" << k << " v=" << v;
        }
    }
}

} // namespace
} // namespace psdn::filter
