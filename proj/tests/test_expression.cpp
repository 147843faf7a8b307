#include <cmath>

#include <gtest/gtest.h>

#include "sqopen/expression.hpp"

using namespace sqopen;

namespace {

double eval(const char* src, std::vector<double> c) { return parse_expression(src)(c); }

ErrorCode code_of(const char* src)
{
    try {
        parse_expression(src);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error for " << src;
    return ErrorCode::InvalidArgument;
}

} // namespace

TEST(Expression, Examples)
{
    EXPECT_DOUBLE_EQ(eval("x^2 + y^2", {0.5, 0.5}), 0.5);
    EXPECT_DOUBLE_EQ(eval("sin(x)*2", {0}), 0.0);
    try {
        parse_expression("x +");
        FAIL();
    } catch (const ExpressionError& e) {
        EXPECT_EQ(e.code(), ErrorCode::SyntaxError);
        EXPECT_EQ(e.offset(), 3u);
    }
}

TEST(Expression, Precedence)
{
    EXPECT_DOUBLE_EQ(eval("1 + 2 * 3", {}), 7.0);
    EXPECT_DOUBLE_EQ(eval("(1 + 2) * 3", {}), 9.0);
    EXPECT_DOUBLE_EQ(eval("2 * 3^2", {}), 18.0);
    // Unary minus binds inside the base, so the exponent applies to -x.
    EXPECT_DOUBLE_EQ(eval("-x^2", {3}), 9.0);
    EXPECT_DOUBLE_EQ(eval("0-x^2", {3}), -9.0);
    EXPECT_DOUBLE_EQ(eval("8 / 4 / 2", {}), 1.0);
    EXPECT_DOUBLE_EQ(eval("1 - 2 - 3", {}), -4.0);
    EXPECT_DOUBLE_EQ(eval("--x", {2}), 2.0);
    EXPECT_DOUBLE_EQ(eval("x^0", {5}), 1.0);
}

TEST(Expression, NumbersAndFunctions)
{
    EXPECT_DOUBLE_EQ(eval("1.5e-3 * 2", {}), 3e-3);
    EXPECT_DOUBLE_EQ(eval(".5", {}), 0.5);
    EXPECT_DOUBLE_EQ(eval("sqrt(abs(x))", {-4}), 2.0);
    EXPECT_DOUBLE_EQ(eval("exp(0) + cos(0)", {}), 2.0);
    EXPECT_DOUBLE_EQ(eval("x*y*z", {2, 3, 4}), 24.0);
}

TEST(Expression, Errors)
{
    EXPECT_EQ(code_of("w + 1"), ErrorCode::UnknownIdentifier);
    EXPECT_EQ(code_of("sin()"), ErrorCode::ArityMismatch);
    EXPECT_EQ(code_of("sin(x, y)"), ErrorCode::ArityMismatch);
    EXPECT_EQ(code_of("sin"), ErrorCode::ArityMismatch);
    EXPECT_EQ(code_of("x(1)"), ErrorCode::ArityMismatch);
    EXPECT_EQ(code_of("(x"), ErrorCode::SyntaxError);
    EXPECT_EQ(code_of("x ^ y"), ErrorCode::SyntaxError);
    EXPECT_EQ(code_of("x $"), ErrorCode::SyntaxError);
    EXPECT_EQ(code_of(""), ErrorCode::SyntaxError);
    EXPECT_EQ(code_of("1..2"), ErrorCode::SyntaxError);
}

TEST(Expression, UnknownIdentifierOffset)
{
    try {
        parse_expression("x + foo");
        FAIL();
    } catch (const ExpressionError& e) {
        EXPECT_EQ(e.offset(), 4u);
    }
}

TEST(Expression, MissingCoordinate)
{
    const auto e = parse_expression("y");
    EXPECT_THROW(e(std::vector<double>{1.0}), Error);
    EXPECT_EQ(e.source(), "y");
}
