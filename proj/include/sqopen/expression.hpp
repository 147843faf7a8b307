#pragma once

// Arithmetic expressions over vertex coordinates.
//
//   expr   := term (("+" | "-") term)*
//   term   := factor (("*" | "/") factor)*
//   factor := base ("^" integer)?
//   base   := number | ident | ident "(" expr ")" | "(" expr ")" | "-" base
//
// Variables x, y, z bind to coordinates 0, 1, 2. Functions: sin, cos, sqrt,
// abs, exp.

#include <cctype>
#include <charconv>
#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "sqopen/error.hpp"

namespace sqopen {

class ExpressionError : public Error {
public:
    ExpressionError(ErrorCode code, const std::string& what, std::size_t offset)
        : Error(code, what + " at offset " + std::to_string(offset), offset), offset_(offset)
    {
    }
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class Expression {
public:
    /// Evaluates at a coordinate vector; throws when a variable indexes past it.
    double operator()(std::span<const double> coords) const { return eval(*root_, coords); }

    const std::string& source() const { return source_; }

    friend Expression parse_expression(std::string_view src);

private:
    enum class Op { Number, Variable, Add, Sub, Mul, Div, Neg, Pow, Sin, Cos, Sqrt, Abs, Exp };

    struct Node {
        Op op = Op::Number;
        double value = 0.0;
        int index = 0; // variable slot or integer exponent
        std::shared_ptr<const Node> lhs;
        std::shared_ptr<const Node> rhs;
    };
    using NodePtr = std::shared_ptr<const Node>;

    static NodePtr make(Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr, double value = 0.0, int index = 0)
    {
        auto n = std::make_shared<Node>();
        n->op = op;
        n->lhs = std::move(lhs);
        n->rhs = std::move(rhs);
        n->value = value;
        n->index = index;
        return n;
    }

    static double eval(const Node& n, std::span<const double> c)
    {
        switch (n.op) {
        case Op::Number: return n.value;
        case Op::Variable:
            if (static_cast<std::size_t>(n.index) >= c.size())
                throw Error(ErrorCode::InvalidArgument,
                            std::string("coordinate ") + "xyz"[n.index] + " is not available on this space");
            return c[n.index];
        case Op::Add: return eval(*n.lhs, c) + eval(*n.rhs, c);
        case Op::Sub: return eval(*n.lhs, c) - eval(*n.rhs, c);
        case Op::Mul: return eval(*n.lhs, c) * eval(*n.rhs, c);
        case Op::Div: return eval(*n.lhs, c) / eval(*n.rhs, c);
        case Op::Neg: return -eval(*n.lhs, c);
        case Op::Pow: {
            const double base = eval(*n.lhs, c);
            double result = 1.0;
            for (int i = 0; i < n.index; ++i)
                result *= base;
            return result;
        }
        case Op::Sin: return std::sin(eval(*n.lhs, c));
        case Op::Cos: return std::cos(eval(*n.lhs, c));
        case Op::Sqrt: return std::sqrt(eval(*n.lhs, c));
        case Op::Abs: return std::abs(eval(*n.lhs, c));
        case Op::Exp: return std::exp(eval(*n.lhs, c));
        }
        return 0.0;
    }

    class Parser {
    public:
        explicit Parser(std::string_view src) : src_(src) {}

        NodePtr parse()
        {
            NodePtr e = expr();
            skip();
            if (pos_ != src_.size())
                fail("unexpected '" + std::string(1, src_[pos_]) + "'");
            return e;
        }

    private:
        [[noreturn]] void fail(const std::string& what, ErrorCode code = ErrorCode::SyntaxError) const
        {
            throw ExpressionError(code, what, pos_);
        }

        void skip()
        {
            while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
                ++pos_;
        }

        bool accept(char c)
        {
            skip();
            if (pos_ < src_.size() && src_[pos_] == c) {
                ++pos_;
                return true;
            }
            return false;
        }

        NodePtr expr()
        {
            NodePtr lhs = term();
            for (;;) {
                if (accept('+'))
                    lhs = make(Op::Add, lhs, term());
                else if (accept('-'))
                    lhs = make(Op::Sub, lhs, term());
                else
                    return lhs;
            }
        }

        NodePtr term()
        {
            NodePtr lhs = factor();
            for (;;) {
                if (accept('*'))
                    lhs = make(Op::Mul, lhs, factor());
                else if (accept('/'))
                    lhs = make(Op::Div, lhs, factor());
                else
                    return lhs;
            }
        }

        NodePtr factor()
        {
            NodePtr b = base();
            if (accept('^')) {
                skip();
                const std::size_t start = pos_;
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                    ++pos_;
                if (start == pos_)
                    fail("expected integer exponent");
                int exponent = 0;
                auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, exponent);
                if (ec != std::errc{})
                    fail("exponent out of range");
                b = make(Op::Pow, b, nullptr, 0.0, exponent);
            }
            return b;
        }

        NodePtr base()
        {
            skip();
            if (pos_ >= src_.size())
                fail("unexpected end of input");
            const char c = src_[pos_];
            if (c == '-') {
                ++pos_;
                return make(Op::Neg, base());
            }
            if (c == '(') {
                ++pos_;
                NodePtr e = expr();
                if (!accept(')'))
                    fail("expected ')'");
                return e;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
                return number();
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
                return identifier();
            fail("unexpected '" + std::string(1, c) + "'");
        }

        NodePtr number()
        {
            const std::size_t start = pos_;
            while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
                ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
                std::size_t p = pos_ + 1;
                if (p < src_.size() && (src_[p] == '+' || src_[p] == '-'))
                    ++p;
                if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
                    pos_ = p;
                    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                        ++pos_;
                }
            }
            double value = 0.0;
            auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, value);
            if (ec != std::errc{} || ptr != src_.data() + pos_) {
                pos_ = start;
                fail("malformed number");
            }
            return make(Op::Number, nullptr, nullptr, value);
        }

        NodePtr identifier()
        {
            const std::size_t start = pos_;
            while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            const std::string_view name = src_.substr(start, pos_ - start);
            Op fn;
            if (name == "sin") fn = Op::Sin;
            else if (name == "cos") fn = Op::Cos;
            else if (name == "sqrt") fn = Op::Sqrt;
            else if (name == "abs") fn = Op::Abs;
            else if (name == "exp") fn = Op::Exp;
            else {
                int slot = name == "x" ? 0 : name == "y" ? 1 : name == "z" ? 2 : -1;
                if (slot < 0) {
                    pos_ = start;
                    fail("unknown identifier '" + std::string(name) + "'", ErrorCode::UnknownIdentifier);
                }
                skip();
                if (pos_ < src_.size() && src_[pos_] == '(')
                    fail("variable '" + std::string(name) + "' is not a function", ErrorCode::ArityMismatch);
                return make(Op::Variable, nullptr, nullptr, 0.0, slot);
            }
            if (!accept('('))
                fail("function '" + std::string(name) + "' needs one argument", ErrorCode::ArityMismatch);
            skip();
            if (pos_ < src_.size() && src_[pos_] == ')')
                fail("function '" + std::string(name) + "' needs one argument", ErrorCode::ArityMismatch);
            NodePtr arg = expr();
            if (accept(','))
                fail("function '" + std::string(name) + "' takes one argument", ErrorCode::ArityMismatch);
            if (!accept(')'))
                fail("expected ')'");
            return make(fn, arg);
        }

        std::string_view src_;
        std::size_t pos_ = 0;
    };

    NodePtr root_;
    std::string source_;
};

inline Expression parse_expression(std::string_view src)
{
    Expression e;
    e.root_ = Expression::Parser(src).parse();
    e.source_ = std::string(src);
    return e;
}

} // namespace sqopen
