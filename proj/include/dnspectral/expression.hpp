#pragma once

#include "dnspectral/errors.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

namespace dnspectral {

/// A parsed expression in one variable x:
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := base ('^' factor)?
///   base   := number | 'x' | 'pi' | func '(' expr ')' | '(' expr ')'
///   func   := sin | cos | exp
/// There is no unary minus; write (0-x).
class Expression {
public:
    enum class Op { number, var, add, sub, mul, div, pow, sin, cos, exp };

    struct Node {
        Op op;
        double value = 0.0;
        int lhs = -1;
        int rhs = -1;
    };

    static Expression parse(std::string_view text);

    [[nodiscard]] double operator()(double x) const { return eval(root_, x); }
    [[nodiscard]] const std::string& text() const { return text_; }

private:
    friend class ExpressionParser;

    [[nodiscard]] double eval(int i, double x) const {
        const Node& n = nodes_[static_cast<std::size_t>(i)];
        switch (n.op) {
        case Op::number: return n.value;
        case Op::var: return x;
        case Op::add: return eval(n.lhs, x) + eval(n.rhs, x);
        case Op::sub: return eval(n.lhs, x) - eval(n.rhs, x);
        case Op::mul: return eval(n.lhs, x) * eval(n.rhs, x);
        case Op::div: return eval(n.lhs, x) / eval(n.rhs, x);
        case Op::pow: return std::pow(eval(n.lhs, x), eval(n.rhs, x));
        case Op::sin: return std::sin(eval(n.lhs, x));
        case Op::cos: return std::cos(eval(n.lhs, x));
        case Op::exp: return std::exp(eval(n.lhs, x));
        }
        return 0.0;
    }

    std::vector<Node> nodes_;
    int root_ = -1;
    std::string text_;
};

class ExpressionParser {
public:
    explicit ExpressionParser(std::string_view s) : s_(s) {}

    Expression run() {
        out_.text_ = std::string(s_);
        out_.root_ = expr();
        skip();
        if (pos_ < s_.size()) error("unexpected '" + std::string(1, s_[pos_]) + "'");
        return std::move(out_);
    }

private:
    using Op = Expression::Op;

    [[noreturn]] void error(const std::string& msg) const {
        fail(ErrorKind::parse, "expression column " + std::to_string(pos_ + 1) + ": " + msg);
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) error(std::string("expected '") + c + "'");
    }

    int add(Op op, double v = 0.0, int l = -1, int r = -1) {
        out_.nodes_.push_back({op, v, l, r});
        return static_cast<int>(out_.nodes_.size()) - 1;
    }

    int expr() {
        int lhs = term();
        for (;;) {
            if (accept('+')) lhs = add(Op::add, 0.0, lhs, term());
            else if (accept('-')) lhs = add(Op::sub, 0.0, lhs, term());
            else return lhs;
        }
    }

    int term() {
        int lhs = factor();
        for (;;) {
            if (accept('*')) lhs = add(Op::mul, 0.0, lhs, factor());
            else if (accept('/')) lhs = add(Op::div, 0.0, lhs, factor());
            else return lhs;
        }
    }

    int factor() {
        const int b = base();
        if (accept('^')) return add(Op::pow, 0.0, b, factor());
        return b;
    }

    int base() {
        skip();
        if (pos_ >= s_.size()) error("unexpected end of input");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            const int e = expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            const std::string_view id = s_.substr(start, pos_ - start);
            if (id == "x") return add(Op::var);
            if (id == "pi") return add(Op::number, std::numbers::pi);
            Op op;
            if (id == "sin") op = Op::sin;
            else if (id == "cos") op = Op::cos;
            else if (id == "exp") op = Op::exp;
            else {
                pos_ = start;
                error("unknown identifier '" + std::string(id) + "'");
            }
            expect('(');
            const int arg = expr();
            expect(')');
            return add(op, 0.0, arg);
        }
        error("unexpected '" + std::string(1, c) + "'");
    }

    // Decimal literal: digits [. digits] [e [+-] digits].
    int number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            const std::size_t b = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            return pos_ - b;
        };
        std::size_t n = digits();
        if (pos_ < s_.size() && s_[pos_] == '.') {
            ++pos_;
            n += digits();
        }
        if (n == 0) {
            pos_ = start;
            error("malformed number");
        }
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            const std::size_t mark = pos_++;
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
            if (digits() == 0) {
                pos_ = mark;
                error("malformed exponent");
            }
        }
        double v = 0.0;
        const auto res = std::from_chars(s_.data() + start, s_.data() + pos_, v);
        if (res.ec != std::errc() || res.ptr != s_.data() + pos_) {
            pos_ = start;
            error("malformed number");
        }
        return add(Op::number, v);
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    Expression out_;
};

inline Expression Expression::parse(std::string_view text) { return ExpressionParser(text).run(); }

} // namespace dnspectral
