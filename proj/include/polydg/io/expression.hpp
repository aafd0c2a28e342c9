#pragma once

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>

#include "../error.hpp"
#include "../geometry.hpp"

namespace polydg {

/// Compiled arithmetic expression in x, y, t.
///
/// Grammar: expr := term (('+'|'-') term)*, term := unary (('*'|'/') unary)*,
/// unary := ('+'|'-') unary | power, power := primary ('^' unary)?,
/// primary := number | x | y | t | pi | fn '(' expr ')' | '(' expr ')',
/// fn ∈ {sin, cos, exp, sqrt, log, step}; step(s) is 1 for s > 0 and 0 otherwise.
class Expression
{
public:
    enum class Var { x, y, t };

    Expression() : root_(num(0.0)) {}

    /// Throws ParseError (line 1, 1-based column) on malformed input.
    static Expression parse(std::string_view text);
    static Expression constant(double v) { return Expression(num(v)); }

    double operator()(double x, double y, double t) const { return root_->eval(x, y, t); }
    double operator()(const Point& p, double t) const { return root_->eval(p.x(), p.y(), t); }

    Expression derivative(Var v) const { return Expression(root_->diff(v)); }

    bool is_constant() const { return root_->kind == Kind::num; }
    std::string to_string() const { return root_->str(); }

private:
    enum class Kind { num, var, add, sub, mul, div, pow, neg, fn };
    enum class Fn { sin, cos, exp, sqrt, log, step };

    struct Node;
    using Ptr = std::shared_ptr<const Node>;

    struct Node
    {
        Kind kind = Kind::num;
        double value = 0.0;
        Var var = Var::x;
        Fn fn = Fn::sin;
        Ptr a, b;

        double eval(double x, double y, double t) const
        {
            switch (kind) {
            case Kind::num: return value;
            case Kind::var: return var == Var::x ? x : var == Var::y ? y : t;
            case Kind::add: return a->eval(x, y, t) + b->eval(x, y, t);
            case Kind::sub: return a->eval(x, y, t) - b->eval(x, y, t);
            case Kind::mul: return a->eval(x, y, t) * b->eval(x, y, t);
            case Kind::div: return a->eval(x, y, t) / b->eval(x, y, t);
            case Kind::neg: return -a->eval(x, y, t);
            case Kind::pow: {
                const double base = a->eval(x, y, t);
                if (b->kind == Kind::num && b->value == std::floor(b->value) && std::abs(b->value) <= 64.0)
                    return integer_power(base, static_cast<int>(b->value));
                return std::pow(base, b->eval(x, y, t));
            }
            case Kind::fn: return apply(fn, a->eval(x, y, t));
            }
            return 0.0;
        }

        Ptr diff(Var v) const
        {
            switch (kind) {
            case Kind::num: return num(0.0);
            case Kind::var: return num(var == v ? 1.0 : 0.0);
            case Kind::add: return binary(Kind::add, a->diff(v), b->diff(v));
            case Kind::sub: return binary(Kind::sub, a->diff(v), b->diff(v));
            case Kind::neg: return negate(a->diff(v));
            case Kind::mul:
                return binary(Kind::add, binary(Kind::mul, a->diff(v), b), binary(Kind::mul, a, b->diff(v)));
            case Kind::div:
                // (a'b − ab')/b²
                return binary(Kind::div,
                              binary(Kind::sub, binary(Kind::mul, a->diff(v), b), binary(Kind::mul, a, b->diff(v))),
                              binary(Kind::pow, b, num(2.0)));
            case Kind::pow: {
                const Ptr self = std::make_shared<Node>(*this);
                if (b->kind == Kind::num)
                    return binary(Kind::mul, binary(Kind::mul, num(b->value), binary(Kind::pow, a, num(b->value - 1.0))),
                                  a->diff(v));
                // (a^b)' = a^b (b' ln a + b a'/a)
                return binary(Kind::mul, self,
                              binary(Kind::add, binary(Kind::mul, b->diff(v), function(Fn::log, a)),
                                     binary(Kind::div, binary(Kind::mul, b, a->diff(v)), a)));
            }
            case Kind::fn: {
                const Ptr da = a->diff(v);
                switch (fn) {
                case Fn::sin: return binary(Kind::mul, function(Fn::cos, a), da);
                case Fn::cos: return negate(binary(Kind::mul, function(Fn::sin, a), da));
                case Fn::exp: return binary(Kind::mul, function(Fn::exp, a), da);
                case Fn::sqrt:
                    return binary(Kind::div, da, binary(Kind::mul, num(2.0), function(Fn::sqrt, a)));
                case Fn::log: return binary(Kind::div, da, a);
                case Fn::step: return num(0.0);
                }
            }
            }
            return num(0.0);
        }

        std::string str() const
        {
            switch (kind) {
            case Kind::num: {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.17g", value);
                return value < 0 ? "(" + std::string(buf) + ")" : std::string(buf);
            }
            case Kind::var: return var == Var::x ? "x" : var == Var::y ? "y" : "t";
            case Kind::add: return "(" + a->str() + " + " + b->str() + ")";
            case Kind::sub: return "(" + a->str() + " - " + b->str() + ")";
            case Kind::mul: return "(" + a->str() + " * " + b->str() + ")";
            case Kind::div: return "(" + a->str() + " / " + b->str() + ")";
            case Kind::pow: return "(" + a->str() + " ^ " + b->str() + ")";
            case Kind::neg: return "(-" + a->str() + ")";
            case Kind::fn: return std::string(name(fn)) + "(" + a->str() + ")";
            }
            return {};
        }
    };

    explicit Expression(Ptr root) : root_(std::move(root)) {}

    static double integer_power(double base, int n)
    {
        double r = 1.0, p = base;
        for (int m = std::abs(n); m > 0; m >>= 1, p *= p)
            if (m & 1)
                r *= p;
        return n < 0 ? 1.0 / r : r;
    }

    static double apply(Fn f, double u)
    {
        switch (f) {
        case Fn::sin: return std::sin(u);
        case Fn::cos: return std::cos(u);
        case Fn::exp: return std::exp(u);
        case Fn::sqrt: return std::sqrt(u);
        case Fn::log: return std::log(u);
        case Fn::step: return u > 0.0 ? 1.0 : 0.0;
        }
        return 0.0;
    }

    static const char* name(Fn f)
    {
        switch (f) {
        case Fn::sin: return "sin";
        case Fn::cos: return "cos";
        case Fn::exp: return "exp";
        case Fn::sqrt: return "sqrt";
        case Fn::log: return "log";
        case Fn::step: return "step";
        }
        return "";
    }

    static Ptr num(double v)
    {
        auto n = std::make_shared<Node>();
        n->value = v;
        return n;
    }

    static Ptr variable(Var v)
    {
        auto n = std::make_shared<Node>();
        n->kind = Kind::var;
        n->var = v;
        return n;
    }

    static bool is_num(const Ptr& p, double v) { return p->kind == Kind::num && p->value == v; }

    /// Builds a binary node with constant folding and the trivial identities.
    static Ptr binary(Kind k, Ptr a, Ptr b)
    {
        auto n = std::make_shared<Node>();
        n->kind = k;
        n->a = a;
        n->b = b;
        if (a->kind == Kind::num && b->kind == Kind::num)
            return num(n->eval(0.0, 0.0, 0.0));
        switch (k) {
        case Kind::add:
            if (is_num(a, 0.0)) return b;
            if (is_num(b, 0.0)) return a;
            break;
        case Kind::sub:
            if (is_num(b, 0.0)) return a;
            if (is_num(a, 0.0)) return negate(b);
            break;
        case Kind::mul:
            if (is_num(a, 0.0) || is_num(b, 0.0)) return num(0.0);
            if (is_num(a, 1.0)) return b;
            if (is_num(b, 1.0)) return a;
            break;
        case Kind::div:
            if (is_num(a, 0.0)) return num(0.0);
            if (is_num(b, 1.0)) return a;
            break;
        case Kind::pow:
            if (is_num(b, 0.0)) return num(1.0);
            if (is_num(b, 1.0)) return a;
            break;
        default:
            break;
        }
        return n;
    }

    static Ptr negate(Ptr a)
    {
        if (a->kind == Kind::num)
            return num(-a->value);
        if (a->kind == Kind::neg)
            return a->a;
        auto n = std::make_shared<Node>();
        n->kind = Kind::neg;
        n->a = std::move(a);
        return n;
    }

    static Ptr function(Fn f, Ptr a)
    {
        if (a->kind == Kind::num)
            return num(apply(f, a->value));
        auto n = std::make_shared<Node>();
        n->kind = Kind::fn;
        n->fn = f;
        n->a = std::move(a);
        return n;
    }

    class Parser
    {
    public:
        explicit Parser(std::string_view s) : s_(s) {}

        Ptr parse_all()
        {
            skip();
            if (pos_ >= s_.size())
                fail("empty expression");
            Ptr e = expr();
            skip();
            if (pos_ < s_.size())
                fail(std::string("unexpected '") + s_[pos_] + "'");
            return e;
        }

    private:
        [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, 1, pos_ + 1); }

        void skip()
        {
            while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
                ++pos_;
        }

        bool accept(char c)
        {
            skip();
            if (pos_ < s_.size() && s_[pos_] == c) {
                ++pos_;
                return true;
            }
            return false;
        }

        Ptr expr()
        {
            Ptr lhs = term();
            for (;;) {
                if (accept('+'))
                    lhs = binary(Kind::add, lhs, term());
                else if (accept('-'))
                    lhs = binary(Kind::sub, lhs, term());
                else
                    return lhs;
            }
        }

        Ptr term()
        {
            Ptr lhs = unary();
            for (;;) {
                if (accept('*'))
                    lhs = binary(Kind::mul, lhs, unary());
                else if (accept('/'))
                    lhs = binary(Kind::div, lhs, unary());
                else
                    return lhs;
            }
        }

        Ptr unary()
        {
            if (accept('-'))
                return negate(unary());
            if (accept('+'))
                return unary();
            return power();
        }

        Ptr power()
        {
            Ptr base = primary();
            if (accept('^'))
                return binary(Kind::pow, base, unary());
            return base;
        }

        Ptr primary()
        {
            skip();
            if (pos_ >= s_.size())
                fail("unexpected end of expression");
            const char c = s_[pos_];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
                return number();
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
                return identifier();
            if (accept('(')) {
                Ptr e = expr();
                if (!accept(')'))
                    fail("expected ')'");
                return e;
            }
            fail(std::string("unexpected '") + c + "'");
        }

        Ptr number()
        {
            const std::string tail(s_.substr(pos_));
            char* end = nullptr;
            const double v = std::strtod(tail.c_str(), &end);
            if (end == tail.c_str())
                fail("malformed number");
            pos_ += static_cast<std::size_t>(end - tail.c_str());
            return num(v);
        }

        Ptr identifier()
        {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                ++pos_;
            const std::string_view id = s_.substr(start, pos_ - start);
            if (id == "x") return variable(Var::x);
            if (id == "y") return variable(Var::y);
            if (id == "t") return variable(Var::t);
            if (id == "pi") return num(std::numbers::pi);
            static constexpr std::pair<std::string_view, Fn> fns[] = {
                {"sin", Fn::sin}, {"cos", Fn::cos}, {"exp", Fn::exp},
                {"sqrt", Fn::sqrt}, {"log", Fn::log}, {"step", Fn::step}};
            for (const auto& [n, f] : fns)
                if (id == n) {
                    if (!accept('('))
                        fail("expected '(' after " + std::string(n));
                    Ptr arg = expr();
                    if (!accept(')'))
                        fail("expected ')'");
                    return function(f, arg);
                }
            pos_ = start;
            fail("unknown identifier '" + std::string(id) + "'");
        }

        std::string_view s_;
        std::size_t pos_ = 0;
    };

    Ptr root_;
};

inline Expression Expression::parse(std::string_view text) { return Expression(Parser(text).parse_all()); }

} // namespace polydg
