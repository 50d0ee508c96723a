#include "stshapeopt/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "stshapeopt/error.hpp"

namespace stshapeopt {

enum class Func { Sqrt, Sin, Cos, Exp, Log, Abs };

struct Expression::Node {
    enum class Kind { Number, Variable, Neg, Add, Sub, Mul, Div, Pow, Call };
    Kind kind = Kind::Number;
    double number = 0.0;
    int variable = 0;
    Func func = Func::Sqrt;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Kind = Expression::Node::Kind;

NodePtr make(Kind kind, NodePtr lhs = nullptr, NodePtr rhs = nullptr)
{
    auto n = std::make_shared<Expression::Node>();
    n->kind = kind;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

/** @brief Product of a derivative seed with a value; a zero seed wins over inf and NaN. */
double scaled(double seed, double value) { return seed == 0.0 ? 0.0 : seed * value; }

class Parser {
public:
    Parser(const std::string& text, const std::vector<std::string>& variables)
        : s_(text), vars_(variables) {}

    NodePtr parse()
    {
        NodePtr e = expr();
        skip();
        if (pos_ != s_.size()) {
            fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        }
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& what) const
    {
        throw ConfigError("expression '" + s_ + "', column " + std::to_string(pos_ + 1) + ": " + what);
    }

    void skip()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) {
            ++pos_;
        }
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

    bool starts_primary()
    {
        skip();
        if (pos_ >= s_.size()) {
            return false;
        }
        const char c = s_[pos_];
        return c == '(' || c == '.' || std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    }

    NodePtr expr()
    {
        NodePtr e = term();
        for (;;) {
            if (accept('+')) {
                e = make(Kind::Add, e, term());
            } else if (accept('-')) {
                e = make(Kind::Sub, e, term());
            } else {
                return e;
            }
        }
    }

    NodePtr term()
    {
        NodePtr e = unary();
        for (;;) {
            if (accept('*')) {
                e = make(Kind::Mul, e, unary());
            } else if (accept('/')) {
                e = make(Kind::Div, e, unary());
            } else if (starts_primary()) {
                e = make(Kind::Mul, e, power());
            } else {
                return e;
            }
        }
    }

    NodePtr unary()
    {
        if (accept('-')) {
            return make(Kind::Neg, unary());
        }
        if (accept('+')) {
            return unary();
        }
        return power();
    }

    NodePtr power()
    {
        NodePtr base = primary();
        if (accept('^')) {
            return make(Kind::Pow, base, unary());
        }
        return base;
    }

    NodePtr primary()
    {
        skip();
        if (pos_ >= s_.size()) {
            fail("unexpected end of expression");
        }
        if (accept('(')) {
            NodePtr e = expr();
            if (!accept(')')) {
                fail("expected ')'");
            }
            return e;
        }
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) {
                fail("malformed number");
            }
            pos_ += static_cast<std::size_t>(end - begin);
            auto n = std::make_shared<Expression::Node>();
            n->number = v;
            return n;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
                ++pos_;
            }
            const std::string name = s_.substr(start, pos_ - start);
            for (std::size_t i = 0; i < vars_.size(); ++i) {
                if (vars_[i] == name) {
                    auto n = std::make_shared<Expression::Node>();
                    n->kind = Kind::Variable;
                    n->variable = static_cast<int>(i);
                    return n;
                }
            }
            if (name == "pi") {
                auto n = std::make_shared<Expression::Node>();
                n->number = M_PI;
                return n;
            }
            static const std::pair<const char*, Func> funcs[] = {
                {"sqrt", Func::Sqrt}, {"sin", Func::Sin}, {"cos", Func::Cos},
                {"exp", Func::Exp},   {"log", Func::Log}, {"abs", Func::Abs}};
            for (const auto& [fname, f] : funcs) {
                if (name == fname) {
                    if (!accept('(')) {
                        fail("expected '(' after " + name);
                    }
                    auto n = std::make_shared<Expression::Node>();
                    n->kind = Kind::Call;
                    n->func = f;
                    n->lhs = expr();
                    if (!accept(')')) {
                        fail("expected ')'");
                    }
                    return n;
                }
            }
            pos_ = start;
            fail("unknown name '" + name + "'");
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    const std::string& s_;
    const std::vector<std::string>& vars_;
    std::size_t pos_ = 0;
};

Dual eval(const Expression::Node& n, std::span<const Dual> vars)
{
    switch (n.kind) {
    case Kind::Number:
        return {n.number, 0.0};
    case Kind::Variable:
        return vars[n.variable];
    case Kind::Neg: {
        const Dual a = eval(*n.lhs, vars);
        return {-a.v, -a.d};
    }
    case Kind::Call: {
        const Dual a = eval(*n.lhs, vars);
        switch (n.func) {
        case Func::Sqrt: {
            const double r = std::sqrt(a.v);
            return {r, scaled(a.d, 0.5 / r)};
        }
        case Func::Sin:
            return {std::sin(a.v), scaled(a.d, std::cos(a.v))};
        case Func::Cos:
            return {std::cos(a.v), scaled(a.d, -std::sin(a.v))};
        case Func::Exp: {
            const double e = std::exp(a.v);
            return {e, scaled(a.d, e)};
        }
        case Func::Log:
            return {std::log(a.v), scaled(a.d, 1.0 / a.v)};
        case Func::Abs:
            return {std::abs(a.v), scaled(a.d, a.v < 0.0 ? -1.0 : 1.0)};
        }
        return {};
    }
    default:
        break;
    }
    const Dual a = eval(*n.lhs, vars);
    const Dual b = eval(*n.rhs, vars);
    switch (n.kind) {
    case Kind::Add:
        return {a.v + b.v, a.d + b.d};
    case Kind::Sub:
        return {a.v - b.v, a.d - b.d};
    case Kind::Mul:
        return {a.v * b.v, scaled(a.d, b.v) + scaled(b.d, a.v)};
    case Kind::Div: {
        const double q = a.v / b.v;
        return {q, scaled(a.d, 1.0 / b.v) - scaled(b.d, q / b.v)};
    }
    case Kind::Pow: {
        const double p = std::pow(a.v, b.v);
        double d = scaled(a.d, b.v * std::pow(a.v, b.v - 1.0));
        d += scaled(b.d, p * std::log(a.v));
        return {p, d};
    }
    default:
        return {};
    }
}

bool mentions(const Expression::Node& n, int variable)
{
    if (n.kind == Kind::Variable) {
        return n.variable == variable;
    }
    return (n.lhs && mentions(*n.lhs, variable)) || (n.rhs && mentions(*n.rhs, variable));
}

}  // namespace

Expression Expression::parse(const std::string& text, std::vector<std::string> variables)
{
    Expression e;
    e.text_ = text;
    e.variables_ = std::move(variables);
    e.root_ = Parser(e.text_, e.variables_).parse();
    return e;
}

Expression Expression::constant(double value)
{
    Expression e;
    e.text_ = std::to_string(value);
    auto n = std::make_shared<Node>();
    n->number = value;
    e.root_ = n;
    return e;
}

bool Expression::uses(const std::string& variable) const
{
    for (std::size_t i = 0; i < variables_.size(); ++i) {
        if (variables_[i] == variable) {
            return mentions(*root_, static_cast<int>(i));
        }
    }
    return false;
}

double Expression::value(std::span<const double> vars) const
{
    std::vector<Dual> d(vars.size());
    for (std::size_t i = 0; i < vars.size(); ++i) {
        d[i].v = vars[i];
    }
    return evaluate(d).v;
}

Dual Expression::evaluate(std::span<const Dual> vars) const
{
    if (vars.size() != variables_.size()) {
        throw ArgumentError("expression expects " + std::to_string(variables_.size()) +
                            " variables, got " + std::to_string(vars.size()));
    }
    return eval(*root_, vars);
}

}  // namespace stshapeopt
