/**
 * @brief Small analytic expression language for sources, objectives and test deformations.
 *
 * Grammar (whitespace is ignored):
 *   expr    := term (('+' | '-') term)*
 *   term    := unary (('*' | '/') unary | primary)*     juxtaposition multiplies
 *   unary   := ('+' | '-') unary | power
 *   power   := primary ('^' unary)?                       right associative
 *   primary := number | name | func '(' expr ')' | '(' expr ')'
 *   func    := sqrt | sin | cos | exp | log | abs
 * The name pi is the constant; every other name must be one of the declared
 * variables. Evaluation carries one forward derivative alongside the value.
 */
#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace stshapeopt {

/** @brief Value with one directional derivative. */
struct Dual {
    double v = 0.0;
    double d = 0.0;
};

class Expression {
public:
    /**
     * @brief Parses text over the given variable names. Throws ConfigError with
     * the column of the offending token.
     */
    static Expression parse(const std::string& text, std::vector<std::string> variables);

    /** @brief Constant expression. */
    static Expression constant(double value);

    const std::string& text() const { return text_; }
    const std::vector<std::string>& variables() const { return variables_; }
    /** @brief Whether the named variable occurs in the expression. */
    bool uses(const std::string& variable) const;

    /** @brief Evaluates with variable values in declaration order. */
    double value(std::span<const double> vars) const;
    /** @brief Value and derivative given the derivative seed of every variable. */
    Dual evaluate(std::span<const Dual> vars) const;

    struct Node;

private:
    std::string text_;
    std::vector<std::string> variables_;
    std::shared_ptr<const Node> root_;
};

}  // namespace stshapeopt
