#ifndef HYPERODE_EXPR_HPP
#define HYPERODE_EXPR_HPP

#include <map>
#include <memory>
#include <set>
#include <string>

#include "hyperode/errors.hpp"
#include "hyperode/jet.hpp"

namespace hyperode {

// Parsed coefficient function. Grammar (whitespace-insensitive):
//
//   expr   := term (("+" | "-") term)*
//   term   := factor (("*" | "/") factor)*
//   factor := "-" factor | power
//   power  := atom ("^" factor)?
//   atom   := number | ident | ident "(" expr ")" | "(" expr ")"
//
// "^" is right-associative and binds tighter than unary minus, so -omega^2
// reads as -(omega^2). The identifier `x` is the variable; any other
// identifier is a parameter unless it names a known function (sin, cos, tan,
// exp, ln, sqrt, abs, sinh, cosh, tanh).
class Expression {
public:
    enum class Func { Sin, Cos, Tan, Exp, Ln, Sqrt, Abs, Sinh, Cosh, Tanh };

    struct Node;
    using NodePtr = std::shared_ptr<const Node>;

    struct Node {
        enum class Kind { Number, Variable, Parameter, Neg, Add, Sub, Mul, Div, Pow, Call };
        Kind kind;
        double number = 0.0;     // Number
        std::string name;        // Parameter
        Func func = Func::Sin;   // Call
        NodePtr lhs, rhs;        // operands (unary ops use lhs only)
    };

    Expression() = default;
    explicit Expression(NodePtr root) : root_(std::move(root)) {}

    const NodePtr& root() const { return root_; }
    bool empty() const { return root_ == nullptr; }

    // Names of all parameters appearing in the tree (excludes `x`).
    std::set<std::string> parameters() const;

    // Canonical serialization; parse(to_string()) reproduces the tree.
    std::string to_string() const;

    bool structurally_equal(const Expression& other) const;

    // Evaluates the tree at the given jet of the variable with the given
    // parameter bindings. Throws EvalError on domain violations or whenever a
    // node yields a non-finite component.
    Jet2 eval(const Jet2& x, const std::map<std::string, double>& bindings) const;

private:
    NodePtr root_;
};

// Parses the grammar above. Throws ParseError with the byte offset of the
// failure and the set of expected tokens. The independent variable is `x` by
// default; the reduction front end parses coefficient functions of t by
// naming the variable accordingly.
Expression parse(const std::string& text, const std::string& variable = "x");

// A coefficient function h(x): an expression plus bindings for every
// parameter. Immutable after construction; safe to share across threads.
class HFunction {
public:
    HFunction(Expression expr, std::map<std::string, double> bindings = {});

    // Convenience: parse-and-bind.
    static HFunction from_text(const std::string& text, std::map<std::string, double> bindings = {});

    const Expression& expression() const { return expr_; }
    const std::map<std::string, double>& bindings() const { return bindings_; }

    // (h(x), h'(x), h''(x)) by jet arithmetic; never returns non-finite values.
    Jet2 eval_jet(double x) const;

    double operator()(double x) const { return eval_jet(x).v; }

private:
    Expression expr_;
    std::map<std::string, double> bindings_;
};

} // namespace hyperode

#endif
