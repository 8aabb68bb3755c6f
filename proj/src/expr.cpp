#include "hyperode/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>
#include <utility>
#include <vector>

namespace hyperode {

namespace {

using Node = Expression::Node;
using NodePtr = Expression::NodePtr;
using Kind = Expression::Node::Kind;
using Func = Expression::Func;

const std::pair<const char*, Func> kFunctions[] = {
    {"sin", Func::Sin},   {"cos", Func::Cos},   {"tan", Func::Tan},  {"exp", Func::Exp},
    {"ln", Func::Ln},     {"sqrt", Func::Sqrt}, {"abs", Func::Abs},  {"sinh", Func::Sinh},
    {"cosh", Func::Cosh}, {"tanh", Func::Tanh},
};

const char* func_name(Func f) {
    for (const auto& [name, fn] : kFunctions)
        if (fn == f) return name;
    return "?";
}

bool lookup_func(const std::string& name, Func& out) {
    for (const auto& [fname, fn] : kFunctions)
        if (name == fname) {
            out = fn;
            return true;
        }
    return false;
}

NodePtr make(Kind kind, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

class Parser {
public:
    Parser(const std::string& text, const std::string& variable)
        : text_(text), variable_(variable) {}

    NodePtr run() {
        if (text_.empty()) fail("empty expression", {"expression"});
        NodePtr e = parse_expr();
        skip_ws();
        if (pos_ != text_.size()) fail("trailing input", {"end of input", "operator"});
        return e;
    }

private:
    const std::string& text_;
    const std::string& variable_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what, std::vector<std::string> expected) {
        std::ostringstream os;
        os << "syntax error at byte " << pos_ << ": " << what;
        throw ParseError(os.str(), pos_, std::move(expected));
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    NodePtr parse_expr() {
        NodePtr lhs = parse_term();
        for (;;) {
            if (eat('+'))
                lhs = make(Kind::Add, lhs, parse_term());
            else if (eat('-'))
                lhs = make(Kind::Sub, lhs, parse_term());
            else
                return lhs;
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_factor();
        for (;;) {
            if (eat('*'))
                lhs = make(Kind::Mul, lhs, parse_factor());
            else if (eat('/'))
                lhs = make(Kind::Div, lhs, parse_factor());
            else
                return lhs;
        }
    }

    NodePtr parse_factor() {
        if (eat('-')) return make(Kind::Neg, parse_factor());
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_atom();
        if (eat('^')) return make(Kind::Pow, base, parse_factor());
        return base;
    }

    NodePtr parse_atom() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input", {"number", "identifier", "("});
        const char c = text_[pos_];

        if (c == '(') {
            ++pos_;
            NodePtr inner = parse_expr();
            if (!eat(')')) fail("unbalanced parenthesis", {")"});
            return inner;
        }

        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();

        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                ++pos_;
            const std::string name = text_.substr(start, pos_ - start);

            Func fn = Func::Sin;
            const bool is_func = lookup_func(name, fn);
            if (peek() == '(') {
                if (!is_func) {
                    pos_ = start;
                    fail("unknown function name '" + name + "'", {"function name"});
                }
                eat('(');
                NodePtr arg = parse_expr();
                if (!eat(')')) fail("unbalanced parenthesis in call", {")"});
                auto n = make(Kind::Call, arg);
                const_cast<Node*>(n.get())->func = fn;
                return n;
            }
            if (is_func) {
                pos_ = start;
                fail("function name '" + name + "' used without argument list", {"("});
            }
            if (name == variable_) return make(Kind::Variable);
            auto n = make(Kind::Parameter);
            const_cast<Node*>(n.get())->name = name;
            return n;
        }

        fail(std::string("unexpected character '") + c + "'", {"number", "identifier", "("});
    }

    NodePtr parse_number() {
        const char* begin = text_.data() + pos_;
        const char* end = text_.data() + text_.size();
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc{} || ptr == begin) fail("malformed number", {"number"});
        pos_ = static_cast<std::size_t>(ptr - text_.data());
        auto n = make(Kind::Number);
        const_cast<Node*>(n.get())->number = value;
        return n;
    }
};

void collect_params(const NodePtr& n, std::set<std::string>& out) {
    if (!n) return;
    if (n->kind == Kind::Parameter) out.insert(n->name);
    collect_params(n->lhs, out);
    collect_params(n->rhs, out);
}

int precedence(Kind k) {
    switch (k) {
        case Kind::Add:
        case Kind::Sub: return 1;
        case Kind::Mul:
        case Kind::Div: return 2;
        case Kind::Neg: return 3;
        case Kind::Pow: return 4;
        default: return 5;
    }
}

void print(std::ostream& os, const NodePtr& n, int parent_prec, bool right_side) {
    const int prec = precedence(n->kind);
    // A right operand at equal precedence needs parentheses for - and /;
    // Pow is right-associative so the mirrored rule applies to its base.
    bool need_parens = prec < parent_prec;
    if (prec == parent_prec && right_side && (parent_prec == 1 || parent_prec == 2)) need_parens = true;
    if (prec == parent_prec && !right_side && parent_prec == 4) need_parens = true;

    if (need_parens) os << '(';
    switch (n->kind) {
        case Kind::Number: {
            std::ostringstream tmp;
            tmp.precision(17);
            tmp << n->number;
            os << tmp.str();
            break;
        }
        case Kind::Variable: os << 'x'; break;
        case Kind::Parameter: os << n->name; break;
        case Kind::Neg:
            os << '-';
            print(os, n->lhs, precedence(Kind::Neg), true);
            break;
        case Kind::Add:
        case Kind::Sub:
        case Kind::Mul:
        case Kind::Div:
        case Kind::Pow: {
            const char op = n->kind == Kind::Add   ? '+'
                            : n->kind == Kind::Sub ? '-'
                            : n->kind == Kind::Mul ? '*'
                            : n->kind == Kind::Div ? '/'
                                                   : '^';
            print(os, n->lhs, prec, false);
            os << op;
            print(os, n->rhs, prec, true);
            break;
        }
        case Kind::Call:
            os << func_name(n->func) << '(';
            print(os, n->lhs, 0, false);
            os << ')';
            break;
    }
    if (need_parens) os << ')';
}

bool equal(const NodePtr& a, const NodePtr& b) {
    if (!a || !b) return a == b;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case Kind::Number: return a->number == b->number;
        case Kind::Variable: return true;
        case Kind::Parameter: return a->name == b->name;
        case Kind::Call:
            if (a->func != b->func) return false;
            break;
        default: break;
    }
    return equal(a->lhs, b->lhs) && equal(a->rhs, b->rhs);
}

Jet2 eval_node(const Node& n, const Jet2& x, const std::map<std::string, double>& bindings) {
    Jet2 result;
    switch (n.kind) {
        case Kind::Number: result = Jet2::constant(n.number); break;
        case Kind::Variable: result = x; break;
        case Kind::Parameter: {
            auto it = bindings.find(n.name);
            if (it == bindings.end()) throw EvalError("unbound parameter '" + n.name + "'");
            result = Jet2::constant(it->second);
            break;
        }
        case Kind::Neg: result = -eval_node(*n.lhs, x, bindings); break;
        case Kind::Add: result = eval_node(*n.lhs, x, bindings) + eval_node(*n.rhs, x, bindings); break;
        case Kind::Sub: result = eval_node(*n.lhs, x, bindings) - eval_node(*n.rhs, x, bindings); break;
        case Kind::Mul: result = eval_node(*n.lhs, x, bindings) * eval_node(*n.rhs, x, bindings); break;
        case Kind::Div: result = eval_node(*n.lhs, x, bindings) / eval_node(*n.rhs, x, bindings); break;
        case Kind::Pow: result = pow(eval_node(*n.lhs, x, bindings), eval_node(*n.rhs, x, bindings)); break;
        case Kind::Call: {
            const Jet2 arg = eval_node(*n.lhs, x, bindings);
            switch (n.func) {
                case Func::Sin: result = sin(arg); break;
                case Func::Cos: result = cos(arg); break;
                case Func::Tan: result = tan(arg); break;
                case Func::Exp: result = exp(arg); break;
                case Func::Ln: result = log(arg); break;
                case Func::Sqrt: result = sqrt(arg); break;
                case Func::Abs: result = abs(arg); break;
                case Func::Sinh: result = sinh(arg); break;
                case Func::Cosh: result = cosh(arg); break;
                case Func::Tanh: result = tanh(arg); break;
            }
            break;
        }
    }
    if (!result.finite()) throw EvalError("expression produced a non-finite value");
    return result;
}

} // namespace

std::set<std::string> Expression::parameters() const {
    std::set<std::string> out;
    collect_params(root_, out);
    return out;
}

std::string Expression::to_string() const {
    if (!root_) return "";
    std::ostringstream os;
    print(os, root_, 0, false);
    return os.str();
}

bool Expression::structurally_equal(const Expression& other) const {
    return equal(root_, other.root_);
}

Jet2 Expression::eval(const Jet2& x, const std::map<std::string, double>& bindings) const {
    if (!root_) throw EvalError("empty expression");
    return eval_node(*root_, x, bindings);
}

Expression parse(const std::string& text, const std::string& variable) {
    return Expression(Parser(text, variable).run());
}

HFunction::HFunction(Expression expr, std::map<std::string, double> bindings)
    : expr_(std::move(expr)), bindings_(std::move(bindings)) {
    for (const auto& name : expr_.parameters())
        if (bindings_.find(name) == bindings_.end())
            throw EvalError("parameter '" + name + "' is not bound");
}

HFunction HFunction::from_text(const std::string& text, std::map<std::string, double> bindings) {
    return HFunction(parse(text), std::move(bindings));
}

Jet2 HFunction::eval_jet(double x) const { return expr_.eval(Jet2::variable(x), bindings_); }

} // namespace hyperode
