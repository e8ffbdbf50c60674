#ifndef HYPISS_EXPR_HPP
#define HYPISS_EXPR_HPP

// Small closed-form expression language used for serializable coefficient
// functions (characteristic speeds, source entries, disturbances), plus
// sampled tables with linear interpolation as the alternative representation.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hypiss/errors.hpp"

namespace hypiss {

class Expr {
  public:
    static Expr parse(const std::string& text, const std::string& var = "x");

    double operator()(double v) const { return eval(*root_, v); }

    // Symbolic derivative with respect to the expression's variable.
    Expr derivative() const;

    const std::string& text() const { return text_; }

  private:
    struct Node;
    using NodePtr = std::shared_ptr<const Node>;
    enum class Kind { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Call };
    struct Node {
        Kind kind;
        double value = 0.0;       // Const
        std::string fn;           // Call
        NodePtr a, b;
    };

    Expr(NodePtr root, std::string var, std::string text)
        : root_(std::move(root)), var_(std::move(var)), text_(std::move(text)) {}

    static double eval(const Node& n, double v);
    static NodePtr diff(const NodePtr& n);

    static NodePtr make(Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
        auto n = std::make_shared<Node>();
        n->kind = k;
        n->a = std::move(a);
        n->b = std::move(b);
        return n;
    }
    static NodePtr constant(double c) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::Const;
        n->value = c;
        return n;
    }
    static NodePtr callnode(std::string fn, NodePtr a) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::Call;
        n->fn = std::move(fn);
        n->a = std::move(a);
        return n;
    }

    struct Parser;

    NodePtr root_;
    std::string var_;
    std::string text_;
};

struct Expr::Parser {
    const std::string& s;
    const std::string& var;
    size_t pos = 0;

    explicit Parser(const std::string& text, const std::string& v) : s(text), var(v) {}

    void skip() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
        skip();
        if (pos < s.size() && s[pos] == c) { ++pos; return true; }
        return false;
    }
    char peek() {
        skip();
        return pos < s.size() ? s[pos] : '\0';
    }

    NodePtr expr() {
        NodePtr lhs = term();
        while (true) {
            if (eat('+')) lhs = make(Kind::Add, lhs, term());
            else if (eat('-')) lhs = make(Kind::Sub, lhs, term());
            else return lhs;
        }
    }
    NodePtr term() {
        NodePtr lhs = factor();
        while (true) {
            if (eat('*')) lhs = make(Kind::Mul, lhs, factor());
            else if (eat('/')) lhs = make(Kind::Div, lhs, factor());
            else return lhs;
        }
    }
    // Unary minus binds looser than '^', so -x^2 means -(x^2).
    NodePtr factor() {
        if (eat('-')) return make(Kind::Neg, factor());
        if (eat('+')) return factor();
        return power();
    }
    NodePtr power() {
        NodePtr base = primary();
        if (eat('^')) return make(Kind::Pow, base, factor()); // right-assoc
        return base;
    }
    NodePtr primary() {
        skip();
        if (pos >= s.size()) throw ParseError("unexpected end of expression: " + s);
        char c = s[pos];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            size_t end = 0;
            double v = std::stod(s.substr(pos), &end);
            pos += end;
            return constant(v);
        }
        if (c == '(') {
            ++pos;
            NodePtr inner = expr();
            if (!eat(')')) throw ParseError("missing ')' in: " + s);
            return inner;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos;
            while (pos < s.size() &&
                   (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
                ++pos;
            std::string name = s.substr(start, pos - start);
            if (name == var) return make(Kind::Var);
            if (name == "pi") return constant(M_PI);
            if (name == "e") return constant(M_E);
            if (eat('(')) {
                static const std::set<std::string> known = {
                    "exp", "sin", "cos", "tan", "atan", "sqrt",
                    "sinh", "cosh", "tanh", "log", "abs"};
                if (!known.count(name))
                    throw ParseError("unknown function '" + name + "' in: " + s);
                NodePtr arg = expr();
                if (!eat(')')) throw ParseError("missing ')' after " + name);
                return callnode(name, arg);
            }
            throw ParseError("unknown identifier '" + name + "' in: " + s);
        }
        throw ParseError("unexpected character '" + std::string(1, c) + "' in: " + s);
    }
};

inline Expr Expr::parse(const std::string& text, const std::string& var) {
    Parser p(text, var);
    NodePtr root = p.expr();
    p.skip();
    if (p.pos != text.size()) throw ParseError("trailing input in expression: " + text);
    return Expr(root, var, text);
}

inline double Expr::eval(const Node& n, double v) {
    switch (n.kind) {
        case Kind::Const: return n.value;
        case Kind::Var: return v;
        case Kind::Neg: return -eval(*n.a, v);
        case Kind::Add: return eval(*n.a, v) + eval(*n.b, v);
        case Kind::Sub: return eval(*n.a, v) - eval(*n.b, v);
        case Kind::Mul: return eval(*n.a, v) * eval(*n.b, v);
        case Kind::Div: return eval(*n.a, v) / eval(*n.b, v);
        case Kind::Pow: return std::pow(eval(*n.a, v), eval(*n.b, v));
        case Kind::Call: {
            double a = eval(*n.a, v);
            if (n.fn == "exp") return std::exp(a);
            if (n.fn == "sin") return std::sin(a);
            if (n.fn == "cos") return std::cos(a);
            if (n.fn == "tan") return std::tan(a);
            if (n.fn == "atan") return std::atan(a);
            if (n.fn == "sqrt") return std::sqrt(a);
            if (n.fn == "sinh") return std::sinh(a);
            if (n.fn == "cosh") return std::cosh(a);
            if (n.fn == "tanh") return std::tanh(a);
            if (n.fn == "log") return std::log(a);
            if (n.fn == "abs") return std::abs(a);
            throw ParseError("unknown function '" + n.fn + "'");
        }
    }
    return 0.0;
}

inline Expr::NodePtr Expr::diff(const NodePtr& n) {
    switch (n->kind) {
        case Kind::Const: return constant(0.0);
        case Kind::Var: return constant(1.0);
        case Kind::Neg: return make(Kind::Neg, diff(n->a));
        case Kind::Add: return make(Kind::Add, diff(n->a), diff(n->b));
        case Kind::Sub: return make(Kind::Sub, diff(n->a), diff(n->b));
        case Kind::Mul:
            return make(Kind::Add, make(Kind::Mul, diff(n->a), n->b),
                        make(Kind::Mul, n->a, diff(n->b)));
        case Kind::Div:
            return make(Kind::Div,
                        make(Kind::Sub, make(Kind::Mul, diff(n->a), n->b),
                             make(Kind::Mul, n->a, diff(n->b))),
                        make(Kind::Mul, n->b, n->b));
        case Kind::Pow: {
            // Only constant exponents are differentiated; general f^g is not
            // needed for disturbance inputs.
            if (n->b->kind != Kind::Const)
                throw ParseError("derivative of non-constant exponent unsupported");
            double k = n->b->value;
            return make(Kind::Mul,
                        make(Kind::Mul, constant(k),
                             make(Kind::Pow, n->a, constant(k - 1.0))),
                        diff(n->a));
        }
        case Kind::Call: {
            NodePtr inner = diff(n->a);
            auto call = [](const std::string& fn, NodePtr arg) {
                return callnode(fn, std::move(arg));
            };
            NodePtr outer;
            if (n->fn == "exp") outer = call("exp", n->a);
            else if (n->fn == "sin") outer = call("cos", n->a);
            else if (n->fn == "cos") outer = make(Kind::Neg, call("sin", n->a));
            else if (n->fn == "tan")
                outer = make(Kind::Div, constant(1.0),
                             make(Kind::Mul, call("cos", n->a), call("cos", n->a)));
            else if (n->fn == "atan")
                outer = make(Kind::Div, constant(1.0),
                             make(Kind::Add, constant(1.0), make(Kind::Mul, n->a, n->a)));
            else if (n->fn == "sqrt")
                outer = make(Kind::Div, constant(0.5), call("sqrt", n->a));
            else if (n->fn == "sinh") outer = call("cosh", n->a);
            else if (n->fn == "cosh") outer = call("sinh", n->a);
            else if (n->fn == "tanh")
                outer = make(Kind::Div, constant(1.0),
                             make(Kind::Mul, call("cosh", n->a), call("cosh", n->a)));
            else if (n->fn == "log") outer = make(Kind::Div, constant(1.0), n->a);
            else throw ParseError("derivative of '" + n->fn + "' unsupported");
            return make(Kind::Mul, outer, inner);
        }
    }
    return constant(0.0);
}

inline Expr Expr::derivative() const {
    return Expr(diff(root_), var_, "d/d" + var_ + "(" + text_ + ")");
}

// Sampled function on strictly increasing abscissae; linear interpolation,
// clamped beyond the endpoints.
struct SampleTable {
    std::vector<double> x;
    std::vector<double> v;

    double operator()(double q) const {
        if (x.empty()) throw EvaluationFailure("empty sample table");
        if (q <= x.front()) return v.front();
        if (q >= x.back()) return v.back();
        auto it = std::upper_bound(x.begin(), x.end(), q);
        size_t i = static_cast<size_t>(it - x.begin());
        double w = (q - x[i - 1]) / (x[i] - x[i - 1]);
        return (1.0 - w) * v[i - 1] + w * v[i];
    }
};

// A coefficient function: constant, closed-form expression, or sampled table.
class Coefficient {
  public:
    Coefficient() : repr_(0.0) {}
    Coefficient(double c) : repr_(c) {}
    Coefficient(Expr e) : repr_(std::move(e)) {}
    Coefficient(SampleTable t) : repr_(std::move(t)) {}

    static Coefficient expression(const std::string& text, const std::string& var = "x") {
        return Coefficient(Expr::parse(text, var));
    }

    double operator()(double q) const {
        if (auto* c = std::get_if<double>(&repr_)) return *c;
        if (auto* e = std::get_if<Expr>(&repr_)) return (*e)(q);
        return std::get<SampleTable>(repr_)(q);
    }

    bool is_constant() const { return std::holds_alternative<double>(repr_); }
    bool is_expression() const { return std::holds_alternative<Expr>(repr_); }
    bool is_samples() const { return std::holds_alternative<SampleTable>(repr_); }

    const Expr& expr() const { return std::get<Expr>(repr_); }
    const SampleTable& samples() const { return std::get<SampleTable>(repr_); }
    double constant_value() const { return std::get<double>(repr_); }

    // d/dq; analytic for expressions and constants, centered difference for tables.
    double derivative_at(double q, double h = 1e-6) const {
        if (std::holds_alternative<double>(repr_)) return 0.0;
        if (auto* e = std::get_if<Expr>(&repr_)) return e->derivative()(q);
        return ((*this)(q + h) - (*this)(q - h)) / (2.0 * h);
    }

  private:
    std::variant<double, Expr, SampleTable> repr_;
};

} // namespace hypiss

#endif
