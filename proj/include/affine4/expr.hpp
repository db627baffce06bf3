#pragma once

// Closed-form expression language for curve and surface definitions.
//
//   expr     := term (('+' | '-') term)*
//   term     := unary (('*' | '/') unary)*
//   unary    := '-' unary | power
//   power    := atom ('^' exponent)?
//   exponent := literal ('^' exponent)?          (folded to a single literal, right-assoc)
//   literal  := ['-'] NUMBER | '(' literal ')'
//   atom     := NUMBER | 'u' | 'v' | FUNC '(' expr ')' | '(' expr ')'
//   FUNC     := sin | cos | tan | exp | ln | sqrt | sinh | cosh
//
// Unary minus binds looser than '^', so -u^2 is -(u^2). There is no implicit
// multiplication.

#include <affine4/errors.hpp>
#include <affine4/jet.hpp>

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace affine4 {

enum class Variable { u, v };
enum class BinaryOp { add, sub, mul, div, pow };
enum class NodeKind { literal, variable, negate, binary, call };

class Ast {
public:
    Ast() : Ast(literal(0.0)) {}

    static Ast literal(double x) { return Ast(make(NodeKind::literal, [&](Node& n) { n.number = x; })); }
    static Ast variable(Variable v) { return Ast(make(NodeKind::variable, [&](Node& n) { n.var = v; })); }
    static Ast negate(Ast a) {
        return Ast(make(NodeKind::negate, [&](Node& n) { n.lhs = std::move(a.root_); }));
    }
    static Ast binary(BinaryOp op, Ast a, Ast b) {
        return Ast(make(NodeKind::binary, [&](Node& n) {
            n.op = op;
            n.lhs = std::move(a.root_);
            n.rhs = std::move(b.root_);
        }));
    }
    static Ast call(Elementary f, Ast a) {
        return Ast(make(NodeKind::call, [&](Node& n) {
            n.func = f;
            n.lhs = std::move(a.root_);
        }));
    }

    NodeKind kind() const { return root_->kind; }
    double number() const { return root_->number; }
    Variable var() const { return root_->var; }
    BinaryOp op() const { return root_->op; }
    Elementary func() const { return root_->func; }
    Ast lhs() const { return Ast(root_->lhs); }
    Ast rhs() const { return Ast(root_->rhs); }

    bool uses(Variable v) const {
        switch (kind()) {
            case NodeKind::literal: return false;
            case NodeKind::variable: return var() == v;
            case NodeKind::negate:
            case NodeKind::call: return lhs().uses(v);
            case NodeKind::binary: return lhs().uses(v) || rhs().uses(v);
        }
        return false;
    }

    /// Structural equality; literals compare bitwise-equal as doubles.
    friend bool operator==(const Ast& a, const Ast& b) {
        if (a.root_ == b.root_) return true;
        if (a.kind() != b.kind()) return false;
        switch (a.kind()) {
            case NodeKind::literal: return a.number() == b.number();
            case NodeKind::variable: return a.var() == b.var();
            case NodeKind::negate: return a.lhs() == b.lhs();
            case NodeKind::call: return a.func() == b.func() && a.lhs() == b.lhs();
            case NodeKind::binary:
                return a.op() == b.op() && a.lhs() == b.lhs() && a.rhs() == b.rhs();
        }
        return false;
    }

private:
    struct Node {
        NodeKind kind = NodeKind::literal;
        double number = 0.0;
        Variable var = Variable::u;
        BinaryOp op = BinaryOp::add;
        Elementary func = Elementary::sin;
        std::shared_ptr<const Node> lhs, rhs;
    };

    template <class Init>
    static std::shared_ptr<const Node> make(NodeKind k, Init&& init) {
        auto n = std::make_shared<Node>();
        n->kind = k;
        init(*n);
        return n;
    }

    explicit Ast(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

    std::shared_ptr<const Node> root_;
};

namespace detail {

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    Ast parse_all() {
        Ast a = expr();
        skip_ws();
        if (pos_ < src_.size()) fail("operator or end of input");
        return a;
    }

private:
    static constexpr const char* operand_set = "number, 'u', 'v', function call, '(' or '-'";

    [[noreturn]] void fail(const std::string& expected) const {
        std::string found = "end of input";
        if (pos_ < src_.size()) {
            found = "'";
            found += src_[pos_];
            found += "'";
        }
        throw SyntaxError(pos_, expected, found);
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool peek(char c) {
        skip_ws();
        return pos_ < src_.size() && src_[pos_] == c;
    }

    void expect(char c) {
        if (!peek(c)) fail(std::string("'") + c + "'");
        ++pos_;
    }

    Ast expr() {
        Ast a = term();
        while (true) {
            if (peek('+')) {
                ++pos_;
                a = Ast::binary(BinaryOp::add, a, term());
            } else if (peek('-')) {
                ++pos_;
                a = Ast::binary(BinaryOp::sub, a, term());
            } else {
                return a;
            }
        }
    }

    Ast term() {
        Ast a = unary();
        while (true) {
            if (peek('*')) {
                ++pos_;
                a = Ast::binary(BinaryOp::mul, a, unary());
            } else if (peek('/')) {
                ++pos_;
                a = Ast::binary(BinaryOp::div, a, unary());
            } else {
                return a;
            }
        }
    }

    Ast unary() {
        if (peek('-')) {
            ++pos_;
            return Ast::negate(unary());
        }
        return power();
    }

    Ast power() {
        Ast base = atom();
        if (peek('^')) {
            ++pos_;
            return Ast::binary(BinaryOp::pow, base, Ast::literal(exponent()));
        }
        return base;
    }

    double exponent() {
        double e = signed_literal();
        if (peek('^')) {
            ++pos_;
            e = std::pow(e, exponent());
            if (!std::isfinite(e)) fail("finite exponent");
        }
        return e;
    }

    double signed_literal() {
        if (peek('(')) {
            ++pos_;
            const double e = signed_literal();
            expect(')');
            return e;
        }
        bool neg = false;
        if (peek('-')) {
            ++pos_;
            neg = true;
        }
        skip_ws();
        if (!starts_number()) fail("numeric literal exponent");
        const double x = number();
        return neg ? -x : x;
    }

    bool starts_number() const {
        if (pos_ >= src_.size()) return false;
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c))) return true;
        return c == '.' && pos_ + 1 < src_.size() &&
               std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]));
    }

    double number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        };
        digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            digits();
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t save = pos_++;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                digits();
            } else {
                pos_ = save;
            }
        }
        const std::string text(src_.substr(start, pos_ - start));
        const double x = std::strtod(text.c_str(), nullptr);
        if (!std::isfinite(x)) {
            pos_ = start;
            fail("finite numeric literal");
        }
        return x;
    }

    Ast atom() {
        skip_ws();
        if (pos_ >= src_.size()) fail(operand_set);
        const char c = src_[pos_];
        if (starts_number()) return Ast::literal(number());
        if (c == '(') {
            ++pos_;
            Ast a = expr();
            expect(')');
            return a;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            const std::string_view word = src_.substr(start, pos_ - start);
            if (word == "u") return Ast::variable(Variable::u);
            if (word == "v") return Ast::variable(Variable::v);
            static constexpr std::array funcs{Elementary::sin,  Elementary::cos,  Elementary::tan,
                                              Elementary::exp,  Elementary::ln,   Elementary::sqrt,
                                              Elementary::sinh, Elementary::cosh};
            for (Elementary f : funcs) {
                if (word == name_of(f)) {
                    expect('(');
                    Ast arg = expr();
                    expect(')');
                    return Ast::call(f, arg);
                }
            }
            pos_ = start;
            fail(operand_set);
        }
        fail(operand_set);
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

inline std::string format_literal(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace detail

/// Parses an expression; throws SyntaxError with the byte offset of the failure.
inline Ast parse(std::string_view source) { return detail::Parser(source).parse_all(); }

/// Fully parenthesized rendering that parses back to a structurally identical tree.
inline std::string to_string(const Ast& a) {
    switch (a.kind()) {
        case NodeKind::literal: return detail::format_literal(a.number());
        case NodeKind::variable: return a.var() == Variable::u ? "u" : "v";
        case NodeKind::negate: return "(-" + to_string(a.lhs()) + ")";
        case NodeKind::call: return std::string(name_of(a.func())) + "(" + to_string(a.lhs()) + ")";
        case NodeKind::binary: {
            if (a.op() == BinaryOp::pow) {
                const double e = a.rhs().number();
                const std::string es = detail::format_literal(e);
                return "(" + to_string(a.lhs()) + "^" + (e < 0 ? "(" + es + ")" : es) + ")";
            }
            static constexpr std::array<const char*, 4> ops{" + ", " - ", " * ", " / "};
            return "(" + to_string(a.lhs()) + ops[static_cast<int>(a.op())] + to_string(a.rhs()) + ")";
        }
    }
    return {};
}

template <class T>
struct Binding {
    std::optional<T> u, v;
};

/// Evaluates over double, Jet1 or Jet2. All bound values must share a scalar kind.
template <class T>
T eval(const Ast& a, const Binding<T>& b) {
    switch (a.kind()) {
        case NodeKind::literal: {
            const T& like = b.u ? *b.u : (b.v ? *b.v : T{});
            return constant_like(like, a.number());
        }
        case NodeKind::variable: {
            const auto& slot = a.var() == Variable::u ? b.u : b.v;
            if (!slot) throw UnboundVariable(std::string("unbound variable ") + (a.var() == Variable::u ? "u" : "v"));
            return *slot;
        }
        case NodeKind::negate: return -eval(a.lhs(), b);
        case NodeKind::call: return apply(a.func(), eval(a.lhs(), b));
        case NodeKind::binary: {
            if (a.op() == BinaryOp::pow) return power(eval(a.lhs(), b), a.rhs().number());
            T x = eval(a.lhs(), b);
            T y = eval(a.rhs(), b);
            switch (a.op()) {
                case BinaryOp::add: return x + y;
                case BinaryOp::sub: return x - y;
                case BinaryOp::mul: return x * y;
                case BinaryOp::div: return divide(x, y);
                case BinaryOp::pow: break;
            }
        }
    }
    throw Error("malformed expression tree");
}

/// Curve in R^4: four components in u.
struct CurveDef {
    std::array<Ast, 4> components;
};

/// Immersion x(u, v) with an optional transversal frame (xi1, xi2).
struct SurfaceDef {
    std::array<Ast, 4> x;
    std::optional<std::array<Ast, 4>> xi1, xi2;
};

inline std::array<Ast, 4> parse_components(const std::array<std::string, 4>& src) {
    return {parse(src[0]), parse(src[1]), parse(src[2]), parse(src[3])};
}

inline CurveDef make_curve(const std::array<Ast, 4>& comps) {
    for (const Ast& c : comps)
        if (c.uses(Variable::v)) throw InputError("curve components may only use the variable u");
    return CurveDef{comps};
}

inline CurveDef parse_curve(const std::array<std::string, 4>& src) { return make_curve(parse_components(src)); }

inline SurfaceDef make_surface(std::array<Ast, 4> x, std::optional<std::array<Ast, 4>> xi1,
                               std::optional<std::array<Ast, 4>> xi2) {
    if (xi1.has_value() != xi2.has_value())
        throw InputError("transversal fields xi1 and xi2 must be given together");
    return SurfaceDef{std::move(x), std::move(xi1), std::move(xi2)};
}

}  // namespace affine4
