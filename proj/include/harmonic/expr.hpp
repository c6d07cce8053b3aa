#pragma once

// Recursive-descent parser for the small expression language shared by the
// CLI --form flag and fixture files:
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-' factor | power
//   power  := atom ('^' factor)?          exponent must be a constant integer
//   atom   := number | 'z' | 'w' | 'i' | 'pi' | name | name '(' expr,... ')'
//           | '(' expr ')'
//
// Names resolve through a parameter binding map; sqrt(x) and
// root_of_unity(k,j) evaluate to exact-as-possible constants at parse time.
// Values live in the quadratic extension a(z) + b(z)*w with w^2 = p(z);
// using w without a branch polynomial in scope is an error.

#include <cctype>
#include <map>
#include <optional>
#include <string>

#include "harmonic/core.hpp"
#include "harmonic/rational.hpp"

namespace harmonic {

struct WValue {
    CRational a;  // plain part
    CRational b;  // coefficient of w
    bool has_w() const { return !b.is_zero(); }
};

class ExprParser {
public:
    ExprParser(std::string text, const std::map<std::string, double>& bindings,
               std::optional<CRational> branch_poly)
        : text_(std::move(text)), bindings_(bindings), branch_(std::move(branch_poly)) {}

    WValue parse() {
        pos_ = 0;
        WValue v = parse_expr();
        skip_ws();
        if (pos_ != text_.size()) fail("trailing input");
        return v;
    }

    // Convenience: parse an expression that must be a plain constant.
    static Complex parse_constant(const std::string& text,
                                  const std::map<std::string, double>& bindings = {}) {
        ExprParser p(text, bindings, std::nullopt);
        WValue v = p.parse();
        return p.as_constant(v);
    }

    Complex as_constant(const WValue& v) const {
        if (v.has_w() || !v.a.is_poly() || v.a.num.degree() > 0)
            fail("expected a constant expression");
        Complex c = v.a.num.is_zero() ? Complex(0) : v.a.num.coeffs[0];
        return c / v.a.den.coeffs[0];
    }

private:
    std::string text_;
    std::size_t pos_ = 0;
    const std::map<std::string, double>& bindings_;
    std::optional<CRational> branch_;

    [[noreturn]] void fail(const std::string& msg) const {
        throw SchemaError("expression error at offset " + std::to_string(pos_) +
                          " in \"" + text_ + "\": " + msg);
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

    WValue parse_expr() {
        WValue v = parse_term();
        while (true) {
            if (eat('+')) {
                WValue r = parse_term();
                v = {v.a + r.a, v.b + r.b};
            } else if (eat('-')) {
                WValue r = parse_term();
                v = {v.a - r.a, v.b - r.b};
            } else {
                return v;
            }
        }
    }

    WValue parse_term() {
        WValue v = parse_factor();
        while (true) {
            if (eat('*')) {
                v = mul(v, parse_factor());
            } else if (eat('/')) {
                v = mul(v, invert(parse_factor()));
            } else {
                return v;
            }
        }
    }

    WValue parse_factor() {
        if (eat('-')) {
            WValue v = parse_factor();
            return {Complex(-1) * v.a, Complex(-1) * v.b};
        }
        return parse_power();
    }

    WValue parse_power() {
        WValue base = parse_atom();
        if (!eat('^')) return base;
        WValue e = parse_factor();
        Complex c = as_constant(e);
        double k = c.real();
        if (std::abs(c.imag()) > 1e-12 || std::abs(k - std::round(k)) > 1e-9)
            fail("exponent must be an integer");
        return pow_int(base, int(std::lround(k)));
    }

    WValue parse_atom() {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of input");
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            WValue v = parse_expr();
            if (!eat(')')) fail("missing ')'");
            return v;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_name();
        fail("unexpected character");
    }

    WValue parse_number() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
            ++pos_;
        if (pos_ + 1 < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E') &&
            (std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) ||
             ((text_[pos_ + 1] == '+' || text_[pos_ + 1] == '-') && pos_ + 2 < text_.size()))) {
            pos_ += 2;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        }
        double v = std::stod(text_.substr(start, pos_ - start));
        return scalar(Complex(v));
    }

    WValue parse_name() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        std::string name = text_.substr(start, pos_ - start);
        if (name == "z") return {CRational::identity(), CRational()};
        if (name == "w") {
            if (!branch_) fail("'w' used without a branch curve in scope");
            return {CRational(), CRational::constant(1)};
        }
        if (name == "i") return scalar(Complex(0, 1));
        if (name == "pi") return scalar(Complex(kPi));
        if (peek() == '(') {
            eat('(');
            std::vector<Complex> args;
            if (peek() != ')') {
                args.push_back(as_constant(parse_expr()));
                while (eat(',')) args.push_back(as_constant(parse_expr()));
            }
            if (!eat(')')) fail("missing ')' after arguments");
            return scalar(call(name, args));
        }
        auto it = bindings_.find(name);
        if (it == bindings_.end()) throw UnresolvedParam("unbound parameter '" + name + "'");
        return scalar(Complex(it->second));
    }

    Complex call(const std::string& name, const std::vector<Complex>& args) {
        if (name == "sqrt") {
            if (args.size() != 1) fail("sqrt takes one argument");
            return std::sqrt(args[0]);
        }
        if (name == "root_of_unity") {
            if (args.size() != 2) fail("root_of_unity takes (order, index)");
            double k = args[0].real(), j = args[1].real();
            return std::polar(1.0, 2.0 * kPi * j / k);
        }
        if (name == "conj") {
            if (args.size() != 1) fail("conj takes one argument");
            return std::conj(args[0]);
        }
        fail("unknown function '" + name + "'");
    }

    static WValue scalar(Complex c) { return {CRational::constant(c), CRational()}; }

    WValue mul(const WValue& x, const WValue& y) {
        CRational a = x.a * y.a;
        CRational b = x.a * y.b + x.b * y.a;
        if (x.has_w() && y.has_w()) {
            if (!branch_) fail("'w' used without a branch curve in scope");
            a = a + x.b * y.b * (*branch_);
        }
        return {a, b};
    }

    WValue invert(const WValue& x) {
        if (!x.has_w()) {
            if (x.a.is_zero()) fail("division by zero expression");
            return {CRational::constant(1) / x.a, CRational()};
        }
        // 1/(a+bw) = (a-bw)/(a^2 - b^2 p)
        CRational norm = x.a * x.a - x.b * x.b * (*branch_);
        if (norm.is_zero()) fail("division by zero expression");
        return {x.a / norm, Complex(-1) * x.b / norm};
    }

    WValue pow_int(const WValue& base, int k) {
        if (k == 0) return scalar(Complex(1));
        WValue b = k > 0 ? base : invert(base);
        WValue acc = b;
        for (int n = 1; n < std::abs(k); ++n) acc = mul(acc, b);
        return acc;
    }
};

}  // namespace harmonic
