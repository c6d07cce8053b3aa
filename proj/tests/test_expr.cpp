#include <catch2/catch_amalgamated.hpp>

#include "harmonic/expr.hpp"

using namespace harmonic;

namespace {
const std::map<std::string, double> kNoBindings;
}

TEST_CASE("constant expressions evaluate exactly") {
    REQUIRE(std::abs(ExprParser::parse_constant("2*pi") - Complex(2 * kPi, 0)) < 1e-15);
    REQUIRE(std::abs(ExprParser::parse_constant("i^2") - Complex(-1, 0)) < 1e-15);
    REQUIRE(std::abs(ExprParser::parse_constant("sqrt(4)") - Complex(2, 0)) < 1e-15);
    REQUIRE(std::abs(ExprParser::parse_constant("-3/4 + 1/4") - Complex(-0.5, 0)) < 1e-15);
    REQUIRE(std::abs(ExprParser::parse_constant("1.5e-2") - Complex(0.015, 0)) < 1e-18);
    // Cube of a primitive cube root of unity is 1.
    REQUIRE(std::abs(ExprParser::parse_constant("root_of_unity(3,1)^3") - Complex(1, 0)) <
            1e-14);
    REQUIRE(std::abs(ExprParser::parse_constant("conj(i)") - Complex(0, -1)) < 1e-15);
}

TEST_CASE("rational expressions match direct arithmetic") {
    ExprParser p("(z^2 + 1)/(z - 2) - 3*z", kNoBindings, std::nullopt);
    WValue v = p.parse();
    REQUIRE_FALSE(v.has_w());
    for (Complex z : {Complex(0.3, 0.7), Complex(-1.2, 0.1), Complex(0, 3)}) {
        Complex expect = (z * z + 1.0) / (z - 2.0) - 3.0 * z;
        REQUIRE(std::abs(eval_rational(v.a, z) - expect) < 1e-12 * (1.0 + std::abs(expect)));
    }
}

TEST_CASE("parameter bindings substitute numeric values") {
    std::map<std::string, double> bind{{"lambda", 2.5}, {"n", 3.0}};
    ExprParser p("lambda*z^2 + n", bind, std::nullopt);
    WValue v = p.parse();
    Complex z(1.0, -2.0);
    REQUIRE(std::abs(eval_rational(v.a, z) - (2.5 * z * z + 3.0)) < 1e-13);
}

TEST_CASE("unknown names raise UnresolvedParam") {
    ExprParser p("mu*z", kNoBindings, std::nullopt);
    REQUIRE_THROWS_AS(p.parse(), UnresolvedParam);
}

TEST_CASE("syntax errors raise SchemaError") {
    ExprParser bad("z +", kNoBindings, std::nullopt);
    REQUIRE_THROWS_AS(bad.parse(), SchemaError);
    ExprParser trailing("z 4", kNoBindings, std::nullopt);
    REQUIRE_THROWS_AS(trailing.parse(), SchemaError);
    ExprParser frac_pow("z^(1/2)", kNoBindings, std::nullopt);
    REQUIRE_THROWS_AS(frac_pow.parse(), SchemaError);
}

TEST_CASE("w obeys w^2 = p on the curve") {
    // p = z^3 - z
    CRational p_rat(CPoly({{0, 0}, {-1, 0}, {0, 0}, {1, 0}}), CPoly::constant(1));
    auto mk = [&](const std::string& s) {
        ExprParser p(s, kNoBindings, p_rat);
        return p.parse();
    };
    Complex z(1.7, 0.4);
    Complex pz = eval_rational(p_rat, z);
    Complex w = std::sqrt(pz);  // either branch works for identities

    WValue sq = mk("w*w");
    REQUIRE_FALSE(sq.has_w());
    REQUIRE(std::abs(eval_rational(sq.a, z) - pz) < 1e-12 * std::abs(pz));

    WValue prod = mk("(1+w)*(1-w)");
    REQUIRE_FALSE(prod.has_w());
    REQUIRE(std::abs(eval_rational(prod.a, z) - (1.0 - pz)) < 1e-12 * (1.0 + std::abs(pz)));

    WValue inv = mk("1/w");
    REQUIRE(inv.has_w());
    Complex direct = 1.0 / w;
    Complex via = eval_rational(inv.a, z) + eval_rational(inv.b, z) * w;
    REQUIRE(std::abs(via - direct) < 1e-12 * std::abs(direct));

    WValue mixed = mk("(z + w)/(z - w)");
    Complex expect = (z + w) / (z - w);
    Complex got = eval_rational(mixed.a, z) + eval_rational(mixed.b, z) * w;
    REQUIRE(std::abs(got - expect) < 1e-11 * std::abs(expect));
}
