#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "harmonic/rational.hpp"

using namespace harmonic;

namespace {
CRational make_r(std::initializer_list<Complex> num, std::initializer_list<Complex> den) {
    return CRational(CPoly(std::vector<Complex>(num)), CPoly(std::vector<Complex>(den)));
}
}  // namespace

TEST_CASE("rational evaluation matches direct arithmetic") {
    // r(z) = (1 + 2z) / (z^2 + 1), checked at z = 2i is a pole; use 2i + 0.5
    CRational r = make_r({{1, 0}, {2, 0}}, {{1, 0}, {0, 0}, {1, 0}});
    Complex z(0.5, 2.0);
    Complex expect = (Complex(1, 0) + Complex(2, 0) * z) / (z * z + Complex(1, 0));
    REQUIRE(std::abs(eval_rational(r, z) - expect) < 1e-13 * std::abs(expect));
    REQUIRE_THROWS_AS(eval_rational(r, Complex(0, 1)), PoleHit);
}

TEST_CASE("field operations agree with pointwise arithmetic") {
    CRational a = make_r({{1, 0}, {0, 1}}, {{0, 0}, {1, 0}});            // (1 + iz)/z
    CRational b = make_r({{2, 0}}, {{1, 0}, {0, 0}, {0, 0}, {1, 0}});    // 2/(1 + z^3)
    Complex z(1.25, -0.75);
    Complex av = eval_rational(a, z), bv = eval_rational(b, z);
    REQUIRE(std::abs(eval_rational(a + b, z) - (av + bv)) < 1e-12);
    REQUIRE(std::abs(eval_rational(a - b, z) - (av - bv)) < 1e-12);
    REQUIRE(std::abs(eval_rational(a * b, z) - (av * bv)) < 1e-12);
    REQUIRE(std::abs(eval_rational(a / b, z) - (av / bv)) < 1e-12);
}

TEST_CASE("derivative matches finite differences away from poles") {
    CRational r = make_r({{0, 0}, {0, 0}, {1, 0}}, {{-1, 0}, {0, 0}, {0, 0}, {1, 0}});
    CRational dr = derivative(r);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    int checked = 0;
    while (checked < 10) {
        Complex z(u(rng), u(rng));
        try {
            double h = 1e-6;
            Complex fd =
                (eval_rational(r, z + h) - eval_rational(r, z - h)) / Complex(2 * h, 0);
            Complex dv = eval_rational(dr, z);
            REQUIRE(std::abs(dv - fd) < 1e-5 * (1.0 + std::abs(dv)));
            ++checked;
        } catch (const PoleHit&) {
            continue;
        }
    }
}

TEST_CASE("residue of z^(k-1)/(z^k - 1) at each root of unity is 1/k") {
    // d/dz log(z^k - 1) = k z^(k-1)/(z^k - 1); residue at each simple root
    // of the denominator is 1/k * k / (k * root^(k-1)) ... check directly:
    // res_{z=r} z^2/(z^3-1) = r^2 / (3 r^2) = 1/3.
    CRational r = make_r({{0, 0}, {0, 0}, {1, 0}}, {{-1, 0}, {0, 0}, {0, 0}, {1, 0}});
    for (int j = 0; j < 3; ++j) {
        Complex root = std::polar(1.0, 2.0 * kPi * j / 3.0);
        Complex res = residue(r, root);
        REQUIRE(std::abs(res - Complex(1.0 / 3.0, 0)) < 1e-10);
    }
}

TEST_CASE("residue agrees with a small-circle trapezoid contour") {
    // Higher-order pole: r = (z^2 + 2) / ((z - 1)^3 (z + i)).
    CPoly den(std::vector<Complex>{Complex(1, 0)});
    for (int i = 0; i < 3; ++i) den = den * CPoly({{-1, 0}, {1, 0}});
    den = den * CPoly({{0, 1}, {1, 0}});
    CRational r(CPoly({{2, 0}, {0, 0}, {1, 0}}), den);
    Complex center(1, 0);
    Complex res = residue(r, center);
    // Trapezoid rule on |z - 1| = 0.25 is spectrally accurate.
    int n = 512;
    double rad = 0.25;
    Complex integral(0.0);
    for (int j = 0; j < n; ++j) {
        double t = 2.0 * kPi * j / n;
        Complex z = center + std::polar(rad, t);
        Complex dz = Complex(0, 1) * std::polar(rad, t) * Complex(2.0 * kPi / n, 0);
        integral += eval_rational(r, z) * dz;
    }
    Complex res_contour = integral / Complex(0, 2.0 * kPi);
    REQUIRE(std::abs(res - res_contour) < 1e-10);
}

TEST_CASE("laurent expansion re-sums to the function near a pole") {
    CRational r = make_r({{1, 0}, {1, 0}}, {{0, 0}, {0, 0}, {1, 0}});  // (1+z)/z^2
    LaurentExpansion le = laurent_function_at(r, Complex(0, 0), 8);
    REQUIRE(le.min_degree == -2);
    Complex u(0.05, 0.02);
    Complex direct = eval_rational(r, u);
    REQUIRE(std::abs(le.eval(u) - direct) < 1e-9 * std::abs(direct));
}

TEST_CASE("form order at infinity counts the 1/zeta chart pole") {
    // In the chart zeta = 1/z a rational form a(z) dz has order
    // deg(num) - deg(den) + 2 at infinity.
    struct Case {
        CRational r;
        int order;
    };
    std::vector<Case> cases;
    cases.push_back({make_r({{0, 0}, {1, 0}}, {{1, 0}}), 3});           // z dz
    cases.push_back({make_r({{1, 0}}, {{1, 0}}), 2});                   // dz
    cases.push_back({make_r({{1, 0}}, {{0, 0}, {1, 0}}), 1});           // dz/z
    cases.push_back({make_r({{1, 0}}, {{0, 0}, {0, 0}, {1, 0}}), 0});   // dz/z^2
    for (auto& c : cases) {
        LaurentExpansion le = laurent_at(c.r, Complex(0, 0), 10, true);
        int lead = le.leading_degree(1e-12 * le.scale());
        REQUIRE(-lead == c.order);
    }
}

TEST_CASE("antiderivative differentiates back to the integrand") {
    // r = (2z^3 + z) / ((z-1)^2 (z+2)) has a polynomial part, a rational
    // part, and log terms.
    CPoly den = CPoly({{-1, 0}, {1, 0}}) * CPoly({{-1, 0}, {1, 0}}) * CPoly({{2, 0}, {1, 0}});
    CRational r(CPoly({{0, 0}, {1, 0}, {0, 0}, {2, 0}}), den);
    auto [F, logs] = antiderivative(r);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-2.5, 2.5);
    int checked = 0;
    while (checked < 12) {
        Complex z(u(rng), u(rng));
        try {
            double h = 1e-6;
            auto value = [&](Complex zz) {
                Complex v = eval_rational(F, zz);
                for (auto& [p, c] : logs) v += c * std::log(zz - p);
                return v;
            };
            Complex fd = (value(z + h) - value(z - h)) / Complex(2 * h, 0);
            Complex direct = eval_rational(r, z);
            REQUIRE(std::abs(fd - direct) < 2e-5 * (1.0 + std::abs(direct)));
            ++checked;
        } catch (const PoleHit&) {
            continue;
        }
    }
    // Log coefficients are the residues.
    for (auto& [p, c] : logs) {
        REQUIRE(std::abs(c - residue(r, p)) < 1e-9);
    }
}

TEST_CASE("pure pole antiderivative has no spurious log terms") {
    CRational r = make_r({{1, 0}}, {{0, 0}, {0, 0}, {1, 0}});  // 1/z^2
    auto [F, logs] = antiderivative(r);
    REQUIRE(logs.empty());
    Complex z(0.4, 1.1);
    REQUIRE(std::abs(eval_rational(F, z) - (-1.0 / z)) < 1e-12);
}
