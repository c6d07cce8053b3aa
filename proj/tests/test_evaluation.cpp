#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "harmonic/evaluation.hpp"
#include "harmonic/periods.hpp"

using namespace harmonic;
using Catch::Approx;

namespace {

CRational rat(std::vector<Complex> num, std::vector<Complex> den = {{1, 0}}) {
    return CRational(CPoly(std::move(num)), CPoly(std::move(den)));
}

SurfaceData sphere_surface(CRational a1, CRational a2, CRational a3) {
    SurfaceData s;
    s.label = "test-sphere";
    s.domain = Domain::sphere();
    s.forms[0].a = std::move(a1);
    s.forms[1].a = std::move(a2);
    s.forms[2].a = std::move(a3);
    s.basepoint = SheetPoint{Complex(1, 0), +1};
    return s;
}

// phi = ((z^2-1)/(2z^2), -i(z^2+1)/(2z^2), 1/z) dz: the surface of
// revolution rho = cosh(x3), parametrized by z = r e^{i theta} with
// f = (((r+1/r)/2) cos t, ((r+1/r)/2) sin t, log r).
SurfaceData catenoid_like() {
    SurfaceData s = sphere_surface(rat({{-0.5, 0}, {0, 0}, {0.5, 0}}, {{0, 0}, {0, 0}, {1, 0}}),
                                   rat({{0, -0.5}, {0, 0}, {0, -0.5}}, {{0, 0}, {0, 0}, {1, 0}}),
                                   rat({{1, 0}}, {{0, 0}, {1, 0}}));
    s.punctures = {SurfacePoint::finite(Complex(0, 0)), SurfacePoint::infinity()};
    return s;
}

// phi = ((z^{k-2}+1)/(k(z^k-1)), i(z^{k-2}-1)/(k(z^k-1)), z^{k-1}/(z^k-1)^2) dz
// with simple-log ends at the k-th roots of unity.
SurfaceData horn_ring(int k) {
    std::vector<Complex> zk(std::size_t(k) + 1, Complex(0));
    zk[0] = Complex(-1);
    zk[std::size_t(k)] = Complex(1);  // z^k - 1
    std::vector<Complex> n1(std::size_t(k) - 1, Complex(0));
    n1[0] = Complex(1);
    n1[std::size_t(k) - 2] = n1[std::size_t(k) - 2] + Complex(1);  // z^{k-2} + 1
    std::vector<Complex> n2(std::size_t(k) - 1, Complex(0));
    n2[0] = Complex(0, -1);
    n2[std::size_t(k) - 2] = n2[std::size_t(k) - 2] + Complex(0, 1);  // i(z^{k-2} - 1)
    std::vector<Complex> n3(std::size_t(k), Complex(0));
    n3[std::size_t(k) - 1] = Complex(1);  // z^{k-1}
    CPoly den(zk);
    SurfaceData s;
    s.label = "horn-ring";
    s.domain = Domain::sphere();
    s.forms[0].a = CRational(CPoly(n1), Complex(double(k)) * den);
    s.forms[1].a = CRational(CPoly(n2), Complex(double(k)) * den);
    s.forms[2].a = CRational(CPoly(n3), den * den);
    for (int j = 0; j < k; ++j)
        s.punctures.push_back(
            SurfacePoint::finite(std::exp(Complex(0, 2.0 * kPi * j / double(k)))));
    s.basepoint = SheetPoint{Complex(0, 0), +1};
    return s;
}

const double kLam = 0.45694658104446363;  // closes both cycles of the torus below

SurfaceData closed_torus() {
    SurfaceData s;
    s.label = "torus-one-end";
    s.domain = Domain::hyperelliptic(CPoly({{0, 0}, {-1, 0}, {0, 0}, {1, 0}}),
                                     Complex(2, 0), Complex(std::sqrt(6.0), 0));
    s.forms[0].b = rat({{kLam, 0}, {1, 0}});
    s.forms[1].b = rat({{0, -kLam}, {0, 1}});
    s.forms[2].a = rat({{1, 0}});
    s.punctures = {SurfacePoint::infinity()};
    s.basepoint = SheetPoint{Complex(2, 0), +1};
    return s;
}

}  // namespace

// --- closed-form evaluation on the sphere ------------------------------------

TEST_CASE("catenoid-like surface evaluates to the classical parametrization") {
    SurfaceData s = catenoid_like();
    Evaluator ev(s);
    REQUIRE(ev.closed_form() != nullptr);
    for (double r : {0.3, 1.0, 2.5}) {
        for (double t : {0.1, 1.7, 3.9}) {
            Complex z = std::polar(r, t);
            Vec3 raw = ev.closed_form()->raw(z);
            double rho = 0.5 * (r + 1.0 / r);
            REQUIRE(raw[0] == Approx(rho * std::cos(t)).margin(1e-13));
            REQUIRE(raw[1] == Approx(rho * std::sin(t)).margin(1e-13));
            REQUIRE(raw[2] == Approx(std::log(r)).margin(1e-13));
        }
    }
    // value() is raw relative to the basepoint f(1) = (1, 0, 0).
    Vec3 v = ev.value(Complex(std::exp(1.0), 0));
    REQUIRE(v[0] == Approx(std::cosh(1.0) - 1.0).epsilon(1e-12));
    REQUIRE(v[2] == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("closed form agrees with direct path integration on the sphere") {
    SurfaceData s = catenoid_like();
    Evaluator ev(s);
    std::vector<Complex> targets{Complex(2, 1), Complex(-1, 2),  Complex(0.2, 0.4),
                                 Complex(-3, -0.5), Complex(0.5, -2)};
    for (Complex z : targets) {
        PathIntegral pi = integrate_polyline(s, route(s, s.basepoint.z, z), +1);
        Vec3 via_quad{pi.value[0].real(), pi.value[1].real(), pi.value[2].real()};
        Vec3 via_form = ev.value(z);
        REQUIRE(norm(via_quad - via_form) < 1e-9);
    }
}

TEST_CASE("horn ring: the unit circle maps to the plane x3 = 1/(2k)") {
    for (int k : {3, 4, 7}) {
        SurfaceData s = horn_ring(k);
        Evaluator ev(s);
        for (double t : {0.3, 1.1, 2.0, 4.4}) {
            Vec3 raw = ev.closed_form()->raw(std::polar(1.0, t));
            REQUIRE(raw[2] == Approx(1.0 / (2.0 * k)).epsilon(1e-12));
        }
        // Inside the unit disk the height stays above the symmetry plane.
        for (double r : {0.2, 0.6, 0.9}) {
            Vec3 raw = ev.closed_form()->raw(std::polar(r, 0.8));
            REQUIRE(raw[2] >= 1.0 / (2.0 * k) - 1e-12);
        }
    }
}

TEST_CASE("evaluation at infinity works exactly when the forms decay") {
    SurfaceData s = horn_ring(4);
    Evaluator ev(s);
    Vec3 inf = ev.closed_form()->raw_at_infinity();
    REQUIRE(inf[2] == Approx(0.0).margin(1e-13));
    // Compare with a far-away sample; log terms cancel to O(1/R).
    Vec3 far = ev.closed_form()->raw(Complex(9e5, 4e5));
    REQUIRE(norm(far - inf) < 1e-5);

    // The catenoid-like surface has log growth: no finite limit.
    SurfaceData cat = catenoid_like();
    REQUIRE_THROWS_AS(SphereEvaluator(cat).raw_at_infinity(), DomainError);
    // And closed-form evaluation refuses non-sphere data outright.
    SurfaceData torus = closed_torus();
    REQUIRE_THROWS_AS(SphereEvaluator(torus), DomainError);
}

// --- evaluation on the curve --------------------------------------------------

TEST_CASE("torus values are path independent once periods are closed") {
    SurfaceData s = closed_torus();
    Evaluator ev(s);
    Complex target(0.5, 1.5);
    Vec3 direct = ev.value(SheetPoint{target, +1});

    // A detour that winds once around the finite cut before heading to the
    // target adds one full cycle; the real parts must not change.
    std::vector<Complex> detour{Complex(2, 0),      Complex(0.5, 0.4),  Complex(-1.4, 0.4),
                                Complex(-1.4, -0.4), Complex(0.5, -0.4), Complex(0.5, 0.4),
                                Complex(2, 0)};
    PathIntegral loop = integrate_polyline(s, detour, +1);
    REQUIRE(loop.end_sheet == +1);
    PathIntegral tail = integrate_polyline(s, route(s, Complex(2, 0), target), loop.end_sheet);
    Vec3 via_detour{(loop.value[0] + tail.value[0]).real(),
                    (loop.value[1] + tail.value[1]).real(),
                    (loop.value[2] + tail.value[2]).real()};
    REQUIRE(norm(direct - via_detour) < 1e-8);
}

TEST_CASE("unclosed parameters leave a visible period gap") {
    SurfaceData s = closed_torus();
    s.forms[0].b = rat({{0, 0}, {1, 0}});  // l1 = 0: cut cycle no longer closes
    std::vector<Complex> cycle{Complex(-1.4, -0.3), Complex(0.5, -0.3), Complex(0.5, 0.3),
                               Complex(-1.4, 0.3),  Complex(-1.4, -0.3)};
    PathIntegral pi = integrate_polyline(s, cycle, +1);
    REQUIRE(pi.end_sheet == +1);
    // |period| = B(3/4,1/2) for b = z over this cycle.
    REQUIRE(std::abs(pi.value[0].real()) == Approx(2.39628046947118441).epsilon(1e-9));
}

TEST_CASE("evaluator reaches points on the far sheet") {
    SurfaceData s = closed_torus();
    Evaluator ev(s);
    Complex target(-2, 0);
    Vec3 top = ev.value(SheetPoint{target, +1});
    Vec3 bottom = ev.value(SheetPoint{target, -1});
    REQUIRE(norm(top - bottom) > 0.1);

    // Manual route that dives through the finite cut once.
    std::vector<Complex> dive{Complex(2, 0), Complex(-0.5, 0.8), Complex(-0.5, -0.8),
                              Complex(-2, 0)};
    PathIntegral pi = integrate_polyline(s, dive, +1);
    REQUIRE(pi.end_sheet == -1);
    Vec3 manual{pi.value[0].real(), pi.value[1].real(), pi.value[2].real()};
    REQUIRE(norm(manual - bottom) < 1e-8);
}

// --- metric samples -----------------------------------------------------------

TEST_CASE("flat data has zero curvature and unit metric") {
    SurfaceData s = sphere_surface(rat({{1, 0}}), rat({{0, 1}}), rat({{0, 0}}));
    MetricSample m = metric_sample(s, SheetPoint{Complex(0.3, 0.7), +1});
    REQUIRE_FALSE(m.degenerate);
    REQUIRE(m.E == Approx(1.0));
    REQUIRE(m.G == Approx(1.0));
    REQUIRE(m.F == Approx(0.0).margin(1e-15));
    REQUIRE(m.gauss == Approx(0.0).margin(1e-15));
    REQUIRE(m.density == Approx(0.0).margin(1e-15));
}

TEST_CASE("catenoid-like curvature matches -1/cosh^4(log r)") {
    SurfaceData s = catenoid_like();
    FormJets jets(s);
    MetricSample neck = metric_sample(s, jets, SheetPoint{Complex(1, 0), +1});
    REQUIRE(neck.E == Approx(1.0));
    REQUIRE(neck.G == Approx(1.0));
    REQUIRE(neck.F == Approx(0.0).margin(1e-15));
    REQUIRE(neck.gauss == Approx(-1.0).epsilon(1e-12));

    for (double r : {0.5, 2.0, 3.0}) {
        for (double t : {0.0, 0.9, 2.5}) {
            MetricSample m = metric_sample(s, jets, SheetPoint{std::polar(r, t), +1});
            double c = std::cosh(std::log(r));
            REQUIRE(m.gauss == Approx(-1.0 / (c * c * c * c)).epsilon(1e-10));
            REQUIRE(m.gauss <= 0.0);
            REQUIRE(m.density >= 0.0);
        }
    }
}

TEST_CASE("metric derivatives agree with finite differences of f") {
    SurfaceData s = closed_torus();
    Evaluator ev(s);
    FormJets jets(s);
    const double h = 1e-5;
    for (Complex z : {Complex(0.5, 0.9), Complex(-2.0, 0.7), Complex(1.5, -1.1)}) {
        MetricSample m = metric_sample(s, jets, SheetPoint{z, +1});
        Vec3 fxd = (1.0 / (2 * h)) * (ev.value(SheetPoint{z + h, +1}) - ev.value(SheetPoint{z - h, +1}));
        Vec3 fyd = (1.0 / (2 * h)) *
                   (ev.value(SheetPoint{z + Complex(0, h), +1}) - ev.value(SheetPoint{z - Complex(0, h), +1}));
        REQUIRE(norm(fxd - m.fx) < 1e-7);
        REQUIRE(norm(fyd - m.fy) < 1e-7);
    }
}

TEST_CASE("rank-deficient data is flagged degenerate, not crashed on") {
    SurfaceData s = sphere_surface(rat({{1, 0}}), rat({{1, 0}}), rat({{1, 0}}));
    MetricSample m = metric_sample(s, SheetPoint{Complex(0.2, 0.2), +1});
    REQUIRE(m.degenerate);
    REQUIRE(m.density == 0.0);
}

TEST_CASE("evaluated maps are harmonic: discrete Laplacian vanishes") {
    SurfaceData tor = closed_torus();
    Evaluator ev(tor);
    const double h = 1e-3;
    for (Complex z : {Complex(0.4, 1.1), Complex(-1.8, 0.6)}) {
        Vec3 lap = ev.value(SheetPoint{z + h, +1}) + ev.value(SheetPoint{z - h, +1}) +
                   ev.value(SheetPoint{z + Complex(0, h), +1}) +
                   ev.value(SheetPoint{z - Complex(0, h), +1}) -
                   4.0 * ev.value(SheetPoint{z, +1});
        REQUIRE(norm(lap) / (h * h) < 1e-5);
    }

    SurfaceData cat = catenoid_like();
    Evaluator ec(cat);
    for (Complex z : {Complex(1.3, 0.4), Complex(-0.6, 0.8)}) {
        Vec3 lap = ec.value(z + h) + ec.value(z - h) + ec.value(z + Complex(0, h)) +
                   ec.value(z - Complex(0, h)) - 4.0 * ec.value(z);
        REQUIRE(norm(lap) / (h * h) < 1e-5);
    }
}
