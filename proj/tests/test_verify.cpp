#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "harmonic/verify.hpp"

using namespace harmonic;
using Catch::Approx;

namespace {

CRational rat(std::vector<Complex> num, std::vector<Complex> den = {{1, 0}}) {
    return CRational(CPoly(std::move(num)), CPoly(std::move(den)));
}

SurfaceData catenoid_like() {
    SurfaceData s;
    s.label = "catenoid-like";
    s.domain = Domain::sphere();
    s.forms[0].a = rat({{-0.5, 0}, {0, 0}, {0.5, 0}}, {{0, 0}, {0, 0}, {1, 0}});
    s.forms[1].a = rat({{0, -0.5}, {0, 0}, {0, -0.5}}, {{0, 0}, {0, 0}, {1, 0}});
    s.forms[2].a = rat({{1, 0}}, {{0, 0}, {1, 0}});
    s.punctures = {SurfacePoint::finite(Complex(0, 0)), SurfacePoint::infinity()};
    s.basepoint = SheetPoint{Complex(1, 0), +1};
    return s;
}

// phi = (1, z + c i z^3, 1/z) dz: rank drops exactly on the real axis when
// c = 0 and nowhere when c = 1.
SurfaceData rank_family(double c) {
    SurfaceData s;
    s.label = "rank-family";
    s.domain = Domain::sphere();
    s.forms[0].a = rat({{1, 0}});
    s.forms[1].a = rat({{0, 0}, {1, 0}, {0, 0}, {0, c}});
    s.forms[2].a = rat({{1, 0}}, {{0, 0}, {1, 0}});
    s.punctures = {SurfacePoint::finite(Complex(0, 0)), SurfacePoint::infinity()};
    s.basepoint = SheetPoint{Complex(1, 0), +1};
    return s;
}

// phi = (1, i, 1/z) dz: flat horn, f = (x, y, log r).
SurfaceData flat_horn() {
    SurfaceData s;
    s.label = "flat-horn";
    s.domain = Domain::sphere();
    s.forms[0].a = rat({{1, 0}});
    s.forms[1].a = rat({{0, 1}});
    s.forms[2].a = rat({{1, 0}}, {{0, 0}, {1, 0}});
    s.punctures = {SurfacePoint::finite(Complex(0, 0)), SurfacePoint::infinity()};
    s.basepoint = SheetPoint{Complex(1, 0), +1};
    return s;
}

// phi = (1, i, (1+z)/z^2) dz: the third coordinate keeps a zero curve on
// every circle around 0, so the end never escapes.
SurfaceData pinned_end() {
    SurfaceData s;
    s.label = "pinned-end";
    s.domain = Domain::sphere();
    s.forms[0].a = rat({{1, 0}});
    s.forms[1].a = rat({{0, 1}});
    s.forms[2].a = rat({{1, 0}, {1, 0}}, {{0, 0}, {0, 0}, {1, 0}});
    s.punctures = {SurfacePoint::finite(Complex(0, 0)), SurfacePoint::infinity()};
    s.basepoint = SheetPoint{Complex(1, 0), +1};
    return s;
}

// phi = (1, z^2, z^{2n} + i) dz: embedded but bounded along a curve that
// hugs the imaginary axis at perpendicular offset |x| ~ y^{1-2n}.
SurfaceData even_graph(int n) {
    SurfaceData s;
    s.label = "even-graph";
    s.domain = Domain::sphere();
    s.forms[0].a = rat({{1, 0}});
    s.forms[1].a = rat({{0, 0}, {0, 0}, {1, 0}});
    std::vector<Complex> top(std::size_t(2 * n) + 1, Complex(0, 0));
    top[0] = Complex(0, 1);
    top[std::size_t(2 * n)] = Complex(1, 0);
    s.forms[2].a = rat(std::move(top));
    s.punctures = {SurfacePoint::infinity()};
    s.basepoint = SheetPoint{Complex(0, 0), +1};
    return s;
}

SurfaceData closed_torus() {
    const double lam = 0.45694658104446363;
    SurfaceData s;
    s.label = "torus-one-end";
    s.domain = Domain::hyperelliptic(CPoly({{0, 0}, {-1, 0}, {0, 0}, {1, 0}}),
                                     Complex(2, 0), Complex(std::sqrt(6.0), 0));
    s.forms[0].b = rat({{lam, 0}, {1, 0}});
    s.forms[1].b = rat({{0, -lam}, {0, 1}});
    s.forms[2].a = rat({{1, 0}});
    s.punctures = {SurfacePoint::infinity()};
    s.basepoint = SheetPoint{Complex(2, 0), +1};
    return s;
}

// phi = 3((z+1)/(z^3-1), i(z-1)/(z^3-1), z^2/(z^3-1)) dz: four horn ends
// (cube roots of unity and infinity), f3 = log|z^3 - 1|.
SurfaceData four_horn() {
    CPoly den({{-1, 0}, {0, 0}, {0, 0}, {1, 0}});
    SurfaceData s;
    s.label = "four-horn";
    s.domain = Domain::sphere();
    s.forms[0].a = CRational(CPoly({{3, 0}, {3, 0}}), den);
    s.forms[1].a = CRational(CPoly({{0, -3}, {0, 3}}), den);
    s.forms[2].a = CRational(CPoly({{0, 0}, {0, 0}, {3, 0}}), den);
    for (int j = 0; j < 3; ++j)
        s.punctures.push_back(SurfacePoint::finite(std::exp(Complex(0, 2.0 * kPi * j / 3.0))));
    s.punctures.push_back(SurfacePoint::infinity());
    s.basepoint = SheetPoint{Complex(0, 0), +1};
    return s;
}

// phi = (1, 1/z, 1/z^2 + i c z^k) dz with (c,k) = (1,0) embedded and
// (c,k) = (1,1) folded onto itself along the imaginary axis.
SurfaceData slab_pair(bool folded) {
    SurfaceData s;
    s.label = folded ? "slab-folded" : "slab-embedded";
    s.domain = Domain::sphere();
    s.forms[0].a = rat({{1, 0}});
    s.forms[1].a = rat({{1, 0}}, {{0, 0}, {1, 0}});
    if (folded)
        s.forms[2].a = rat({{1, 0}, {0, 0}, {0, 0}, {0, 1}}, {{0, 0}, {0, 0}, {1, 0}});
    else
        s.forms[2].a = rat({{1, 0}, {0, 0}, {0, 1}}, {{0, 0}, {0, 0}, {1, 0}});
    s.punctures = {SurfacePoint::finite(Complex(0, 0)), SurfacePoint::infinity()};
    s.basepoint = SheetPoint{Complex(1, 0), +1};
    return s;
}

TriMesh two_triangles(const std::array<Vec3, 3>& a, const std::array<Vec3, 3>& b) {
    TriMesh m;
    for (const Vec3& v : a) m.vertices.push_back(v);
    for (const Vec3& v : b) m.vertices.push_back(v);
    m.sources.assign(6, SheetPoint{Complex(0, 0), 1});
    m.normals.assign(6, Vec3{0, 0, 1});
    m.triangles = {{0, 1, 2}, {3, 4, 5}};
    return m;
}

}  // namespace

TEST_CASE("crossing triangles are detected, disjoint and adjacent ones are not") {
    TriMesh crossing = two_triangles({Vec3{0, 0, -1}, Vec3{2, 0, -1}, Vec3{0, 2, -1}},
                                     {Vec3{0.4, 0.4, 1}, Vec3{0.5, 0.4, -3}, Vec3{0.4, 0.5, 1}});
    CHECK(self_intersections(crossing).size() == 1);

    TriMesh apart = two_triangles({Vec3{0, 0, 0}, Vec3{1, 0, 0}, Vec3{0, 1, 0}},
                                  {Vec3{0, 0, 1}, Vec3{1, 0, 1}, Vec3{0, 1, 1}});
    CHECK(self_intersections(apart).empty());

    // Sharing a vertex index is not a self-intersection.
    TriMesh shared = two_triangles({Vec3{0, 0, 0}, Vec3{1, 0, 0}, Vec3{0, 1, 0}},
                                   {Vec3{0, 0, 0}, Vec3{-1, 0, 0}, Vec3{0, -1, 0}});
    shared.triangles = {{0, 1, 2}, {0, 4, 5}};
    CHECK(self_intersections(shared).empty());
}

TEST_CASE("rank-drop scan flags the degenerate family member and clears the regular one") {
    MeshRegion rg;
    rg.r_min = 0.05;
    rg.r_max = 5.0;
    rg.n_theta = 24;
    rg.puncture_radius = 0.04;

    auto bad = regularity_scan(rank_family(0.0), rg);
    REQUIRE(!bad.empty());
    for (const Witness& w : bad) {
        CHECK(w.kind == Witness::Kind::SingularPoint);
        CHECK(std::abs(w.p1.z.imag()) < 1e-3 * (1.0 + std::abs(w.p1.z)));
        CHECK(w.to_line().rfind("SingularPoint", 0) == 0);
    }

    CHECK(regularity_scan(rank_family(1.0), rg).empty());
}

TEST_CASE("circle ladder reports escaping ends") {
    SurfaceData horn = flat_horn();
    EscapeProbe p0 = properness_probe(horn, SurfacePoint::finite(Complex(0, 0)));
    CHECK(p0.escapes);
    CHECK(!p0.witness.has_value());

    EscapeProbe pinf = properness_probe(catenoid_like(), SurfacePoint::infinity());
    CHECK(pinf.escapes);
}

TEST_CASE("circle ladder reports bounded approach curves where they exist") {
    EscapeProbe pin = properness_probe(pinned_end(), SurfacePoint::finite(Complex(0, 0)));
    CHECK(!pin.escapes);
    // f is measured from the basepoint, so the stuck curve sits at the
    // basepoint offset instead of at zero.
    CHECK(pin.bound < 2.0);
    REQUIRE(pin.witness.has_value());
    CHECK(pin.witness->kind == Witness::Kind::BoundedEscape);
    CHECK(std::abs(pin.witness->p1.z) < 1e-6);
    CHECK(pin.witness->to_line().rfind("BoundedEscape", 0) == 0);

    for (int n : {2, 3}) {
        EscapeProbe pg = properness_probe(even_graph(n), SurfacePoint::infinity());
        CHECK(!pg.escapes);
        CHECK(pg.bound < 1e-3);
        REQUIRE(pg.witness.has_value());
        // The witness hugs the imaginary axis at huge radius.
        CHECK(std::abs(pg.witness->p1.z.real()) <
              1e-6 * std::abs(pg.witness->p1.z.imag()));
    }
}

TEST_CASE("circle ladder escapes on a genus-one end") {
    EscapeProbe p = properness_probe(closed_torus(), SurfacePoint::infinity(), 128, 12);
    CHECK(p.escapes);
    REQUIRE(p.circle_minima.size() == 12);
    CHECK(p.circle_minima.back() > 10.0 * p.circle_minima[2]);
}

TEST_CASE("symmetry checks accept true rigid motions and reject wrong ones") {
    SurfaceData cat = catenoid_like();

    SymmetryDescriptor rot;
    rot.map = SymmetryDescriptor::DomainMap::Rotate;
    rot.order = 6;
    rot.linear = rotation_about_x3(2.0 * kPi / 6.0);
    CHECK(check_symmetry(cat, rot).pass);

    SymmetryDescriptor inv;
    inv.map = SymmetryDescriptor::DomainMap::InvertConjugate;
    inv.linear = diag_matrix(1, 1, -1);
    CHECK(check_symmetry(cat, inv).pass);

    SymmetryDescriptor conj;
    conj.map = SymmetryDescriptor::DomainMap::Conjugate;
    conj.linear = diag_matrix(1, -1, 1);
    CHECK(check_symmetry(cat, conj).pass);

    SymmetryDescriptor wrong = conj;
    wrong.linear = diag_matrix(1, 1, 1);
    SymmetryReport rep = check_symmetry(cat, wrong);
    CHECK(!rep.pass);
    CHECK(rep.max_deviation > 1e-2);

    SurfaceData fh = four_horn();
    SymmetryDescriptor rot3;
    rot3.map = SymmetryDescriptor::DomainMap::Rotate;
    rot3.order = 3;
    rot3.linear = rotation_about_x3(2.0 * kPi / 3.0);
    CHECK(check_symmetry(fh, rot3).pass);

    SymmetryDescriptor fconj;
    fconj.map = SymmetryDescriptor::DomainMap::Conjugate;
    fconj.linear = diag_matrix(1, -1, 1);
    CHECK(check_symmetry(fh, fconj).pass);
}

TEST_CASE("symmetry checks resolve sheets on a hyperelliptic domain") {
    SurfaceData tor = closed_torus();

    SymmetryDescriptor cw;
    cw.map = SymmetryDescriptor::DomainMap::ConjugateKeepW;
    cw.linear = diag_matrix(1, -1, 1);
    CHECK(check_symmetry(tor, cw).pass);

    SymmetryDescriptor sf;
    sf.map = SymmetryDescriptor::DomainMap::SheetFlip;
    sf.linear = diag_matrix(-1, -1, 1);
    CHECK(check_symmetry(tor, sf).pass);

    SymmetryDescriptor bad = sf;
    bad.linear = diag_matrix(1, 1, 1);
    CHECK(!check_symmetry(tor, bad).pass);
}

TEST_CASE("coincident image pairs are found on the folded slab") {
    MeshRegion rg;
    rg.r_min = 0.05;
    rg.r_max = 3.0;
    rg.n_theta = 48;
    rg.puncture_radius = 0.04;

    std::vector<Witness> ws = injectivity_witness_search(slab_pair(true), rg);
    REQUIRE(!ws.empty());
    bool found_axis_pair = false;
    for (const Witness& w : ws) {
        if (w.kind != Witness::Kind::CoincidentPair) continue;
        if (std::abs(w.p1.z.real()) < 1e-6 && std::abs(w.p2.z.real()) < 1e-6 &&
            std::abs(w.p1.z.imag() + w.p2.z.imag()) <
                1e-6 * (std::abs(w.p1.z.imag()) + std::abs(w.p2.z.imag()))) {
            found_axis_pair = true;
            CHECK(w.to_line().rfind("CoincidentPair", 0) == 0);
        }
    }
    CHECK(found_axis_pair);
}

TEST_CASE("embedded fixtures come through the injectivity scan clean") {
    MeshRegion rg;
    rg.r_min = 0.05;
    rg.r_max = 3.0;
    rg.n_theta = 48;
    rg.puncture_radius = 0.04;
    CHECK(injectivity_witness_search(slab_pair(false), rg).empty());

    MeshRegion cg;
    cg.r_min = 0.2;
    cg.r_max = 5.0;
    cg.n_theta = 32;
    CHECK(injectivity_witness_search(catenoid_like(), cg).empty());
}
