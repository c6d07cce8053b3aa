#include <catch2/catch_amalgamated.hpp>

#include <cctype>
#include <cmath>
#include <sstream>
#include <string>

#include "harmonic/mesh.hpp"

using namespace harmonic;
using Catch::Approx;

namespace {

CRational rat(std::vector<Complex> num, std::vector<Complex> den = {{1, 0}}) {
    return CRational(CPoly(std::move(num)), CPoly(std::move(den)));
}

SurfaceData paraboloid_graph() {
    // phi = (1, i, z) dz: the graph x3 = (x1^2 - x2^2) / 2.
    SurfaceData s;
    s.label = "paraboloid-graph";
    s.domain = Domain::sphere();
    s.forms[0].a = rat({{1, 0}});
    s.forms[1].a = rat({{0, 1}});
    s.forms[2].a = rat({{0, 0}, {1, 0}});
    s.punctures = {SurfacePoint::infinity()};
    s.basepoint = SheetPoint{Complex(0, 0), +1};
    return s;
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

SurfaceData cusp3() {
    // phi = ((z+1)/(z^3-1), i(z-1)/(z^3-1), 1/z) dz: horn ends at the cube
    // roots of unity plus ends at 0 and infinity.
    CPoly den({{-1, 0}, {0, 0}, {0, 0}, {1, 0}});
    SurfaceData s;
    s.label = "three-cusps";
    s.domain = Domain::sphere();
    s.forms[0].a = CRational(CPoly({{1, 0}, {1, 0}}), den);
    s.forms[1].a = CRational(CPoly({{0, -1}, {0, 1}}), den);
    s.forms[2].a = rat({{1, 0}}, {{0, 0}, {1, 0}});
    for (int j = 0; j < 3; ++j)
        s.punctures.push_back(SurfacePoint::finite(std::exp(Complex(0, 2.0 * kPi * j / 3.0))));
    s.punctures.push_back(SurfacePoint::finite(Complex(0, 0)));
    s.punctures.push_back(SurfacePoint::infinity());
    s.basepoint = SheetPoint{Complex(0.4, 0.4), +1};
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

int significant_digits(const std::string& token) {
    int digits = 0;
    bool counting = false;
    for (std::size_t i = 0; i < token.size(); ++i) {
        char c = token[i];
        if (c == 'e' || c == 'E') break;
        if (std::isdigit(static_cast<unsigned char>(c))) {
            if (c != '0') counting = true;
            if (counting) ++digits;
        }
    }
    return digits;
}

}  // namespace

TEST_CASE("capped disk mesh of a graph is a watertight disk") {
    SurfaceData s = paraboloid_graph();
    MeshRegion rg;
    rg.r_min = 0.0;
    rg.r_max = 10.0;
    rg.n_theta = 32;
    TriMesh m = build_mesh(s, rg);

    REQUIRE(m.triangles.size() > 100);
    REQUIRE(m.vertices.size() == m.sources.size());
    REQUIRE(m.vertices.size() == m.normals.size());
    REQUIRE(is_edge_manifold(m));
    REQUIRE(euler_characteristic(m) == 1);
    REQUIRE(boundary_loop_count(m) == 1);
    for (const Vec3& n : m.normals) REQUIRE(norm(n) == Approx(1.0).margin(1e-12));

    // The image is the graph x3 = (x1^2 - x2^2)/2 based at the origin.
    for (std::size_t v = 0; v < m.vertices.size(); v += 37) {
        const Vec3& p = m.vertices[v];
        REQUIRE(p[2] == Approx(0.5 * (p[0] * p[0] - p[1] * p[1])).margin(1e-9));
    }
}

TEST_CASE("annulus mesh of the catenoid matches its closed form") {
    SurfaceData s = catenoid_like();
    MeshRegion rg;
    rg.r_min = 0.2;
    rg.r_max = 5.0;
    rg.n_theta = 32;
    TriMesh m = build_mesh(s, rg);

    REQUIRE(is_edge_manifold(m));
    REQUIRE(euler_characteristic(m) == 0);
    REQUIRE(boundary_loop_count(m) == 2);

    for (std::size_t v = 0; v < m.vertices.size(); v += 11) {
        const Complex z = m.sources[v].z;
        const double r = std::abs(z), t = std::arg(z);
        const double c = 0.5 * (r + 1.0 / r);
        REQUIRE(m.vertices[v][0] == Approx(c * std::cos(t) - 1.0).margin(1e-9));
        REQUIRE(m.vertices[v][1] == Approx(c * std::sin(t)).margin(1e-9));
        REQUIRE(m.vertices[v][2] == Approx(std::log(r)).margin(1e-9));
    }
}

TEST_CASE("excised punctures add one boundary loop each") {
    SurfaceData s = cusp3();
    MeshRegion rg;
    rg.r_min = 0.2;
    rg.r_max = 20.0;
    rg.puncture_radius = 0.15;
    rg.n_theta = 48;
    TriMesh m = build_mesh(s, rg);

    REQUIRE(is_edge_manifold(m));
    // Annulus minus three excised disks: inner and outer circles plus the
    // three holes around the roots of unity.
    REQUIRE(boundary_loop_count(m) == 5);
    REQUIRE(euler_characteristic(m) == -3);
}

TEST_CASE("torus mesh welds the two sheets into the right topology") {
    SurfaceData s = closed_torus();
    MeshRegion rg;
    rg.r_min = 0.15;
    rg.r_max = 20.0;
    rg.n_theta = 32;
    TriMesh m = build_mesh(s, rg);

    REQUIRE(is_edge_manifold(m));
    REQUIRE(euler_characteristic(m) == -2);
    REQUIRE(boundary_loop_count(m) == 2);

    // The two finite branch points away from the origin become cone vertices.
    int cones = 0;
    for (const SheetPoint& p : m.sources)
        if (p.sheet == 0) ++cones;
    REQUIRE(cones == 2);

    // Propagated values agree with independently routed integrals.
    Evaluator direct(s);
    int checked = 0;
    for (std::size_t v = 0; v < m.vertices.size(); v += 97) {
        if (m.sources[v].sheet == 0) continue;
        Vec3 ref = direct.value(m.sources[v]);
        REQUIRE(norm(m.vertices[v] - ref) < 1e-7);
        ++checked;
    }
    REQUIRE(checked >= 10);
}

TEST_CASE("obj output is deterministic, 1-indexed and 9-significant-digit") {
    SurfaceData s = catenoid_like();
    MeshRegion rg;
    rg.r_min = 0.2;
    rg.r_max = 5.0;
    rg.n_theta = 16;

    std::ostringstream a, b;
    write_obj(build_mesh(s, rg), a);
    write_obj(build_mesh(s, rg), b);
    REQUIRE(a.str() == b.str());
    REQUIRE(!a.str().empty());

    std::istringstream in(a.str());
    std::string line;
    std::size_t n_vertices = 0, n_faces = 0;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "v") {
            ++n_vertices;
            std::string tok;
            int coords = 0;
            while (ls >> tok) {
                REQUIRE(significant_digits(tok) <= 9);
                ++coords;
            }
            REQUIRE(coords == 3);
        } else if (tag == "f") {
            ++n_faces;
            std::string tok;
            while (ls >> tok) {
                long idx = std::stol(tok.substr(0, tok.find('/')));
                REQUIRE(idx >= 1);
                REQUIRE(std::size_t(idx) <= n_vertices);
            }
        } else {
            REQUIRE(tag == "vn");
        }
    }
    REQUIRE(n_faces > 0);
}
