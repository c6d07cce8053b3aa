#pragma once

// Parameter domains: the punctured plane/sphere, or a genus-1 hyperelliptic
// curve w^2 = p(z) with p cubic with distinct real roots (the fourth branch
// point sits at infinity). The square root is made single-valued by two
// declared cuts along the real axis; sheets are labelled relative to the
// reference branch, whose sign is pinned by the fixture's basepoint value.

#include <array>
#include <optional>
#include <vector>

#include "harmonic/core.hpp"
#include "harmonic/poly.hpp"

namespace harmonic {

struct SheetPoint {
    Complex z;
    int sheet = +1;  // +1: reference branch, -1: opposite
};

// Real-axis cut, either the segment [lo, hi] or the ray [lo, +inf).
struct Cut {
    double lo = 0;
    double hi = 0;
    bool to_infinity = false;

    bool contains(double x) const {
        return to_infinity ? x >= lo : (x >= lo && x <= hi);
    }
};

struct Domain {
    enum class Kind { Sphere, Hyperelliptic };
    Kind kind = Kind::Sphere;

    // Hyperelliptic data; unused on the sphere.
    CPoly branch;                       // w^2 = branch(z)
    std::vector<double> branch_roots;   // sorted ascending, all real
    std::array<Cut, 2> cuts{};          // [roots0, roots1] and [roots2, inf)
    Complex basepoint_z;
    Complex basepoint_w;
    int base_sign = +1;                 // reference branch = base_sign * formula branch

    static Domain sphere() { return Domain{}; }

    static Domain hyperelliptic(const CPoly& p, Complex basepoint_z, Complex basepoint_w) {
        if (p.degree() != 3)
            throw DomainError("hyperelliptic branch polynomial must be cubic");
        Domain d;
        d.kind = Kind::Hyperelliptic;
        d.branch = p;
        for (auto& rc : poly_roots(p)) {
            if (rc.multiplicity != 1 || std::abs(rc.value.imag()) > 1e-9)
                throw DomainError("branch polynomial needs distinct real roots");
            d.branch_roots.push_back(rc.value.real());
        }
        std::sort(d.branch_roots.begin(), d.branch_roots.end());
        d.cuts[0] = Cut{d.branch_roots[0], d.branch_roots[1], false};
        d.cuts[1] = Cut{d.branch_roots[2], 0, true};
        d.basepoint_z = basepoint_z;
        d.basepoint_w = basepoint_w;
        d.base_sign = +1;
        Complex probe = d.formula_w(basepoint_z);
        if (std::abs(probe - basepoint_w) > std::abs(probe + basepoint_w)) d.base_sign = -1;
        Complex check = d.w_reference(basepoint_z);
        if (std::abs(check - basepoint_w) > 1e-6 * (1.0 + std::abs(basepoint_w)))
            throw DomainError("basepoint w does not lie on the curve");
        return d;
    }

    bool is_hyperelliptic() const { return kind == Kind::Hyperelliptic; }

    bool is_branch_point(Complex z, double tol = 1e-9) const {
        for (double r : branch_roots)
            if (std::abs(z - Complex(r)) <= tol) return true;
        return false;
    }

    // Square root of p continuous off the declared cuts. The pair factor
    // joins the two principal-log cuts of [r0, r1] into the segment itself;
    // i*sqrt(r2 - z) puts the remaining cut on [r2, inf). Signed zero in
    // Im(z) selects the side when evaluating on a cut.
    Complex formula_w(Complex z) const {
        const double r0 = branch_roots[0], r1 = branch_roots[1], r2 = branch_roots[2];
        Complex pair = std::exp(0.5 * (std::log(z - Complex(r0)) + std::log(z - Complex(r1))));
        // Build r2 - z componentwise: naive subtraction turns a signed zero
        // imaginary part into +0.0 and would put the top bank of the
        // infinite cut on the wrong side of the sqrt branch cut.
        Complex ray = Complex(0, 1) * std::sqrt(Complex(r2 - z.real(), -z.imag()));
        return std::sqrt(branch.lead()) * pair * ray;
    }

    // Reference branch: continuation of the basepoint value over the cut plane.
    Complex w_reference(Complex z) const {
        return double(base_sign) * formula_w(z);
    }

    Complex w_value(const SheetPoint& pt) const {
        if (!is_hyperelliptic()) throw DomainError("w_value needs a hyperelliptic domain");
        return double(pt.sheet) * w_reference(pt.z);
    }

    // Sign flips accumulated by a straight segment crossing the cuts.
    // Endpoints resting exactly on the axis count via the sign bit of Im,
    // so +0.0/-0.0 selects the upper/lower side consistently.
    int segment_crossing_sign(Complex a, Complex b) const {
        auto side = [](Complex v) { return std::signbit(v.imag()) ? -1 : +1; };
        if (side(a) == side(b)) return +1;
        double ya = a.imag(), yb = b.imag();
        double denom = ya - yb;
        double t = std::abs(denom) < 1e-300 ? 0.5 : ya / denom;
        double x = a.real() + t * (b.real() - a.real());
        for (const Cut& c : cuts)
            if (c.contains(x)) return -1;
        return +1;
    }

    // Continuation sign along a polyline relative to the reference branch.
    int continuation_sign(const std::vector<Complex>& path) const {
        int s = +1;
        for (std::size_t i = 0; i + 1 < path.size(); ++i)
            s *= segment_crossing_sign(path[i], path[i + 1]);
        return s;
    }
};

// A point of the compactified domain: finite (with sheet on a curve) or the
// point over infinity. On the cubic curve, infinity is itself a branch point
// with local parameter t, z = 1/t^2.
struct SurfacePoint {
    bool at_infinity = false;
    Complex z;
    int sheet = +1;

    static SurfacePoint infinity() { return SurfacePoint{true, Complex(0), +1}; }
    static SurfacePoint finite(Complex z, int sheet = +1) { return SurfacePoint{false, z, sheet}; }
};

inline bool same_point(const SurfacePoint& a, const SurfacePoint& b, const Domain& d,
                       double tol = 1e-9) {
    if (a.at_infinity != b.at_infinity) return false;
    if (a.at_infinity) return true;
    if (std::abs(a.z - b.z) > tol) return false;
    if (d.is_hyperelliptic() && !d.is_branch_point(a.z)) return a.sheet == b.sheet;
    return true;
}

}  // namespace harmonic
