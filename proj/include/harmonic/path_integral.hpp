#pragma once

// Line integrals of the form triple along polylines in the z-plane with
// sheet continuation on hyperelliptic domains: crossing a cut interior
// flips the sheet; everywhere else the reference square root continues
// analytically. Also provides waypoint routing from the basepoint to a
// target that dodges punctures and branch roots and, when required, adds a
// loop through a cut to land on the requested sheet.

#include <algorithm>
#include <array>
#include <optional>
#include <vector>

#include "harmonic/form.hpp"
#include "harmonic/quadrature.hpp"

namespace harmonic {

struct PathIntegral {
    std::array<Complex, 3> value{};  // integral of each form
    int end_sheet = 1;
    int evaluations = 0;
};

namespace detail {

// Cut crossings of a straight segment. Signed zeros place on-axis points
// on a bank: departing downward from the top bank of a cut (or arriving
// there from below) crosses the cut at the segment boundary, and the sheet
// must flip there to keep the physical square root continuous.
struct SegmentCrossings {
    bool flip_start = false;
    std::vector<double> interior;  // parameters in (0, 1)
    bool flip_end = false;
};

inline SegmentCrossings segment_cut_crossings(const Domain& d, Complex z0, Complex z1) {
    SegmentCrossings out;
    if (d.kind != Domain::Kind::Hyperelliptic) return out;
    double y0 = z0.imag(), y1 = z1.imag();
    if (std::signbit(y0) == std::signbit(y1)) return out;
    double dy = y0 - y1;
    if (dy == 0.0) return out;  // degenerate +0.0 -> -0.0 hop along the axis
    double t = y0 / dy;  // y(t) = 0
    double x = z0.real() + t * (z1.real() - z0.real());
    bool in_cut = false;
    for (auto& c : d.cuts)
        if (c.contains(x)) in_cut = true;
    if (!in_cut) return out;
    if (t <= 0.0)
        out.flip_start = true;
    else if (t >= 1.0)
        out.flip_end = true;
    else
        out.interior.push_back(t);
    return out;
}

}  // namespace detail

// Integral of all three forms along the straight segment z0 -> z1 starting
// on `sheet`. Splits at cut crossings and flips the sheet there. The
// integrand must stay finite along the segment apart from endpoints that
// the caller regularizes.
inline PathIntegral integrate_segment(const SurfaceData& s, Complex z0, Complex z1, int sheet,
                                      double tol = kQuadTol) {
    PathIntegral out;
    detail::SegmentCrossings cr = detail::segment_cut_crossings(s.domain, z0, z1);
    std::vector<double> splits = cr.interior;
    std::sort(splits.begin(), splits.end());
    splits.push_back(1.0);
    double t0 = 0.0;
    int cur = cr.flip_start ? -sheet : sheet;
    Complex dz = z1 - z0;
    for (double t1 : splits) {
        for (int k = 0; k < 3; ++k) {
            auto f = [&, k](double t) {
                SheetPoint p{z0 + t * dz, cur};
                return form_value(s.forms[std::size_t(k)], s.domain, p) * dz;
            };
            QuadResult q = integrate(f, t0, t1, tol);
            out.value[std::size_t(k)] += q.value;
            out.evaluations += q.evaluations;
        }
        if (t1 < 1.0) cur = -cur;
        t0 = t1;
    }
    if (cr.flip_end) cur = -cur;
    out.end_sheet = cur;
    return out;
}

inline PathIntegral integrate_polyline(const SurfaceData& s, const std::vector<Complex>& zs,
                                       int start_sheet, double tol = kQuadTol) {
    PathIntegral out;
    out.end_sheet = start_sheet;
    for (std::size_t i = 0; i + 1 < zs.size(); ++i) {
        PathIntegral seg = integrate_segment(s, zs[i], zs[i + 1], out.end_sheet, tol);
        for (int k = 0; k < 3; ++k) out.value[std::size_t(k)] += seg.value[std::size_t(k)];
        out.end_sheet = seg.end_sheet;
        out.evaluations += seg.evaluations;
    }
    return out;
}

namespace detail {

inline std::vector<Complex> obstacle_points(const SurfaceData& s) {
    std::vector<Complex> obs;
    for (auto& p : s.punctures)
        if (!p.at_infinity) obs.push_back(p.z);
    for (double r : s.domain.branch_roots) obs.push_back(Complex(r, 0.0));
    return obs;
}

// Insert an offset waypoint wherever the segment passes too close to an
// obstacle; one level of dodging is enough for the catalogued surfaces.
inline void dodge_segment(std::vector<Complex>& out, Complex z0, Complex z1,
                          const std::vector<Complex>& obs, double clearance) {
    Complex d = z1 - z0;
    double len = std::abs(d);
    if (len < 1e-300) return;
    Complex u = d / len;
    struct Hit {
        double t;
        Complex w;
    };
    std::vector<Hit> hits;
    for (Complex o : obs) {
        Complex rel = o - z0;
        double t = std::clamp(rel.real() * u.real() + rel.imag() * u.imag(), 0.0, len);
        Complex nearest = z0 + t * u;
        double dist = std::abs(o - nearest);
        if (dist < clearance && t > 1e-12 && t < len - 1e-12) {
            Complex perp(-u.imag(), u.real());
            Complex off = nearest - o;
            double side = off.real() * perp.real() + off.imag() * perp.imag();
            if (side < 0) perp = -perp;
            hits.push_back({t, o + clearance * perp});
        }
    }
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.t < b.t; });
    for (auto& h : hits) out.push_back(h.w);
}

}  // namespace detail

// Waypoints from `from` to `to` that keep clear of punctures and branch
// roots. The clearance shrinks automatically if either endpoint must sit
// close to an obstacle.
inline std::vector<Complex> route(const SurfaceData& s, Complex from, Complex to) {
    std::vector<Complex> obs = detail::obstacle_points(s);
    double clearance = 0.25;
    for (Complex o : obs) {
        double de = std::min(std::abs(from - o), std::abs(to - o));
        if (de > 1e-300) clearance = std::min(clearance, 0.5 * de);
    }
    std::vector<Complex> path{from};
    detail::dodge_segment(path, from, to, obs, clearance);
    path.push_back(to);
    return path;
}

// A closed polyline from `anchor` back to itself crossing exactly one cut
// interior once, so traversing it flips the sheet. It rounds the chosen
// end of the cut while staying away from punctures.
inline std::vector<Complex> sheet_flip_loop(const SurfaceData& s, Complex anchor) {
    const Domain& d = s.domain;
    if (d.kind != Domain::Kind::Hyperelliptic)
        throw DomainError("sheet flip loop needs a hyperelliptic domain");
    const Cut& cut = d.cuts[0];  // finite cut [r0, r1]
    double mid = 0.5 * (cut.lo + cut.hi);
    double span = cut.hi - cut.lo;
    auto dist_to_puncture = [&](Complex z) {
        double best = 1e300;
        for (auto& p : s.punctures)
            if (!p.at_infinity) best = std::min(best, std::abs(z - p.z));
        return best;
    };
    // Round whichever cut end is farther from all punctures.
    double dlo = dist_to_puncture(Complex(cut.lo, 0.0));
    double dhi = dist_to_puncture(Complex(cut.hi, 0.0));
    bool round_lo = dlo >= dhi;
    double end = round_lo ? cut.lo : cut.hi;
    double d_off = std::min({0.25 * span, 0.5 * dist_to_puncture(Complex(end, 0.0)),
                             0.5 * dist_to_puncture(Complex(mid, 0.0))});
    if (!round_lo && d.cuts.size() > 1)
        d_off = std::min(d_off, 0.4 * (d.cuts[1].lo - cut.hi));
    if (d_off <= 0.0 || !std::isfinite(d_off))
        throw DomainError("cannot build sheet flip loop: puncture on the cut");
    double outside = round_lo ? end - d_off : end + d_off;
    std::vector<Complex> loop;
    loop.push_back(anchor);
    Complex below(mid, -d_off), above(mid, d_off);
    Complex out_below(outside, -d_off), out_above(outside, d_off);
    // anchor -> below cut -> cross cut (flip) -> around the end -> back.
    loop.push_back(below);
    loop.push_back(above);
    loop.push_back(out_above);
    loop.push_back(out_below);
    loop.push_back(below);
    loop.push_back(anchor);
    return loop;
}

}  // namespace harmonic
