#pragma once

// Numerical verification scans. Each scan either confirms a property of a
// surface over a stated region at a stated resolution or returns concrete,
// independently checkable witnesses against it:
//
//   * regularity_scan      - searches for points where df drops rank;
//   * properness_probe     - follows circles toward an end and watches the
//                            minimum of |f| over each circle: if it stays
//                            bounded, the end escapes to infinity only along
//                            part of every approach circle;
//   * injectivity scans    - triangle-level self-intersection search plus a
//                            Newton-polished search for distinct domain
//                            points with coincident images;
//   * check_symmetry       - verifies that a domain map conjugates f into a
//                            stated rigid motion.
//
// All scans are deterministic for a fixed surface, region and resolution.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "harmonic/bvh.hpp"
#include "harmonic/mesh.hpp"

namespace harmonic {

inline constexpr double kWitnessImageTolFactor = 1e-6;   // * bbox diagonal
inline constexpr double kSymmetryTol = 1e-8;
inline constexpr double kSingularAcceptRatio = 1e-9;     // |N| / phi_scale^2
inline constexpr double kSingularCandidateRatio = 1e-6;

struct Witness {
    enum class Kind { SelfIntersection, BoundedEscape, SingularPoint, CoincidentPair };
    Kind kind = Kind::SelfIntersection;
    SheetPoint p1{}, p2{};
    double image_distance = 0.0;
    std::string note;

    std::string to_line() const {
        const char* name = kind == Kind::SelfIntersection ? "SelfIntersection"
                           : kind == Kind::BoundedEscape  ? "BoundedEscape"
                           : kind == Kind::SingularPoint  ? "SingularPoint"
                                                          : "CoincidentPair";
        char buf[256];
        std::string params;
        std::snprintf(buf, sizeof buf, "z1=(%.9g,%.9g) sheet %+d", p1.z.real(), p1.z.imag(),
                      p1.sheet);
        params = buf;
        if (kind == Kind::SelfIntersection || kind == Kind::CoincidentPair) {
            std::snprintf(buf, sizeof buf, ", z2=(%.9g,%.9g) sheet %+d", p2.z.real(),
                          p2.z.imag(), p2.sheet);
            params += buf;
        }
        if (!note.empty()) params += ", " + note;
        std::snprintf(buf, sizeof buf, ", image distance %.3e", image_distance);
        return std::string(name) + ", " + params + buf;
    }
};

// ---------------------------------------------------------------------------
// Regularity
// ---------------------------------------------------------------------------

namespace detail {

// |f_x x f_y| / phi_scale^2: scale-free measure of how far df is from
// dropping rank. Unscannable points (poles, branch points) report huge.
inline double rank_ratio(const SurfaceData& s, const FormJets& jets, const SheetPoint& p) {
    try {
        MetricSample ms = metric_sample(s, jets, p);
        if (!(ms.phi_scale > 0)) return 0.0;  // all forms vanish: rank 0
        return norm(ms.normal) / (ms.phi_scale * ms.phi_scale);
    } catch (const Error&) {
        return 1e300;
    }
}

}  // namespace detail

// Sample the region on a log-polar lattice and hunt for rank drops. Soft
// candidates are refined by a pattern search clamped to the region; a point
// only becomes a witness if the refined ratio falls below the hard accept
// threshold.
inline std::vector<Witness> regularity_scan(const SurfaceData& s, const MeshRegion& rg) {
    FormJets jets(s);
    const bool hyper = s.domain.is_hyperelliptic();
    int nt = std::max(8, rg.n_theta);
    if (nt % 2) ++nt;
    const double rho0 = std::log(rg.r_min), rho1 = std::log(rg.r_max);
    const int nr = std::max(1, int(std::lround((rho1 - rho0) * nt / (2.0 * kPi))));
    const std::vector<int> sheets = hyper ? std::vector<int>{1, -1} : std::vector<int>{1};

    auto off_limits = [&](Complex z) {
        for (const SurfacePoint& q : s.punctures)
            if (!q.at_infinity && std::abs(z - q.z) <= rg.puncture_radius) return true;
        if (hyper)
            for (double root : s.domain.branch_roots)
                if (std::abs(z - Complex(root, 0)) <= 1e-3) return true;
        return false;
    };

    std::vector<Witness> out;
    std::set<std::tuple<long, long, int>> taken;
    const double cell = rg.r_min * 2.0 * kPi / nt;  // finest cell size

    auto record = [&](const SheetPoint& p, double ratio) {
        long kx = std::lround(p.z.real() / cell), ky = std::lround(p.z.imag() / cell);
        if (!taken.insert({kx, ky, p.sheet}).second) return;
        if (out.size() >= 100) return;
        Witness w;
        w.kind = Witness::Kind::SingularPoint;
        w.p1 = p;
        w.image_distance = 0.0;
        char buf[96];
        std::snprintf(buf, sizeof buf, "rank ratio %.3e", ratio);
        w.note = buf;
        out.push_back(w);
    };

    for (int i = 0; i <= nr; ++i) {
        const double r = std::exp(rho0 + (rho1 - rho0) * i / nr);
        for (int j = 0; j < nt; ++j) {
            Complex z;
            if (j == 0)
                z = Complex(r, +0.0);
            else if (2 * j == nt)
                z = Complex(-r, +0.0);
            else {
                const double t = 2.0 * kPi * j / nt;
                z = r * Complex(std::cos(t), std::sin(t));
            }
            if (off_limits(z)) continue;
            for (int sh : sheets) {
                SheetPoint p{z, sh};
                double ratio = detail::rank_ratio(s, jets, p);
                if (ratio < kSingularAcceptRatio) {
                    record(p, ratio);
                    continue;
                }
                if (ratio >= kSingularCandidateRatio) continue;
                // Pattern search within the surrounding cells.
                Complex best = z;
                double best_ratio = ratio;
                double h = 0.5 * std::abs(z) * 2.0 * kPi / nt;
                for (int it = 0; it < 80 && h > 1e-18; ++it) {
                    bool moved = false;
                    for (Complex step : {Complex(h, 0), Complex(-h, 0), Complex(0, h),
                                         Complex(0, -h)}) {
                        Complex cand = best + step;
                        double a = std::abs(cand);
                        if (a < rg.r_min || a > rg.r_max) continue;
                        if (off_limits(cand)) continue;
                        double cr = detail::rank_ratio(s, jets, SheetPoint{cand, sh});
                        if (cr < best_ratio) {
                            best_ratio = cr;
                            best = cand;
                            moved = true;
                        }
                    }
                    if (!moved) h *= 0.5;
                }
                if (best_ratio < kSingularAcceptRatio) record(SheetPoint{best, sh}, best_ratio);
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Properness
// ---------------------------------------------------------------------------

struct EscapeProbe {
    bool escapes = false;
    double bound = 0.0;                 // sup of circle minima when bounded
    std::vector<double> circle_minima;  // one entry per approach circle
    std::optional<Witness> witness;     // BoundedEscape witness when bounded
};

namespace detail {

struct ProbeSample {
    double t = 0;
    SheetPoint p{};
    Vec3 f{};
};

inline double maxnorm(const Vec3& v) {
    return std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[2])});
}

}  // namespace detail

// Walk circles approaching the end (shrinking toward a finite puncture,
// growing toward infinity) and record the minimum of |f|_inf over each
// circle. A proper end forces that minimum to grow without bound; if it
// stays bounded the probe reports the offending near-curve as a witness.
//
// Minima are located by dense angular sampling, bisection on per-coordinate
// sign changes, local golden refinement, and a log-scale zoom along the four
// axis crossings of each circle (minima of ends with fast-decaying escape
// curves hug those crossings at scales no angular grid can resolve).
inline EscapeProbe properness_probe(const SurfaceData& s, const SurfacePoint& end,
                                    int n_angles = 256, int n_rungs = 16,
                                    double tol = kQuadTol) {
    const bool hyper = s.domain.is_hyperelliptic();
    const bool at_inf = end.at_infinity;
    const Complex c = at_inf ? Complex(0, 0) : end.z;

    double sep = 1e300, extent = 0.0;
    for (const SurfacePoint& q : s.punctures)
        if (!q.at_infinity) {
            extent = std::max(extent, std::abs(q.z));
            if (!at_inf && std::abs(q.z - c) > 1e-12) sep = std::min(sep, std::abs(q.z - c));
        }
    if (hyper)
        for (double root : s.domain.branch_roots) {
            extent = std::max(extent, std::abs(root));
            if (!at_inf && std::abs(Complex(root, 0) - c) > 1e-12)
                sep = std::min(sep, std::abs(Complex(root, 0) - c));
        }
    if (!at_inf && std::abs(c) > 1e-12) sep = std::min(sep, std::abs(c));  // keep off 0 too
    const double r0 = at_inf ? 2.0 * (1.0 + extent) : (sep > 1e299 ? 0.5 : 0.35 * sep);
    const double factor = std::sqrt(10.0);

    Evaluator ev(s);
    // Rolling anchor for hyperelliptic walking: value known at `anchor`.
    SheetPoint anchor{Complex(c.real() + r0, +0.0), 1};
    Vec3 anchor_val{};
    if (hyper) anchor_val = ev.value(anchor, tol);

    auto from_anchor = [&](const SheetPoint& a, const Vec3& av, Complex z) {
        PathIntegral pi = integrate_segment(s, a.z, z, a.sheet, tol);
        detail::ProbeSample ps;
        ps.p = SheetPoint{z, pi.end_sheet};
        ps.f = av + Vec3{pi.value[0].real(), pi.value[1].real(), pi.value[2].real()};
        return ps;
    };

    EscapeProbe probe;
    detail::ProbeSample overall_argmin;
    double radius = r0;
    for (int k = 0; k < n_rungs; ++k) {
        // --- assemble the circle samples ---
        std::vector<detail::ProbeSample> ring;
        const int laps_max = hyper ? 2 : 1;
        if (!hyper) {
            ring.resize(std::size_t(n_angles) + 1);
            for (int j = 0; j <= n_angles; ++j) {
                double t = 2.0 * kPi * j / n_angles;
                Complex z = c + radius * Complex(std::cos(t), std::sin(t));
                ring[std::size_t(j)] = {t, SheetPoint{z, 1}, ev.value(z, tol)};
            }
        } else {
            detail::ProbeSample cur{0.0, anchor, anchor_val};
            ring.push_back(cur);
            for (int lap = 0; lap < laps_max; ++lap) {
                for (int j = 1; j <= n_angles; ++j) {
                    double t = 2.0 * kPi * (lap + double(j) / n_angles);
                    Complex z = c + radius * Complex(std::cos(t), std::sin(t));
                    detail::ProbeSample nxt = from_anchor(cur.p, cur.f, z);
                    nxt.t = t;
                    ring.push_back(nxt);
                    cur = nxt;
                }
                if (cur.p.sheet == ring.front().p.sheet) break;  // loop closed in one lap
            }
        }

        // Evaluation at an arbitrary point of the circle, anchored at the
        // sample nearest to angle t.
        const double dt = 2.0 * kPi / n_angles;
        auto eval_point = [&](Complex z, double t) -> detail::ProbeSample {
            if (!hyper) return {t, SheetPoint{z, 1}, ev.value(z, tol)};
            std::size_t j = std::min(ring.size() - 1,
                                     std::size_t(std::max(0.0, std::floor(t / dt))));
            detail::ProbeSample ps = from_anchor(ring[j].p, ring[j].f, z);
            ps.t = t;
            return ps;
        };
        auto eval_at = [&](double t) -> detail::ProbeSample {
            return eval_point(c + radius * Complex(std::cos(t), std::sin(t)), t);
        };

        double m = 1e300;
        detail::ProbeSample argmin;
        auto consider = [&](const detail::ProbeSample& ps) {
            double g = detail::maxnorm(ps.f);
            if (g < m) {
                m = g;
                argmin = ps;
            }
        };
        for (const auto& ps : ring) consider(ps);

        // Bisect per-coordinate sign changes between adjacent samples.
        for (std::size_t j = 0; j + 1 < ring.size(); ++j)
            for (int i = 0; i < 3; ++i) {
                double a = ring[j].f[std::size_t(i)], b = ring[j + 1].f[std::size_t(i)];
                if ((a > 0) == (b > 0) || a == 0.0 || b == 0.0) continue;
                double lo = ring[j].t, hi = ring[j + 1].t;
                double flo = a;
                for (int it = 0; it < 48 && hi - lo > 1e-15; ++it) {
                    double mid = 0.5 * (lo + hi);
                    detail::ProbeSample ps = eval_at(mid);
                    consider(ps);
                    if ((ps.f[std::size_t(i)] > 0) == (flo > 0)) {
                        lo = mid;
                        flo = ps.f[std::size_t(i)];
                    } else {
                        hi = mid;
                    }
                }
            }

        // Golden refinement around sampled local minima.
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        for (std::size_t j = 1; j + 1 < ring.size(); ++j) {
            double g0 = detail::maxnorm(ring[j - 1].f);
            double g1 = detail::maxnorm(ring[j].f);
            double g2 = detail::maxnorm(ring[j + 1].f);
            if (g1 > g0 || g1 > g2) continue;
            double lo = ring[j - 1].t, hi = ring[j + 1].t;
            double t1 = hi - gr * (hi - lo), t2 = lo + gr * (hi - lo);
            detail::ProbeSample p1 = eval_at(t1), p2 = eval_at(t2);
            for (int it = 0; it < 40; ++it) {
                if (detail::maxnorm(p1.f) < detail::maxnorm(p2.f)) {
                    hi = t2;
                    t2 = t1;
                    p2 = p1;
                    t1 = hi - gr * (hi - lo);
                    p1 = eval_at(t1);
                } else {
                    lo = t1;
                    t1 = t2;
                    p1 = p2;
                    t2 = lo + gr * (hi - lo);
                    p2 = eval_at(t2);
                }
            }
            consider(p1);
            consider(p2);
        }

        // Log-scale zoom along the four axis crossings of the circle. Ends
        // whose escape curves hug an axis leave minima of the max-norm at
        // perpendicular offsets far below any angular resolution, balanced
        // where one coordinate changes sign; the points are constructed in
        // Cartesian form so offsets down to 1e-48 stay exact, and each sign
        // change is bisected in the log-offset.
        const int e_max = hyper ? 12 : 48;
        static const Complex kCross[4] = {Complex(1, 0), Complex(0, 1), Complex(-1, 0),
                                          Complex(0, -1)};
        for (int qd = 0; qd < 4; ++qd) {
            const Complex dir = kCross[qd];  // exact, so offsets stay exact
            const Complex perp(-dir.imag(), dir.real());
            for (int sgn : {1, -1}) {
                auto at_off = [&](double e) -> detail::ProbeSample {
                    const double off = std::pow(10.0, -e);
                    const double along = std::sqrt(std::max(0.0, 1.0 - off * off));
                    const Complex z = c + radius * (along * dir + (sgn * off) * perp);
                    double t = std::atan2((z - c).imag(), (z - c).real());
                    if (t < 0) t += 2.0 * kPi;
                    return eval_point(z, t);
                };
                std::vector<detail::ProbeSample> zs;
                for (int e = 1; e <= e_max; ++e) {
                    zs.push_back(at_off(double(e)));
                    consider(zs.back());
                }
                for (std::size_t j = 0; j + 1 < zs.size(); ++j)
                    for (int i = 0; i < 3; ++i) {
                        double a = zs[j].f[std::size_t(i)], b = zs[j + 1].f[std::size_t(i)];
                        if ((a > 0) == (b > 0) || a == 0.0 || b == 0.0) continue;
                        double lo = double(j + 1), hi = double(j + 2), flo = a;
                        for (int it = 0; it < 100; ++it) {
                            double mid = 0.5 * (lo + hi);
                            detail::ProbeSample ps = at_off(mid);
                            consider(ps);
                            if ((ps.f[std::size_t(i)] > 0) == (flo > 0)) {
                                lo = mid;
                                flo = ps.f[std::size_t(i)];
                            } else {
                                hi = mid;
                            }
                        }
                    }
            }
        }

        probe.circle_minima.push_back(m);
        if (k == n_rungs - 1) overall_argmin = argmin;

        // --- move to the next circle ---
        double next = at_inf ? radius * factor : radius / factor;
        if (hyper) {
            Complex za(c.real() + radius, +0.0), zb(c.real() + next, +0.0);
            PathIntegral pi = integrate_segment(s, za, zb, anchor.sheet, tol);
            anchor = SheetPoint{zb, pi.end_sheet};
            anchor_val = anchor_val + Vec3{pi.value[0].real(), pi.value[1].real(),
                                           pi.value[2].real()};
        }
        radius = next;
    }

    const int K = int(probe.circle_minima.size());
    const int q = K / 4;
    const double mq = probe.circle_minima[std::size_t(q)];
    const double mK = probe.circle_minima[std::size_t(K - 1)];
    probe.escapes = (mK > 2.0 * mq + 1.0);
    if (!probe.escapes) {
        double bound = 0.0;
        for (int k = K / 2; k < K; ++k) bound = std::max(bound, probe.circle_minima[std::size_t(k)]);
        probe.bound = bound;
        Witness w;
        w.kind = Witness::Kind::BoundedEscape;
        w.p1 = overall_argmin.p;
        w.image_distance = mK;
        char buf[128];
        std::snprintf(buf, sizeof buf, "approach-circle minima stay below %.3e", bound);
        w.note = buf;
        probe.witness = w;
    }
    return probe;
}

// ---------------------------------------------------------------------------
// Symmetries
// ---------------------------------------------------------------------------

using Mat3 = std::array<Vec3, 3>;  // rows

inline Vec3 mat_apply(const Mat3& A, const Vec3& v) {
    return {dot(A[0], v), dot(A[1], v), dot(A[2], v)};
}

inline Mat3 diag_matrix(double a, double b, double c) {
    return {Vec3{a, 0, 0}, Vec3{0, b, 0}, Vec3{0, 0, c}};
}

inline Mat3 rotation_about_x3(double angle) {
    const double co = std::cos(angle), si = std::sin(angle);
    return {Vec3{co, -si, 0}, Vec3{si, co, 0}, Vec3{0, 0, 1}};
}

struct SymmetryDescriptor {
    enum class DomainMap {
        Conjugate,        // z -> conj(z)                (sphere)
        InvertConjugate,  // z -> 1 / conj(z)            (sphere)
        Rotate,           // z -> e^{2 pi i / order} z   (sphere)
        SheetFlip,        // (z, w) -> (z, -w)           (curve)
        ConjugateKeepW,   // (z, w) -> (conj z, conj w)  (curve)
        ConjugateFlipW,   // (z, w) -> (conj z, -conj w) (curve)
    };
    DomainMap map = DomainMap::Conjugate;
    int order = 2;  // rotation order for Rotate
    Mat3 linear = diag_matrix(1, 1, 1);
    Vec3 translation{};
    bool solve_translation = true;
    std::string label;
};

struct SymmetryReport {
    bool pass = false;
    double max_deviation = 0.0;
    Vec3 translation{};
    int samples = 0;
};

namespace detail {

inline SheetPoint apply_domain_map(const Domain& d, const SymmetryDescriptor& sym,
                                   const SheetPoint& p) {
    using M = SymmetryDescriptor::DomainMap;
    switch (sym.map) {
        case M::Conjugate:
            return {std::conj(p.z), 1};
        case M::InvertConjugate:
            return {1.0 / std::conj(p.z), 1};
        case M::Rotate:
            return {std::exp(Complex(0, 2.0 * kPi / sym.order)) * p.z, 1};
        default:
            break;
    }
    if (!d.is_hyperelliptic()) throw DomainError("sheet maps need a hyperelliptic domain");
    Complex z2 = p.z;
    Complex w2 = d.w_value(p);
    if (sym.map == M::SheetFlip) {
        w2 = -w2;
    } else {
        z2 = std::conj(p.z);
        w2 = std::conj(w2);
        if (sym.map == M::ConjugateFlipW) w2 = -w2;
    }
    // Resolve which sheet carries the mapped w value.
    double best = 1e300;
    int sheet = 1;
    for (int sh : {1, -1}) {
        double dvv = std::abs(d.w_value(SheetPoint{z2, sh}) - w2);
        if (dvv < best) {
            best = dvv;
            sheet = sh;
        }
    }
    if (best > 1e-6 * (1.0 + std::abs(w2)))
        throw DomainError("mapped point does not lie on the curve");
    return {z2, sheet};
}

}  // namespace detail

// Check |A f(p) + T - f(map(p))| over a deterministic sample set; when the
// descriptor asks for it, the translation T is solved from the first sample.
inline SymmetryReport check_symmetry(const SurfaceData& s, const SymmetryDescriptor& sym,
                                     int n_samples = 48, double tol = kSymmetryTol) {
    // The linear part must be a rigid motion.
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double g = sym.linear[std::size_t(i)][0] * sym.linear[std::size_t(j)][0] +
                       sym.linear[std::size_t(i)][1] * sym.linear[std::size_t(j)][1] +
                       sym.linear[std::size_t(i)][2] * sym.linear[std::size_t(j)][2];
            if (std::abs(g - (i == j ? 1.0 : 0.0)) > 1e-12)
                throw SchemaError("symmetry linear part is not orthogonal");
        }

    const bool hyper = s.domain.is_hyperelliptic();
    auto usable = [&](Complex z) {
        for (const SurfacePoint& q : s.punctures)
            if (!q.at_infinity && std::abs(z - q.z) < 0.2) return false;
        if (hyper)
            for (double root : s.domain.branch_roots)
                if (std::abs(z - Complex(root, 0)) < 0.2) return false;
        return true;
    };

    Evaluator ev(s);
    SymmetryReport rep;
    bool have_T = !sym.solve_translation;
    Vec3 T = sym.translation;
    const std::vector<int> sheets = hyper ? std::vector<int>{1, -1} : std::vector<int>{1};
    const int n_radii = 4;
    const int n_angles = std::max(4, n_samples / (n_radii * int(sheets.size())));
    for (int ir = 0; ir < n_radii; ++ir) {
        const double r = 0.45 * std::pow(1.9, ir);
        for (int ia = 0; ia < n_angles; ++ia) {
            const double t = 2.0 * kPi * (ia + 0.37) / n_angles;
            const Complex z = r * Complex(std::cos(t), std::sin(t));
            if (!usable(z)) continue;
            for (int sh : sheets) {
                SheetPoint p{z, sh};
                SheetPoint q;
                try {
                    q = detail::apply_domain_map(s.domain, sym, p);
                } catch (const DomainError&) {
                    continue;
                }
                if (!usable(q.z)) continue;
                const Vec3 fp = ev.value(p);
                const Vec3 fq = ev.value(q);
                const Vec3 Afp = mat_apply(sym.linear, fp);
                if (!have_T) {
                    T = fq - Afp;
                    have_T = true;
                    ++rep.samples;
                    continue;
                }
                rep.max_deviation = std::max(rep.max_deviation, norm(Afp + T - fq));
                ++rep.samples;
            }
        }
    }
    if (rep.samples < 8) throw Error("too few usable symmetry samples");
    rep.translation = T;
    rep.pass = rep.max_deviation < tol;
    return rep;
}

// ---------------------------------------------------------------------------
// Injectivity
// ---------------------------------------------------------------------------

namespace detail {

// Separation of two sheet points measured along the surface, never more than
// the true distance: same-sheet pairs use the plane distance, cross-sheet
// pairs may connect through a branch point or across a cut bank.
inline double domain_separation(const Domain& d, const SheetPoint& a, const SheetPoint& b) {
    if (d.kind == Domain::Kind::Sphere || a.sheet == b.sheet) return std::abs(a.z - b.z);
    double best = 1e300;
    for (double root : d.branch_roots)
        best = std::min(best, std::abs(a.z - Complex(root, 0)) + std::abs(b.z - Complex(root, 0)));
    for (const Cut& c : d.cuts)
        if (c.contains(a.z.real()) && c.contains(b.z.real()))
            best = std::min(best, std::abs(a.z.imag()) + std::abs(b.z.imag()) +
                                      std::abs(a.z.real() - b.z.real()));
    return best;
}

}  // namespace detail

// Triangle-level self-intersection scan on a sampled mesh. Pairs sharing a
// vertex are skipped by the BVH; every returned pair is a genuine crossing
// of the sampled triangles.
inline std::vector<Witness> self_intersection_scan(const SurfaceData& s, const TriMesh& m) {
    (void)s;
    std::vector<Witness> out;
    for (const auto& [a, b] : self_intersections(m)) {
        if (out.size() >= 100) break;
        Witness w;
        w.kind = Witness::Kind::SelfIntersection;
        w.p1 = m.sources[m.triangles[a][0]];
        w.p2 = m.sources[m.triangles[b][0]];
        w.image_distance = 0.0;
        char buf[64];
        std::snprintf(buf, sizeof buf, "triangles %zu and %zu overlap", a, b);
        w.note = buf;
        out.push_back(w);
    }
    return out;
}

// Newton-polished coincident-point search: mesh vertices whose images nearly
// agree while their domain points stay separated seed a Gauss-Newton descent
// on |f(p1) - f(p2)|; survivors within the image tolerance are witnesses.
inline std::vector<Witness> coincident_pair_search(const SurfaceData& s, const TriMesh& m,
                                                   const MeshRegion& rg) {
    std::vector<Witness> out;
    if (m.vertices.empty()) return out;
    const double diag = std::max(m.bbox_diag(), 1e-300);
    const double image_tol = kWitnessImageTolFactor * diag;

    // Image-closeness threshold from the median triangle edge length.
    std::vector<double> lens;
    lens.reserve(m.triangles.size() * 3);
    for (const auto& t : m.triangles)
        for (int e = 0; e < 3; ++e)
            lens.push_back(norm(m.vertices[t[std::size_t(e)]] -
                                m.vertices[t[std::size_t((e + 1) % 3)]]));
    if (lens.empty()) return out;
    std::nth_element(lens.begin(), lens.begin() + long(lens.size() / 2), lens.end());
    const double h_img = std::max(3.0 * lens[lens.size() / 2], 1e-9 * diag);

    const double dtheta = 2.0 * kPi / std::max(8, rg.n_theta);
    auto far_apart = [&](const SheetPoint& a, const SheetPoint& b) {
        const double locb = 3.0 * dtheta * std::max(std::abs(a.z), std::abs(b.z));
        return detail::domain_separation(s.domain, a, b) > locb;
    };

    // Spatial hash on vertex images.
    std::map<std::tuple<long, long, long>, std::vector<std::size_t>> buckets;
    auto key_of = [&](const Vec3& v) {
        return std::tuple<long, long, long>{std::lround(v[0] / h_img),
                                            std::lround(v[1] / h_img),
                                            std::lround(v[2] / h_img)};
    };
    for (std::size_t v = 0; v < m.vertices.size(); ++v) {
        if (m.sources[v].sheet == 0) continue;  // branch cones: neighbors cover them
        buckets[key_of(m.vertices[v])].push_back(v);
    }

    std::vector<std::pair<std::size_t, std::size_t>> cand;
    for (const auto& [key, verts] : buckets) {
        auto [kx, ky, kz] = key;
        for (long dx = 0; dx <= 1; ++dx)
            for (long dy = (dx == 0 ? 0 : -1); dy <= 1; ++dy)
                for (long dz = ((dx == 0 && dy == 0) ? 0 : -1); dz <= 1; ++dz) {
                    auto it = buckets.find({kx + dx, ky + dy, kz + dz});
                    if (it == buckets.end()) continue;
                    for (std::size_t a : verts)
                        for (std::size_t b : it->second) {
                            if (&verts == &it->second && b <= a) continue;
                            if (norm(m.vertices[a] - m.vertices[b]) > h_img) continue;
                            if (!far_apart(m.sources[a], m.sources[b])) continue;
                            cand.push_back({std::min(a, b), std::max(a, b)});
                        }
                }
    }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

    FormJets jets(s);
    Evaluator ev(s);
    const bool hyper = s.domain.is_hyperelliptic();

    auto off_limits = [&](Complex z) {
        const double a = std::abs(z);
        if (a < rg.r_min || a > rg.r_max) return true;
        for (const SurfacePoint& q : s.punctures)
            if (!q.at_infinity && std::abs(z - q.z) <= 0.5 * rg.puncture_radius) return true;
        if (hyper)
            for (double root : s.domain.branch_roots)
                if (std::abs(z - Complex(root, 0)) <= 1e-3) return true;
        return false;
    };

    // Evaluate near a mesh vertex by one local segment from its source.
    auto local_value = [&](std::size_t vertex, const SheetPoint& p) -> std::pair<Vec3, int> {
        if (!hyper) return {ev.value(p.z), 1};
        PathIntegral pi =
            integrate_segment(s, m.sources[vertex].z, p.z, m.sources[vertex].sheet, rg.quad_tol);
        return {m.vertices[vertex] + Vec3{pi.value[0].real(), pi.value[1].real(),
                                          pi.value[2].real()},
                pi.end_sheet};
    };

    std::set<std::tuple<long, long, long, long>> taken;
    const double snap = std::max(1e-12, 0.5 * dtheta * rg.r_min);
    for (const auto& [va, vb] : cand) {
        SheetPoint pa = m.sources[va], pb = m.sources[vb];
        Vec3 fa = m.vertices[va], fb = m.vertices[vb];
        bool ok = true;
        const double step_cap = dtheta * std::max(std::abs(pa.z), std::abs(pb.z));
        for (int it = 0; it < 30; ++it) {
            Vec3 r = fa - fb;
            if (norm(r) < 0.2 * image_tol) break;
            MetricSample ma, mb;
            try {
                ma = metric_sample(s, jets, pa);
                mb = metric_sample(s, jets, pb);
            } catch (const Error&) {
                ok = false;
                break;
            }
            Eigen::Matrix<double, 3, 4> J;
            Eigen::Vector3d rv;
            for (int i = 0; i < 3; ++i) {
                J(i, 0) = ma.fx[std::size_t(i)];
                J(i, 1) = ma.fy[std::size_t(i)];
                J(i, 2) = -mb.fx[std::size_t(i)];
                J(i, 3) = -mb.fy[std::size_t(i)];
                rv(i) = -r[std::size_t(i)];
            }
            Eigen::Vector4d step =
                J.jacobiSvd(Eigen::ComputeFullU | Eigen::ComputeFullV).solve(rv);
            double mag = step.lpNorm<Eigen::Infinity>();
            if (mag > step_cap) step *= step_cap / mag;
            Complex za = pa.z + Complex(step(0), step(1));
            Complex zb = pb.z + Complex(step(2), step(3));
            if (off_limits(za) || off_limits(zb)) {
                ok = false;
                break;
            }
            auto [nfa, sa] = local_value(va, SheetPoint{za, pa.sheet});
            auto [nfb, sb] = local_value(vb, SheetPoint{zb, pb.sheet});
            pa = SheetPoint{za, sa};
            pb = SheetPoint{zb, sb};
            fa = nfa;
            fb = nfb;
            if (mag < 1e-16 * (1.0 + std::abs(pa.z))) break;
        }
        if (!ok) continue;
        const double dist = norm(fa - fb);
        if (dist >= image_tol) continue;
        if (!far_apart(pa, pb)) continue;
        // Canonical order and dedup on snapped positions.
        if (std::make_tuple(pa.z.real(), pa.z.imag()) > std::make_tuple(pb.z.real(), pb.z.imag()))
            std::swap(pa, pb);
        auto keyt = std::make_tuple(std::lround(pa.z.real() / snap), std::lround(pa.z.imag() / snap),
                                    std::lround(pb.z.real() / snap), std::lround(pb.z.imag() / snap));
        if (!taken.insert(keyt).second) continue;
        if (out.size() >= 100) break;
        Witness w;
        w.kind = Witness::Kind::CoincidentPair;
        w.p1 = pa;
        w.p2 = pb;
        w.image_distance = dist;
        w.note = "distinct domain points, coincident images";
        out.push_back(w);
    }
    return out;
}

// Full injectivity scan at a given resolution: triangle crossings plus
// polished coincident pairs.
inline std::vector<Witness> injectivity_witness_search(const SurfaceData& s,
                                                       const MeshRegion& rg) {
    TriMesh m = build_mesh(s, rg);
    std::vector<Witness> out = self_intersection_scan(s, m);
    std::vector<Witness> pairs = coincident_pair_search(s, m, rg);
    out.insert(out.end(), pairs.begin(), pairs.end());
    return out;
}

}  // namespace harmonic
