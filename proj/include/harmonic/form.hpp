#pragma once

// Meromorphic 1-forms on a domain, written (a(z) + b(z)/w) dz with a, b
// rational (b = 0 on the sphere). The key operation is localization: the
// Laurent expansion of the pulled-back form in the chart at any point,
// which drives pole orders, residues and end typing.
//
// Charts: u = z - z0 at finite regular points; t with z = z0 + t^2 at
// finite branch points; t with z = 1/t^2 at the branch point over infinity;
// zeta = 1/z on the sphere at infinity.

#include <array>
#include <string>
#include <vector>

#include "harmonic/domain.hpp"
#include "harmonic/laurent.hpp"
#include "harmonic/rational.hpp"

namespace harmonic {

struct MeromorphicForm {
    CRational a;
    CRational b;

    bool is_zero() const { return a.is_zero() && b.is_zero(); }
};

struct SurfaceData {
    std::string label;
    Domain domain;
    std::array<MeromorphicForm, 3> forms;
    std::vector<SurfacePoint> punctures;
    SheetPoint basepoint{Complex(0), +1};
};

// phi_k value in the z chart at a sheet point.
inline Complex form_value(const MeromorphicForm& f, const Domain& d, const SheetPoint& pt) {
    Complex v = f.a.is_zero() ? Complex(0) : eval_rational(f.a, pt.z);
    if (!f.b.is_zero()) {
        Complex w = d.w_value(pt);
        if (std::abs(w) < 1e-13) throw SingularPointError("phi evaluated at a branch point");
        v += eval_rational(f.b, pt.z) / w;
    }
    return v;
}

// d(phi)/dz as another form: (b/w)' = (b' - b p'/(2p)) / w.
inline MeromorphicForm form_z_derivative(const MeromorphicForm& f, const Domain& d) {
    MeromorphicForm out;
    out.a = derivative(f.a);
    if (!f.b.is_zero()) {
        CRational p(d.branch, CPoly::constant(1));
        CRational pp(derivative(d.branch), CPoly::constant(1));
        out.b = derivative(f.b) - Complex(0.5) * (f.b * pp) / p;
    }
    return out;
}

namespace detail {

inline LaurentExpansion shift_degrees(LaurentExpansion le, int by) {
    le.min_degree += by;
    return le;
}

inline LaurentExpansion dilate_degrees(const LaurentExpansion& le, std::size_t n) {
    LaurentExpansion out;
    out.min_degree = 2 * le.min_degree;
    out.coeffs = series::dilate2(le.coeffs, n);
    return out;
}

// Power series (min_degree 0) from raw coefficients.
inline LaurentExpansion as_series(std::vector<Complex> c) {
    return LaurentExpansion{0, std::move(c)};
}

// Series of the rational function at infinity in s = 1/z.
inline LaurentExpansion function_series_at_infinity(const CRational& r, std::size_t n) {
    if (r.is_zero()) return LaurentExpansion{0, {}};
    LaurentExpansion out;
    out.min_degree = -r.infinity_degree();
    out.coeffs = series::div(reversed(r.num).coeffs, reversed(r.den).coeffs, n);
    return out;
}

}  // namespace detail

// Laurent expansion of the form at `p` in the local chart described above.
// n_terms counts stored coefficients from the leading exponent.
inline LaurentExpansion localize_form(const MeromorphicForm& f, const Domain& d,
                                      const SurfacePoint& p, int n_terms = 24) {
    const std::size_t n = std::size_t(std::max(4, n_terms));
    if (!d.is_hyperelliptic()) {
        if (!f.b.is_zero()) throw DomainError("w-part on a sphere domain");
        return laurent_at(f.a, p.at_infinity ? Complex(0) : p.z, int(n), p.at_infinity);
    }

    if (p.at_infinity) {
        // z = 1/t^2, dz = -2 t^-3 dt, w ~ t^-3 sqrt(lead).
        LaurentExpansion out{0, {}};
        if (!f.a.is_zero()) {
            LaurentExpansion As = detail::function_series_at_infinity(f.a, n);
            LaurentExpansion At = detail::dilate_degrees(As, 2 * n);
            out = laurent_add(out, detail::shift_degrees(laurent_scale(At, Complex(-2)), -3));
        }
        if (!f.b.is_zero()) {
            LaurentExpansion Bs = detail::function_series_at_infinity(f.b, n);
            LaurentExpansion Bt = detail::dilate_degrees(Bs, 2 * n);
            std::vector<Complex> prev = series::dilate2(reversed(d.branch).coeffs, 2 * n);
            std::vector<Complex> sq = series::sqrt_unit(prev, 2 * n);
            LaurentExpansion bpart;
            bpart.min_degree = Bt.min_degree;
            bpart.coeffs = series::div(Bt.coeffs, sq, Bt.coeffs.size());
            out = laurent_add(out, laurent_scale(bpart, Complex(-2)));
        }
        return out;
    }

    if (d.is_branch_point(p.z)) {
        // z = z0 + t^2: form = [2t A(t^2) + 2 B(t^2)/sqrt(ptilde(t^2))] dt.
        CPoly psh = taylor_shift(d.branch, p.z);
        std::vector<Complex> ptilde(psh.coeffs.begin() + 1, psh.coeffs.end());
        LaurentExpansion out{0, {}};
        if (!f.a.is_zero()) {
            LaurentExpansion Au = laurent_function_at(f.a, p.z, int(n));
            LaurentExpansion At = detail::dilate_degrees(Au, 2 * n);
            out = laurent_add(out, detail::shift_degrees(laurent_scale(At, Complex(2)), 1));
        }
        if (!f.b.is_zero()) {
            LaurentExpansion Bu = laurent_function_at(f.b, p.z, int(n));
            LaurentExpansion Bt = detail::dilate_degrees(Bu, 2 * n);
            std::vector<Complex> sq = series::sqrt_unit(series::dilate2(ptilde, 2 * n), 2 * n);
            LaurentExpansion bpart;
            bpart.min_degree = Bt.min_degree;
            bpart.coeffs = series::div(Bt.coeffs, sq, Bt.coeffs.size());
            out = laurent_add(out, laurent_scale(bpart, Complex(2)));
        }
        return out;
    }

    // Regular sheet point: A + B * (1/w) with w analytic and nonzero.
    LaurentExpansion out = f.a.is_zero() ? LaurentExpansion{0, {}}
                                         : laurent_function_at(f.a, p.z, int(n));
    if (!f.b.is_zero()) {
        LaurentExpansion Bu = laurent_function_at(f.b, p.z, int(n));
        CPoly psh = taylor_shift(d.branch, p.z);
        Complex p0 = psh.coeffs[0];
        std::vector<Complex> unit = psh.coeffs;
        for (auto& c : unit) c /= p0;
        Complex w0 = d.w_value(SheetPoint{p.z, p.sheet});
        std::vector<Complex> inv_w = series::div({Complex(1)}, series::sqrt_unit(unit, n), n);
        for (auto& c : inv_w) c /= w0;
        out = laurent_add(out, laurent_mul(Bu, detail::as_series(inv_w)));
    }
    return out;
}

// Pole order of form k at p; zero for holomorphic points (and zeros).
inline int form_pole_order(const SurfaceData& s, int k, const SurfacePoint& p) {
    const MeromorphicForm& f = s.forms[std::size_t(k)];
    if (f.is_zero()) return 0;
    LaurentExpansion le = localize_form(f, s.domain, p);
    int lead = le.leading_degree(1e-9 * std::max(1e-300, le.scale()));
    return lead < 0 ? -lead : 0;
}

// Residue of form k at p in the local chart (coefficient of 1/t or 1/u).
inline Complex form_residue(const SurfaceData& s, int k, const SurfacePoint& p) {
    const MeromorphicForm& f = s.forms[std::size_t(k)];
    if (f.is_zero()) return Complex(0);
    return localize_form(f, s.domain, p).at(-1);
}

struct ResidueRow {
    std::size_t puncture;
    int form;
    Complex residue;
    bool real_ok;
};

struct ResidueReport {
    std::vector<ResidueRow> rows;
    bool all_real = true;
};

// Real residues are what make Re(integral) single-valued around punctures.
inline ResidueReport residues_real_check(const SurfaceData& s, double tol = 1e-9) {
    ResidueReport rep;
    for (std::size_t i = 0; i < s.punctures.size(); ++i) {
        for (int k = 0; k < 3; ++k) {
            Complex res = form_residue(s, k, s.punctures[i]);
            bool ok = std::abs(res.imag()) <= tol * std::max(1.0, std::abs(res));
            rep.rows.push_back({i, k, res, ok});
            rep.all_real = rep.all_real && ok;
        }
    }
    return rep;
}

// Candidate punctures for ad-hoc (CLI-supplied) form triples: every pole of
// any form, plus the point(s) over infinity when some form has a pole there.
inline std::vector<SurfacePoint> infer_punctures(const Domain& d,
                                                 const std::array<MeromorphicForm, 3>& forms) {
    std::vector<SurfacePoint> pts;
    auto push_unique = [&](const SurfacePoint& p) {
        for (auto& q : pts)
            if (same_point(p, q, d)) return;
        pts.push_back(p);
    };
    SurfaceData probe{"", d, forms, {}, {}};
    for (const auto& f : forms) {
        for (const CRational* r : {&f.a, &f.b}) {
            if (r->is_zero()) continue;
            for (auto& c : den_pole_clusters(*r)) {
                if (d.is_hyperelliptic() && !d.is_branch_point(c.value)) {
                    for (int sheet : {+1, -1}) {
                        SurfacePoint p = SurfacePoint::finite(c.value, sheet);
                        for (int k = 0; k < 3; ++k)
                            if (form_pole_order(probe, k, p) > 0) { push_unique(p); break; }
                    }
                } else {
                    SurfacePoint p = SurfacePoint::finite(c.value);
                    for (int k = 0; k < 3; ++k)
                        if (form_pole_order(probe, k, p) > 0) { push_unique(p); break; }
                }
            }
        }
    }
    SurfacePoint inf = SurfacePoint::infinity();
    for (int k = 0; k < 3; ++k)
        if (form_pole_order(probe, k, inf) > 0) { push_unique(inf); break; }
    return pts;
}

}  // namespace harmonic
