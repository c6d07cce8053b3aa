#pragma once

// Rational functions r(z) = num/den with structural denominator factors.
// Factors survive arithmetic (products, quotient-rule derivatives, common
// denominators), so pole locations and orders come from square-free factor
// roots instead of re-isolating multiple roots of an expanded polynomial.

#include <optional>
#include <utility>
#include <vector>

#include "harmonic/core.hpp"
#include "harmonic/laurent.hpp"
#include "harmonic/poly.hpp"

namespace harmonic {

struct CRational {
    CPoly num;
    CPoly den = CPoly::constant(1);
    // den equals the product of factors^mult up to a scalar folded into den
    // itself; empty means den is its own single factor.
    std::vector<std::pair<CPoly, int>> den_factors;

    CRational() = default;
    CRational(CPoly n, CPoly d) : num(std::move(n)), den(std::move(d)) {
        if (den.is_zero()) throw Error("rational with zero denominator");
        if (den.degree() > 0) den_factors.push_back({den, 1});
    }
    static CRational constant(Complex c) {
        CRational r;
        r.num = CPoly::constant(c);
        return r;
    }
    static CRational identity() {
        CRational r;
        r.num = CPoly::identity();
        return r;
    }
    static CRational from_parts(CPoly n, CPoly d, std::vector<std::pair<CPoly, int>> f) {
        CRational r;
        r.num = std::move(n);
        r.den = std::move(d);
        r.den_factors = std::move(f);
        if (r.den.is_zero()) throw Error("rational with zero denominator");
        return r;
    }

    bool is_zero() const { return num.is_zero(); }
    bool is_poly() const { return den.degree() <= 0; }
    double coeff_scale() const { return std::max(num.coeff_scale(), den.coeff_scale()); }

    // Degree at infinity: r(z) ~ z^infinity_degree.
    int infinity_degree() const { return num.degree() - den.degree(); }
};

namespace detail {

inline std::vector<std::pair<CPoly, int>> merged_factors(const CRational& a,
                                                         const CRational& b) {
    std::vector<std::pair<CPoly, int>> f = a.den_factors;
    f.insert(f.end(), b.den_factors.begin(), b.den_factors.end());
    return f;
}

}  // namespace detail

inline CRational operator+(const CRational& a, const CRational& b) {
    return CRational::from_parts(a.num * b.den + b.num * a.den, a.den * b.den,
                                 detail::merged_factors(a, b));
}

inline CRational operator-(const CRational& a, const CRational& b) {
    return CRational::from_parts(a.num * b.den - b.num * a.den, a.den * b.den,
                                 detail::merged_factors(a, b));
}

inline CRational operator*(const CRational& a, const CRational& b) {
    return CRational::from_parts(a.num * b.num, a.den * b.den,
                                 detail::merged_factors(a, b));
}

inline CRational operator*(Complex s, const CRational& a) {
    return CRational::from_parts(s * a.num, a.den, a.den_factors);
}

inline CRational operator/(const CRational& a, const CRational& b) {
    if (b.is_zero()) throw Error("rational division by zero");
    auto f = a.den_factors;
    if (b.num.degree() > 0) f.push_back({b.num, 1});
    return CRational::from_parts(a.num * b.den, a.den * b.num, std::move(f));
}

inline CRational rational_pow(const CRational& a, int k) {
    if (k == 0) return CRational::constant(1);
    CRational base = k > 0 ? a : CRational::constant(1) / a;
    CRational acc = base;
    for (int i = 1; i < std::abs(k); ++i) acc = acc * base;
    return acc;
}

// Quotient rule; denominator factors double structurally.
inline CRational derivative(const CRational& r) {
    if (r.is_poly()) {
        CRational d;
        d.num = divmod(derivative(r.num), r.den).first;
        return d;
    }
    auto f = r.den_factors;
    for (auto& e : f) e.second *= 2;
    return CRational::from_parts(derivative(r.num) * r.den - r.num * derivative(r.den),
                                 r.den * r.den, std::move(f));
}

// Distinct poles of the denominator with total multiplicities. Numerator
// cancellation is *not* applied here; Laurent machinery strips it per point.
inline std::vector<RootCluster> den_pole_clusters(const CRational& r) {
    std::vector<RootCluster> all;
    auto add = [&all](Complex v, int m) {
        for (auto& c : all) {
            double radius = std::max(root_tolerance(1.0 + std::abs(v)),
                                     5e-7 * (1.0 + std::abs(v)));
            if (std::abs(c.value - v) <= radius) {
                c.multiplicity += m;
                return;
            }
        }
        all.push_back({v, m});
    };
    if (!r.den_factors.empty()) {
        for (auto& [f, m] : r.den_factors) {
            if (f.degree() < 1) continue;
            for (auto& c : poly_roots(f)) add(c.value, c.multiplicity * m);
        }
    } else if (r.den.degree() > 0) {
        for (auto& c : poly_roots(r.den)) add(c.value, c.multiplicity);
    }
    return all;
}

// Laurent expansion of r at finite p: shift num and den, strip the vanishing
// leading coefficients of each, divide as power series.
inline LaurentExpansion laurent_function_at(const CRational& r, Complex p, int n_terms) {
    if (r.is_zero()) return LaurentExpansion{0, {}};
    if (n_terms < 1) n_terms = 1;
    CPoly ns = taylor_shift(r.num, p);
    CPoly ds = taylor_shift(r.den, p);
    auto strip = [](const CPoly& q) {
        double tol = 1e-9 * std::max(1.0, q.coeff_scale());
        std::size_t s = 0;
        while (s < q.coeffs.size() && std::abs(q.coeffs[s]) <= tol) ++s;
        return s;
    };
    std::size_t sn = strip(ns);
    std::size_t sd = strip(ds);
    if (sd >= ds.coeffs.size()) throw FactorizationFailure("denominator vanishes identically at point");
    if (sn >= ns.coeffs.size()) return LaurentExpansion{0, {}};
    std::vector<Complex> a(ns.coeffs.begin() + sn, ns.coeffs.end());
    std::vector<Complex> b(ds.coeffs.begin() + sd, ds.coeffs.end());
    LaurentExpansion out;
    out.min_degree = int(sn) - int(sd);
    out.coeffs = series::div(a, b, std::size_t(n_terms));
    return out;
}

// Expansion of the *form* r dz at p in the local chart. At infinity the
// chart is zeta = 1/z with dz = -d(zeta)/zeta^2, so the form picks up the
// familiar two extra pole orders; encode p = infinity with the flag.
inline LaurentExpansion laurent_at(const CRational& r, Complex p, int n_terms,
                                   bool at_infinity = false) {
    if (!at_infinity) return laurent_function_at(r, p, n_terms);
    if (r.is_zero()) return LaurentExpansion{0, {}};
    std::vector<Complex> nr = reversed(r.num).coeffs;
    std::vector<Complex> dr = reversed(r.den).coeffs;
    LaurentExpansion out;
    out.min_degree = r.den.degree() - r.num.degree() - 2;
    out.coeffs = series::div(nr, dr, std::size_t(std::max(1, n_terms)));
    for (auto& c : out.coeffs) c = -c;
    return out;
}

inline Complex residue(const CRational& r, Complex p) {
    // Enough terms to reach u^-1 from the deepest possible pole order.
    int depth = r.den.degree() + 2;
    LaurentExpansion le = laurent_function_at(r, p, depth);
    return le.at(-1);
}

// Evaluate r(z). Within tau_root of an effective pole this throws PoleHit;
// at removable singularities it falls back to the local expansion.
inline Complex eval_rational(const CRational& r, Complex z) {
    if (r.is_zero()) return Complex(0);
    Complex dv = r.den(z);
    double dscale = std::max(1.0, r.den.coeff_scale());
    double zmag = std::max(1.0, std::abs(z));
    double guard = dscale * std::pow(zmag, std::max(0, r.den.degree())) * 1e-11;
    if (std::abs(dv) > guard) return r.num(z) / dv;
    LaurentExpansion le = laurent_function_at(r, z, r.den.degree() + 2);
    le.normalize(1e-9 * std::max(1.0, le.scale()));
    if (!le.empty() && le.min_degree < 0)
        throw PoleHit("rational evaluated at a pole");
    return le.at(0);
}

// Antiderivative split: returns R and log terms {(p_i, c_i)} with
// R' + sum c_i/(z - p_i) = r. FactorizationFailure if the reassembled
// derivative fails to match r at probe points.
inline std::pair<CRational, std::vector<std::pair<Complex, Complex>>>
antiderivative(const CRational& r) {
    std::vector<std::pair<Complex, Complex>> logs;
    if (r.is_zero()) return {CRational(), logs};

    Complex den_lead = r.den.lead();
    CPoly num_n = (Complex(1) / den_lead) * r.num;
    CPoly den_n = (Complex(1) / den_lead) * r.den;

    auto [q, rem] = divmod(num_n, den_n);
    CRational result;
    result.num = integral(q);

    if (!rem.is_zero() && den_n.degree() > 0) {
        auto poles = den_pole_clusters(r);
        CRational proper = CRational::from_parts(rem, den_n, r.den_factors);

        // Partial-fraction data per pole from the local expansion.
        struct PoleData {
            Complex p;
            std::vector<Complex> c;  // c[j] multiplies (z-p)^-(j+1)
        };
        std::vector<PoleData> pds;
        for (auto& pc : poles) {
            LaurentExpansion le = laurent_function_at(proper, pc.value, pc.multiplicity + 1);
            PoleData pd;
            pd.p = pc.value;
            pd.c.assign(std::size_t(pc.multiplicity), Complex(0));
            for (int j = 1; j <= pc.multiplicity; ++j) pd.c[j - 1] = le.at(-j);
            pds.push_back(std::move(pd));
        }

        // Rational tail: sum over poles of sum_{j>=2} -c_j/((j-1)(z-p)^(j-1)),
        // assembled over the common denominator prod (z-p)^(m-1).
        CRational tail;
        for (auto& pd : pds) {
            CPoly local;  // polynomial in u = z - p of degree m-2
            for (std::size_t j = 2; j <= pd.c.size(); ++j) {
                Complex coef = -pd.c[j - 1] / double(j - 1);
                // coef * u^(m-1-(j-1))
                std::vector<Complex> mono(pd.c.size() - j + 1, Complex(0));
                mono.back() = coef;
                local = local + CPoly(std::move(mono));
            }
            if (local.is_zero()) continue;
            CPoly denp = CPoly::constant(1);
            CPoly ushift({-pd.p, Complex(1)});
            for (std::size_t k = 1; k < pd.c.size(); ++k) denp = denp * ushift;
            tail = tail + CRational::from_parts(taylor_shift(local, -pd.p), denp,
                                                {{ushift, int(pd.c.size()) - 1}});
            // taylor_shift with -p maps the u-polynomial back to z.
        }
        result = result + tail;

        for (auto& pd : pds) {
            Complex c1 = pd.c.empty() ? Complex(0) : pd.c[0];
            if (std::abs(c1) > 1e-11 * std::max(1.0, r.coeff_scale()))
                logs.push_back({pd.p, c1});
        }
    }

    // Probe: derivative of the result plus log-term derivatives must give r back.
    CRational check = derivative(result);
    for (Complex z : {Complex(0.437, 1.122), Complex(-1.91, 0.53), Complex(2.33, -2.71)}) {
        Complex lhs;
        bool ok = true;
        try {
            lhs = eval_rational(check, z);
            for (auto& [p, c] : logs) lhs += c / (z - p);
            Complex rhs = eval_rational(r, z);
            double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
            if (std::abs(lhs - rhs) > 1e-7 * scale) ok = false;
        } catch (const PoleHit&) {
            continue;
        }
        if (!ok) throw FactorizationFailure("antiderivative verification failed");
    }
    return {result, logs};
}

}  // namespace harmonic
