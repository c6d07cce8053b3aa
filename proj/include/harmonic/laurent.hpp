#pragma once

// Truncated Laurent expansions in a local parameter. Used both for rational
// functions in the plane chart and for forms pulled back to branch charts
// (t^2 = z - z0) and the chart at infinity. Coefficients are stored densely
// from min_degree upward; everything beyond the stored window is unknown,
// not zero, so operations track how far the truncation is trustworthy.

#include <algorithm>
#include <vector>

#include "harmonic/core.hpp"

namespace harmonic {

struct LaurentExpansion {
    int min_degree = 0;                // exponent of coeffs[0]
    std::vector<Complex> coeffs;       // coeffs[k] multiplies u^(min_degree+k)

    bool empty() const { return coeffs.empty(); }
    int max_degree() const { return min_degree + int(coeffs.size()) - 1; }

    Complex at(int degree) const {
        int idx = degree - min_degree;
        if (idx < 0 || idx >= int(coeffs.size())) return Complex(0);
        return coeffs[idx];
    }

    double scale() const {
        double s = 0;
        for (auto& c : coeffs) s = std::max(s, std::abs(c));
        return s;
    }

    // Exponent of the first coefficient exceeding tol; INT_MAX-ish sentinel
    // (max_degree()+1) when the whole window is negligible.
    int leading_degree(double tol) const {
        for (std::size_t i = 0; i < coeffs.size(); ++i)
            if (std::abs(coeffs[i]) > tol) return min_degree + int(i);
        return max_degree() + 1;
    }

    // Drop leading coefficients at or below tol so min_degree is genuine.
    void normalize(double tol) {
        std::size_t lead = 0;
        while (lead < coeffs.size() && std::abs(coeffs[lead]) <= tol) ++lead;
        if (lead > 0) {
            coeffs.erase(coeffs.begin(), coeffs.begin() + lead);
            min_degree += int(lead);
        }
    }

    Complex eval(Complex u) const {
        Complex acc(0);
        for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * u + coeffs[i];
        return acc * std::pow(u, min_degree);
    }
};

namespace series {

// Plain power-series helpers over fixed-length coefficient vectors
// (index = exponent, starting at 0).

inline std::vector<Complex> mul(const std::vector<Complex>& a,
                                const std::vector<Complex>& b, std::size_t n) {
    std::vector<Complex> c(n, Complex(0));
    for (std::size_t i = 0; i < a.size() && i < n; ++i)
        for (std::size_t j = 0; j < b.size() && i + j < n; ++j)
            c[i + j] += a[i] * b[j];
    return c;
}

// a / b with b[0] != 0.
inline std::vector<Complex> div(const std::vector<Complex>& a,
                                const std::vector<Complex>& b, std::size_t n) {
    if (b.empty() || b[0] == Complex(0))
        throw Error("series division by non-unit");
    std::vector<Complex> q(n, Complex(0));
    for (std::size_t k = 0; k < n; ++k) {
        Complex acc = k < a.size() ? a[k] : Complex(0);
        for (std::size_t j = 1; j <= k && j < b.size(); ++j) acc -= b[j] * q[k - j];
        q[k] = acc / b[0];
    }
    return q;
}

// sqrt of a unit series, branch fixed by sqrt of the constant term.
inline std::vector<Complex> sqrt_unit(const std::vector<Complex>& a, std::size_t n) {
    if (a.empty() || a[0] == Complex(0)) throw Error("series sqrt of non-unit");
    std::vector<Complex> s(n, Complex(0));
    s[0] = std::sqrt(a[0]);
    for (std::size_t k = 1; k < n; ++k) {
        Complex acc = k < a.size() ? a[k] : Complex(0);
        for (std::size_t j = 1; j < k; ++j) acc -= s[j] * s[k - j];
        s[k] = acc / (2.0 * s[0]);
    }
    return s;
}

// Substitute u = t^2: exponents double.
inline std::vector<Complex> dilate2(const std::vector<Complex>& a, std::size_t n) {
    std::vector<Complex> c(n, Complex(0));
    for (std::size_t i = 0; i < a.size() && 2 * i < n; ++i) c[2 * i] = a[i];
    return c;
}

}  // namespace series

// Laurent combination helpers used by the end-type reducer.

inline LaurentExpansion laurent_scale(const LaurentExpansion& a, Complex s) {
    LaurentExpansion r = a;
    for (auto& c : r.coeffs) c *= s;
    return r;
}

inline LaurentExpansion laurent_add(const LaurentExpansion& a, const LaurentExpansion& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    int lo = std::min(a.min_degree, b.min_degree);
    // Truncation windows must agree at the top or the sum's tail is unknown.
    int hi = std::min(a.max_degree(), b.max_degree());
    LaurentExpansion r;
    r.min_degree = lo;
    r.coeffs.assign(std::size_t(hi - lo + 1), Complex(0));
    for (int d = lo; d <= hi; ++d) r.coeffs[d - lo] = a.at(d) + b.at(d);
    return r;
}

inline LaurentExpansion laurent_mul(const LaurentExpansion& a, const LaurentExpansion& b) {
    if (a.empty() || b.empty()) return LaurentExpansion{0, {}};
    LaurentExpansion r;
    r.min_degree = a.min_degree + b.min_degree;
    r.coeffs = series::mul(a.coeffs, b.coeffs,
                           std::min(a.coeffs.size(), b.coeffs.size()));
    return r;
}

}  // namespace harmonic
