#pragma once

// Dense complex polynomials with the handful of operations the rational
// layer needs: arithmetic, evaluation, derivatives, Taylor shifts, division,
// and root extraction via companion-matrix eigenvalues with Newton polish.
// Degrees stay small (<= ~20 after form arithmetic), so dense is fine.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "harmonic/core.hpp"

namespace harmonic {

struct CPoly {
    // coeffs[k] multiplies z^k; normalized so the leading entry is nonzero
    // (the zero polynomial has an empty vector).
    std::vector<Complex> coeffs;

    CPoly() = default;
    explicit CPoly(std::vector<Complex> c) : coeffs(std::move(c)) { trim(); }
    static CPoly constant(Complex c) {
        return c == Complex(0) ? CPoly() : CPoly({c});
    }
    static CPoly identity() { return CPoly({Complex(0), Complex(1)}); }

    bool is_zero() const { return coeffs.empty(); }
    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
    Complex lead() const { return coeffs.empty() ? Complex(0) : coeffs.back(); }
    Complex coeff(int d) const {
        return (d < 0 || d >= int(coeffs.size())) ? Complex(0) : coeffs[std::size_t(d)];
    }

    double coeff_scale() const {
        double s = 0;
        for (auto& c : coeffs) s = std::max(s, std::abs(c));
        return s;
    }

    void trim() {
        double s = coeff_scale();
        double tol = s * 1e-14;
        while (!coeffs.empty() && std::abs(coeffs.back()) <= tol) coeffs.pop_back();
    }

    Complex operator()(Complex z) const {
        Complex acc(0);
        for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * z + coeffs[i];
        return acc;
    }
};

inline CPoly operator+(const CPoly& a, const CPoly& b) {
    std::vector<Complex> c(std::max(a.coeffs.size(), b.coeffs.size()), Complex(0));
    for (std::size_t i = 0; i < a.coeffs.size(); ++i) c[i] += a.coeffs[i];
    for (std::size_t i = 0; i < b.coeffs.size(); ++i) c[i] += b.coeffs[i];
    return CPoly(std::move(c));
}

inline CPoly operator-(const CPoly& a, const CPoly& b) {
    std::vector<Complex> c(std::max(a.coeffs.size(), b.coeffs.size()), Complex(0));
    for (std::size_t i = 0; i < a.coeffs.size(); ++i) c[i] += a.coeffs[i];
    for (std::size_t i = 0; i < b.coeffs.size(); ++i) c[i] -= b.coeffs[i];
    return CPoly(std::move(c));
}

inline CPoly operator*(const CPoly& a, const CPoly& b) {
    if (a.is_zero() || b.is_zero()) return CPoly();
    std::vector<Complex> c(a.coeffs.size() + b.coeffs.size() - 1, Complex(0));
    for (std::size_t i = 0; i < a.coeffs.size(); ++i)
        for (std::size_t j = 0; j < b.coeffs.size(); ++j)
            c[i + j] += a.coeffs[i] * b.coeffs[j];
    return CPoly(std::move(c));
}

inline CPoly operator*(Complex s, const CPoly& a) {
    std::vector<Complex> c = a.coeffs;
    for (auto& x : c) x *= s;
    return CPoly(std::move(c));
}

inline CPoly derivative(const CPoly& p) {
    if (p.coeffs.size() < 2) return CPoly();
    std::vector<Complex> c(p.coeffs.size() - 1);
    for (std::size_t i = 1; i < p.coeffs.size(); ++i)
        c[i - 1] = double(i) * p.coeffs[i];
    return CPoly(std::move(c));
}

// Antiderivative with zero constant term.
inline CPoly integral(const CPoly& p) {
    if (p.is_zero()) return CPoly();
    std::vector<Complex> c(p.coeffs.size() + 1, Complex(0));
    for (std::size_t i = 0; i < p.coeffs.size(); ++i)
        c[i + 1] = p.coeffs[i] / double(i + 1);
    return CPoly(std::move(c));
}

// Quotient and remainder of a by b, deg(rem) < deg(b).
inline std::pair<CPoly, CPoly> divmod(const CPoly& a, const CPoly& b) {
    if (b.is_zero()) throw Error("polynomial division by zero");
    std::vector<Complex> rem = a.coeffs;
    int db = b.degree();
    if (a.degree() < db) return {CPoly(), a};
    std::vector<Complex> quot(a.degree() - db + 1, Complex(0));
    for (int k = a.degree(); k >= db; --k) {
        Complex q = rem[k] / b.coeffs[db];
        quot[k - db] = q;
        for (int j = 0; j <= db; ++j) rem[k - db + j] -= q * b.coeffs[j];
    }
    return {CPoly(std::move(quot)), CPoly(std::move(rem))};
}

// Taylor shift: returns q with q(u) = p(center + u). Synthetic division keeps
// this stable for the small degrees in play.
inline CPoly taylor_shift(const CPoly& p, Complex center) {
    if (p.is_zero() || center == Complex(0)) return p;
    std::vector<Complex> c = p.coeffs;
    std::size_t n = c.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = n - 1; j >= i + 1; --j)
            c[j - 1] += center * c[j];
    return CPoly(std::move(c));
}

// Coefficient reversal: rev(p)(t) = t^deg * p(1/t). Encodes behavior at
// infinity; constant term of the result is p's leading coefficient.
inline CPoly reversed(const CPoly& p) {
    std::vector<Complex> c(p.coeffs.rbegin(), p.coeffs.rend());
    return CPoly(std::move(c));
}

struct RootCluster {
    Complex value;
    int multiplicity = 1;
};

namespace detail {

inline Complex newton_polish(const CPoly& p, const CPoly& dp, Complex z, int steps) {
    for (int i = 0; i < steps; ++i) {
        Complex d = dp(z);
        if (std::abs(d) < 1e-300) break;
        Complex step = p(z) / d;
        if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
        z -= step;
    }
    return z;
}

}  // namespace detail

// All roots of p with multiplicities. Companion-matrix eigenvalues, one
// Newton polish step, then multiplicity-aware clustering: eigenvalues of an
// exact m-fold root scatter by ~eps^(1/m), far beyond the simple-root
// tolerance, so clusters are merged at a wider radius and their centers
// re-polished on the (m-1)-th derivative where the root is simple again.
inline std::vector<RootCluster> poly_roots(const CPoly& p) {
    if (p.degree() < 1) return {};
    const int n = p.degree();
    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) companion(i, n - 1) = -p.coeffs[i] / p.coeffs[n];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(companion, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw FactorizationFailure("companion eigenvalue solve failed");

    CPoly dp = derivative(p);
    std::vector<Complex> roots(n);
    for (int i = 0; i < n; ++i)
        roots[i] = detail::newton_polish(p, dp, es.eigenvalues()(i), 1);

    std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });

    double tau = root_tolerance(p.coeff_scale());

    // An exact m-fold root scatters companion eigenvalues over a cloud of
    // radius about eps^(1/m) (about 1e-5 already for m = 3), so clusters
    // are formed with a generous radius first and every multiple-root
    // hypothesis is then verified: refine on the (m-1)-th derivative,
    // where an m-fold root is simple, and demand that all lower
    // derivatives vanish there. Failed hypotheses split with a smaller
    // radius. Genuinely distinct roots closer than about 1e-4 are outside
    // this scheme's resolution and would be reported as multiple.
    std::vector<CPoly> derivs{p};
    std::vector<RootCluster> clusters;

    auto agglomerate = [](const std::vector<Complex>& vs, double radius) {
        std::vector<std::vector<Complex>> groups;
        std::vector<bool> used(vs.size(), false);
        for (std::size_t i = 0; i < vs.size(); ++i) {
            if (used[i]) continue;
            std::vector<Complex> g{vs[i]};
            used[i] = true;
            for (std::size_t gi = 0; gi < g.size(); ++gi)
                for (std::size_t j = 0; j < vs.size(); ++j)
                    if (!used[j] &&
                        std::abs(vs[j] - g[gi]) <= radius * (1.0 + std::abs(g[gi]))) {
                        used[j] = true;
                        g.push_back(vs[j]);
                    }
            groups.push_back(std::move(g));
        }
        return groups;
    };

    auto verify_multiple = [&](const std::vector<Complex>& g, Complex& refined) {
        int m = int(g.size());
        while (int(derivs.size()) < m) derivs.push_back(derivative(derivs.back()));
        Complex mean(0.0);
        for (Complex v : g) mean += v;
        mean /= double(m);
        const CPoly& q = derivs[std::size_t(m - 1)];
        refined = detail::newton_polish(q, derivative(q), mean, 4);
        for (int j = 0; j < m; ++j) {
            const CPoly& dj = derivs[std::size_t(j)];
            double scale = dj.coeff_scale() *
                           std::pow(1.0 + std::abs(refined), std::max(0, dj.degree()));
            if (std::abs(dj(refined)) > 1e-8 * scale) return false;
        }
        return true;
    };

    std::function<void(const std::vector<Complex>&, double)> emit =
        [&](const std::vector<Complex>& g, double radius) {
            if (g.size() == 1) {
                clusters.push_back({g[0], 1});
                return;
            }
            Complex refined;
            if (verify_multiple(g, refined)) {
                clusters.push_back({refined, int(g.size())});
                return;
            }
            if (radius < tau)
                throw FactorizationFailure("ambiguous root cluster: neither isolated nor multiple");
            auto sub = agglomerate(g, radius / 8.0);
            if (sub.size() == 1) {
                emit(g, radius / 8.0);
            } else {
                for (auto& s : sub) emit(s, radius / 8.0);
            }
        };

    const double generous = 1e-3;
    for (auto& g : agglomerate(roots, generous)) emit(g, generous);

    // Isolation check: distinct clusters must stay separated beyond tau.
    for (std::size_t i = 0; i < clusters.size(); ++i)
        for (std::size_t j = i + 1; j < clusters.size(); ++j)
            if (std::abs(clusters[i].value - clusters[j].value) < tau)
                throw FactorizationFailure("roots not isolated to tolerance");
    return clusters;
}

}  // namespace harmonic
