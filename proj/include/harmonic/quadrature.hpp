#pragma once

// Adaptive complex-valued quadrature on real intervals: Gauss-Kronrod 15(7)
// with recursive bisection, plus helpers that substitute x = a + t^2 at an
// endpoint so integrands with inverse-square-root endpoint singularities
// (values of 1/w near a branch root) become smooth.

#include <array>
#include <cmath>
#include <functional>

#include "harmonic/core.hpp"

namespace harmonic {

struct QuadResult {
    Complex value{0.0, 0.0};
    double error = 0.0;
    int evaluations = 0;
};

namespace detail {

// Gauss-Kronrod 15-point nodes (positive half) and weights on [-1, 1];
// every other node carries a Gauss-7 weight for the error estimate.
inline constexpr std::array<double, 8> kGK15Nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kGK15WeightsK = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGK15WeightsG = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename F>
inline QuadResult gk15(F&& f, double a, double b) {
    const double h = 0.5 * (b - a);
    const double c = 0.5 * (a + b);
    Complex resK(0.0), resG(0.0);
    for (std::size_t i = 0; i < 8; ++i) {
        const double x = kGK15Nodes[i];
        Complex fv;
        if (i == 7) {
            fv = f(c);
            resK += kGK15WeightsK[i] * fv;
            resG += kGK15WeightsG[3] * fv;
        } else {
            Complex f1 = f(c - h * x), f2 = f(c + h * x);
            resK += kGK15WeightsK[i] * (f1 + f2);
            if (i % 2 == 1) resG += kGK15WeightsG[i / 2] * (f1 + f2);
        }
    }
    QuadResult r;
    r.value = h * resK;
    r.error = std::abs(h * (resK - resG));
    r.evaluations = 15;
    return r;
}

template <typename F>
inline QuadResult adapt(F&& f, double a, double b, double tol, int depth, double global_scale) {
    QuadResult whole = gk15(f, a, b);
    if (whole.error <= tol * (1.0 + global_scale) || std::abs(b - a) < 1e-300) return whole;
    if (depth <= 0)
        throw QuadratureNonConvergence("adaptive quadrature failed to converge on [" +
                                       std::to_string(a) + ", " + std::to_string(b) + "]");
    const double m = 0.5 * (a + b);
    QuadResult left = adapt(f, a, m, 0.5 * tol, depth - 1, global_scale);
    QuadResult right = adapt(f, m, b, 0.5 * tol, depth - 1, global_scale);
    QuadResult r;
    r.value = left.value + right.value;
    r.error = left.error + right.error;
    r.evaluations = whole.evaluations + left.evaluations + right.evaluations;
    return r;
}

}  // namespace detail

inline constexpr double kQuadTol = 1e-10;
inline constexpr int kQuadMaxDepth = 40;

// Integral of a complex-valued function over [a, b].
inline QuadResult integrate(const std::function<Complex(double)>& f, double a, double b,
                            double tol = kQuadTol, int depth = kQuadMaxDepth) {
    if (a == b) return {};
    QuadResult probe = detail::gk15(f, a, b);
    double scale = std::abs(probe.value);
    QuadResult r = detail::adapt(f, a, b, tol, depth, scale);
    r.evaluations += probe.evaluations;
    return r;
}

// Integral over [a, b] where the integrand may blow up like 1/sqrt(x - a)
// and/or 1/sqrt(b - x). The flagged endpoints are regularized with the
// substitution x = a + t^2 (resp. x = b - t^2); when both are flagged the
// interval is split at its midpoint.
inline QuadResult integrate_endpoint_sqrt(const std::function<Complex(double)>& f, double a,
                                          double b, bool left_sqrt, bool right_sqrt,
                                          double tol = kQuadTol, int depth = kQuadMaxDepth) {
    if (a == b) return {};
    if (left_sqrt && right_sqrt) {
        const double m = 0.5 * (a + b);
        QuadResult l = integrate_endpoint_sqrt(f, a, m, true, false, tol, depth);
        QuadResult r = integrate_endpoint_sqrt(f, m, b, false, true, tol, depth);
        return {l.value + r.value, l.error + r.error, l.evaluations + r.evaluations};
    }
    if (left_sqrt) {
        auto g = [&](double t) { return 2.0 * t * f(a + t * t); };
        return integrate(g, 0.0, std::sqrt(b - a), tol, depth);
    }
    if (right_sqrt) {
        auto g = [&](double t) { return 2.0 * t * f(b - t * t); };
        return integrate(g, 0.0, std::sqrt(b - a), tol, depth);
    }
    return integrate(f, a, b, tol, depth);
}

}  // namespace harmonic
