#pragma once

// Real periods of the form triple over homology cycles, and solving for
// form parameters that close them. A harmonic map Re(integral) is
// single-valued exactly when every real period vanishes; puncture loops
// additionally require real residues.
//
// Cycle kinds:
//  * PunctureLoop  — small loop around one puncture; the real period is
//    orientation * Re(2*pi*i*residue) = -orientation * 2*pi * Im(residue).
//  * CollapsedInterval — a cycle on a hyperelliptic curve pinched onto a
//    real interval [lo, hi] between branch roots (either a cut, traversed
//    on both banks, or a gap between cuts, traversed on both sheets).
//    Either way only the 1/w part survives and the period is
//    orientation * 2 * Re(integral of b(x)/w_top(x) dx), where w_top is the
//    reference sheet value approached from the upper half-plane.
//  * ExplicitPath — polyline with sheet continuation, for cross-checks.
//
// Orientations are declared per cycle by the catalogued fixture so that
// reported signs match the catalogue's bracket conventions.

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "harmonic/form.hpp"
#include "harmonic/path_integral.hpp"
#include "harmonic/quadrature.hpp"

namespace harmonic {

struct PunctureLoop {
    std::size_t puncture_index = 0;
    int orientation = 1;
};

struct CollapsedInterval {
    double lo = 0.0;
    double hi = 0.0;
    int orientation = 1;
};

struct ExplicitPath {
    std::vector<Complex> waypoints;
    int start_sheet = 1;
    int orientation = 1;
};

using Cycle = std::variant<PunctureLoop, CollapsedInterval, ExplicitPath>;

// Real period of form k over a cycle.
inline double real_period(const SurfaceData& s, int k, const Cycle& cycle,
                          double tol = kQuadTol) {
    if (std::holds_alternative<PunctureLoop>(cycle)) {
        const auto& pl = std::get<PunctureLoop>(cycle);
        if (pl.puncture_index >= s.punctures.size())
            throw Error("puncture loop index out of range");
        Complex res = form_residue(s, k, s.punctures[pl.puncture_index]);
        return -pl.orientation * 2.0 * kPi * res.imag();
    }
    if (std::holds_alternative<CollapsedInterval>(cycle)) {
        const auto& ci = std::get<CollapsedInterval>(cycle);
        if (s.domain.kind != Domain::Kind::Hyperelliptic)
            throw DomainError("collapsed interval cycles need a hyperelliptic domain");
        const auto& form = s.forms[std::size_t(k)];
        auto f = [&](double x) -> Complex {
            Complex z(x, +0.0);
            Complex w = s.domain.w_reference(z);
            return eval_rational(form.b, z) / w;
        };
        QuadResult q = integrate_endpoint_sqrt(f, ci.lo, ci.hi, true, true, tol);
        return ci.orientation * 2.0 * q.value.real();
    }
    const auto& ep = std::get<ExplicitPath>(cycle);
    PathIntegral pi = integrate_polyline(s, ep.waypoints, ep.start_sheet, tol);
    return ep.orientation * pi.value[std::size_t(k)].real();
}

struct PeriodRow {
    std::string cycle_label;
    std::array<double, 3> period{};  // per form
};

struct PeriodReport {
    std::vector<PeriodRow> rows;
    double max_abs = 0.0;
};

inline PeriodReport period_report(const SurfaceData& s,
                                  const std::vector<std::pair<std::string, Cycle>>& cycles,
                                  double tol = kQuadTol) {
    PeriodReport rep;
    for (auto& [label, cyc] : cycles) {
        PeriodRow row;
        row.cycle_label = label;
        for (int k = 0; k < 3; ++k) {
            row.period[std::size_t(k)] = real_period(s, k, cyc, tol);
            rep.max_abs = std::max(rep.max_abs, std::abs(row.period[std::size_t(k)]));
        }
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

// One closing condition: the real period of form `form_index` over `cycle`
// must equal zero; it depends on a single scalar parameter.
struct ClosingCondition {
    std::string unknown;         // parameter name
    int form_index = 0;
    Cycle cycle;
    double bracket_lo = -1.0;    // search bracket for the parameter
    double bracket_hi = 1.0;
};

struct ClosingResult {
    std::string unknown;
    double value = 0.0;
    double residual = 0.0;       // |period| at the solution
    bool used_bisection = false;
};

// Solve period(param) = 0 on the bracket. The period is affine in the
// parameter whenever the parameter multiplies one summand of the form, so
// two evaluations give an exact line; a bisection fallback covers anything
// nonlinear, relying on a sign change over the bracket.
inline ClosingResult close_period(const std::function<double(double)>& period,
                                  const std::string& name, double lo, double hi) {
    ClosingResult r;
    r.unknown = name;
    const double p_lo = period(lo);
    const double p_hi = period(hi);
    const double slope = (p_hi - p_lo) / (hi - lo);
    if (std::abs(slope) > 1e-14 * (std::abs(p_lo) + std::abs(p_hi) + 1.0)) {
        double cand = lo - p_lo / slope;
        if (cand >= lo && cand <= hi) {
            double res = period(cand);
            // Accept if the line model holds; affine periods close exactly.
            double scale = std::max({std::abs(p_lo), std::abs(p_hi), 1e-30});
            if (std::abs(res) <= 1e-7 * scale) {
                r.value = cand;
                r.residual = std::abs(res);
                return r;
            }
        }
    }
    if (!(p_lo == 0.0 || p_hi == 0.0 || std::signbit(p_lo) != std::signbit(p_hi)))
        throw NoBracket("period does not change sign over [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "] for " + name);
    double a = lo, b = hi, fa = p_lo;
    for (int it = 0; it < 200 && (b - a) > 1e-13 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
        double m = 0.5 * (a + b);
        double fm = period(m);
        if (fm == 0.0) {
            a = b = m;
            fa = fm;
            break;
        }
        if (std::signbit(fm) == std::signbit(fa)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    r.value = 0.5 * (a + b);
    r.residual = std::abs(period(r.value));
    r.used_bisection = true;
    return r;
}

}  // namespace harmonic
