#pragma once

// Numerical total curvature. Since every coordinate is harmonic, K <= 0
// and the integral of |K| dA equals minus the total curvature, which is
// quantized in multiples of 2*pi for the admissible surfaces.
//
// The integral is computed over log-polar coordinates (rho, theta) with
// z = exp(rho + i*theta): the measure becomes density * r^2 drho dtheta,
// ends at 0/infinity turn into exponentially decaying tails, and an
// error-driven quadtree concentrates cells near punctures and branch
// roots. Initial grid lines are seeded on the real axis (so cells never
// straddle a cut of a hyperelliptic domain) and on each puncture's radius
// and angle. Hyperelliptic domains are integrated sheet by sheet.

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <vector>

#include "harmonic/evaluation.hpp"

namespace harmonic {

struct CurvatureOptions {
    double r_inner = 1e-6;
    double r_outer = 1e6;
    double rel_tol = 2e-3;
    long max_cells = 200000;
    int max_depth = 42;
};

struct CurvatureIntegral {
    double absolute = 0;  // integral of |K| dA
    double total = 0;     // signed total curvature, -absolute
    double error = 0;
    long cells = 0;
    double tail = 0;      // outer-decade gauge of the truncation error
    int nearest_multiple = 0;
    double multiple_deviation = 0;  // |total + 2*pi*m| / (2*pi)
};

namespace detail {

inline constexpr std::array<double, 3> kGL3X = {-0.7745966692414834, 0.0, 0.7745966692414834};
inline constexpr std::array<double, 3> kGL3W = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
inline constexpr std::array<double, 5> kGL5X = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                                0.5384693101056831, 0.9061798459386640};
inline constexpr std::array<double, 5> kGL5W = {0.2369268850561891, 0.4786286704993665,
                                                0.5688888888888889, 0.4786286704993665,
                                                0.2369268850561891};

struct PolarCell {
    double rho0, rho1, th0, th1;
    double value = 0;
    double error = 0;
    int depth = 0;
};

template <typename Density>
inline void evaluate_cell(PolarCell& c, Density&& density) {
    const double hr = 0.5 * (c.rho1 - c.rho0), cr = 0.5 * (c.rho0 + c.rho1);
    const double ht = 0.5 * (c.th1 - c.th0), ct = 0.5 * (c.th0 + c.th1);
    double i5 = 0, i3 = 0;
    for (std::size_t a = 0; a < 5; ++a)
        for (std::size_t b = 0; b < 5; ++b) {
            double rho = cr + hr * kGL5X[a], th = ct + ht * kGL5X[b];
            i5 += kGL5W[a] * kGL5W[b] * density(rho, th);
        }
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) {
            double rho = cr + hr * kGL3X[a], th = ct + ht * kGL3X[b];
            i3 += kGL3W[a] * kGL3W[b] * density(rho, th);
        }
    c.value = i5 * hr * ht;
    c.error = std::abs((i5 - i3) * hr * ht);
}

struct CellOrder {
    bool operator()(const PolarCell& a, const PolarCell& b) const { return a.error < b.error; }
};

template <typename Density>
inline std::pair<double, double> integrate_polar(Density&& density, double rho_lo, double rho_hi,
                                                 const std::vector<double>& theta_seeds,
                                                 const std::vector<double>& rho_seeds,
                                                 const CurvatureOptions& opt, long& cells_used) {
    std::set<double> thetas{0.0, 0.5 * kPi, kPi, 1.5 * kPi, 2.0 * kPi};
    for (double t : theta_seeds) {
        double tm = std::fmod(t, 2.0 * kPi);
        if (tm < 0) tm += 2.0 * kPi;
        thetas.insert(tm);
    }
    std::set<double> rhos;
    for (double rho = std::ceil(rho_lo); rho < rho_hi; rho += 1.0) rhos.insert(rho);
    rhos.insert(rho_lo);
    rhos.insert(rho_hi);
    for (double r : rho_seeds)
        if (r > rho_lo && r < rho_hi) rhos.insert(r);

    std::priority_queue<PolarCell, std::vector<PolarCell>, CellOrder> queue;
    double total = 0, err = 0;
    auto push = [&](PolarCell c) {
        evaluate_cell(c, density);
        total += c.value;
        err += c.error;
        ++cells_used;
        queue.push(c);
    };
    std::vector<double> rv(rhos.begin(), rhos.end());
    std::vector<double> tv(thetas.begin(), thetas.end());
    for (std::size_t i = 0; i + 1 < rv.size(); ++i)
        for (std::size_t j = 0; j + 1 < tv.size(); ++j)
            push({rv[i], rv[i + 1], tv[j], tv[j + 1]});

    while (!queue.empty() && err > opt.rel_tol * std::max(1e-12, std::abs(total)) &&
           cells_used < opt.max_cells) {
        PolarCell c = queue.top();
        queue.pop();
        if (c.depth >= opt.max_depth) continue;
        total -= c.value;
        err -= c.error;
        double rm = 0.5 * (c.rho0 + c.rho1), tm = 0.5 * (c.th0 + c.th1);
        for (int q = 0; q < 4; ++q) {
            PolarCell ch;
            ch.rho0 = (q & 1) ? rm : c.rho0;
            ch.rho1 = (q & 1) ? c.rho1 : rm;
            ch.th0 = (q & 2) ? tm : c.th0;
            ch.th1 = (q & 2) ? c.th1 : tm;
            ch.depth = c.depth + 1;
            push(ch);
        }
    }
    return {total, err};
}

}  // namespace detail

inline CurvatureIntegral total_curvature_numeric(const SurfaceData& s,
                                                 const CurvatureOptions& opt = {}) {
    FormJets jets(s);
    std::vector<double> theta_seeds, rho_seeds;
    for (auto& p : s.punctures)
        if (!p.at_infinity && std::abs(p.z) > 0) {
            theta_seeds.push_back(std::arg(p.z));
            rho_seeds.push_back(std::log(std::abs(p.z)));
        }
    if (s.domain.is_hyperelliptic())
        for (double r : s.domain.branch_roots)
            if (std::abs(r) > 0) rho_seeds.push_back(std::log(std::abs(r)));

    std::vector<int> sheets = s.domain.is_hyperelliptic() ? std::vector<int>{+1, -1}
                                                          : std::vector<int>{+1};
    CurvatureIntegral out;
    const double rho_lo = std::log(opt.r_inner), rho_hi = std::log(opt.r_outer);
    for (int sheet : sheets) {
        auto density = [&](double rho, double th) {
            double r = std::exp(rho);
            Complex z = std::polar(r, th);
            MetricSample m = metric_sample(s, jets, SheetPoint{z, sheet});
            return m.degenerate ? 0.0 : m.density * r * r;
        };
        long cells = 0;
        auto [val, err] =
            detail::integrate_polar(density, rho_lo, rho_hi, theta_seeds, rho_seeds, opt, cells);
        out.absolute += val;
        out.error += err;
        out.cells += cells;
        // Truncation gauge: two decades beyond the outer radius, coarse.
        CurvatureOptions tail_opt = opt;
        tail_opt.rel_tol = 0.5;
        tail_opt.max_cells = 512;
        long tail_cells = 0;
        auto [tval, terr] = detail::integrate_polar(density, rho_hi, rho_hi + 2.0 * std::log(10.0),
                                                    theta_seeds, rho_seeds, tail_opt, tail_cells);
        (void)terr;
        out.tail += std::abs(tval);
    }
    out.total = -out.absolute;
    out.nearest_multiple = int(std::lround(out.absolute / (2.0 * kPi)));
    out.multiple_deviation =
        std::abs(out.absolute - 2.0 * kPi * out.nearest_multiple) / (2.0 * kPi);
    return out;
}

}  // namespace harmonic
