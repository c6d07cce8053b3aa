#pragma once

// End typing. The raw type of a puncture is the sorted triple of pole
// orders of the three forms there. The reduced type is the lexicographic
// minimum over real invertible linear recombinations of the triple: at each
// pole order, leading coefficients live in C ~ R^2, so any real-dependent
// leading coefficient can be cancelled, strictly lowering that form's
// order. Greedy elimination from the top order down, largest form index
// first, reaches the minimum.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <string>
#include <vector>

#include "harmonic/form.hpp"
#include "harmonic/laurent.hpp"

namespace harmonic {

struct EndType {
    std::array<int, 3> raw{};       // sorted ascending
    std::array<int, 3> reduced{};   // sorted ascending
    int order = 0;                  // max of reduced (= max of raw)
    // Row i of the reducing transform: new form i = sum_j T[i][j] * form j.
    std::array<std::array<double, 3>, 3> transform{};
};

inline std::array<int, 3> raw_type(const SurfaceData& s, const SurfacePoint& p) {
    std::array<int, 3> t{};
    for (int k = 0; k < 3; ++k) t[std::size_t(k)] = form_pole_order(s, k, p);
    std::sort(t.begin(), t.end());
    return t;
}

namespace detail {

struct ReduceRows {
    int lo = 0, hi = 0;                       // shared degree window
    std::array<std::vector<Complex>, 3> row;  // row[i][d - lo]
    std::array<std::array<double, 3>, 3> T{};

    // Largest entry any row has at one degree. Cancellation residue at a
    // degree is bounded by the entries that met there, so "effectively
    // zero" must be judged per degree: a global row scale would let a
    // fast-growing expansion tail swamp a genuine small leading pole.
    double col_scale(std::size_t d) const {
        double s = 0;
        for (const auto& r : row) s = std::max(s, std::abs(r[d]));
        return s;
    }
    // Pole order of row i with coefficients below rel tolerance ignored.
    int order_of(int i) const {
        const auto& r = row[std::size_t(i)];
        for (int d = lo; d <= hi; ++d) {
            double tol = 1e-9 * std::max(1e-300, col_scale(std::size_t(d - lo)));
            if (std::abs(r[std::size_t(d - lo)]) > tol) return d < 0 ? -d : 0;
        }
        return 0;
    }
    Complex lead_coeff(int i, int order) const {
        return row[std::size_t(i)][std::size_t(-order - lo)];
    }
    void axpy(int j, double x, int i) {  // row j += x * row i
        for (std::size_t d = 0; d < row[std::size_t(j)].size(); ++d)
            row[std::size_t(j)][d] += x * row[std::size_t(i)][d];
        for (int c = 0; c < 3; ++c)
            T[std::size_t(j)][std::size_t(c)] += x * T[std::size_t(i)][std::size_t(c)];
    }
};

}  // namespace detail

// Reduce a triple of local expansions at one puncture. Throws
// DegenerateTriple when the forms are real-linearly dependent as a triple.
inline EndType reduce_type(const std::array<LaurentExpansion, 3>& triple) {
    detail::ReduceRows rr;
    int lo = 0, hi = 2;
    for (auto& le : triple) {
        if (le.empty()) continue;
        lo = std::min(lo, le.min_degree);
        hi = std::max(hi, le.max_degree());
    }
    rr.lo = lo;
    rr.hi = hi;
    for (int i = 0; i < 3; ++i) {
        rr.row[std::size_t(i)].assign(std::size_t(hi - lo + 1), Complex(0));
        for (int d = lo; d <= hi; ++d) rr.row[std::size_t(i)][std::size_t(d - lo)] = triple[std::size_t(i)].at(d);
        rr.T[std::size_t(i)][std::size_t(i)] = 1.0;
    }

    // Degeneracy: rank over R of the three (Re,Im)-flattened coefficient rows.
    // Each row is normalized first — dependence is invariant under row
    // scaling, and rows of wildly different magnitude (expansions with a
    // small radius of convergence grow fast in degree) would otherwise
    // swamp a well-scaled independent row.
    {
        Eigen::MatrixXd M(3, 2 * (hi - lo + 1));
        for (int i = 0; i < 3; ++i)
            for (int d = 0; d <= hi - lo; ++d) {
                M(i, 2 * d) = rr.row[std::size_t(i)][std::size_t(d)].real();
                M(i, 2 * d + 1) = rr.row[std::size_t(i)][std::size_t(d)].imag();
            }
        bool zero_row = false;
        for (int i = 0; i < 3; ++i) {
            double n = M.row(i).norm();
            if (n > 0)
                M.row(i) /= n;
            else
                zero_row = true;
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
        if (zero_row || svd.singularValues()(2) < 1e-9 * svd.singularValues()(0))
            throw DegenerateTriple("form triple is real-linearly dependent");
    }

    EndType out;
    for (int i = 0; i < 3; ++i) out.raw[std::size_t(i)] = rr.order_of(i);
    std::sort(out.raw.begin(), out.raw.end());

    for (int guard = 0; guard < 200; ++guard) {
        std::array<int, 3> ord{rr.order_of(0), rr.order_of(1), rr.order_of(2)};
        int top = std::max({ord[0], ord[1], ord[2]});
        bool applied = false;
        for (int h = top; h >= 1 && !applied; --h) {
            std::vector<int> S;
            for (int i = 0; i < 3; ++i)
                if (ord[std::size_t(i)] == h) S.push_back(i);
            if (S.size() < 2) continue;
            // Eliminate the largest eligible index using the others at h.
            for (std::size_t jj = S.size(); jj-- > 0 && !applied;) {
                int j = S[jj];
                std::vector<int> pivots;
                for (int i : S)
                    if (i != j) pivots.push_back(i);
                Eigen::MatrixXd A(2, int(pivots.size()));
                for (std::size_t c = 0; c < pivots.size(); ++c) {
                    Complex lc = rr.lead_coeff(pivots[c], h);
                    A(0, int(c)) = lc.real();
                    A(1, int(c)) = lc.imag();
                }
                Complex cj = rr.lead_coeff(j, h);
                Eigen::Vector2d rhs(-cj.real(), -cj.imag());
                Eigen::VectorXd x = A.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rhs);
                double resid = (A * x - rhs).norm();
                if (resid <= 1e-9 * std::abs(cj)) {
                    for (std::size_t c = 0; c < pivots.size(); ++c)
                        rr.axpy(j, x(int(c)), pivots[c]);
                    applied = true;
                }
            }
        }
        if (!applied) break;
    }

    for (int i = 0; i < 3; ++i) out.reduced[std::size_t(i)] = rr.order_of(i);
    std::sort(out.reduced.begin(), out.reduced.end());
    out.order = out.reduced[2];
    out.transform = rr.T;
    return out;
}

inline EndType end_type_at(const SurfaceData& s, const SurfacePoint& p) {
    std::array<LaurentExpansion, 3> triple;
    for (int k = 0; k < 3; ++k)
        triple[std::size_t(k)] = localize_form(s.forms[std::size_t(k)], s.domain, p, 40);
    return reduce_type(triple);
}

enum class Admissibility { NeverProper, NeverEmbedded, KnownEmbeddedFamily, Open };

struct AdmissibilityResult {
    Admissibility verdict = Admissibility::Open;
    std::string rule;
};

inline const char* to_string(Admissibility a) {
    switch (a) {
        case Admissibility::NeverProper: return "NeverProper";
        case Admissibility::NeverEmbedded: return "NeverEmbedded";
        case Admissibility::KnownEmbeddedFamily: return "KnownEmbeddedFamily";
        default: return "Open";
    }
}

// Verdict for a reduced type tuple (ascending). Known families are the
// catalogued properly-embedded end families plus the even-fold family,
// which embeds but is not proper (see the rule tag).
inline AdmissibilityResult admissibility(const std::array<int, 3>& t) {
    const int n1 = t[0], n2 = t[1], n3 = t[2];
    auto is = [&](int a, int b, int c) { return n1 == a && n2 == b && n3 == c; };

    if (is(0, 0, 1)) return {Admissibility::KnownEmbeddedFamily, "rule:horn-end"};
    if (n1 == 0 && n2 == 0 && n3 >= 2)
        return {Admissibility::NeverProper, "rule:holomorphic-pair-bounded-escape"};
    if ((n1 == n2 && n2 >= 3) || (n2 == n3 && n3 >= 3))
        return {Admissibility::NeverEmbedded, "rule:equal-order-winding"};
    if (is(0, 2, 2)) return {Admissibility::KnownEmbeddedFamily, "rule:order2-table-planar"};
    if (is(1, 2, 2)) return {Admissibility::KnownEmbeddedFamily, "rule:order2-table-catenoidal"};
    if (is(0, 1, 2)) return {Admissibility::KnownEmbeddedFamily, "rule:order2-table-slab"};
    if (n1 == 2 && n2 == 2 && n3 >= 3)
        return {Admissibility::KnownEmbeddedFamily, "rule:graph-family-22n"};
    if (n1 == 1 && n2 == 2 && n3 >= 3)
        return {Admissibility::KnownEmbeddedFamily, "rule:family-12n"};
    if (n1 == 0 && n2 == 1 && n3 >= 3)
        return {Admissibility::KnownEmbeddedFamily, "rule:family-01n"};
    if (is(0, 2, 3)) return {Admissibility::KnownEmbeddedFamily, "rule:example-023"};
    if (n1 == 2 && n2 == 3 && n3 >= 4)
        return {Admissibility::KnownEmbeddedFamily, "rule:graph-family-23n"};
    if (n1 == 2 && n2 == 4 && n3 >= 6 && n3 % 2 == 0)
        return {Admissibility::KnownEmbeddedFamily, "rule:even-fold-family-embedded-not-proper"};
    if (is(2, 5, 8)) return {Admissibility::KnownEmbeddedFamily, "rule:example-258"};
    if (is(3, 4, 6)) return {Admissibility::KnownEmbeddedFamily, "rule:example-346"};
    return {Admissibility::Open, "rule:open"};
}

struct CurvatureBudget {
    int genus = 0;
    std::vector<int> end_orders;
    double total = 0;        // -2*pi*(2g - 2 + sum of end orders)
    int multiple_of_2pi = 0; // total = -2*pi*multiple
};

inline CurvatureBudget total_curvature(int genus, const std::vector<int>& end_orders) {
    CurvatureBudget b;
    b.genus = genus;
    b.end_orders = end_orders;
    int sum = 0;
    for (int n : end_orders) sum += n;
    b.multiple_of_2pi = 2 * genus - 2 + sum;
    b.total = -2.0 * kPi * b.multiple_of_2pi;
    return b;
}

inline CurvatureBudget total_curvature(const SurfaceData& s) {
    std::vector<int> orders;
    for (auto& p : s.punctures) {
        auto t = raw_type(s, p);
        orders.push_back(t[2]);
    }
    int genus = s.domain.is_hyperelliptic() ? 1 : 0;
    return total_curvature(genus, orders);
}

using EndTuple = std::array<int, 3>;
using EndFamily = std::vector<EndTuple>;  // multiset of end types, sorted

// Complete embedded configurations with the given quantized total
// curvature. Only the catalogued budgets are tabulated; anything else is a
// hard error rather than a guess.
inline std::vector<EndFamily> classify_budget(double total, int genus) {
    double k_real = -total / (2.0 * kPi);
    int k = int(std::lround(k_real));
    if (std::abs(k_real - k) > 1e-6)
        throw Error("total curvature must be a negative multiple of 2*pi");
    auto canon = [](std::vector<EndFamily> fams) {
        for (auto& f : fams) std::sort(f.begin(), f.end());
        std::sort(fams.begin(), fams.end());
        return fams;
    };
    if (genus == 0) {
        if (k == 1)
            return canon({{{0, 0, 1}, {1, 2, 2}}, {{2, 2, 3}}});
        if (k == 2)
            return canon({
                {{0, 0, 1}, {0, 0, 1}, {0, 0, 1}, {0, 0, 1}},
                {{0, 0, 1}, {0, 0, 1}, {0, 1, 2}},
                {{0, 0, 1}, {0, 0, 1}, {0, 2, 2}},
                {{0, 0, 1}, {0, 0, 1}, {1, 2, 2}},
                {{0, 0, 1}, {1, 2, 3}},
                {{0, 0, 1}, {2, 2, 3}},
                {{0, 1, 2}, {0, 1, 2}},
                {{0, 1, 2}, {1, 2, 2}},
                {{1, 2, 2}, {1, 2, 2}},
                {{2, 2, 4}},
                {{2, 3, 4}},
            });
        throw Error("budget not tabulated for genus 0: -2*pi*" + std::to_string(k));
    }
    if (genus == 1) {
        if (k == 1 || k == 2) return {};  // no such tori
        if (k == 3)
            return canon({{{0, 0, 1}, {1, 2, 2}}, {{2, 2, 3}}});
        throw Error("budget not tabulated for genus 1: -2*pi*" + std::to_string(k));
    }
    throw Error("budget tables cover genus 0 and 1 only");
}

}  // namespace harmonic
