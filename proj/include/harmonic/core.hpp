#pragma once

// Shared scalar types, error hierarchy and small utilities used across the
// library. Everything operates on double-precision complex scalars.

#include <complex>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace harmonic {

using Complex = std::complex<double>;

constexpr double kPi = 3.14159265358979323846;

// Root isolation tolerance, relative to coefficient magnitudes.
inline double root_tolerance(double coeff_scale) {
    return 1e-10 * (1.0 + coeff_scale);
}

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Evaluation of a rational function at (or too near) one of its poles.
struct PoleHit : Error { using Error::Error; };
// Denominator roots could not be isolated reliably.
struct FactorizationFailure : Error { using Error::Error; };
// The three forms are real-linearly dependent; no surface to analyze.
struct DegenerateTriple : Error { using Error::Error; };
// Adaptive quadrature hit its depth limit above tolerance.
struct QuadratureNonConvergence : Error { using Error::Error; };
// Period closing bracket shows no sign change.
struct NoBracket : Error { using Error::Error; };
// Metric requested at a branch/singular site of the parametrization.
struct SingularPointError : Error { using Error::Error; };
// Fixture JSON violates the schema.
struct SchemaError : Error { using Error::Error; };
// Fixture parameter left unbound at use site.
struct UnresolvedParam : Error { using Error::Error; };
// Domain/operation mismatch (e.g. sheet data requested on a sphere).
struct DomainError : Error { using Error::Error; };

inline bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// Deterministic parallel map over [0, n): results are merged in index order
// regardless of thread count, so scans stay reproducible.
template <typename F>
void parallel_for(std::size_t n, int threads, F&& body) {
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::size_t nt = std::min<std::size_t>(threads, n);
    std::vector<std::future<void>> futs;
    futs.reserve(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        futs.push_back(std::async(std::launch::async, [&, t] {
            for (std::size_t i = t; i < n; i += nt) body(i);
        }));
    }
    for (auto& f : futs) f.get();
}

}  // namespace harmonic
