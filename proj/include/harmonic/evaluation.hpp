#pragma once

// Evaluating the harmonic map f = Re(integral of the form triple) and its
// derived geometry.
//
// On the sphere each form is rational, so f has a closed form: a rational
// antiderivative plus residue * log terms. `raw` values use the
// antiderivative with zero integration constant; plain values subtract the
// basepoint so f(basepoint) = 0.
//
// On a hyperelliptic curve f is computed by integrating along routed
// polylines from the basepoint, with sheet continuation and, if needed, a
// loop through a cut to reach the requested sheet.
//
// MetricSample packages first/second fundamental form data of the
// immersion: f_x = Re(phi), f_y = -Im(phi), N = f_x x f_y, and since each
// coordinate is harmonic, f_yy = -f_xx, giving
// K = -(L^2 + M^2) / (EG - F^2) <= 0.

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "harmonic/form.hpp"
#include "harmonic/path_integral.hpp"

namespace harmonic {

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

// Closed-form evaluator for sphere-domain surfaces.
class SphereEvaluator {
  public:
    explicit SphereEvaluator(const SurfaceData& s) : s_(&s) {
        if (s.domain.kind != Domain::Kind::Sphere)
            throw DomainError("closed-form evaluation requires a sphere domain");
        for (int k = 0; k < 3; ++k) {
            if (!s.forms[std::size_t(k)].b.is_zero())
                throw DomainError("w-part on a sphere domain");
            parts_[std::size_t(k)] = antiderivative(s.forms[std::size_t(k)].a);
        }
        base_ = raw(s.basepoint.z);
    }

    // Complex antiderivative value with zero integration constant
    // (principal logs). Only its real part is single-valued.
    Complex antiderivative_value(int k, Complex z) const {
        const auto& [F, logs] = parts_[std::size_t(k)];
        Complex v = eval_rational(F, z);
        for (auto& [pole, c] : logs) v += c * std::log(z - pole);
        return v;
    }

    // f with zero integration constant.
    Vec3 raw(Complex z) const {
        Vec3 out{};
        for (int k = 0; k < 3; ++k) {
            const auto& [F, logs] = parts_[std::size_t(k)];
            double v = eval_rational(F, z).real();
            for (auto& [pole, c] : logs) {
                // Re(c log(z-p)) = Re(c) ln|z-p| - Im(c) arg(z-p); the forms
                // have real residues, so only the single-valued term enters,
                // but keep the full expression for honest raw values.
                Complex lz = std::log(z - pole);
                v += (c * lz).real();
            }
            out[std::size_t(k)] = v;
        }
        return out;
    }

    // f relative to the basepoint.
    Vec3 value(Complex z) const { return raw(z) - base_; }

    // Limit of raw f at infinity; finite only when infinity is a regular
    // point (forms O(1/z^2), total residue zero).
    Vec3 raw_at_infinity() const {
        Vec3 out{};
        for (int k = 0; k < 3; ++k) {
            const auto& [F, logs] = parts_[std::size_t(k)];
            Complex sum_res(0.0);
            for (auto& [pole, c] : logs) sum_res += c;
            if (std::abs(sum_res) > 1e-9 * (1.0 + F.num.coeff_scale()))
                throw DomainError("f is unbounded at infinity");
            if (F.num.degree() > F.den.degree())
                throw DomainError("f is unbounded at infinity");
            Complex v(0.0);
            if (F.num.degree() == F.den.degree() && F.num.degree() >= 0)
                v = F.num.lead() / F.den.lead();
            // sum of c * log(z - p) -> sum of c * log z = 0 given sum c = 0,
            // minus sum of c * log(1 - p/z) -> 0.
            out[std::size_t(k)] = v.real();
        }
        return out;
    }

    Vec3 value_at_infinity() const { return raw_at_infinity() - base_; }

    const SurfaceData& surface() const { return *s_; }

  private:
    const SurfaceData* s_;
    std::array<std::pair<CRational, std::vector<std::pair<Complex, Complex>>>, 3> parts_;
    Vec3 base_{};
};

// Path-integral evaluator for either domain kind; on spheres it simply
// wraps the closed form.
class Evaluator {
  public:
    explicit Evaluator(const SurfaceData& s) : s_(&s) {
        if (s.domain.kind == Domain::Kind::Sphere) sphere_.emplace(s);
    }

    Vec3 value(const SheetPoint& p, double tol = kQuadTol) const {
        if (sphere_) return sphere_->value(p.z);
        const SurfaceData& s = *s_;
        int s0 = s.basepoint.sheet;
        std::vector<Complex> path = route(s, s.basepoint.z, p.z);
        PathIntegral pi = integrate_polyline(s, path, s0, tol);
        std::array<Complex, 3> total = pi.value;
        if (pi.end_sheet != p.sheet) {
            std::vector<Complex> loop = sheet_flip_loop(s, s.basepoint.z);
            PathIntegral li = integrate_polyline(s, loop, s0, tol);
            if (li.end_sheet == s0)
                throw DomainError("sheet flip loop failed to change sheet");
            PathIntegral pi2 = integrate_polyline(s, path, li.end_sheet, tol);
            if (pi2.end_sheet != p.sheet)
                throw DomainError("could not reach requested sheet");
            for (int k = 0; k < 3; ++k)
                total[std::size_t(k)] = li.value[std::size_t(k)] + pi2.value[std::size_t(k)];
        }
        return {total[0].real(), total[1].real(), total[2].real()};
    }

    Vec3 value(Complex z, double tol = kQuadTol) const { return value(SheetPoint{z, 1}, tol); }

    const SphereEvaluator* closed_form() const { return sphere_ ? &*sphere_ : nullptr; }

  private:
    const SurfaceData* s_;
    std::optional<SphereEvaluator> sphere_;
};

struct MetricSample {
    std::array<Complex, 3> phi{}, dphi{};
    Vec3 fx{}, fy{}, normal{};
    double E = 0, F = 0, G = 0;
    double det_I = 0;           // EG - F^2 = |N|^2
    double L = 0, M = 0;        // second fundamental form against raw N
    double gauss = 0;           // K = -(L^2 + M^2) / |N|^4
    double density = 0;         // |K| dA per dx dy = (L^2 + M^2) / |N|^3
    double phi_scale = 0;
    bool degenerate = false;
};

inline constexpr double kRegularityTolFactor = 1e-12;

// Derivative forms, computed once per surface.
struct FormJets {
    std::array<MeromorphicForm, 3> dphi;
    explicit FormJets(const SurfaceData& s) {
        for (int k = 0; k < 3; ++k)
            dphi[std::size_t(k)] = form_z_derivative(s.forms[std::size_t(k)], s.domain);
    }
};

inline MetricSample metric_sample(const SurfaceData& s, const FormJets& jets,
                                  const SheetPoint& p) {
    MetricSample m;
    for (int k = 0; k < 3; ++k) {
        m.phi[std::size_t(k)] = form_value(s.forms[std::size_t(k)], s.domain, p);
        m.dphi[std::size_t(k)] = form_value(jets.dphi[std::size_t(k)], s.domain, p);
    }
    for (int k = 0; k < 3; ++k) {
        m.fx[std::size_t(k)] = m.phi[std::size_t(k)].real();
        m.fy[std::size_t(k)] = -m.phi[std::size_t(k)].imag();
        m.phi_scale = std::max(m.phi_scale, std::abs(m.phi[std::size_t(k)]));
    }
    m.normal = cross(m.fx, m.fy);
    m.E = dot(m.fx, m.fx);
    m.F = dot(m.fx, m.fy);
    m.G = dot(m.fy, m.fy);
    m.det_I = dot(m.normal, m.normal);
    double nn = std::sqrt(m.det_I);
    m.degenerate = nn <= kRegularityTolFactor * m.phi_scale * m.phi_scale;
    Vec3 fxx{}, fxy{};
    for (int k = 0; k < 3; ++k) {
        fxx[std::size_t(k)] = m.dphi[std::size_t(k)].real();
        fxy[std::size_t(k)] = -m.dphi[std::size_t(k)].imag();
    }
    m.L = dot(fxx, m.normal);
    m.M = dot(fxy, m.normal);
    if (!m.degenerate) {
        m.gauss = -(m.L * m.L + m.M * m.M) / (m.det_I * m.det_I);
        m.density = (m.L * m.L + m.M * m.M) / (m.det_I * nn);
    }
    return m;
}

inline MetricSample metric_sample(const SurfaceData& s, const SheetPoint& p) {
    return metric_sample(s, FormJets(s), p);
}

}  // namespace harmonic
