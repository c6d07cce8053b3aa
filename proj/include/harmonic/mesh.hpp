#pragma once

// Triangulated samples of a surface over a log-polar grid in the z-plane.
//
// The grid is the lattice z = exp(rho + i*theta) centred at the origin, with
// radial spacing matched to the angular spacing so cells are roughly square
// in the log-polar chart. On hyperelliptic domains both sheets are meshed
// and welded along the real-axis cuts through canonical corner keys, and any
// real branch point inside the radial window is snapped onto a grid ring so
// it becomes a genuine cone vertex where the sheets meet. The triangulation
// then has the Euler characteristic of the surface piece it samples, and the
// two sheets never produce spurious near-coincident geometry near a branch
// point. Vertices keep their source sheet points and unit normals; triangles
// with negligible image area are dropped.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "harmonic/evaluation.hpp"
#include "harmonic/path_integral.hpp"

namespace harmonic {

struct MeshRegion {
    double r_min = 0.05;           // inner radius; 0 caps the disk (sphere domains only)
    double r_max = 20.0;
    double puncture_radius = 0.1;  // excision radius around finite punctures
    int n_theta = 96;              // angular cells; radial spacing matches angular
    double quad_tol = kQuadTol;
};

struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<SheetPoint> sources;  // sheet 0 marks a branch (cone) vertex
    std::vector<Vec3> normals;        // unit normals; zero where degenerate
    std::vector<std::array<std::size_t, 3>> triangles;

    double bbox_diag() const {
        if (vertices.empty()) return 0.0;
        Vec3 lo = vertices[0], hi = vertices[0];
        for (const Vec3& v : vertices)
            for (std::size_t k = 0; k < 3; ++k) {
                lo[k] = std::min(lo[k], v[k]);
                hi[k] = std::max(hi[k], v[k]);
            }
        return norm(hi - lo);
    }
};

// Undirected edge -> number of incident triangles.
inline std::map<std::pair<std::size_t, std::size_t>, int> edge_use_counts(const TriMesh& m) {
    std::map<std::pair<std::size_t, std::size_t>, int> uses;
    for (const auto& t : m.triangles)
        for (int e = 0; e < 3; ++e) {
            std::size_t a = t[std::size_t(e)], b = t[std::size_t((e + 1) % 3)];
            if (a > b) std::swap(a, b);
            ++uses[{a, b}];
        }
    return uses;
}

// V - E + F over the vertices actually referenced by triangles.
inline int euler_characteristic(const TriMesh& m) {
    std::vector<char> used(m.vertices.size(), 0);
    for (const auto& t : m.triangles)
        for (std::size_t v : t) used[v] = 1;
    long V = std::count(used.begin(), used.end(), char(1));
    long E = long(edge_use_counts(m).size());
    long F = long(m.triangles.size());
    return int(V - E + F);
}

inline bool is_edge_manifold(const TriMesh& m) {
    for (const auto& [e, n] : edge_use_counts(m))
        if (n > 2) return false;
    return true;
}

inline std::vector<std::pair<std::size_t, std::size_t>> boundary_edges(const TriMesh& m) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (const auto& [e, n] : edge_use_counts(m))
        if (n == 1) out.push_back(e);
    return out;
}

// Connected components of the boundary-edge graph.
inline int boundary_loop_count(const TriMesh& m) {
    auto edges = boundary_edges(m);
    if (edges.empty()) return 0;
    std::map<std::size_t, std::size_t> parent;
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) -> std::size_t {
        auto it = parent.find(x);
        if (it == parent.end()) {
            parent[x] = x;
            return x;
        }
        if (it->second == x) return x;
        std::size_t r = find(it->second);
        parent[x] = r;
        return r;
    };
    for (const auto& [a, b] : edges) {
        std::size_t ra = find(a), rb = find(b);
        if (ra != rb) parent[ra] = rb;
    }
    std::set<std::size_t> roots;
    for (const auto& [a, b] : edges) {
        roots.insert(find(a));
        (void)b;
    }
    return int(roots.size());
}

namespace detail {

// Integral of all three forms along the straight segment from a regular
// sheet point to a finite branch root. The 1/w parts are pulled back through
// the branch chart z = root + t^2, where w = t * sqrt(q(t^2)) with
// q(u) = p(root + u) / u, so the integrable endpoint singularity disappears.
inline std::array<Complex, 3> integrate_to_branch(const SurfaceData& s, const SheetPoint& from,
                                                  double root, double tol) {
    const Domain& d = s.domain;
    const Complex zr(root, 0.0);
    const Complex z0 = from.z;
    const Complex u0 = z0 - zr;
    if (std::abs(u0) < 1e-14) throw Error("branch integral needs a separated start point");
    CPoly shifted = taylor_shift(d.branch, zr);
    if (shifted.coeffs.size() < 2 || std::abs(shifted.coeffs[1]) < 1e-14)
        throw Error("branch integral needs a simple branch root");
    CPoly q{std::vector<Complex>(shifted.coeffs.begin() + 1, shifted.coeffs.end())};
    const Complex sq_ref = std::sqrt(q(Complex(0)));
    auto sq = [&](Complex u) {
        Complex c = std::sqrt(q(u));
        if ((std::conj(sq_ref) * c).real() < 0.0) c = -c;
        return c;
    };
    const Complex w0 = d.w_value(from);
    Complex t0 = std::sqrt(u0);
    if (std::abs(t0 * sq(u0) - w0) > std::abs(-t0 * sq(u0) - w0)) t0 = -t0;
    if (std::abs(t0 * sq(u0) - w0) > 1e-6 * (1.0 + std::abs(w0)))
        throw Error("branch chart does not match the sheet");
    std::array<Complex, 3> out{};
    for (int k = 0; k < 3; ++k) {
        const MeromorphicForm& f = s.forms[std::size_t(k)];
        Complex acc(0);
        if (!f.a.is_zero()) {
            const Complex dz = zr - z0;
            acc += integrate([&](double tau) { return eval_rational(f.a, z0 + tau * dz) * dz; },
                             0.0, 1.0, tol)
                       .value;
        }
        if (!f.b.is_zero()) {
            acc += integrate(
                       [&](double tau) {
                           Complex t = t0 * (1.0 - tau);
                           return 2.0 * eval_rational(f.b, zr + t * t) / sq(t * t) * (-t0);
                       },
                       0.0, 1.0, tol)
                       .value;
        }
        out[std::size_t(k)] = acc;
    }
    return out;
}

class MeshBuilder {
  public:
    MeshBuilder(const SurfaceData& s, const MeshRegion& rg)
        : s_(s), rg_(rg), eval_(s), jets_(s) {
        hyper_ = s.domain.is_hyperelliptic();
        nt_ = std::max(8, rg.n_theta);
        if (nt_ % 2) ++nt_;
        double rmin = rg.r_min, rmax = rg.r_max;
        if (!(rmax > 0.0) || rmax <= rmin)
            throw DomainError("mesh region radii out of order");
        if (rmin <= 0.0) {
            if (hyper_) throw DomainError("capped disk meshing needs a sphere domain");
            for (const SurfacePoint& p : s.punctures)
                if (!p.at_infinity && std::abs(p.z) <= rg.puncture_radius)
                    throw DomainError("capped disk meshing with a puncture at the origin");
            fan_ = true;
            rmin = rmax * 1e-3;
        }
        const double rho0 = std::log(rmin), rho1 = std::log(rmax);
        const double dtheta = 2.0 * kPi / nt_;
        nr_ = std::max(1, int(std::lround((rho1 - rho0) / dtheta)));
        const double drho = (rho1 - rho0) / nr_;
        rho_.resize(std::size_t(nr_) + 1);
        for (int i = 0; i <= nr_; ++i) rho_[std::size_t(i)] = rho0 + i * drho;
        if (hyper_) snap_branch_rings(drho);
    }

    TriMesh build() {
        std::vector<std::array<std::size_t, 4>> quads;
        const std::vector<int> sheets = hyper_ ? std::vector<int>{1, -1} : std::vector<int>{1};
        for (int i = 0; i < nr_; ++i)
            for (int j = 0; j < nt_; ++j) {
                const bool above = 2.0 * kPi * (j + 0.5) / nt_ < kPi;
                for (int sh : sheets) {
                    CornerInfo c00 = corner(i, j, sh, above);
                    CornerInfo c10 = corner(i + 1, j, sh, above);
                    CornerInfo c01 = corner(i, j + 1, sh, above);
                    CornerInfo c11 = corner(i + 1, j + 1, sh, above);
                    if (!keep(c00) || !keep(c10) || !keep(c01) || !keep(c11)) continue;
                    quads.push_back({vertex(c00), vertex(c10), vertex(c01), vertex(c11)});
                }
            }
        std::vector<std::array<std::size_t, 3>> fans;
        if (fan_) {
            CornerInfo centre;
            centre.key = {-1, 0, 1};
            centre.at = SheetPoint{Complex(0.0, 0.0), 1};
            std::size_t vc = vertex(centre);
            for (int j = 0; j < nt_; ++j) {
                const bool above = 2.0 * kPi * (j + 0.5) / nt_ < kPi;
                CornerInfo c0 = corner(0, j, 1, above);
                CornerInfo c1 = corner(0, j + 1, 1, above);
                if (!keep(c0) || !keep(c1)) continue;
                fans.push_back({vc, vertex(c0), vertex(c1)});
            }
        }

        TriMesh m;
        const std::size_t nv = corners_.size();
        m.vertices.resize(nv);
        m.sources.resize(nv);
        m.normals.resize(nv);
        for (std::size_t v = 0; v < nv; ++v) m.sources[v] = corners_[v].at;
        if (!hyper_) {
            for (std::size_t v = 0; v < nv; ++v)
                m.vertices[v] = eval_.value(corners_[v].at, rg_.quad_tol);
        } else {
            propagate_values(quads, m.vertices);
        }
        for (std::size_t v = 0; v < nv; ++v) m.normals[v] = vertex_normal(corners_[v]);

        double diag = 0.0;
        {
            TriMesh probe;
            probe.vertices = m.vertices;
            diag = probe.bbox_diag();
        }
        const double min_area = 1e-14 * diag * diag;
        auto push_tri = [&](std::size_t a, std::size_t b, std::size_t c) {
            if (a == b || b == c || a == c) return;
            const Vec3 ab = m.vertices[b] - m.vertices[a];
            const Vec3 ac = m.vertices[c] - m.vertices[a];
            if (0.5 * norm(cross(ab, ac)) <= min_area) return;
            m.triangles.push_back({a, b, c});
        };
        for (const auto& q : quads) {
            push_tri(q[0], q[1], q[3]);
            push_tri(q[0], q[3], q[2]);
        }
        for (const auto& f : fans) push_tri(f[0], f[1], f[2]);
        return m;
    }

  private:
    struct CornerInfo {
        std::tuple<int, int, int> key{};  // (ring, angle index, sheet; 0 = branch)
        SheetPoint at{};
        bool branch = false;
        double root = 0.0;
    };

    void snap_branch_rings(double drho) {
        std::vector<double> radii;
        for (double root : s_.domain.branch_roots) {
            const double a = std::abs(root);
            const double la = std::log(std::max(a, 1e-300));
            if (la <= rho_[0] || la >= rho_[std::size_t(nr_)]) {
                if (std::abs(la - rho_[0]) < 0.5 * drho ||
                    std::abs(la - rho_[std::size_t(nr_)]) < 0.5 * drho)
                    throw DomainError("branch point touches a boundary ring; adjust the region");
                continue;
            }
            radii.push_back(a);
        }
        std::sort(radii.begin(), radii.end());
        radii.erase(std::unique(radii.begin(), radii.end(),
                                [](double x, double y) {
                                    return std::abs(x - y) <= 1e-12 * (1.0 + std::abs(x));
                                }),
                    radii.end());
        int prev = 0;
        for (double a : radii) {
            int i = int(std::lround((std::log(a) - rho_[0]) / drho));
            i = std::max(i, prev + 1);
            if (i > nr_ - 1)
                throw DomainError("mesh too coarse to separate branch points; raise n_theta");
            rho_[std::size_t(i)] = std::log(a);
            prev = i;
        }
        for (int i = 1; i <= nr_; ++i)
            if (rho_[std::size_t(i)] <= rho_[std::size_t(i - 1)])
                throw DomainError("branch snapping collapsed a mesh ring; raise n_theta");
    }

    bool in_cut(double x) const {
        for (const Cut& c : s_.domain.cuts)
            if (c.contains(x)) return true;
        return false;
    }

    // Canonical corner of the grid. `above` says which side of the real axis
    // the referencing cell or arc lies on; on-axis corners are always
    // represented from above (y = +0.0), so a below-side reference lands on
    // the flipped sheet when the corner sits inside a cut.
    CornerInfo corner(int i, int j, int sheet, bool above) const {
        CornerInfo c;
        const int jm = ((j % nt_) + nt_) % nt_;
        const double r = std::exp(rho_[std::size_t(i)]);
        const bool pos_axis = (jm == 0), neg_axis = (2 * jm == nt_);
        if (!hyper_) {
            Complex z = pos_axis   ? Complex(r, 0.0)
                        : neg_axis ? Complex(-r, 0.0)
                                   : r * Complex(std::cos(2.0 * kPi * jm / nt_),
                                                 std::sin(2.0 * kPi * jm / nt_));
            c.key = {i, jm, 1};
            c.at = SheetPoint{z, 1};
            return c;
        }
        if (pos_axis || neg_axis) {
            const double x = pos_axis ? r : -r;
            for (double root : s_.domain.branch_roots)
                if (std::abs(root - x) <= 1e-9 * (1.0 + std::abs(root))) {
                    c.key = {i, jm, 0};
                    c.at = SheetPoint{Complex(root, +0.0), 0};
                    c.branch = true;
                    c.root = root;
                    return c;
                }
            int s2 = sheet;
            if (!above && in_cut(x)) s2 = -sheet;
            c.key = {i, jm, s2};
            c.at = SheetPoint{Complex(x, +0.0), s2};
            return c;
        }
        const double th = 2.0 * kPi * jm / nt_;
        c.key = {i, jm, sheet};
        c.at = SheetPoint{r * Complex(std::cos(th), std::sin(th)), sheet};
        return c;
    }

    bool keep(const CornerInfo& c) const {
        for (const SurfacePoint& q : s_.punctures) {
            if (q.at_infinity) continue;
            if (std::abs(c.at.z - q.z) <= rg_.puncture_radius) {
                if (!hyper_ || s_.domain.is_branch_point(q.z)) return false;
                if (c.branch || q.sheet == c.at.sheet) return false;
            }
        }
        return true;
    }

    std::size_t vertex(const CornerInfo& c) {
        auto [it, inserted] = index_.try_emplace(c.key, corners_.size());
        if (inserted) corners_.push_back(c);
        return it->second;
    }

    Vec3 vertex_normal(const CornerInfo& c) const {
        Vec3 n{};
        if (c.branch) {
            std::array<Complex, 3> ph{};
            for (int k = 0; k < 3; ++k)
                ph[std::size_t(k)] = localize_form(s_.forms[std::size_t(k)], s_.domain,
                                                   SurfacePoint::finite(Complex(c.root, 0.0)), 8)
                                         .at(0);
            const Vec3 fx{ph[0].real(), ph[1].real(), ph[2].real()};
            const Vec3 fy{-ph[0].imag(), -ph[1].imag(), -ph[2].imag()};
            n = cross(fx, fy);
        } else {
            try {
                MetricSample ms = metric_sample(s_, jets_, c.at);
                if (ms.degenerate) return {};
                n = ms.normal;
            } catch (const Error&) {
                return {};
            }
        }
        const double m = norm(n);
        if (!(m > 0.0)) return {};
        return {n[0] / m, n[1] / m, n[2] / m};
    }

    // Values on hyperelliptic domains: one full routed integral seeds each
    // connected component, then every other vertex is reached once through a
    // breadth-first tree of single-segment integrals between canonical
    // corners. Signed zeros on the axis make cut crossings come out right in
    // both directions; a mismatch against the welded sheet is a logic error.
    void propagate_values(const std::vector<std::array<std::size_t, 4>>& quads,
                          std::vector<Vec3>& vals) const {
        const std::size_t nv = corners_.size();
        std::vector<std::vector<std::size_t>> adj(nv);
        std::set<std::pair<std::size_t, std::size_t>> seen;
        auto add_edge = [&](std::size_t a, std::size_t b) {
            if (a == b) return;
            if (corners_[a].branch && corners_[b].branch) return;
            std::size_t lo = std::min(a, b), hi = std::max(a, b);
            if (!seen.insert({lo, hi}).second) return;
            adj[a].push_back(b);
            adj[b].push_back(a);
        };
        for (const auto& q : quads) {
            add_edge(q[0], q[1]);
            add_edge(q[0], q[2]);
            add_edge(q[1], q[3]);
            add_edge(q[2], q[3]);
        }
        std::vector<char> done(nv, 0);
        for (std::size_t seed = 0; seed < nv; ++seed) {
            if (done[seed] || corners_[seed].branch) continue;
            vals[seed] = eval_.value(corners_[seed].at, rg_.quad_tol);
            done[seed] = 1;
            std::vector<std::size_t> frontier{seed};
            while (!frontier.empty()) {
                std::vector<std::size_t> next;
                for (std::size_t v : frontier)
                    for (std::size_t u : adj[v]) {
                        if (done[u]) continue;
                        vals[u] = vals[v] + edge_delta(v, u);
                        done[u] = 1;
                        next.push_back(u);
                    }
                frontier = std::move(next);
            }
        }
        for (std::size_t v = 0; v < nv; ++v)
            if (!done[v]) throw Error("mesh value propagation missed a vertex");
    }

    Vec3 edge_delta(std::size_t v, std::size_t u) const {
        const CornerInfo& a = corners_[v];
        const CornerInfo& b = corners_[u];
        if (a.branch || b.branch) {
            const CornerInfo& reg = a.branch ? b : a;
            const CornerInfo& br = a.branch ? a : b;
            std::array<Complex, 3> J = integrate_to_branch(s_, reg.at, br.root, rg_.quad_tol);
            Vec3 d{J[0].real(), J[1].real(), J[2].real()};  // f(branch) - f(regular)
            if (a.branch) return {-d[0], -d[1], -d[2]};
            return d;
        }
        PathIntegral pi = integrate_segment(s_, a.at.z, b.at.z, a.at.sheet, rg_.quad_tol);
        if (pi.end_sheet != b.at.sheet)
            throw Error("mesh welding disagrees with the cut crossing rules");
        return {pi.value[0].real(), pi.value[1].real(), pi.value[2].real()};
    }

    const SurfaceData& s_;
    MeshRegion rg_;
    Evaluator eval_;
    FormJets jets_;
    bool hyper_ = false;
    bool fan_ = false;
    int nt_ = 0, nr_ = 0;
    std::vector<double> rho_;
    std::map<std::tuple<int, int, int>, std::size_t> index_;
    std::vector<CornerInfo> corners_;
};

}  // namespace detail

inline TriMesh build_mesh(const SurfaceData& s, const MeshRegion& region) {
    return detail::MeshBuilder(s, region).build();
}

// Wavefront OBJ with 9-significant-digit coordinates, 1-indexed faces and a
// deterministic vertex order.
inline void write_obj(const TriMesh& m, std::ostream& os, bool with_normals = true) {
    char buf[160];
    for (const Vec3& v : m.vertices) {
        std::snprintf(buf, sizeof buf, "v %.9g %.9g %.9g\n", v[0], v[1], v[2]);
        os << buf;
    }
    if (with_normals)
        for (const Vec3& n : m.normals) {
            std::snprintf(buf, sizeof buf, "vn %.9g %.9g %.9g\n", n[0], n[1], n[2]);
            os << buf;
        }
    for (const auto& t : m.triangles) {
        unsigned long a = (unsigned long)(t[0] + 1);
        unsigned long b = (unsigned long)(t[1] + 1);
        unsigned long c = (unsigned long)(t[2] + 1);
        if (with_normals)
            std::snprintf(buf, sizeof buf, "f %lu//%lu %lu//%lu %lu//%lu\n", a, a, b, b, c, c);
        else
            std::snprintf(buf, sizeof buf, "f %lu %lu %lu\n", a, b, c);
        os << buf;
    }
}

}  // namespace harmonic
