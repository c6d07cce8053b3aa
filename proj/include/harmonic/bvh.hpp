#pragma once

// Axis-aligned bounding-box tree over mesh triangles plus a conservative
// triangle-triangle intersection test. Used to look for self-intersections
// in a sampled surface: candidate pairs come from overlapping boxes, pairs
// sharing a mesh vertex are ignored (they always touch along the shared
// simplex), and the exact test tolerates grazing contact within an epsilon
// band scaled to the mesh size so welded seams do not trigger.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include "harmonic/mesh.hpp"

namespace harmonic {

struct Aabb {
    Vec3 lo{1e300, 1e300, 1e300};
    Vec3 hi{-1e300, -1e300, -1e300};

    void expand(const Vec3& p) {
        for (std::size_t k = 0; k < 3; ++k) {
            lo[k] = std::min(lo[k], p[k]);
            hi[k] = std::max(hi[k], p[k]);
        }
    }
    void expand(const Aabb& o) {
        expand(o.lo);
        expand(o.hi);
    }
    bool overlaps(const Aabb& o, double margin) const {
        for (std::size_t k = 0; k < 3; ++k)
            if (lo[k] > o.hi[k] + margin || o.lo[k] > hi[k] + margin) return false;
        return true;
    }
    Vec3 centre() const {
        return {0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1]), 0.5 * (lo[2] + hi[2])};
    }
};

namespace detail {

// Interval of the projection of a triangle onto an axis.
inline std::pair<double, double> project(const std::array<Vec3, 3>& t, const Vec3& axis) {
    double a = dot(t[0], axis), b = dot(t[1], axis), c = dot(t[2], axis);
    return {std::min({a, b, c}), std::max({a, b, c})};
}

// Separating-axis test for coplanar triangles within the plane.
inline bool coplanar_overlap(const std::array<Vec3, 3>& A, const std::array<Vec3, 3>& B,
                             const Vec3& n, double eps) {
    std::array<Vec3, 6> axes{};
    int na = 0;
    for (int i = 0; i < 3; ++i) {
        axes[std::size_t(na++)] = cross(A[std::size_t((i + 1) % 3)] - A[std::size_t(i)], n);
        axes[std::size_t(na++)] = cross(B[std::size_t((i + 1) % 3)] - B[std::size_t(i)], n);
    }
    for (int i = 0; i < na; ++i) {
        const Vec3& ax = axes[std::size_t(i)];
        if (norm(ax) < 1e-300) continue;
        auto [alo, ahi] = project(A, ax);
        auto [blo, bhi] = project(B, ax);
        double pad = eps * norm(ax);
        if (alo > bhi + pad || blo > ahi + pad) return false;
    }
    return true;
}

}  // namespace detail

// Conservative triangle-triangle intersection: true when the triangles come
// within eps of touching, false when a separating plane with clearance eps
// exists.
inline bool triangles_intersect(const std::array<Vec3, 3>& A, const std::array<Vec3, 3>& B,
                                double eps) {
    const Vec3 nA = cross(A[1] - A[0], A[2] - A[0]);
    const Vec3 nB = cross(B[1] - B[0], B[2] - B[0]);
    const double mA = norm(nA), mB = norm(nB);
    if (mA < 1e-300 || mB < 1e-300) return false;  // degenerate: handled by mesh hygiene

    std::array<double, 3> dB{}, dA{};
    for (std::size_t i = 0; i < 3; ++i) dB[i] = dot(nA, B[i] - A[0]) / mA;
    if (dB[0] > eps && dB[1] > eps && dB[2] > eps) return false;
    if (dB[0] < -eps && dB[1] < -eps && dB[2] < -eps) return false;
    for (std::size_t i = 0; i < 3; ++i) dA[i] = dot(nB, A[i] - B[0]) / mB;
    if (dA[0] > eps && dA[1] > eps && dA[2] > eps) return false;
    if (dA[0] < -eps && dA[1] < -eps && dA[2] < -eps) return false;

    auto near_zero = [eps](const std::array<double, 3>& d) {
        return std::abs(d[0]) <= eps && std::abs(d[1]) <= eps && std::abs(d[2]) <= eps;
    };
    if (near_zero(dA) && near_zero(dB)) {
        Vec3 n{nA[0] / mA, nA[1] / mA, nA[2] / mA};
        return detail::coplanar_overlap(A, B, n, eps);
    }

    // Interval overlap on the line of the two planes.
    const Vec3 dir = cross(nA, nB);
    double md = norm(dir);
    if (md < 1e-12 * mA * mB / (norm(A[1] - A[0]) + norm(B[1] - B[0]) + 1e-300)) {
        // Planes effectively parallel but not coplanar within eps: separated.
        return false;
    }
    auto interval = [&](const std::array<Vec3, 3>& T, const std::array<double, 3>& d,
                        double& lo, double& hi) {
        lo = 1e300;
        hi = -1e300;
        // Projections of the points where the triangle edges cross the other
        // plane; if a vertex sits within eps of the plane, take it directly.
        for (std::size_t i = 0; i < 3; ++i) {
            double pi = dot(dir, T[i]);
            if (std::abs(d[i]) <= eps) {
                lo = std::min(lo, pi);
                hi = std::max(hi, pi);
            }
            for (std::size_t j = i + 1; j < 3; ++j) {
                if ((d[i] > 0) == (d[j] > 0)) continue;
                double t = d[i] / (d[i] - d[j]);
                double pj = dot(dir, T[j]);
                double p = pi + t * (pj - pi);
                lo = std::min(lo, p);
                hi = std::max(hi, p);
            }
        }
        return lo <= hi;
    };
    double alo, ahi, blo, bhi;
    if (!interval(A, dA, alo, ahi)) return false;
    if (!interval(B, dB, blo, bhi)) return false;
    const double pad = eps * md;
    return alo <= bhi + pad && blo <= ahi + pad;
}

class TriangleBvh {
  public:
    explicit TriangleBvh(const TriMesh& m, int leaf_size = 8) : mesh_(&m) {
        const std::size_t n = m.triangles.size();
        boxes_.resize(n);
        for (std::size_t t = 0; t < n; ++t)
            for (std::size_t v : m.triangles[t]) boxes_[t].expand(m.vertices[v]);
        order_.resize(n);
        std::iota(order_.begin(), order_.end(), std::size_t(0));
        if (n > 0) root_ = build(0, n, std::max(1, leaf_size));
    }

    // All triangle index pairs (a < b) whose triangles come within eps of
    // touching and share no mesh vertex, in deterministic sorted order.
    std::vector<std::pair<std::size_t, std::size_t>> intersecting_pairs(double eps) const {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        if (root_ >= 0) collide(root_, root_, eps, out);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

  private:
    struct Node {
        Aabb box;
        std::size_t begin = 0, end = 0;
        int left = -1, right = -1;
        bool leaf() const { return left < 0; }
    };

    int build(std::size_t begin, std::size_t end, int leaf_size) {
        Node node;
        node.begin = begin;
        node.end = end;
        for (std::size_t i = begin; i < end; ++i) node.box.expand(boxes_[order_[i]]);
        int id = int(nodes_.size());
        nodes_.push_back(node);
        if (end - begin > std::size_t(leaf_size)) {
            Aabb cb;
            for (std::size_t i = begin; i < end; ++i) cb.expand(boxes_[order_[i]].centre());
            std::size_t axis = 0;
            double best = -1.0;
            for (std::size_t k = 0; k < 3; ++k)
                if (cb.hi[k] - cb.lo[k] > best) {
                    best = cb.hi[k] - cb.lo[k];
                    axis = k;
                }
            std::size_t mid = begin + (end - begin) / 2;
            std::nth_element(order_.begin() + long(begin), order_.begin() + long(mid),
                             order_.begin() + long(end), [&](std::size_t a, std::size_t b) {
                                 double ca = boxes_[a].centre()[axis];
                                 double cmb = boxes_[b].centre()[axis];
                                 if (ca != cmb) return ca < cmb;
                                 return a < b;
                             });
            if (mid > begin && mid < end) {
                int l = build(begin, mid, leaf_size);
                int r = build(mid, end, leaf_size);
                nodes_[std::size_t(id)].left = l;
                nodes_[std::size_t(id)].right = r;
            }
        }
        return id;
    }

    bool share_vertex(std::size_t a, std::size_t b) const {
        for (std::size_t va : mesh_->triangles[a])
            for (std::size_t vb : mesh_->triangles[b])
                if (va == vb) return true;
        return false;
    }

    std::array<Vec3, 3> corners(std::size_t t) const {
        const auto& tri = mesh_->triangles[t];
        return {mesh_->vertices[tri[0]], mesh_->vertices[tri[1]], mesh_->vertices[tri[2]]};
    }

    void collide(int ia, int ib, double eps,
                 std::vector<std::pair<std::size_t, std::size_t>>& out) const {
        const Node& a = nodes_[std::size_t(ia)];
        const Node& b = nodes_[std::size_t(ib)];
        if (!a.box.overlaps(b.box, eps)) return;
        if (a.leaf() && b.leaf()) {
            for (std::size_t i = a.begin; i < a.end; ++i)
                for (std::size_t j = (ia == ib ? i + 1 : b.begin); j < b.end; ++j) {
                    std::size_t ta = order_[i], tb = order_[j];
                    if (ta == tb) continue;
                    std::size_t lo = std::min(ta, tb), hi = std::max(ta, tb);
                    if (!boxes_[lo].overlaps(boxes_[hi], eps)) continue;
                    if (share_vertex(lo, hi)) continue;
                    if (triangles_intersect(corners(lo), corners(hi), eps))
                        out.push_back({lo, hi});
                }
            return;
        }
        if (a.leaf()) {
            collide(ia, b.left, eps, out);
            collide(ia, b.right, eps, out);
        } else if (b.leaf()) {
            collide(a.left, ib, eps, out);
            collide(a.right, ib, eps, out);
        } else if (ia == ib) {
            collide(a.left, a.left, eps, out);
            collide(a.right, a.right, eps, out);
            collide(a.left, a.right, eps, out);
        } else {
            collide(a.left, b.left, eps, out);
            collide(a.left, b.right, eps, out);
            collide(a.right, b.left, eps, out);
            collide(a.right, b.right, eps, out);
        }
    }

    const TriMesh* mesh_;
    std::vector<Aabb> boxes_;
    std::vector<std::size_t> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

// Self-intersection scan with the epsilon band pinned to the mesh size.
inline std::vector<std::pair<std::size_t, std::size_t>> self_intersections(
    const TriMesh& m, double eps_factor = 1e-12) {
    TriangleBvh bvh(m);
    return bvh.intersecting_pairs(eps_factor * m.bbox_diag());
}

}  // namespace harmonic
