// Copyright (c) 2026 the bcmortar authors
// SPDX-License-Identifier: Apache-2.0

#include "bcm/overlay.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <ostream>
#include <stdexcept>
#include <unordered_set>

namespace bcm {

namespace {

constexpr double kRelEps = 1e-12;

double polygon_area(const std::vector<Vec2>& poly)
{
    double a = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2& p = poly[i];
        const Vec2& q = poly[(i + 1) % poly.size()];
        a += cross2(p, q);
    }
    return 0.5 * a;
}

// Clips a convex polygon against the half-plane left of a->b.
std::vector<Vec2> clip_halfplane(const std::vector<Vec2>& poly, const Vec2& a, const Vec2& b, double eps)
{
    std::vector<Vec2> out;
    out.reserve(poly.size() + 2);
    const Vec2 dir = b - a;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& p = poly[i];
        const Vec2& q = poly[(i + 1) % n];
        const double dp = cross2(dir, p - a);
        const double dq = cross2(dir, q - a);
        if (dp >= -eps)
            out.push_back(p);
        if ((dp > eps && dq < -eps) || (dp < -eps && dq > eps)) {
            const double t = dp / (dp - dq);
            out.push_back(p + t * (q - p));
        }
    }
    return out;
}

// Removes duplicate and collinear vertices so that equivalent polygons from
// either clipping order canonicalize to the same vertex count.
void canonicalize(std::vector<Vec2>& poly, double eps_pt, double eps_area)
{
    std::vector<Vec2> tmp;
    tmp.reserve(poly.size());
    for (const Vec2& p : poly) {
        if (tmp.empty() || (p - tmp.back()).norm() > eps_pt)
            tmp.push_back(p);
    }
    while (tmp.size() > 1 && (tmp.front() - tmp.back()).norm() <= eps_pt)
        tmp.pop_back();
    if (tmp.size() < 3) {
        poly.clear();
        return;
    }
    poly.clear();
    const std::size_t n = tmp.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& prev = tmp[(i + n - 1) % n];
        const Vec2& cur = tmp[i];
        const Vec2& next = tmp[(i + 1) % n];
        if (std::abs(cross2(cur - prev, next - cur)) > eps_area)
            poly.push_back(cur);
    }
    if (poly.size() < 3)
        poly.clear();
}

void snap_to_vertices(std::vector<Vec2>& poly, const std::array<Vec2, 3>& ta, const std::array<Vec2, 3>& tb, double eps_pt)
{
    for (Vec2& p : poly) {
        for (const Vec2& v : ta)
            if ((p - v).norm() <= eps_pt)
                p = v;
        for (const Vec2& v : tb)
            if ((p - v).norm() <= eps_pt)
                p = v;
    }
}

double triangle_scale(const std::array<Vec2, 3>& t)
{
    return std::max({(t[1] - t[0]).norm(), (t[2] - t[1]).norm(), (t[0] - t[2]).norm()});
}

// Convex intersection of two counterclockwise triangles.
std::vector<Vec2> intersect_triangles(const std::array<Vec2, 3>& ta, const std::array<Vec2, 3>& tb)
{
    const double scale = std::max(triangle_scale(ta), triangle_scale(tb));
    const double eps = kRelEps * scale;
    std::vector<Vec2> poly(ta.begin(), ta.end());
    for (int k = 0; k < 3 && !poly.empty(); ++k)
        poly = clip_halfplane(poly, tb[static_cast<std::size_t>(k)], tb[static_cast<std::size_t>((k + 1) % 3)], eps);
    if (poly.size() < 3) {
        poly.clear();
        return poly;
    }
    snap_to_vertices(poly, ta, tb, eps);
    canonicalize(poly, eps, eps * scale);
    return poly;
}

bool bbox_overlap(const std::array<Vec2, 3>& ta, const std::array<Vec2, 3>& tb, double eps)
{
    const double axmin = std::min({ta[0].x(), ta[1].x(), ta[2].x()});
    const double axmax = std::max({ta[0].x(), ta[1].x(), ta[2].x()});
    const double aymin = std::min({ta[0].y(), ta[1].y(), ta[2].y()});
    const double aymax = std::max({ta[0].y(), ta[1].y(), ta[2].y()});
    const double bxmin = std::min({tb[0].x(), tb[1].x(), tb[2].x()});
    const double bxmax = std::max({tb[0].x(), tb[1].x(), tb[2].x()});
    const double bymin = std::min({tb[0].y(), tb[1].y(), tb[2].y()});
    const double bymax = std::max({tb[0].y(), tb[1].y(), tb[2].y()});
    return axmin <= bxmax + eps && bxmin <= axmax + eps && aymin <= bymax + eps && bymin <= aymax + eps;
}

struct FrontState {
    const SurfaceMesh& a;
    const SurfaceMesh& b;
    Overlay& ov;
    std::unordered_set<std::int64_t> visited;
    std::vector<double> covered_a;  // per facet of A

    std::int64_t key(int fa, int fb) const { return static_cast<std::int64_t>(fa) * b.num_facets() + fb; }
};

// Clips the pair, emits fan triangles, and reports whether the intersection
// had positive area (the condition for growing the front through neighbors).
bool process_pair(FrontState& st, int fa, int fb)
{
    const auto ta = st.a.facet_points(fa);
    const auto tb = st.b.facet_points(fb);
    const double scale = std::max(triangle_scale(ta), triangle_scale(tb));
    if (!bbox_overlap(ta, tb, kRelEps * scale))
        return false;

    std::vector<Vec2> poly = intersect_triangles(ta, tb);
    if (poly.size() < 3)
        return false;
    const double area = polygon_area(poly);
    const double parent_area = std::min(st.a.facet_area(fa), st.b.facet_area(fb));
    if (area <= kRelEps * scale * scale)
        return false;
    if (area <= 64.0 * kRelEps * parent_area) {
        st.ov.discarded_area += area;  // sliver: drop but keep the budget honest
        return true;
    }

    for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
        OverlayCell cell;
        cell.v = {poly[0], poly[k], poly[k + 1]};
        cell.parent_a = fa;
        cell.parent_b = fb;
        cell.area = triangle_area(cell.v[0], cell.v[1], cell.v[2]);
        if (cell.area <= 0.0)
            continue;
        st.ov.cells.push_back(cell);
        st.ov.total_area += cell.area;
        st.covered_a[static_cast<std::size_t>(fa)] += cell.area;
    }
    return true;
}

void grow_front(FrontState& st, int seed_a, int seed_b)
{
    std::deque<std::pair<int, int>> queue;
    auto push = [&st, &queue](int fa, int fb) {
        if (fa < 0 || fb < 0)
            return;
        const auto k = st.key(fa, fb);
        if (st.visited.insert(k).second)
            queue.emplace_back(fa, fb);
    };
    push(seed_a, seed_b);
    while (!queue.empty()) {
        auto [fa, fb] = queue.front();
        queue.pop_front();
        if (!process_pair(st, fa, fb))
            continue;
        for (int k = 0; k < 3; ++k) {
            const int ea = st.a.facet_edges[static_cast<std::size_t>(fa)][static_cast<std::size_t>(k)];
            const auto& adj_a = st.a.edge_facets[static_cast<std::size_t>(ea)];
            push(adj_a[0] == fa ? adj_a[1] : adj_a[0], fb);
            const int eb = st.b.facet_edges[static_cast<std::size_t>(fb)][static_cast<std::size_t>(k)];
            const auto& adj_b = st.b.edge_facets[static_cast<std::size_t>(eb)];
            push(fa, adj_b[0] == fb ? adj_b[1] : adj_b[0]);
        }
    }
}

}  // namespace

Overlay intersect_meshes(const SurfaceMesh& mesh_a, const SurfaceMesh& mesh_b)
{
    const double area_a = mesh_a.total_area();
    const double area_b = mesh_b.total_area();
    if (std::abs(area_a - area_b) > 1e-8 * std::max(area_a, area_b))
        throw std::runtime_error("intersect_meshes: meshes do not triangulate the same domain");

    Overlay ov;
    FrontState st{mesh_a, mesh_b, ov, {}, std::vector<double>(static_cast<std::size_t>(mesh_a.num_facets()), 0.0)};

    const PointLocation seed = locate_point(mesh_b, mesh_a.facet_centroid(0));
    grow_front(st, 0, seed.facet);

    // Coverage audit: facets of A the front missed (detached by degenerate
    // touching) are redone by brute force against all of B.
    for (int fa = 0; fa < mesh_a.num_facets(); ++fa) {
        const double deficit = mesh_a.facet_area(fa) - st.covered_a[static_cast<std::size_t>(fa)];
        if (deficit > 1e-10 * mesh_a.facet_area(fa)) {
            for (int fb = 0; fb < mesh_b.num_facets(); ++fb)
                if (st.visited.insert(st.key(fa, fb)).second)
                    process_pair(st, fa, fb);
        }
    }

    if (ov.cells.empty())
        throw std::runtime_error("intersect_meshes: empty overlay");
    if (std::abs(ov.total_area + ov.discarded_area - area_a) > 1e-8 * area_a)
        throw std::runtime_error("intersect_meshes: overlay area defect beyond tolerance");
    return ov;
}

PointLocation locate_point(const SurfaceMesh& mesh, const Vec2& p, int hint)
{
    auto barycentric = [&mesh, &p](int f) {
        const auto t = mesh.facet_points(f);
        const double a = mesh.facet_area(f);
        Eigen::Vector3d l;
        l(0) = triangle_area(p, t[1], t[2]) / a;
        l(1) = triangle_area(t[0], p, t[2]) / a;
        l(2) = triangle_area(t[0], t[1], p) / a;
        return l;
    };

    int f = (hint >= 0 && hint < mesh.num_facets()) ? hint : 0;
    const int max_steps = 2 * mesh.num_facets() + 8;
    for (int step = 0; step < max_steps; ++step) {
        const Eigen::Vector3d l = barycentric(f);
        int worst = 0;
        if (l(1) < l(worst)) worst = 1;
        if (l(2) < l(worst)) worst = 2;
        if (l(worst) >= -1e-12)
            return {f, l};
        // Cross the side opposite the most negative coordinate.
        const int side = (worst + 1) % 3;
        const int e = mesh.facet_edges[static_cast<std::size_t>(f)][static_cast<std::size_t>(side)];
        const auto& adj = mesh.edge_facets[static_cast<std::size_t>(e)];
        const int next = (adj[0] == f) ? adj[1] : adj[0];
        if (next < 0)
            break;  // walked off the boundary; fall back to a scan
        f = next;
    }

    // Deterministic fallback: the facet with the least-negative coordinate.
    int best_f = -1;
    double best = -1e300;
    for (int g = 0; g < mesh.num_facets(); ++g) {
        const Eigen::Vector3d l = barycentric(g);
        const double m = l.minCoeff();
        if (m > best) {
            best = m;
            best_f = g;
        }
    }
    if (best < -1e-9)
        throw std::runtime_error("locate_point: point outside the mesh domain");
    Eigen::Vector3d l = barycentric(best_f);
    return {best_f, l};
}

std::vector<SubSegment> clip_segment(const SurfaceMesh& mesh, const Vec2& p0, const Vec2& p1)
{
    const Vec2 d = p1 - p0;
    const double len = d.norm();
    if (len == 0.0)
        throw std::runtime_error("clip_segment: zero-length segment");
    const double eps_t = 1e-12;

    // Breakpoints: parameters where the segment meets mesh edges.
    std::vector<double> ts{0.0, 1.0};
    const double lo_x = std::min(p0.x(), p1.x()), hi_x = std::max(p0.x(), p1.x());
    const double lo_y = std::min(p0.y(), p1.y()), hi_y = std::max(p0.y(), p1.y());
    for (int e = 0; e < mesh.num_edges(); ++e) {
        const Vec2 a = mesh.node_coords[static_cast<std::size_t>(mesh.edges[static_cast<std::size_t>(e)][0])];
        const Vec2 b = mesh.node_coords[static_cast<std::size_t>(mesh.edges[static_cast<std::size_t>(e)][1])];
        const double pad = 1e-12 + 1e-12 * len;
        if (std::max(a.x(), b.x()) < lo_x - pad || std::min(a.x(), b.x()) > hi_x + pad ||
            std::max(a.y(), b.y()) < lo_y - pad || std::min(a.y(), b.y()) > hi_y + pad)
            continue;
        const Vec2 ab = b - a;
        const double denom = cross2(d, ab);
        const double scale = std::max(len, ab.norm());
        if (std::abs(denom) > 1e-14 * scale * scale) {
            const double t = cross2(a - p0, ab) / denom;
            const double s = cross2(a - p0, d) / denom;
            if (t > -eps_t && t < 1.0 + eps_t && s > -eps_t && s < 1.0 + eps_t)
                ts.push_back(std::clamp(t, 0.0, 1.0));
        } else if (std::abs(cross2(a - p0, d)) <= 1e-12 * scale * len) {
            // Collinear: the overlap interval endpoints are breakpoints.
            const double ta = (a - p0).dot(d) / (len * len);
            const double tb = (b - p0).dot(d) / (len * len);
            for (double t : {ta, tb})
                if (t > -eps_t && t < 1.0 + eps_t)
                    ts.push_back(std::clamp(t, 0.0, 1.0));
        }
    }
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end(), [](double x, double y) { return y - x < 1e-12; }), ts.end());
    ts.front() = 0.0;
    ts.back() = 1.0;

    std::vector<SubSegment> out;
    int hint = -1;
    for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
        const double t0 = ts[k], t1 = ts[k + 1];
        if (t1 - t0 < 1e-12)
            continue;
        const Vec2 mid = p0 + 0.5 * (t0 + t1) * d;
        const PointLocation loc = locate_point(mesh, mid, hint);
        hint = loc.facet;
        out.push_back({t0, t1, loc.facet});
    }
    if (out.empty())
        throw std::runtime_error("clip_segment: segment produced no sub-segments");
    return out;
}

std::vector<QuadPoint> quad_points(const std::array<Vec2, 3>& tri, int degree)
{
    const double area = triangle_area(tri[0], tri[1], tri[2]);
    std::vector<QuadPoint> pts;
    auto add = [&](double l0, double l1, double l2, double w) {
        pts.push_back({l0 * tri[0] + l1 * tri[1] + l2 * tri[2], w * area});
    };
    if (degree == 2) {
        add(0.5, 0.5, 0.0, 1.0 / 3.0);
        add(0.0, 0.5, 0.5, 1.0 / 3.0);
        add(0.5, 0.0, 0.5, 1.0 / 3.0);
    } else if (degree == 4) {
        const double a = 0.445948490915965;
        const double wa = 0.223381589678011;
        const double b = 0.091576213509771;
        const double wb = 0.109951743655322;
        add(1.0 - 2.0 * a, a, a, wa);
        add(a, 1.0 - 2.0 * a, a, wa);
        add(a, a, 1.0 - 2.0 * a, wa);
        add(1.0 - 2.0 * b, b, b, wb);
        add(b, 1.0 - 2.0 * b, b, wb);
        add(b, b, 1.0 - 2.0 * b, wb);
    } else {
        throw std::runtime_error("quad_points: unsupported quadrature degree " + std::to_string(degree));
    }
    return pts;
}

std::vector<QuadPoint> quad_points(const SurfaceMesh& mesh, int facet, int degree)
{
    return quad_points(mesh.facet_points(facet), degree);
}

void write_overlay(std::ostream& out, const Overlay& ov)
{
    char buf[256];
    for (const auto& c : ov.cells) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g %.17g %.17g %d %d",
                      c.v[0].x(), c.v[0].y(), c.v[1].x(), c.v[1].y(), c.v[2].x(), c.v[2].y(),
                      c.parent_a, c.parent_b);
        out << buf << '\n';
    }
}

}  // namespace bcm
