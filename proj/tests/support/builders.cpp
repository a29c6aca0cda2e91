// Copyright (c) 2026 the bcmortar authors
// SPDX-License-Identifier: Apache-2.0

#include "builders.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <Eigen/LU>

namespace bcm::testing {

namespace {

struct Tri {
    std::array<int, 3> v;
    Vec2 cc;       // circumcenter
    double rr;     // squared circumradius
    bool alive = true;
};

Tri make_tri(const std::vector<Vec2>& pts, int a, int b, int c)
{
    Tri t;
    t.v = {a, b, c};
    const Vec2 A = pts[static_cast<std::size_t>(a)];
    const Vec2 B = pts[static_cast<std::size_t>(b)];
    const Vec2 C = pts[static_cast<std::size_t>(c)];
    const double d = 2.0 * cross2(B - A, C - A);
    const double b2 = (B - A).squaredNorm();
    const double c2 = (C - A).squaredNorm();
    t.cc = A + Vec2(( (C - A).y() * b2 - (B - A).y() * c2) / d,
                    ( (B - A).x() * c2 - (C - A).x() * b2) / d);
    t.rr = (A - t.cc).squaredNorm();
    return t;
}

}  // namespace

SurfaceMesh random_delaunay_mesh(int m, unsigned seed)
{
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> jitter(-0.32, 0.32);

    std::vector<Vec2> pts;
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < m; ++i) {
            const bool edge_i = (i == 0 || i == m - 1);
            const bool edge_j = (j == 0 || j == m - 1);
            const double dx = edge_i ? 0.0 : jitter(rng);
            const double dy = edge_j ? 0.0 : jitter(rng);
            pts.emplace_back((i + dx) / (m - 1.0), (j + dy) / (m - 1.0));
        }
    }

    // Super-triangle enclosing everything.
    const int n = static_cast<int>(pts.size());
    pts.emplace_back(-20.0, -20.0);
    pts.emplace_back(40.0, -20.0);
    pts.emplace_back(0.5, 40.0);

    std::vector<Tri> tris{make_tri(pts, n, n + 1, n + 2)};
    for (int p = 0; p < n; ++p) {
        // Cavity: triangles whose circumcircle contains the point.
        std::map<std::array<int, 2>, int> boundary;
        for (auto& t : tris) {
            if (!t.alive)
                continue;
            if ((pts[static_cast<std::size_t>(p)] - t.cc).squaredNorm() < t.rr) {
                t.alive = false;
                for (int k = 0; k < 3; ++k) {
                    int a = t.v[static_cast<std::size_t>(k)];
                    int b = t.v[static_cast<std::size_t>((k + 1) % 3)];
                    if (a > b)
                        std::swap(a, b);
                    ++boundary[{a, b}];
                }
            }
        }
        for (const auto& [e, count] : boundary) {
            if (count != 1)
                continue;  // interior cavity edge
            Tri t = make_tri(pts, e[0], e[1], p);
            if (cross2(pts[static_cast<std::size_t>(e[1])] - pts[static_cast<std::size_t>(e[0])],
                       pts[static_cast<std::size_t>(p)] - pts[static_cast<std::size_t>(e[0])]) < 0.0)
                std::swap(t.v[0], t.v[1]);
            tris.push_back(t);
        }
    }

    std::vector<std::array<int, 3>> facets;
    for (const auto& t : tris) {
        if (!t.alive)
            continue;
        if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n)
            continue;  // touches the super-triangle
        facets.push_back(t.v);
    }
    pts.resize(static_cast<std::size_t>(n));
    return build_complex(std::move(pts), std::move(facets));
}

SurfaceMesh random_affine_distortion(const SurfaceMesh& mesh, unsigned seed)
{
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-0.7, 0.7);
    Eigen::Matrix2d A;
    do {
        A << 1.0 + u(rng), u(rng), u(rng), 1.0 + u(rng);
    } while (A.determinant() < 0.25);
    const Vec2 shift(u(rng), u(rng));
    std::vector<Vec2> coords = mesh.node_coords;
    for (Vec2& p : coords)
        p = A * p + shift;
    return build_complex(std::move(coords), mesh.facets);
}

}  // namespace bcm::testing
