// Copyright (c) 2026 the bcmortar authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "bcm/mesh.hpp"

namespace bcm {

/// One triangle of the common triangulation of two meshes, with the parent
/// facet in each mesh.
struct OverlayCell {
    std::array<Vec2, 3> v;
    int parent_a;
    int parent_b;
    double area;
};

struct Overlay {
    std::vector<OverlayCell> cells;
    double total_area = 0.0;
    double discarded_area = 0.0;  // slivers below tolerance, audited
};

/// Common triangulation of two triangulations of the same planar domain,
/// built by an advancing front over facet adjacency (seeded by point
/// location), so that the work grows linearly with the overlay size.
Overlay intersect_meshes(const SurfaceMesh& mesh_a, const SurfaceMesh& mesh_b);

struct PointLocation {
    int facet;
    Eigen::Vector3d bary;
};

/// Facet whose closure contains p; on shared edges or vertices any incident
/// facet may be returned. Throws if p lies outside the domain.
PointLocation locate_point(const SurfaceMesh& mesh, const Vec2& p, int hint = -1);

struct SubSegment {
    double t0, t1;  // parameters along [p0,p1]
    int facet;
};

/// Partition of the segment [p0,p1] into pieces each contained in one facet.
std::vector<SubSegment> clip_segment(const SurfaceMesh& mesh, const Vec2& p0, const Vec2& p1);

struct QuadPoint {
    Vec2 x;
    double w;
};

/// Symmetric triangle quadrature exact to the given polynomial degree
/// (2 or 4); the weights sum to the triangle area.
std::vector<QuadPoint> quad_points(const std::array<Vec2, 3>& tri, int degree);
std::vector<QuadPoint> quad_points(const SurfaceMesh& mesh, int facet, int degree);

void write_overlay(std::ostream& out, const Overlay& ov);

}  // namespace bcm
