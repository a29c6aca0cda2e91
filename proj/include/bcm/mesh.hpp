// Copyright (c) 2026 the bcmortar authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace bcm {

using Vec2 = Eigen::Vector2d;

inline double cross2(const Vec2& a, const Vec2& b)
{
    return a.x() * b.y() - a.y() * b.x();
}

/// Signed area of the triangle (a,b,c); positive for counterclockwise order.
inline double triangle_area(const Vec2& a, const Vec2& b, const Vec2& c)
{
    return 0.5 * cross2(b - a, c - a);
}

/// Oriented simplicial surface complex embedded in the plane.
///
/// Edges are stored with lexicographically sorted endpoints; the sorted pair
/// defines the intrinsic edge orientation (low index -> high index). Facets
/// are stored counterclockwise. D0 and D1 are the signed incidence matrices
/// of the coboundary: D0(n,e) = +1/-1 if node n is head/tail of edge e,
/// D1(e,f) = +1 if facet f traverses e along its intrinsic orientation.
struct SurfaceMesh {
    std::vector<Vec2> node_coords;
    std::vector<std::array<int, 2>> edges;
    std::vector<std::array<int, 3>> facets;

    // Derived connectivity.
    std::vector<std::array<int, 3>> facet_edges;       // edge id per facet side
    std::vector<std::array<int, 3>> facet_edge_signs;  // D1 sign per facet side
    std::vector<std::array<int, 2>> edge_facets;       // [0]: facet with D1=+1, [1]: with D1=-1; -1 if absent
    std::vector<std::uint8_t> node_on_boundary;
    std::vector<std::uint8_t> edge_on_boundary;
    std::vector<double> facet_areas;

    Eigen::SparseMatrix<int> D0;  // nodes x edges
    Eigen::SparseMatrix<int> D1;  // edges x facets

    int num_nodes() const { return static_cast<int>(node_coords.size()); }
    int num_edges() const { return static_cast<int>(edges.size()); }
    int num_facets() const { return static_cast<int>(facets.size()); }
    int num_cells(int dim) const;

    double facet_area(int f) const { return facet_areas[static_cast<std::size_t>(f)]; }
    double total_area() const;
    double edge_length(int e) const;
    double max_edge_length() const;

    std::array<Vec2, 3> facet_points(int f) const;
    Vec2 facet_centroid(int f) const;

    /// Index of the edge with sorted endpoints (a,b), or -1 if absent.
    int edge_index(int a, int b) const;

    /// Number of facets incident to each node.
    std::vector<int> node_facet_valence() const;
};

/// Builds the complex from coordinates and facet triples. Facets given
/// clockwise are reordered; degenerate triangles, duplicate facets and
/// non-manifold edges are rejected with a diagnostic naming the cell.
SurfaceMesh build_complex(std::vector<Vec2> node_coords,
                          std::vector<std::array<int, 3>> facet_nodes);

/// Splits every facet into four similar triangles at the edge midpoints.
/// Node order: original nodes first, then midpoints in edge order.
SurfaceMesh refine_uniform(const SurfaceMesh& mesh);

enum class ParentKind : std::uint8_t { Node, Edge, Facet };

struct ParentRef {
    ParentKind kind;
    int id;
};

/// Barycentric refinement: per facet, three midpoint nodes (shared), one
/// barycenter node and six sub-triangles, plus maps back to the primal cells.
struct BarycentricRefinement {
    SurfaceMesh refined;
    std::vector<ParentRef> node_parent;   // refined node -> primal cell it sits on
    std::vector<ParentRef> edge_parent;   // refined edge -> primal edge or facet containing it
    std::vector<int> facet_parent;        // refined facet -> primal facet

    int primal_nodes = 0;
    int primal_edges = 0;
    int primal_facets = 0;

    int midpoint_node(int primal_edge) const { return primal_nodes + primal_edge; }
    int barycenter_node(int primal_facet) const { return primal_nodes + primal_edges + primal_facet; }
};

BarycentricRefinement refine_barycentric(const SurfaceMesh& mesh);

/// Barycentric dual mesh, truncated at the boundary. Dual q-cells are in
/// one-to-one correspondence with primal (2-q)-cells (the star map); the
/// order of the dual cells is the order of their primal counterparts. Each
/// dual cell is stored as a signed chain of refined cells:
///   C0: dual nodes  over refined nodes  (one row per primal facet),
///   C1: dual edges  over refined edges  (one row per primal edge),
///   C2: dual facets over refined facets (one row per primal node).
/// Dual edges are directed so that (dual direction, primal direction) is a
/// positively oriented frame; dual facets carry +1 on every refined triangle.
struct DualMesh {
    Eigen::SparseMatrix<int, Eigen::RowMajor> C0, C1, C2;
    Eigen::VectorXi n0, n1, n2;  // chain length per dual cell
};

DualMesh build_dual(const SurfaceMesh& primal, const BarycentricRefinement& ref);

// Plain-text mesh format: "N E F" header (E may be 0 on input, meaning the
// edges are derived), N coordinate lines, E edge lines, F facet lines.
SurfaceMesh read_mesh(std::istream& in);
SurfaceMesh read_mesh_file(const std::string& path);
void write_mesh(std::ostream& out, const SurfaceMesh& mesh);
void write_mesh_file(const std::string& path, const SurfaceMesh& mesh);

}  // namespace bcm
