// Copyright (c) 2026 the bcmortar authors
// SPDX-License-Identifier: Apache-2.0

#include "bcm/mesh.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace bcm {

namespace {

[[noreturn]] void fail(const std::string& msg)
{
    throw std::runtime_error(msg);
}

std::array<int, 2> sorted_pair(int a, int b)
{
    return a < b ? std::array<int, 2>{a, b} : std::array<int, 2>{b, a};
}

}  // namespace

int SurfaceMesh::num_cells(int dim) const
{
    switch (dim) {
        case 0: return num_nodes();
        case 1: return num_edges();
        case 2: return num_facets();
        default: fail("num_cells: dimension must be 0, 1 or 2");
    }
}

double SurfaceMesh::total_area() const
{
    double a = 0.0;
    for (double fa : facet_areas)
        a += fa;
    return a;
}

double SurfaceMesh::edge_length(int e) const
{
    const auto& ep = edges[static_cast<std::size_t>(e)];
    return (node_coords[static_cast<std::size_t>(ep[1])] - node_coords[static_cast<std::size_t>(ep[0])]).norm();
}

double SurfaceMesh::max_edge_length() const
{
    double h = 0.0;
    for (int e = 0; e < num_edges(); ++e)
        h = std::max(h, edge_length(e));
    return h;
}

std::array<Vec2, 3> SurfaceMesh::facet_points(int f) const
{
    const auto& fn = facets[static_cast<std::size_t>(f)];
    return {node_coords[static_cast<std::size_t>(fn[0])],
            node_coords[static_cast<std::size_t>(fn[1])],
            node_coords[static_cast<std::size_t>(fn[2])]};
}

Vec2 SurfaceMesh::facet_centroid(int f) const
{
    auto p = facet_points(f);
    return (p[0] + p[1] + p[2]) / 3.0;
}

int SurfaceMesh::edge_index(int a, int b) const
{
    auto key = sorted_pair(a, b);
    auto it = std::lower_bound(edges.begin(), edges.end(), key);
    if (it == edges.end() || *it != key)
        return -1;
    return static_cast<int>(it - edges.begin());
}

std::vector<int> SurfaceMesh::node_facet_valence() const
{
    std::vector<int> valence(static_cast<std::size_t>(num_nodes()), 0);
    for (const auto& fn : facets)
        for (int n : fn)
            ++valence[static_cast<std::size_t>(n)];
    return valence;
}

SurfaceMesh build_complex(std::vector<Vec2> node_coords,
                          std::vector<std::array<int, 3>> facet_nodes)
{
    SurfaceMesh m;
    m.node_coords = std::move(node_coords);
    m.facets = std::move(facet_nodes);

    const int nn = m.num_nodes();
    const int nf = m.num_facets();

    // Validate facets, normalize to counterclockwise order.
    m.facet_areas.resize(static_cast<std::size_t>(nf));
    std::map<std::array<int, 3>, int> seen;
    for (int f = 0; f < nf; ++f) {
        auto& fn = m.facets[static_cast<std::size_t>(f)];
        for (int n : fn)
            if (n < 0 || n >= nn)
                fail("build_complex: facet " + std::to_string(f) + " references invalid node " + std::to_string(n));
        if (fn[0] == fn[1] || fn[1] == fn[2] || fn[0] == fn[2])
            fail("build_complex: facet " + std::to_string(f) + " has a repeated node");

        double area = triangle_area(m.node_coords[static_cast<std::size_t>(fn[0])],
                                    m.node_coords[static_cast<std::size_t>(fn[1])],
                                    m.node_coords[static_cast<std::size_t>(fn[2])]);
        if (area < 0.0) {
            std::swap(fn[1], fn[2]);
            area = -area;
        }
        if (!(area > 0.0))
            fail("build_complex: degenerate (zero-area) triangle at facet " + std::to_string(f));
        m.facet_areas[static_cast<std::size_t>(f)] = area;

        std::array<int, 3> key = fn;
        std::sort(key.begin(), key.end());
        auto [it, inserted] = seen.emplace(key, f);
        if (!inserted)
            fail("build_complex: duplicate facet " + std::to_string(f) + " (same nodes as facet " + std::to_string(it->second) + ")");
    }

    // Enumerate edges: sorted endpoint pairs, lexicographic order.
    std::vector<std::array<int, 2>> all_sides;
    all_sides.reserve(static_cast<std::size_t>(3 * nf));
    for (const auto& fn : m.facets) {
        all_sides.push_back(sorted_pair(fn[0], fn[1]));
        all_sides.push_back(sorted_pair(fn[1], fn[2]));
        all_sides.push_back(sorted_pair(fn[2], fn[0]));
    }
    std::sort(all_sides.begin(), all_sides.end());
    all_sides.erase(std::unique(all_sides.begin(), all_sides.end()), all_sides.end());
    m.edges = std::move(all_sides);
    const int ne = m.num_edges();

    // Facet->edge incidence with signs; edge->facet back-links.
    m.facet_edges.resize(static_cast<std::size_t>(nf));
    m.facet_edge_signs.resize(static_cast<std::size_t>(nf));
    m.edge_facets.assign(static_cast<std::size_t>(ne), {-1, -1});
    std::vector<int> edge_use(static_cast<std::size_t>(ne), 0);
    for (int f = 0; f < nf; ++f) {
        const auto& fn = m.facets[static_cast<std::size_t>(f)];
        for (int k = 0; k < 3; ++k) {
            const int u = fn[static_cast<std::size_t>(k)];
            const int v = fn[static_cast<std::size_t>((k + 1) % 3)];
            const int e = m.edge_index(u, v);
            const int sign = (u < v) ? +1 : -1;
            m.facet_edges[static_cast<std::size_t>(f)][static_cast<std::size_t>(k)] = e;
            m.facet_edge_signs[static_cast<std::size_t>(f)][static_cast<std::size_t>(k)] = sign;
            ++edge_use[static_cast<std::size_t>(e)];
            if (edge_use[static_cast<std::size_t>(e)] > 2)
                fail("build_complex: non-manifold edge (" + std::to_string(m.edges[static_cast<std::size_t>(e)][0]) + "," +
                     std::to_string(m.edges[static_cast<std::size_t>(e)][1]) + ") shared by more than two facets");
            auto& ef = m.edge_facets[static_cast<std::size_t>(e)];
            const int slot = (sign > 0) ? 0 : 1;
            if (ef[static_cast<std::size_t>(slot)] != -1)
                fail("build_complex: inconsistent orientation across edge (" +
                     std::to_string(m.edges[static_cast<std::size_t>(e)][0]) + "," +
                     std::to_string(m.edges[static_cast<std::size_t>(e)][1]) + ") between facets " +
                     std::to_string(ef[static_cast<std::size_t>(slot)]) + " and " + std::to_string(f));
            ef[static_cast<std::size_t>(slot)] = f;
        }
    }

    // Boundary flags.
    m.edge_on_boundary.assign(static_cast<std::size_t>(ne), 0);
    m.node_on_boundary.assign(static_cast<std::size_t>(nn), 0);
    for (int e = 0; e < ne; ++e) {
        if (edge_use[static_cast<std::size_t>(e)] == 1) {
            m.edge_on_boundary[static_cast<std::size_t>(e)] = 1;
            m.node_on_boundary[static_cast<std::size_t>(m.edges[static_cast<std::size_t>(e)][0])] = 1;
            m.node_on_boundary[static_cast<std::size_t>(m.edges[static_cast<std::size_t>(e)][1])] = 1;
        }
    }

    // Incidence matrices.
    {
        std::vector<Eigen::Triplet<int>> t0;
        t0.reserve(static_cast<std::size_t>(2 * ne));
        for (int e = 0; e < ne; ++e) {
            t0.emplace_back(m.edges[static_cast<std::size_t>(e)][0], e, -1);
            t0.emplace_back(m.edges[static_cast<std::size_t>(e)][1], e, +1);
        }
        m.D0.resize(nn, ne);
        m.D0.setFromTriplets(t0.begin(), t0.end());

        std::vector<Eigen::Triplet<int>> t1;
        t1.reserve(static_cast<std::size_t>(3 * nf));
        for (int f = 0; f < nf; ++f)
            for (int k = 0; k < 3; ++k)
                t1.emplace_back(m.facet_edges[static_cast<std::size_t>(f)][static_cast<std::size_t>(k)],
                                f,
                                m.facet_edge_signs[static_cast<std::size_t>(f)][static_cast<std::size_t>(k)]);
        m.D1.resize(ne, nf);
        m.D1.setFromTriplets(t1.begin(), t1.end());
    }

    // d.d = 0 must hold exactly in integer arithmetic.
    Eigen::SparseMatrix<int> dd = m.D0 * m.D1;
    dd.prune(0);
    if (dd.nonZeros() != 0)
        fail("build_complex: incidence defect, D0*D1 != 0");

    return m;
}

SurfaceMesh refine_uniform(const SurfaceMesh& mesh)
{
    std::vector<Vec2> coords = mesh.node_coords;
    coords.reserve(coords.size() + mesh.edges.size());
    for (const auto& e : mesh.edges)
        coords.push_back(0.5 * (mesh.node_coords[static_cast<std::size_t>(e[0])] + mesh.node_coords[static_cast<std::size_t>(e[1])]));

    const int n = mesh.num_nodes();
    std::vector<std::array<int, 3>> facets;
    facets.reserve(static_cast<std::size_t>(4 * mesh.num_facets()));
    for (int f = 0; f < mesh.num_facets(); ++f) {
        const auto& fn = mesh.facets[static_cast<std::size_t>(f)];
        const int mab = n + mesh.edge_index(fn[0], fn[1]);
        const int mbc = n + mesh.edge_index(fn[1], fn[2]);
        const int mca = n + mesh.edge_index(fn[2], fn[0]);
        facets.push_back({fn[0], mab, mca});
        facets.push_back({mab, fn[1], mbc});
        facets.push_back({mca, mbc, fn[2]});
        facets.push_back({mab, mbc, mca});
    }
    return build_complex(std::move(coords), std::move(facets));
}

BarycentricRefinement refine_barycentric(const SurfaceMesh& mesh)
{
    BarycentricRefinement r;
    r.primal_nodes = mesh.num_nodes();
    r.primal_edges = mesh.num_edges();
    r.primal_facets = mesh.num_facets();

    std::vector<Vec2> coords = mesh.node_coords;
    coords.reserve(coords.size() + mesh.edges.size() + mesh.facets.size());
    for (const auto& e : mesh.edges)
        coords.push_back(0.5 * (mesh.node_coords[static_cast<std::size_t>(e[0])] + mesh.node_coords[static_cast<std::size_t>(e[1])]));
    for (int f = 0; f < mesh.num_facets(); ++f) {
        auto p = mesh.facet_points(f);
        coords.push_back((p[0] + p[1] + p[2]) / 3.0);
    }

    // Six sub-triangles per facet, walking the boundary cycle.
    std::vector<std::array<int, 3>> facets;
    facets.reserve(static_cast<std::size_t>(6 * mesh.num_facets()));
    for (int f = 0; f < mesh.num_facets(); ++f) {
        const auto& fn = mesh.facets[static_cast<std::size_t>(f)];
        const int g = mesh.num_nodes() + mesh.num_edges() + f;
        for (int k = 0; k < 3; ++k) {
            const int a = fn[static_cast<std::size_t>(k)];
            const int b = fn[static_cast<std::size_t>((k + 1) % 3)];
            const int mid = mesh.num_nodes() + mesh.edge_index(a, b);
            facets.push_back({a, mid, g});
            facets.push_back({mid, b, g});
        }
    }

    r.refined = build_complex(std::move(coords), std::move(facets));

    if (r.refined.num_nodes() != r.primal_nodes + r.primal_edges + r.primal_facets ||
        r.refined.num_edges() != 2 * r.primal_edges + 6 * r.primal_facets ||
        r.refined.num_facets() != 6 * r.primal_facets)
        fail("refine_barycentric: refined cell counts are off");

    // Parent maps.
    r.node_parent.resize(static_cast<std::size_t>(r.refined.num_nodes()));
    for (int i = 0; i < r.primal_nodes; ++i)
        r.node_parent[static_cast<std::size_t>(i)] = {ParentKind::Node, i};
    for (int e = 0; e < r.primal_edges; ++e)
        r.node_parent[static_cast<std::size_t>(r.primal_nodes + e)] = {ParentKind::Edge, e};
    for (int f = 0; f < r.primal_facets; ++f)
        r.node_parent[static_cast<std::size_t>(r.primal_nodes + r.primal_edges + f)] = {ParentKind::Facet, f};

    r.facet_parent.resize(static_cast<std::size_t>(r.refined.num_facets()));
    for (int rf = 0; rf < r.refined.num_facets(); ++rf) {
        int parent = -1;
        for (int nidx : r.refined.facets[static_cast<std::size_t>(rf)])
            if (r.node_parent[static_cast<std::size_t>(nidx)].kind == ParentKind::Facet)
                parent = r.node_parent[static_cast<std::size_t>(nidx)].id;
        if (parent < 0)
            fail("refine_barycentric: refined facet " + std::to_string(rf) + " has no barycenter vertex");
        r.facet_parent[static_cast<std::size_t>(rf)] = parent;
    }

    r.edge_parent.resize(static_cast<std::size_t>(r.refined.num_edges()));
    for (int re = 0; re < r.refined.num_edges(); ++re) {
        const auto& ep = r.refined.edges[static_cast<std::size_t>(re)];
        const ParentRef pa = r.node_parent[static_cast<std::size_t>(ep[0])];
        const ParentRef pb = r.node_parent[static_cast<std::size_t>(ep[1])];
        // Halves of a primal edge join an original node with the edge midpoint;
        // everything else is interior to a primal facet.
        if (pa.kind == ParentKind::Node && pb.kind == ParentKind::Edge) {
            r.edge_parent[static_cast<std::size_t>(re)] = {ParentKind::Edge, pb.id};
        } else if (pb.kind == ParentKind::Facet) {
            r.edge_parent[static_cast<std::size_t>(re)] = {ParentKind::Facet, pb.id};
        } else {
            fail("refine_barycentric: unexpected refined edge " + std::to_string(re));
        }
    }

    return r;
}

DualMesh build_dual(const SurfaceMesh& primal, const BarycentricRefinement& ref)
{
    DualMesh dual;
    const SurfaceMesh& fine = ref.refined;

    // Dual nodes: the barycenter of each primal facet, orientation +1.
    {
        std::vector<Eigen::Triplet<int>> trip;
        dual.n0.resize(primal.num_facets());
        for (int f = 0; f < primal.num_facets(); ++f) {
            trip.emplace_back(f, ref.barycenter_node(f), +1);
            dual.n0(f) = 1;
        }
        dual.C0.resize(primal.num_facets(), fine.num_nodes());
        dual.C0.setFromTriplets(trip.begin(), trip.end());
    }

    // Dual edges: for primal edge s, the path barycenter(f+) -> midpoint(s)
    // -> barycenter(f-), where f+/f- are the facets with D1 = +1/-1. This
    // realizes the convention that (star s, s) is positively oriented. At the
    // boundary the missing half is dropped (truncated dual mesh).
    {
        std::vector<Eigen::Triplet<int>> trip;
        dual.n1.resize(primal.num_edges());
        for (int e = 0; e < primal.num_edges(); ++e) {
            const int mid = ref.midpoint_node(e);
            const int fpos = primal.edge_facets[static_cast<std::size_t>(e)][0];
            const int fneg = primal.edge_facets[static_cast<std::size_t>(e)][1];
            int count = 0;
            if (fpos >= 0) {
                const int re = fine.edge_index(mid, ref.barycenter_node(fpos));
                if (re < 0)
                    fail("build_dual: missing refined edge for dual chain of edge " + std::to_string(e));
                trip.emplace_back(e, re, -1);  // traversed barycenter -> midpoint
                ++count;
            }
            if (fneg >= 0) {
                const int re = fine.edge_index(mid, ref.barycenter_node(fneg));
                if (re < 0)
                    fail("build_dual: missing refined edge for dual chain of edge " + std::to_string(e));
                trip.emplace_back(e, re, +1);  // traversed midpoint -> barycenter
                ++count;
            }
            if (count == 0)
                fail("build_dual: primal edge " + std::to_string(e) + " has no incident facet");
            dual.n1(e) = count;
        }
        dual.C1.resize(primal.num_edges(), fine.num_edges());
        dual.C1.setFromTriplets(trip.begin(), trip.end());
    }

    // Dual facets: the refined triangles around each primal node, all +1
    // (counterclockwise facets inherit the orientation of the interface).
    {
        std::vector<Eigen::Triplet<int>> trip;
        dual.n2.setZero(primal.num_nodes());
        for (int rf = 0; rf < fine.num_facets(); ++rf) {
            for (int nidx : fine.facets[static_cast<std::size_t>(rf)]) {
                if (ref.node_parent[static_cast<std::size_t>(nidx)].kind == ParentKind::Node) {
                    const int pn = ref.node_parent[static_cast<std::size_t>(nidx)].id;
                    trip.emplace_back(pn, rf, +1);
                    ++dual.n2(pn);
                }
            }
        }
        dual.C2.resize(primal.num_nodes(), fine.num_facets());
        dual.C2.setFromTriplets(trip.begin(), trip.end());
    }

    // Boundary chain identity on dual edges: the chain boundary restricted to
    // barycenter nodes must equal -D1 row by row. A failure here indicates an
    // incidence or orientation defect.
    {
        Eigen::SparseMatrix<int> bnd = dual.C1 * Eigen::SparseMatrix<int>(fine.D0.transpose());
        Eigen::SparseMatrix<int> pick_barycenters(fine.num_nodes(), primal.num_facets());
        {
            std::vector<Eigen::Triplet<int>> trip;
            for (int f = 0; f < primal.num_facets(); ++f)
                trip.emplace_back(ref.barycenter_node(f), f, 1);
            pick_barycenters.setFromTriplets(trip.begin(), trip.end());
        }
        Eigen::SparseMatrix<int> defect = bnd * pick_barycenters + primal.D1;
        defect.prune(0);
        if (defect.nonZeros() != 0)
            fail("build_dual: orientation inconsistency in the dual edge chains");
    }

    return dual;
}

namespace {

void write_mesh_impl(std::ostream& out, const SurfaceMesh& m)
{
    char buf[128];
    out << m.num_nodes() << ' ' << m.num_edges() << ' ' << m.num_facets() << '\n';
    for (const auto& p : m.node_coords) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g", p.x(), p.y());
        out << buf << '\n';
    }
    for (const auto& e : m.edges)
        out << e[0] << ' ' << e[1] << '\n';
    for (const auto& f : m.facets)
        out << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

}  // namespace

void write_mesh(std::ostream& out, const SurfaceMesh& mesh)
{
    write_mesh_impl(out, mesh);
}

void write_mesh_file(const std::string& path, const SurfaceMesh& mesh)
{
    std::ofstream out(path);
    if (!out)
        fail("write_mesh_file: cannot open " + path);
    write_mesh_impl(out, mesh);
}

SurfaceMesh read_mesh(std::istream& in)
{
    int nn = 0, ne = 0, nf = 0;
    if (!(in >> nn >> ne >> nf))
        fail("read_mesh: bad header, expected 'N E F'");
    if (nn < 3 || nf < 1 || ne < 0)
        fail("read_mesh: implausible cell counts in header");

    std::vector<Vec2> coords(static_cast<std::size_t>(nn));
    for (int i = 0; i < nn; ++i)
        if (!(in >> coords[static_cast<std::size_t>(i)].x() >> coords[static_cast<std::size_t>(i)].y()))
            fail("read_mesh: bad coordinate line " + std::to_string(i));

    std::vector<std::array<int, 2>> listed_edges(static_cast<std::size_t>(ne));
    for (int e = 0; e < ne; ++e)
        if (!(in >> listed_edges[static_cast<std::size_t>(e)][0] >> listed_edges[static_cast<std::size_t>(e)][1]))
            fail("read_mesh: bad edge line " + std::to_string(e));

    std::vector<std::array<int, 3>> facets(static_cast<std::size_t>(nf));
    for (int f = 0; f < nf; ++f)
        if (!(in >> facets[static_cast<std::size_t>(f)][0] >> facets[static_cast<std::size_t>(f)][1] >> facets[static_cast<std::size_t>(f)][2]))
            fail("read_mesh: bad facet line " + std::to_string(f));

    SurfaceMesh m = build_complex(std::move(coords), std::move(facets));
    if (ne > 0) {
        if (m.num_edges() != ne)
            fail("read_mesh: header lists " + std::to_string(ne) + " edges, derived " + std::to_string(m.num_edges()));
        for (int e = 0; e < ne; ++e) {
            auto want = sorted_pair(listed_edges[static_cast<std::size_t>(e)][0], listed_edges[static_cast<std::size_t>(e)][1]);
            if (m.edges[static_cast<std::size_t>(e)] != want)
                fail("read_mesh: edge line " + std::to_string(e) + " does not match the derived edge set");
        }
    }
    return m;
}

SurfaceMesh read_mesh_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        fail("read_mesh_file: cannot open " + path);
    return read_mesh(in);
}

}  // namespace bcm
