// Copyright (c) 2026 the bcmortar authors
// SPDX-License-Identifier: Apache-2.0

#include "bcm/bc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

namespace bcm {

namespace {

constexpr double kConsistencyTol = 1e-12;

bool contains(const std::vector<int>& sorted, int x)
{
    return std::binary_search(sorted.begin(), sorted.end(), x);
}

std::vector<int> merge_sorted(std::initializer_list<const std::vector<int>*> lists)
{
    std::vector<int> out;
    for (const auto* l : lists)
        out.insert(out.end(), l->begin(), l->end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

struct SweepValue {
    double value = 0.0;
    bool set = false;
};

}  // namespace

SupportSets support_sets(const SurfaceMesh& primal, const DualMesh& dual)
{
    SupportSets s;
    s.u2.resize(static_cast<std::size_t>(primal.num_nodes()));
    for (int n = 0; n < primal.num_nodes(); ++n) {
        auto& u = s.u2[static_cast<std::size_t>(n)];
        for (Eigen::SparseMatrix<int, Eigen::RowMajor>::InnerIterator it(dual.C2, n); it; ++it)
            u.push_back(static_cast<int>(it.col()));
        std::sort(u.begin(), u.end());
    }

    s.u1.resize(static_cast<std::size_t>(primal.num_edges()));
    for (int e = 0; e < primal.num_edges(); ++e) {
        const auto& ep = primal.edges[static_cast<std::size_t>(e)];
        s.u1[static_cast<std::size_t>(e)] =
            merge_sorted({&s.u2[static_cast<std::size_t>(ep[0])], &s.u2[static_cast<std::size_t>(ep[1])]});
    }

    s.u0.resize(static_cast<std::size_t>(primal.num_facets()));
    for (int f = 0; f < primal.num_facets(); ++f) {
        const auto& fn = primal.facets[static_cast<std::size_t>(f)];
        s.u0[static_cast<std::size_t>(f)] = merge_sorted({&s.u2[static_cast<std::size_t>(fn[0])],
                                                          &s.u2[static_cast<std::size_t>(fn[1])],
                                                          &s.u2[static_cast<std::size_t>(fn[2])]});
    }
    return s;
}

Eigen::SparseMatrix<double, Eigen::RowMajor> build_bc_2forms(const DualMesh& dual)
{
    std::vector<Eigen::Triplet<double>> trip;
    for (int v = 0; v < dual.C2.rows(); ++v)
        for (Eigen::SparseMatrix<int, Eigen::RowMajor>::InnerIterator it(dual.C2, v); it; ++it)
            trip.emplace_back(v, static_cast<int>(it.col()), static_cast<double>(it.value()) / dual.n2(v));
    Eigen::SparseMatrix<double, Eigen::RowMajor> R2(dual.C2.rows(), dual.C2.cols());
    R2.setFromTriplets(trip.begin(), trip.end());
    return R2;
}

Eigen::SparseMatrix<double, Eigen::RowMajor> build_bc_1forms(
    const SurfaceMesh& primal, const BarycentricRefinement& ref, const DualMesh& dual,
    const Eigen::SparseMatrix<double, Eigen::RowMajor>& R2, const SupportSets& supports,
    BCVariant variant)
{
    (void)variant;  // the vertex-end pin below covers both variants
    const SurfaceMesh& fine = ref.refined;
    std::vector<Eigen::Triplet<double>> trip;

    for (int t = 0; t < primal.num_edges(); ++t) {
        const int na = primal.edges[static_cast<std::size_t>(t)][0];
        const int nb = primal.edges[static_cast<std::size_t>(t)][1];
        const auto& U = supports.u1[static_cast<std::size_t>(t)];

        // Local refined edge table over the support.
        std::unordered_map<int, int> edge_local;
        std::vector<int> edge_global;
        std::vector<int> edge_use(64, 0);
        for (int zf : U) {
            for (int k = 0; k < 3; ++k) {
                const int e = fine.facet_edges[static_cast<std::size_t>(zf)][static_cast<std::size_t>(k)];
                auto [it, inserted] = edge_local.try_emplace(e, static_cast<int>(edge_global.size()));
                if (inserted) {
                    edge_global.push_back(e);
                    if (edge_use.size() < edge_global.size())
                        edge_use.resize(2 * edge_global.size(), 0);
                }
                ++edge_use[static_cast<std::size_t>(it->second)];
            }
        }

        std::vector<SweepValue> val(edge_global.size());
        for (std::size_t le = 0; le < edge_global.size(); ++le) {
            const int e = edge_global[le];
            const bool interior =
                edge_use[le] == 2 && !fine.edge_on_boundary[static_cast<std::size_t>(e)];
            if (!interior)
                val[le] = {0.0, true};  // zero trace on the support boundary
        }
        for (Eigen::SparseMatrix<int, Eigen::RowMajor>::InnerIterator it(dual.C1, t); it; ++it) {
            const int le = edge_local.at(static_cast<int>(it.col()));
            val[static_cast<std::size_t>(le)] = {static_cast<double>(it.value()) / dual.n1(t), true};
        }
        // Stability rule on the refined halves of t. A half joins an original
        // vertex to the midpoint of t; it is pinned to zero exactly when that
        // vertex is an interior vertex. On a closed interface this is the
        // plain rule (both halves); at the boundary it releases only the
        // boundary-side half, which removes the discrete gradient that the
        // recursion alone leaves free around the interior endpoint.
        for (const auto& [e, le] : edge_local) {
            if (ref.edge_parent[static_cast<std::size_t>(e)].kind != ParentKind::Edge ||
                ref.edge_parent[static_cast<std::size_t>(e)].id != t)
                continue;
            const int vertex_end = fine.edges[static_cast<std::size_t>(e)][0];  // original node < midpoint id
            if (!primal.node_on_boundary[static_cast<std::size_t>(vertex_end)])
                val[static_cast<std::size_t>(le)] = {0.0, true};
        }

        // Right-hand side of the recursion: each refined facet lies in the
        // support of exactly one of the two endpoint 2-forms.
        std::unordered_map<int, double> r2_tail, r2_head;
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(R2, na); it; ++it)
            r2_tail.emplace(static_cast<int>(it.col()), it.value());
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(R2, nb); it; ++it)
            r2_head.emplace(static_cast<int>(it.col()), it.value());
        auto rhs_of = [&](int zf) {
            double rhs = 0.0;
            if (auto it = r2_tail.find(zf); it != r2_tail.end())
                rhs -= it->second;  // D0(tail, t) = -1
            if (auto it = r2_head.find(zf); it != r2_head.end())
                rhs += it->second;  // D0(head, t) = +1
            return rhs;
        };

        // Sweep: each pass solves every facet equation with one remaining
        // unknown; this walks the rings around the two endpoint vertices
        // starting next to the known chain and boundary values.
        int remaining = 0;
        for (const auto& v : val)
            remaining += v.set ? 0 : 1;
        while (remaining > 0) {
            bool progress = false;
            for (int zf : U) {
                int unset_slot = -1;
                int unset_count = 0;
                for (int k = 0; k < 3; ++k) {
                    const int le = edge_local.at(fine.facet_edges[static_cast<std::size_t>(zf)][static_cast<std::size_t>(k)]);
                    if (!val[static_cast<std::size_t>(le)].set) {
                        ++unset_count;
                        unset_slot = k;
                    }
                }
                if (unset_count != 1)
                    continue;
                double c = -rhs_of(zf);
                int sign = 0;
                for (int k = 0; k < 3; ++k) {
                    const int le = edge_local.at(fine.facet_edges[static_cast<std::size_t>(zf)][static_cast<std::size_t>(k)]);
                    const int s = fine.facet_edge_signs[static_cast<std::size_t>(zf)][static_cast<std::size_t>(k)];
                    if (k == unset_slot)
                        sign = s;
                    else
                        c += s * val[static_cast<std::size_t>(le)].value;
                }
                const int le = edge_local.at(fine.facet_edges[static_cast<std::size_t>(zf)][static_cast<std::size_t>(unset_slot)]);
                val[static_cast<std::size_t>(le)] = {-c / sign, true};
                --remaining;
                progress = true;
            }
            if (!progress)
                throw std::runtime_error("build_bc_1forms: sweep stalled at dual edge " + std::to_string(t));
        }

        // Every facet equation must close, including the redundant ones.
        for (int zf : U) {
            double res = -rhs_of(zf);
            for (int k = 0; k < 3; ++k) {
                const int le = edge_local.at(fine.facet_edges[static_cast<std::size_t>(zf)][static_cast<std::size_t>(k)]);
                res += fine.facet_edge_signs[static_cast<std::size_t>(zf)][static_cast<std::size_t>(k)] *
                       val[static_cast<std::size_t>(le)].value;
            }
            if (std::abs(res) > kConsistencyTol)
                throw std::runtime_error("build_bc_1forms: inconsistent recursion at dual edge " + std::to_string(t));
        }

        for (std::size_t le = 0; le < edge_global.size(); ++le) {
            const int e = edge_global[le];
            const bool interior =
                edge_use[le] == 2 && !fine.edge_on_boundary[static_cast<std::size_t>(e)];
            if (interior && val[le].value != 0.0)
                trip.emplace_back(t, e, val[le].value);
        }
    }

    Eigen::SparseMatrix<double, Eigen::RowMajor> R1(primal.num_edges(), fine.num_edges());
    R1.setFromTriplets(trip.begin(), trip.end());
    return R1;
}

Eigen::SparseMatrix<double, Eigen::RowMajor> build_bc_0forms(
    const SurfaceMesh& primal, const BarycentricRefinement& ref, const DualMesh& dual,
    const Eigen::SparseMatrix<double, Eigen::RowMajor>& R1, const SupportSets& supports,
    BCVariant variant)
{
    (void)variant;  // the 0-form rule is the same in both variants
    const SurfaceMesh& fine = ref.refined;
    const std::vector<int> fine_valence = fine.node_facet_valence();
    std::vector<Eigen::Triplet<double>> trip;

    for (int t = 0; t < primal.num_facets(); ++t) {
        const auto& U = supports.u0[static_cast<std::size_t>(t)];

        // Local node and edge tables.
        std::unordered_map<int, int> node_local;
        std::vector<int> node_global;
        std::vector<int> node_use;
        std::unordered_map<int, int> edge_local;
        std::vector<int> edge_global;
        for (int zf : U) {
            for (int nidx : fine.facets[static_cast<std::size_t>(zf)]) {
                auto [it, inserted] = node_local.try_emplace(nidx, static_cast<int>(node_global.size()));
                if (inserted) {
                    node_global.push_back(nidx);
                    node_use.push_back(0);
                }
                ++node_use[static_cast<std::size_t>(it->second)];
            }
            for (int e : fine.facet_edges[static_cast<std::size_t>(zf)]) {
                auto [it, inserted] = edge_local.try_emplace(e, static_cast<int>(edge_global.size()));
                if (inserted)
                    edge_global.push_back(e);
                (void)it;
            }
        }

        std::vector<SweepValue> val(node_global.size());
        for (std::size_t ln = 0; ln < node_global.size(); ++ln) {
            const int n = node_global[ln];
            const bool interior = !fine.node_on_boundary[static_cast<std::size_t>(n)] &&
                                  node_use[ln] == fine_valence[static_cast<std::size_t>(n)];
            if (!interior)
                val[ln] = {0.0, true};
        }
        for (Eigen::SparseMatrix<int, Eigen::RowMajor>::InnerIterator it(dual.C0, t); it; ++it)
            val[static_cast<std::size_t>(node_local.at(static_cast<int>(it.col())))] =
                {static_cast<double>(it.value()) / dual.n0(t), true};

        // Difference equation per refined edge; each right-hand side sums
        // the (at most two) 1-form rows whose support contains the edge.
        std::array<std::unordered_map<int, double>, 3> r1_rows;
        for (int k = 0; k < 3; ++k) {
            const int s = primal.facet_edges[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)];
            for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(R1, s); it; ++it)
                r1_rows[static_cast<std::size_t>(k)].emplace(static_cast<int>(it.col()), it.value());
        }
        auto rhs_of = [&](int e) {
            double rhs = 0.0;
            for (int k = 0; k < 3; ++k) {
                const auto it = r1_rows[static_cast<std::size_t>(k)].find(e);
                if (it != r1_rows[static_cast<std::size_t>(k)].end())
                    rhs -= primal.facet_edge_signs[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)] * it->second;
            }
            return rhs;
        };

        // Tree propagation from the barycenter and the zero boundary ring.
        int remaining = 0;
        for (const auto& v : val)
            remaining += v.set ? 0 : 1;
        while (remaining > 0) {
            bool progress = false;
            for (int e : edge_global) {
                const int lh = node_local.at(fine.edges[static_cast<std::size_t>(e)][1]);
                const int lt = node_local.at(fine.edges[static_cast<std::size_t>(e)][0]);
                SweepValue& vh = val[static_cast<std::size_t>(lh)];
                SweepValue& vt = val[static_cast<std::size_t>(lt)];
                if (vh.set == vt.set)
                    continue;
                const double rhs = rhs_of(e);
                if (vt.set) {
                    vh = {vt.value + rhs, true};
                } else {
                    vt = {vh.value - rhs, true};
                }
                --remaining;
                progress = true;
            }
            if (!progress)
                throw std::runtime_error("build_bc_0forms: unreachable node in support of dual node " + std::to_string(t));
        }

        // Cotree and boundary edges double as consistency checks.
        for (int e : edge_global) {
            const double vh = val[static_cast<std::size_t>(node_local.at(fine.edges[static_cast<std::size_t>(e)][1]))].value;
            const double vt = val[static_cast<std::size_t>(node_local.at(fine.edges[static_cast<std::size_t>(e)][0]))].value;
            if (std::abs(vh - vt - rhs_of(e)) > kConsistencyTol)
                throw std::runtime_error("build_bc_0forms: inconsistent cotree edge " + std::to_string(e) +
                                         " for dual node " + std::to_string(t));
        }

        for (std::size_t ln = 0; ln < node_global.size(); ++ln)
            if (val[ln].value != 0.0)
                trip.emplace_back(t, node_global[ln], val[ln].value);
    }

    Eigen::SparseMatrix<double, Eigen::RowMajor> R0(primal.num_facets(), fine.num_nodes());
    R0.setFromTriplets(trip.begin(), trip.end());
    return R0;
}

BCBasis build_bc(const SurfaceMesh& primal, const BarycentricRefinement& ref,
                 const DualMesh& dual, BCVariant variant)
{
    if (variant == BCVariant::Closed)
        for (auto flag : primal.edge_on_boundary)
            if (flag)
                throw std::runtime_error("build_bc: closed-interface variant requires a mesh without boundary");

    BCBasis basis;
    basis.variant = variant;
    basis.supports = support_sets(primal, dual);
    basis.R2 = build_bc_2forms(dual);
    basis.R1 = build_bc_1forms(primal, ref, dual, basis.R2, basis.supports, variant);
    basis.R0 = build_bc_0forms(primal, ref, dual, basis.R1, basis.supports, variant);
    return basis;
}

FormValue eval_bc_form(const BCBasis& basis, const BarycentricRefinement& ref,
                       int q, int dual_cell, int refined_facet, const Vec2& p)
{
    const SurfaceMesh& fine = ref.refined;
    const auto& supports = (q == 0) ? basis.supports.u0 : (q == 1) ? basis.supports.u1 : basis.supports.u2;
    FormValue out;
    if (!contains(supports[static_cast<std::size_t>(dual_cell)], refined_facet))
        return out;

    const Eigen::SparseMatrix<double, Eigen::RowMajor>& R = (q == 0) ? basis.R0 : (q == 1) ? basis.R1 : basis.R2;
    auto coeff = [&R, dual_cell](int col) {
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(R, dual_cell); it; ++it)
            if (static_cast<int>(it.col()) == col)
                return it.value();
        return 0.0;
    };

    switch (q) {
        case 0: {
            const auto vals = whitney0_values(fine, refined_facet, p);
            const auto& fn = fine.facets[static_cast<std::size_t>(refined_facet)];
            for (int k = 0; k < 3; ++k)
                out.a += coeff(fn[static_cast<std::size_t>(k)]) * vals[static_cast<std::size_t>(k)];
            break;
        }
        case 1: {
            const auto vals = whitney1_values(fine, refined_facet, p);
            const auto& fe = fine.facet_edges[static_cast<std::size_t>(refined_facet)];
            Vec2 v = Vec2::Zero();
            for (int k = 0; k < 3; ++k)
                v += coeff(fe[static_cast<std::size_t>(k)]) * vals[static_cast<std::size_t>(k)];
            out.a = v.x();
            out.b = v.y();
            break;
        }
        case 2: {
            out.a = coeff(refined_facet) * whitney2_value(fine, refined_facet);
            break;
        }
        default:
            throw std::runtime_error("eval_bc_form: q must be 0, 1 or 2");
    }
    return out;
}

std::vector<std::vector<int>> invert_supports(const std::vector<std::vector<int>>& supports,
                                              int num_refined_facets)
{
    std::vector<std::vector<int>> rev(static_cast<std::size_t>(num_refined_facets));
    for (std::size_t v = 0; v < supports.size(); ++v)
        for (int f : supports[v])
            rev[static_cast<std::size_t>(f)].push_back(static_cast<int>(v));
    return rev;
}

void write_bc_matrices(std::ostream& out, const BCBasis& basis)
{
    char buf[96];
    const Eigen::SparseMatrix<double, Eigen::RowMajor>* mats[3] = {&basis.R0, &basis.R1, &basis.R2};
    for (int q = 0; q < 3; ++q) {
        for (int v = 0; v < mats[q]->rows(); ++v) {
            for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(*mats[q], v); it; ++it) {
                std::snprintf(buf, sizeof buf, "%d %d %ld %.17g", q, v, static_cast<long>(it.col()), it.value());
                out << buf << '\n';
            }
        }
    }
}

}  // namespace bcm
