// Copyright (c) 2026 the bcmortar authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/SparseCore>

#include "bcm/forms.hpp"
#include "bcm/mesh.hpp"

namespace bcm {

/// ZeroBoundaryTrace is the boundary-truncated complex whose basis forms
/// vanish on the mesh boundary (the variant the coupling operators use);
/// Closed requires a mesh without boundary.
enum class BCVariant { Closed, ZeroBoundaryTrace };

/// Supports of the dual basis forms, as sets of refined facets per dual
/// cell. u2 is indexed by primal nodes, u1 by primal edges, u0 by primal
/// facets (the star-map ordering of the dual cells).
struct SupportSets {
    std::vector<std::vector<int>> u0, u1, u2;
};

SupportSets support_sets(const SurfaceMesh& primal, const DualMesh& dual);

/// Coefficient matrices placing the dual basis forms inside the refined
/// Whitney spaces: row = dual cell, column = refined cell of matching
/// dimension. All coefficients are rationals with small denominators.
struct BCBasis {
    BCVariant variant = BCVariant::ZeroBoundaryTrace;
    Eigen::SparseMatrix<double, Eigen::RowMajor> R0, R1, R2;
    SupportSets supports;
};

Eigen::SparseMatrix<double, Eigen::RowMajor> build_bc_2forms(const DualMesh& dual);

Eigen::SparseMatrix<double, Eigen::RowMajor> build_bc_1forms(
    const SurfaceMesh& primal, const BarycentricRefinement& ref, const DualMesh& dual,
    const Eigen::SparseMatrix<double, Eigen::RowMajor>& R2, const SupportSets& supports,
    BCVariant variant);

Eigen::SparseMatrix<double, Eigen::RowMajor> build_bc_0forms(
    const SurfaceMesh& primal, const BarycentricRefinement& ref, const DualMesh& dual,
    const Eigen::SparseMatrix<double, Eigen::RowMajor>& R1, const SupportSets& supports,
    BCVariant variant);

BCBasis build_bc(const SurfaceMesh& primal, const BarycentricRefinement& ref,
                 const DualMesh& dual, BCVariant variant);

/// Pointwise value of the dual basis q-form of the given dual cell on a
/// refined facet; zero outside its support.
FormValue eval_bc_form(const BCBasis& basis, const BarycentricRefinement& ref,
                       int q, int dual_cell, int refined_facet, const Vec2& p);

/// Reverse map: refined facet -> dual cells whose support contains it.
std::vector<std::vector<int>> invert_supports(const std::vector<std::vector<int>>& supports,
                                              int num_refined_facets);

/// Coordinate-format export: one line "q v w value" per stored coefficient.
void write_bc_matrices(std::ostream& out, const BCBasis& basis);

}  // namespace bcm
