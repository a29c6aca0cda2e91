// Copyright (c) 2026 the bcmortar authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <memory>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "bcm/bc.hpp"
#include "bcm/forms.hpp"
#include "bcm/mesh.hpp"
#include "bcm/overlay.hpp"

namespace bcm {

enum class Method { DeRham, Galerkin, BC };

const char* method_name(Method m);

/// A mesh with everything the coupling operators need: its barycentric
/// refinement, the truncated dual mesh, and the boundary-trace-free dual
/// basis. Meant to be heap-allocated and kept put while operators and
/// coefficient vectors reference it.
struct MeshComplex {
    SurfaceMesh mesh;
    BarycentricRefinement ref;
    DualMesh dual;
    BCBasis bc;
};

std::unique_ptr<MeshComplex> make_complex(SurfaceMesh mesh);

struct SolverSettings {
    double tol = 1e-12;
    int maxit = 200;
};

struct SolveStats {
    int iterations = 0;
    int iterations_to_1e6 = -1;  // first iteration with relative residual <= 1e-6
    double final_residual = 0.0;
    bool converged = false;
};

/// Mesh coupling operator w_target = Q w_source. Projection methods carry
/// the square own-pairing matrix and the rectangular cross-pairing matrix;
/// the interpolation method carries the overlay it needs for facet fluxes.
struct CouplingOperator {
    Method method = Method::BC;
    int degree = 0;
    const MeshComplex* source = nullptr;
    const MeshComplex* target = nullptr;
    Eigen::SparseMatrix<double> M_own;
    Eigen::SparseMatrix<double> M_cross;
    Overlay overlay_ts;  // deRham, degree 2 only
    SolverSettings solver;
};

Eigen::SparseMatrix<double> assemble_own_galerkin(const SurfaceMesh& target, int r);
Eigen::SparseMatrix<double> assemble_own_bc(const MeshComplex& target, int r);
Eigen::SparseMatrix<double> assemble_cross_galerkin(const SurfaceMesh& target, const SurfaceMesh& source,
                                                    int r, const Overlay& ov_ts);
Eigen::SparseMatrix<double> assemble_cross_bc(const MeshComplex& target, const SurfaceMesh& source,
                                              int r, const Overlay& ov_refined_ts);

CouplingOperator make_coupling_operator(Method method, int r, const MeshComplex& target,
                                        const MeshComplex& source, SolverSettings solver = {});

/// Conjugate-Gradient Squared with zero initial guess; stops at the relative
/// residual in the settings. Throws on breakdown or iteration overflow.
Eigen::VectorXd solve_cgs(const Eigen::SparseMatrix<double>& M, const Eigen::VectorXd& rhs,
                          SolverSettings settings = {}, SolveStats* stats = nullptr);

FormDoFs apply_Q(const CouplingOperator& op, const FormDoFs& w, SolveStats* stats = nullptr);

/// 2-norm condition number via dense singular values; +inf when numerically
/// singular. Intended for desk-scale matrices.
double condition_number(const Eigen::MatrixXd& M);
double condition_number(const Eigen::SparseMatrix<double>& M);

/// L2 norm of d(Q^r w) - Q^{r+1}(dw) on the target mesh.
double check_commuting(Method method, const MeshComplex& source, const MeshComplex& target,
                       const FormDoFs& w, SolverSettings solver = {});

/// Coordinate-format export with a metadata header line.
void write_matrix_coord(std::ostream& out, const CouplingOperator& op);

}  // namespace bcm
