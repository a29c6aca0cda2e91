// Copyright (c) 2026 the bcmortar authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <functional>
#include <iosfwd>

#include <Eigen/Core>

#include "bcm/mesh.hpp"

namespace bcm {

/// Value of a differential form at a point: a scalar (degree 0), the two
/// covector components (degree 1), or the density against dx^dy (degree 2).
struct FormValue {
    double a = 0.0;
    double b = 0.0;
};

/// Coefficient vector of a lowest-order Whitney form: nodal values, edge
/// circulations, or facet fluxes of the mesh the basis lives on.
struct FormDoFs {
    int degree = 0;
    const SurfaceMesh* mesh = nullptr;
    Eigen::VectorXd coeffs;
};

struct AnalyticForm {
    int degree = 0;
    std::function<FormValue(const Vec2&)> eval;
};

Eigen::Vector3d barycentric_coords(const SurfaceMesh& mesh, int facet, const Vec2& p);

/// Values of all Whitney basis forms supported on the facet at point p.
/// Degree 0: one scalar per facet vertex; degree 1: one covector per facet
/// side (sign follows the intrinsic edge orientation); degree 2: the single
/// density 1/area.
std::array<double, 3> whitney0_values(const SurfaceMesh& mesh, int facet, const Vec2& p);
std::array<Vec2, 3> whitney1_values(const SurfaceMesh& mesh, int facet, const Vec2& p);
double whitney2_value(const SurfaceMesh& mesh, int facet);

/// Degrees of freedom of an analytic form: point evaluation at nodes,
/// 5-point Gauss line integrals over edges, or degree-4 facet integrals.
FormDoFs de_rham_map(const SurfaceMesh& mesh, const AnalyticForm& f);

/// Coefficients of dw: transpose incidence applied to the coefficients.
FormDoFs exterior_derivative(const FormDoFs& w);

FormValue eval_form(const FormDoFs& w, int facet, const Vec2& p);

/// Pointwise wedge of a q-form value with an r-form value, q + r = 2.
double wedge(int q, const FormValue& beta, int r, const FormValue& omega);

double norm_L2(const FormDoFs& w);
double norm_L2(const SurfaceMesh& mesh, const AnalyticForm& f);
double diff_norm_L2(const FormDoFs& wa, const FormDoFs& wb);
double diff_norm_L2(const FormDoFs& wa, const AnalyticForm& f);
double seminorm_Hd(const FormDoFs& wa, const FormDoFs& wb);

// Text serialization: header "degree n", then n coefficient lines.
void write_dofs(std::ostream& out, const FormDoFs& w);
FormDoFs read_dofs(std::istream& in, const SurfaceMesh& mesh);

/// 5-point Gauss-Legendre rule on [0,1] (parameter, weight).
const std::array<std::array<double, 2>, 5>& gauss5();

}  // namespace bcm
