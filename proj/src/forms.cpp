// Copyright (c) 2026 the bcmortar authors
// SPDX-License-Identifier: Apache-2.0

#include "bcm/forms.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "bcm/overlay.hpp"

namespace bcm {

namespace {

Vec2 perp(const Vec2& v)
{
    return Vec2(-v.y(), v.x());
}

// Gradients of the three barycentric functions on a facet.
std::array<Vec2, 3> barycentric_gradients(const SurfaceMesh& mesh, int facet)
{
    const auto p = mesh.facet_points(facet);
    const double inv2a = 1.0 / (2.0 * mesh.facet_area(facet));
    return {perp(p[2] - p[1]) * inv2a, perp(p[0] - p[2]) * inv2a, perp(p[1] - p[0]) * inv2a};
}

void check_point_in_facet(const Eigen::Vector3d& l)
{
    if (l.minCoeff() < -1e-9)
        throw std::runtime_error("eval: point lies outside the facet");
}

}  // namespace

Eigen::Vector3d barycentric_coords(const SurfaceMesh& mesh, int facet, const Vec2& p)
{
    const auto t = mesh.facet_points(facet);
    const double a = mesh.facet_area(facet);
    Eigen::Vector3d l;
    l(0) = triangle_area(p, t[1], t[2]) / a;
    l(1) = triangle_area(t[0], p, t[2]) / a;
    l(2) = triangle_area(t[0], t[1], p) / a;
    return l;
}

std::array<double, 3> whitney0_values(const SurfaceMesh& mesh, int facet, const Vec2& p)
{
    const Eigen::Vector3d l = barycentric_coords(mesh, facet, p);
    check_point_in_facet(l);
    return {l(0), l(1), l(2)};
}

std::array<Vec2, 3> whitney1_values(const SurfaceMesh& mesh, int facet, const Vec2& p)
{
    const Eigen::Vector3d l = barycentric_coords(mesh, facet, p);
    check_point_in_facet(l);
    const auto grad = barycentric_gradients(mesh, facet);
    std::array<Vec2, 3> vals;
    const auto& fn = mesh.facets[static_cast<std::size_t>(facet)];
    for (int k = 0; k < 3; ++k) {
        // Side k joins local vertices k and k+1; the basis form is
        // lam_a d lam_b - lam_b d lam_a for the intrinsically ordered (a,b).
        int la = k, lb = (k + 1) % 3;
        if (fn[static_cast<std::size_t>(la)] > fn[static_cast<std::size_t>(lb)])
            std::swap(la, lb);
        vals[static_cast<std::size_t>(k)] =
            l(la) * grad[static_cast<std::size_t>(lb)] - l(lb) * grad[static_cast<std::size_t>(la)];
    }
    return vals;
}

double whitney2_value(const SurfaceMesh& mesh, int facet)
{
    return 1.0 / mesh.facet_area(facet);
}

const std::array<std::array<double, 2>, 5>& gauss5()
{
    // Gauss-Legendre nodes on [0,1].
    static const std::array<std::array<double, 2>, 5> rule = {{
        {0.5 - 0.45308992296933193, 0.5 * 0.23692688505618909},
        {0.5 - 0.26923465505284155, 0.5 * 0.47862867049936647},
        {0.5, 0.5 * 0.56888888888888889},
        {0.5 + 0.26923465505284155, 0.5 * 0.47862867049936647},
        {0.5 + 0.45308992296933193, 0.5 * 0.23692688505618909},
    }};
    return rule;
}

FormDoFs de_rham_map(const SurfaceMesh& mesh, const AnalyticForm& f)
{
    FormDoFs w;
    w.degree = f.degree;
    w.mesh = &mesh;
    switch (f.degree) {
        case 0: {
            w.coeffs.resize(mesh.num_nodes());
            for (int n = 0; n < mesh.num_nodes(); ++n)
                w.coeffs(n) = f.eval(mesh.node_coords[static_cast<std::size_t>(n)]).a;
            break;
        }
        case 1: {
            w.coeffs.resize(mesh.num_edges());
            for (int e = 0; e < mesh.num_edges(); ++e) {
                const Vec2 a = mesh.node_coords[static_cast<std::size_t>(mesh.edges[static_cast<std::size_t>(e)][0])];
                const Vec2 b = mesh.node_coords[static_cast<std::size_t>(mesh.edges[static_cast<std::size_t>(e)][1])];
                const Vec2 d = b - a;
                double circ = 0.0;
                for (const auto& [t, wt] : gauss5()) {
                    const FormValue v = f.eval(a + t * d);
                    circ += wt * (v.a * d.x() + v.b * d.y());
                }
                w.coeffs(e) = circ;
            }
            break;
        }
        case 2: {
            w.coeffs.resize(mesh.num_facets());
            for (int fi = 0; fi < mesh.num_facets(); ++fi) {
                double flux = 0.0;
                for (const auto& qp : quad_points(mesh, fi, 4))
                    flux += qp.w * f.eval(qp.x).a;
                w.coeffs(fi) = flux;
            }
            break;
        }
        default:
            throw std::runtime_error("de_rham_map: degree must be 0, 1 or 2");
    }
    return w;
}

FormDoFs exterior_derivative(const FormDoFs& w)
{
    if (w.degree != 0 && w.degree != 1)
        throw std::runtime_error("exterior_derivative: degree must be 0 or 1");
    FormDoFs dw;
    dw.degree = w.degree + 1;
    dw.mesh = w.mesh;
    const auto& D = (w.degree == 0) ? w.mesh->D0 : w.mesh->D1;
    dw.coeffs = D.cast<double>().transpose() * w.coeffs;
    return dw;
}

FormValue eval_form(const FormDoFs& w, int facet, const Vec2& p)
{
    const SurfaceMesh& mesh = *w.mesh;
    FormValue out;
    switch (w.degree) {
        case 0: {
            const auto vals = whitney0_values(mesh, facet, p);
            const auto& fn = mesh.facets[static_cast<std::size_t>(facet)];
            for (int k = 0; k < 3; ++k)
                out.a += w.coeffs(fn[static_cast<std::size_t>(k)]) * vals[static_cast<std::size_t>(k)];
            break;
        }
        case 1: {
            const auto vals = whitney1_values(mesh, facet, p);
            const auto& fe = mesh.facet_edges[static_cast<std::size_t>(facet)];
            Vec2 v = Vec2::Zero();
            for (int k = 0; k < 3; ++k)
                v += w.coeffs(fe[static_cast<std::size_t>(k)]) * vals[static_cast<std::size_t>(k)];
            out.a = v.x();
            out.b = v.y();
            break;
        }
        case 2: {
            out.a = w.coeffs(facet) * whitney2_value(mesh, facet);
            break;
        }
        default:
            throw std::runtime_error("eval_form: bad degree");
    }
    return out;
}

double wedge(int q, const FormValue& beta, int r, const FormValue& omega)
{
    if (q + r != 2)
        throw std::runtime_error("wedge: degrees must sum to 2");
    if (q == 1)
        return beta.a * omega.b - beta.b * omega.a;
    return beta.a * omega.a;  // 0-form against 2-form, either order
}

namespace {

double value_norm2(int degree, const FormValue& v)
{
    return (degree == 1) ? v.a * v.a + v.b * v.b : v.a * v.a;
}

}  // namespace

double norm_L2(const FormDoFs& w)
{
    double acc = 0.0;
    for (int f = 0; f < w.mesh->num_facets(); ++f)
        for (const auto& qp : quad_points(*w.mesh, f, 4))
            acc += qp.w * value_norm2(w.degree, eval_form(w, f, qp.x));
    return std::sqrt(std::max(acc, 0.0));
}

double norm_L2(const SurfaceMesh& mesh, const AnalyticForm& f)
{
    double acc = 0.0;
    for (int fi = 0; fi < mesh.num_facets(); ++fi)
        for (const auto& qp : quad_points(mesh, fi, 4))
            acc += qp.w * value_norm2(f.degree, f.eval(qp.x));
    return std::sqrt(std::max(acc, 0.0));
}

double diff_norm_L2(const FormDoFs& wa, const FormDoFs& wb)
{
    if (wa.degree != wb.degree)
        throw std::runtime_error("diff_norm_L2: incompatible degrees");
    double acc = 0.0;
    if (wa.mesh == wb.mesh) {
        for (int f = 0; f < wa.mesh->num_facets(); ++f) {
            for (const auto& qp : quad_points(*wa.mesh, f, 4)) {
                const FormValue va = eval_form(wa, f, qp.x);
                const FormValue vb = eval_form(wb, f, qp.x);
                acc += qp.w * value_norm2(wa.degree, {va.a - vb.a, va.b - vb.b});
            }
        }
    } else {
        const Overlay ov = intersect_meshes(*wa.mesh, *wb.mesh);
        for (const auto& cell : ov.cells) {
            for (const auto& qp : quad_points(cell.v, 4)) {
                const FormValue va = eval_form(wa, cell.parent_a, qp.x);
                const FormValue vb = eval_form(wb, cell.parent_b, qp.x);
                acc += qp.w * value_norm2(wa.degree, {va.a - vb.a, va.b - vb.b});
            }
        }
    }
    return std::sqrt(std::max(acc, 0.0));
}

double diff_norm_L2(const FormDoFs& wa, const AnalyticForm& f)
{
    if (wa.degree != f.degree)
        throw std::runtime_error("diff_norm_L2: incompatible degrees");
    double acc = 0.0;
    for (int fi = 0; fi < wa.mesh->num_facets(); ++fi) {
        for (const auto& qp : quad_points(*wa.mesh, fi, 4)) {
            const FormValue va = eval_form(wa, fi, qp.x);
            const FormValue vf = f.eval(qp.x);
            acc += qp.w * value_norm2(wa.degree, {va.a - vf.a, va.b - vf.b});
        }
    }
    return std::sqrt(std::max(acc, 0.0));
}

double seminorm_Hd(const FormDoFs& wa, const FormDoFs& wb)
{
    if (wa.degree > 1 || wb.degree > 1)
        throw std::runtime_error("seminorm_Hd: degree must be 0 or 1");
    return diff_norm_L2(exterior_derivative(wa), exterior_derivative(wb));
}

void write_dofs(std::ostream& out, const FormDoFs& w)
{
    char buf[64];
    out << w.degree << ' ' << w.coeffs.size() << '\n';
    for (Eigen::Index i = 0; i < w.coeffs.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", w.coeffs(i));
        out << buf << '\n';
    }
}

FormDoFs read_dofs(std::istream& in, const SurfaceMesh& mesh)
{
    FormDoFs w;
    long n = 0;
    if (!(in >> w.degree >> n))
        throw std::runtime_error("read_dofs: bad header, expected 'degree n'");
    if (w.degree < 0 || w.degree > 2)
        throw std::runtime_error("read_dofs: degree out of range");
    if (n != mesh.num_cells(w.degree))
        throw std::runtime_error("read_dofs: coefficient count does not match the mesh");
    w.mesh = &mesh;
    w.coeffs.resize(n);
    for (long i = 0; i < n; ++i)
        if (!(in >> w.coeffs(i)))
            throw std::runtime_error("read_dofs: bad coefficient line " + std::to_string(i));
    return w;
}

}  // namespace bcm
