// Copyright (c) 2026 the bcmortar authors
// SPDX-License-Identifier: Apache-2.0

#include "bcm/coupling.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace bcm {

namespace {

// Basis values of the primal Whitney r-forms living on a facet, together
// with their global cell indices.
struct LocalBasis {
    int count = 0;
    std::array<int, 3> cells{};
    std::array<FormValue, 3> values{};
};

LocalBasis primal_basis_at(const SurfaceMesh& mesh, int r, int facet, const Vec2& p)
{
    LocalBasis lb;
    switch (r) {
        case 0: {
            const auto vals = whitney0_values(mesh, facet, p);
            const auto& fn = mesh.facets[static_cast<std::size_t>(facet)];
            lb.count = 3;
            for (int k = 0; k < 3; ++k) {
                lb.cells[static_cast<std::size_t>(k)] = fn[static_cast<std::size_t>(k)];
                lb.values[static_cast<std::size_t>(k)] = {vals[static_cast<std::size_t>(k)], 0.0};
            }
            break;
        }
        case 1: {
            const auto vals = whitney1_values(mesh, facet, p);
            const auto& fe = mesh.facet_edges[static_cast<std::size_t>(facet)];
            lb.count = 3;
            for (int k = 0; k < 3; ++k) {
                lb.cells[static_cast<std::size_t>(k)] = fe[static_cast<std::size_t>(k)];
                lb.values[static_cast<std::size_t>(k)] = {vals[static_cast<std::size_t>(k)].x(),
                                                          vals[static_cast<std::size_t>(k)].y()};
            }
            break;
        }
        case 2: {
            lb.count = 1;
            lb.cells[0] = facet;
            lb.values[0] = {whitney2_value(mesh, facet), 0.0};
            break;
        }
        default:
            throw std::runtime_error("primal_basis_at: bad degree");
    }
    return lb;
}

// Row-indexed coefficient lookup tables for one of the R matrices.
std::vector<std::unordered_map<int, double>> row_maps(const Eigen::SparseMatrix<double, Eigen::RowMajor>& R)
{
    std::vector<std::unordered_map<int, double>> maps(static_cast<std::size_t>(R.rows()));
    for (int v = 0; v < R.rows(); ++v)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(R, v); it; ++it)
            maps[static_cast<std::size_t>(v)].emplace(static_cast<int>(it.col()), it.value());
    return maps;
}

// Value of the dual basis q-form of dual cell v at a point of a refined
// facet, given the prebuilt row tables.
FormValue bc_value_at(const MeshComplex& mc, int q, int v,
                      const std::vector<std::unordered_map<int, double>>& rows,
                      int refined_facet, const Vec2& p)
{
    const SurfaceMesh& fine = mc.ref.refined;
    const auto& row = rows[static_cast<std::size_t>(v)];
    FormValue out;
    switch (q) {
        case 0: {
            const auto vals = whitney0_values(fine, refined_facet, p);
            const auto& fn = fine.facets[static_cast<std::size_t>(refined_facet)];
            for (int k = 0; k < 3; ++k)
                if (auto it = row.find(fn[static_cast<std::size_t>(k)]); it != row.end())
                    out.a += it->second * vals[static_cast<std::size_t>(k)];
            break;
        }
        case 1: {
            const auto vals = whitney1_values(fine, refined_facet, p);
            const auto& fe = fine.facet_edges[static_cast<std::size_t>(refined_facet)];
            Vec2 acc = Vec2::Zero();
            for (int k = 0; k < 3; ++k)
                if (auto it = row.find(fe[static_cast<std::size_t>(k)]); it != row.end())
                    acc += it->second * vals[static_cast<std::size_t>(k)];
            out.a = acc.x();
            out.b = acc.y();
            break;
        }
        case 2: {
            if (auto it = row.find(refined_facet); it != row.end())
                out.a = it->second * whitney2_value(fine, refined_facet);
            break;
        }
        default:
            throw std::runtime_error("bc_value_at: bad degree");
    }
    return out;
}

struct BCAssemblyTables {
    int q = 0;
    const std::vector<std::vector<int>>* rev_support = nullptr;
    std::vector<std::unordered_map<int, double>> rows;
    std::vector<std::vector<int>> rev_storage;
};

BCAssemblyTables bc_tables(const MeshComplex& target, int r)
{
    BCAssemblyTables t;
    t.q = 2 - r;
    const auto& supports = (t.q == 0) ? target.bc.supports.u0
                         : (t.q == 1) ? target.bc.supports.u1
                                      : target.bc.supports.u2;
    t.rev_storage = invert_supports(supports, target.ref.refined.num_facets());
    t.rev_support = &t.rev_storage;
    const auto& R = (t.q == 0) ? target.bc.R0 : (t.q == 1) ? target.bc.R1 : target.bc.R2;
    t.rows = row_maps(R);
    return t;
}

}  // namespace

const char* method_name(Method m)
{
    switch (m) {
        case Method::DeRham: return "derham";
        case Method::Galerkin: return "galerkin";
        case Method::BC: return "bc";
    }
    return "?";
}

std::unique_ptr<MeshComplex> make_complex(SurfaceMesh mesh)
{
    auto mc = std::make_unique<MeshComplex>();
    mc->mesh = std::move(mesh);
    mc->ref = refine_barycentric(mc->mesh);
    mc->dual = build_dual(mc->mesh, mc->ref);
    mc->bc = build_bc(mc->mesh, mc->ref, mc->dual, BCVariant::ZeroBoundaryTrace);
    return mc;
}

Eigen::SparseMatrix<double> assemble_own_galerkin(const SurfaceMesh& target, int r)
{
    const int n = target.num_cells(r);
    std::vector<Eigen::Triplet<double>> trip;
    for (int f = 0; f < target.num_facets(); ++f) {
        for (const auto& qp : quad_points(target, f, 4)) {
            const LocalBasis lb = primal_basis_at(target, r, f, qp.x);
            for (int i = 0; i < lb.count; ++i)
                for (int j = 0; j < lb.count; ++j)
                    trip.emplace_back(lb.cells[static_cast<std::size_t>(i)], lb.cells[static_cast<std::size_t>(j)],
                                      qp.w * (lb.values[static_cast<std::size_t>(i)].a * lb.values[static_cast<std::size_t>(j)].a +
                                              lb.values[static_cast<std::size_t>(i)].b * lb.values[static_cast<std::size_t>(j)].b));
        }
    }
    Eigen::SparseMatrix<double> M(n, n);
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

Eigen::SparseMatrix<double> assemble_own_bc(const MeshComplex& target, int r)
{
    const int q = 2 - r;
    const BCAssemblyTables tables = bc_tables(target, r);
    const SurfaceMesh& fine = target.ref.refined;

    std::vector<Eigen::Triplet<double>> trip;
    for (int rf = 0; rf < fine.num_facets(); ++rf) {
        const int parent = target.ref.facet_parent[static_cast<std::size_t>(rf)];
        const auto& duals = (*tables.rev_support)[static_cast<std::size_t>(rf)];
        if (duals.empty())
            continue;
        for (const auto& qp : quad_points(fine, rf, 4)) {
            const LocalBasis lb = primal_basis_at(target.mesh, r, parent, qp.x);
            for (int v : duals) {
                const FormValue mu = bc_value_at(target, q, v, tables.rows, rf, qp.x);
                for (int j = 0; j < lb.count; ++j)
                    trip.emplace_back(v, lb.cells[static_cast<std::size_t>(j)],
                                      qp.w * wedge(q, mu, r, lb.values[static_cast<std::size_t>(j)]));
            }
        }
    }
    const int n = target.mesh.num_cells(r);
    Eigen::SparseMatrix<double> M(n, n);
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

Eigen::SparseMatrix<double> assemble_cross_galerkin(const SurfaceMesh& target, const SurfaceMesh& source,
                                                    int r, const Overlay& ov_ts)
{
    std::vector<Eigen::Triplet<double>> trip;
    for (const auto& cell : ov_ts.cells) {
        for (const auto& qp : quad_points(cell.v, 4)) {
            const LocalBasis lt = primal_basis_at(target, r, cell.parent_a, qp.x);
            const LocalBasis ls = primal_basis_at(source, r, cell.parent_b, qp.x);
            for (int i = 0; i < lt.count; ++i)
                for (int j = 0; j < ls.count; ++j)
                    trip.emplace_back(lt.cells[static_cast<std::size_t>(i)], ls.cells[static_cast<std::size_t>(j)],
                                      qp.w * (lt.values[static_cast<std::size_t>(i)].a * ls.values[static_cast<std::size_t>(j)].a +
                                              lt.values[static_cast<std::size_t>(i)].b * ls.values[static_cast<std::size_t>(j)].b));
        }
    }
    Eigen::SparseMatrix<double> M(target.num_cells(r), source.num_cells(r));
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

Eigen::SparseMatrix<double> assemble_cross_bc(const MeshComplex& target, const SurfaceMesh& source,
                                              int r, const Overlay& ov_refined_ts)
{
    const int q = 2 - r;
    const BCAssemblyTables tables = bc_tables(target, r);

    std::vector<Eigen::Triplet<double>> trip;
    for (const auto& cell : ov_refined_ts.cells) {
        const int rf = cell.parent_a;  // refined facet of the target
        const auto& duals = (*tables.rev_support)[static_cast<std::size_t>(rf)];
        if (duals.empty())
            continue;
        for (const auto& qp : quad_points(cell.v, 4)) {
            const LocalBasis ls = primal_basis_at(source, r, cell.parent_b, qp.x);
            for (int v : duals) {
                const FormValue mu = bc_value_at(target, q, v, tables.rows, rf, qp.x);
                for (int j = 0; j < ls.count; ++j)
                    trip.emplace_back(v, ls.cells[static_cast<std::size_t>(j)],
                                      qp.w * wedge(q, mu, r, ls.values[static_cast<std::size_t>(j)]));
            }
        }
    }
    Eigen::SparseMatrix<double> M(target.mesh.num_cells(r), source.num_cells(r));
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

CouplingOperator make_coupling_operator(Method method, int r, const MeshComplex& target,
                                        const MeshComplex& source, SolverSettings solver)
{
    CouplingOperator op;
    op.method = method;
    op.degree = r;
    op.source = &source;
    op.target = &target;
    op.solver = solver;
    switch (method) {
        case Method::DeRham:
            if (r == 2)
                op.overlay_ts = intersect_meshes(target.mesh, source.mesh);
            break;
        case Method::Galerkin: {
            op.M_own = assemble_own_galerkin(target.mesh, r);
            const Overlay ov = intersect_meshes(target.mesh, source.mesh);
            op.M_cross = assemble_cross_galerkin(target.mesh, source.mesh, r, ov);
            break;
        }
        case Method::BC: {
            op.M_own = assemble_own_bc(target, r);
            const Overlay ov = intersect_meshes(target.ref.refined, source.mesh);
            op.M_cross = assemble_cross_bc(target, source.mesh, r, ov);
            break;
        }
    }
    return op;
}

Eigen::VectorXd solve_cgs(const Eigen::SparseMatrix<double>& M, const Eigen::VectorXd& rhs,
                          SolverSettings settings, SolveStats* stats)
{
    SolveStats local;
    SolveStats& st = stats ? *stats : local;
    st = {};

    const double rhs_norm = rhs.norm();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(rhs.size());
    if (rhs_norm == 0.0) {
        st.converged = true;
        st.iterations_to_1e6 = 0;
        return x;
    }

    Eigen::VectorXd r = rhs;  // residual for x = 0
    const Eigen::VectorXd rhat = r;
    Eigen::VectorXd u = r, p = r;
    double rho = rhat.dot(r);

    for (int it = 1; it <= settings.maxit; ++it) {
        const Eigen::VectorXd v = M * p;
        const double sigma = rhat.dot(v);
        if (std::abs(sigma) < 1e-300 || std::abs(rho) < 1e-300)
            throw std::runtime_error("solve_cgs: breakdown (rho or sigma vanished) at iteration " + std::to_string(it));
        const double alpha = rho / sigma;
        const Eigen::VectorXd q = u - alpha * v;
        const Eigen::VectorXd uq = u + q;
        x += alpha * uq;
        r -= alpha * (M * uq);

        const double rel = r.norm() / rhs_norm;
        st.iterations = it;
        st.final_residual = rel;
        if (st.iterations_to_1e6 < 0 && rel <= 1e-6)
            st.iterations_to_1e6 = it;
        if (rel <= settings.tol) {
            st.converged = true;
            return x;
        }

        const double rho_next = rhat.dot(r);
        const double beta = rho_next / rho;
        rho = rho_next;
        u = r + beta * q;
        p = u + beta * (q + beta * p);
    }
    throw std::runtime_error("solve_cgs: no convergence within " + std::to_string(settings.maxit) +
                             " iterations (relative residual " + std::to_string(st.final_residual) + ")");
}

namespace {

FormDoFs apply_derham(const CouplingOperator& op, const FormDoFs& w)
{
    const SurfaceMesh& src = op.source->mesh;
    const SurfaceMesh& tgt = op.target->mesh;
    FormDoFs out;
    out.degree = w.degree;
    out.mesh = &tgt;
    switch (w.degree) {
        case 0: {
            out.coeffs.resize(tgt.num_nodes());
            int hint = -1;
            for (int n = 0; n < tgt.num_nodes(); ++n) {
                const PointLocation loc = locate_point(src, tgt.node_coords[static_cast<std::size_t>(n)], hint);
                hint = loc.facet;
                out.coeffs(n) = eval_form(w, loc.facet, tgt.node_coords[static_cast<std::size_t>(n)]).a;
            }
            break;
        }
        case 1: {
            out.coeffs.resize(tgt.num_edges());
            for (int e = 0; e < tgt.num_edges(); ++e) {
                const Vec2 a = tgt.node_coords[static_cast<std::size_t>(tgt.edges[static_cast<std::size_t>(e)][0])];
                const Vec2 b = tgt.node_coords[static_cast<std::size_t>(tgt.edges[static_cast<std::size_t>(e)][1])];
                const Vec2 d = b - a;
                double circ = 0.0;
                // Two-point Gauss per sub-segment: exact for the piecewise
                // linear tangential trace of the source interpolant.
                static const double g0 = 0.5 - 0.5 / std::sqrt(3.0);
                static const double g1 = 0.5 + 0.5 / std::sqrt(3.0);
                for (const SubSegment& s : clip_segment(src, a, b)) {
                    const double dt = s.t1 - s.t0;
                    for (double g : {g0, g1}) {
                        const Vec2 x = a + (s.t0 + g * dt) * d;
                        const FormValue v = eval_form(w, s.facet, x);
                        circ += 0.5 * dt * (v.a * d.x() + v.b * d.y());
                    }
                }
                out.coeffs(e) = circ;
            }
            break;
        }
        case 2: {
            out.coeffs.setZero(tgt.num_facets());
            for (const auto& cell : op.overlay_ts.cells)
                out.coeffs(cell.parent_a) += cell.area * w.coeffs(cell.parent_b) / src.facet_area(cell.parent_b);
            break;
        }
        default:
            throw std::runtime_error("apply_Q: bad degree");
    }
    return out;
}

}  // namespace

FormDoFs apply_Q(const CouplingOperator& op, const FormDoFs& w, SolveStats* stats)
{
    if (w.degree != op.degree)
        throw std::runtime_error("apply_Q: degree mismatch");
    if (w.mesh != &op.source->mesh)
        throw std::runtime_error("apply_Q: coefficient vector does not live on the source mesh");
    if (op.method == Method::DeRham)
        return apply_derham(op, w);

    FormDoFs out;
    out.degree = w.degree;
    out.mesh = &op.target->mesh;
    out.coeffs = solve_cgs(op.M_own, op.M_cross * w.coeffs, op.solver, stats);
    return out;
}

double condition_number(const Eigen::MatrixXd& M)
{
    Eigen::VectorXd sv;
    if (M.rows() <= 64)
        sv = Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues();
    else
        sv = Eigen::BDCSVD<Eigen::MatrixXd>(M).singularValues();
    const double smax = sv(0);
    const double smin = sv(sv.size() - 1);
    if (smin <= 1e-14 * smax)
        return std::numeric_limits<double>::infinity();
    return smax / smin;
}

double condition_number(const Eigen::SparseMatrix<double>& M)
{
    return condition_number(Eigen::MatrixXd(M));
}

double check_commuting(Method method, const MeshComplex& source, const MeshComplex& target,
                       const FormDoFs& w, SolverSettings solver)
{
    if (w.degree > 1)
        throw std::runtime_error("check_commuting: degree must be 0 or 1");
    const CouplingOperator q_r = make_coupling_operator(method, w.degree, target, source, solver);
    const CouplingOperator q_r1 = make_coupling_operator(method, w.degree + 1, target, source, solver);
    const FormDoFs d_of_Qw = exterior_derivative(apply_Q(q_r, w));
    const FormDoFs Q_of_dw = apply_Q(q_r1, exterior_derivative(w));
    return diff_norm_L2(d_of_Qw, Q_of_dw);
}

void write_matrix_coord(std::ostream& out, const CouplingOperator& op)
{
    char buf[128];
    const auto dump = [&out, &buf](const char* name, const Eigen::SparseMatrix<double>& M) {
        out << "# " << name << ' ' << M.rows() << ' ' << M.cols() << '\n';
        for (int k = 0; k < M.outerSize(); ++k) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(M, k); it; ++it) {
                std::snprintf(buf, sizeof buf, "%ld %ld %.17g", static_cast<long>(it.row()),
                              static_cast<long>(it.col()), it.value());
                out << buf << '\n';
            }
        }
    };
    out << "# method " << method_name(op.method) << " degree " << op.degree << '\n';
    if (op.method != Method::DeRham) {
        dump("M_own", op.M_own);
        dump("M_cross", op.M_cross);
    }
}

}  // namespace bcm
