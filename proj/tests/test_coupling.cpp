// Copyright (c) 2026 the bcmortar authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "bcm/coupling.hpp"
#include "bcm/experiments.hpp"
#include "builders.hpp"

using namespace bcm;

namespace {

std::pair<std::unique_ptr<MeshComplex>, std::unique_ptr<MeshComplex>> test_pair(int level)
{
    auto [mi, mj] = gen_test_meshes(level);
    return {make_complex(std::move(mi)), make_complex(std::move(mj))};
}

double max_abs(const Eigen::SparseMatrix<double>& m)
{
    double v = 0.0;
    for (int k = 0; k < m.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
            v = std::max(v, std::abs(it.value()));
    return v;
}

}  // namespace

TEST_CASE("galerkin nodal mass matrix of one right triangle")
{
    const auto mc = make_complex(testing::single_triangle());
    const Eigen::MatrixXd M = Eigen::MatrixXd(assemble_own_galerkin(mc->mesh, 0));
    const double a = mc->mesh.facet_area(0);
    Eigen::Matrix3d expect;
    expect << 2, 1, 1, 1, 2, 1, 1, 1, 2;
    expect *= a / 12.0;
    CHECK((M - expect).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("own-pairing structure for the dual-basis method")
{
    auto [ci, cj] = test_pair(0);

    SUBCASE("square with one row and column per primal cell")
    {
        for (int r = 0; r <= 2; ++r) {
            const Eigen::SparseMatrix<double> M = assemble_own_bc(*cj, r);
            CHECK(M.rows() == cj->mesh.num_cells(r));
            CHECK(M.cols() == cj->mesh.num_cells(r));
        }
    }
    SUBCASE("r=2 column sums are one on interior facets (partition of unity)")
    {
        const Eigen::SparseMatrix<double> M = assemble_own_bc(*cj, 2);
        const Eigen::VectorXd colsum = M.transpose() * Eigen::VectorXd::Ones(M.rows());
        int interior_facets = 0;
        for (int f = 0; f < cj->mesh.num_facets(); ++f) {
            bool touches = false;
            for (int n : cj->mesh.facets[static_cast<std::size_t>(f)])
                touches |= cj->mesh.node_on_boundary[static_cast<std::size_t>(n)] != 0;
            if (!touches) {
                CHECK(colsum(f) == doctest::Approx(1.0).epsilon(1e-12));
                ++interior_facets;
            }
        }
        CHECK(interior_facets > 0);
    }
    SUBCASE("r=0 cross rows integrate the dual facet forms to one")
    {
        const Overlay ov = intersect_meshes(cj->ref.refined, ci->mesh);
        const Eigen::SparseMatrix<double> M = assemble_cross_bc(*cj, ci->mesh, 0, ov);
        const Eigen::VectorXd rowsum = M * Eigen::VectorXd::Ones(M.cols());
        CHECK((rowsum.array() - 1.0).abs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("cross assembly against the own matrix when source = target")
{
    auto [ci, cj] = test_pair(0);
    (void)ci;
    for (int r = 0; r <= 2; ++r) {
        const Overlay ov_g = intersect_meshes(cj->mesh, cj->mesh);
        const Eigen::SparseMatrix<double> g_own = assemble_own_galerkin(cj->mesh, r);
        const Eigen::SparseMatrix<double> g_cross = assemble_cross_galerkin(cj->mesh, cj->mesh, r, ov_g);
        CHECK(max_abs(g_own - g_cross) <= 1e-10);

        const Overlay ov_b = intersect_meshes(cj->ref.refined, cj->mesh);
        const Eigen::SparseMatrix<double> b_own = assemble_own_bc(*cj, r);
        const Eigen::SparseMatrix<double> b_cross = assemble_cross_bc(*cj, cj->mesh, r, ov_b);
        CHECK(max_abs(b_own - b_cross) <= 1e-10);
    }
}

TEST_CASE("galerkin cross pairing transposes when the roles swap")
{
    auto [ci, cj] = test_pair(0);
    for (int r = 0; r <= 1; ++r) {
        const Overlay ji = intersect_meshes(cj->mesh, ci->mesh);
        const Overlay ij = intersect_meshes(ci->mesh, cj->mesh);
        const Eigen::SparseMatrix<double> m_ji = assemble_cross_galerkin(cj->mesh, ci->mesh, r, ji);
        const Eigen::SparseMatrix<double> m_ij = assemble_cross_galerkin(ci->mesh, cj->mesh, r, ij);
        CHECK(max_abs(m_ji - Eigen::SparseMatrix<double>(m_ij.transpose())) <= 1e-12);
    }
}

TEST_CASE("matrix-level commuting identities of the dual pairing")
{
    auto [ci, cj] = test_pair(1);
    const Eigen::SparseMatrix<double> d0j = cj->mesh.D0.cast<double>();
    const Eigen::SparseMatrix<double> d1j = cj->mesh.D1.cast<double>();
    const Eigen::SparseMatrix<double> d0i = ci->mesh.D0.cast<double>();
    const Eigen::SparseMatrix<double> d1i = ci->mesh.D1.cast<double>();

    SUBCASE("own matrices")
    {
        const Eigen::SparseMatrix<double> m0 = assemble_own_bc(*cj, 0);
        const Eigen::SparseMatrix<double> m1 = assemble_own_bc(*cj, 1);
        const Eigen::SparseMatrix<double> m2 = assemble_own_bc(*cj, 2);
        CHECK(max_abs(Eigen::SparseMatrix<double>(d0j.transpose() * m0) -
                      Eigen::SparseMatrix<double>(m1 * d0j.transpose())) <= 1e-12);
        CHECK(max_abs(Eigen::SparseMatrix<double>(d1j.transpose() * m1) -
                      Eigen::SparseMatrix<double>(m2 * d1j.transpose())) <= 1e-12);
    }
    SUBCASE("cross matrices")
    {
        const Overlay ov = intersect_meshes(cj->ref.refined, ci->mesh);
        const Eigen::SparseMatrix<double> m0 = assemble_cross_bc(*cj, ci->mesh, 0, ov);
        const Eigen::SparseMatrix<double> m1 = assemble_cross_bc(*cj, ci->mesh, 1, ov);
        const Eigen::SparseMatrix<double> m2 = assemble_cross_bc(*cj, ci->mesh, 2, ov);
        CHECK(max_abs(Eigen::SparseMatrix<double>(d0j.transpose() * m0) -
                      Eigen::SparseMatrix<double>(m1 * d0i.transpose())) <= 1e-12);
        CHECK(max_abs(Eigen::SparseMatrix<double>(d1j.transpose() * m1) -
                      Eigen::SparseMatrix<double>(m2 * d1i.transpose())) <= 1e-12);
    }
}

TEST_CASE("conjugate gradient squared")
{
    SUBCASE("identity converges in one iteration")
    {
        Eigen::SparseMatrix<double> eye(10, 10);
        eye.setIdentity();
        const Eigen::VectorXd rhs = Eigen::VectorXd::Random(10);
        SolveStats stats;
        const Eigen::VectorXd x = solve_cgs(eye, rhs, {}, &stats);
        CHECK((x - rhs).norm() <= 1e-14);
        CHECK(stats.iterations == 1);
    }
    SUBCASE("random SPD system matches a dense factorization")
    {
        std::mt19937 rng(4242);
        std::normal_distribution<double> gauss;
        Eigen::MatrixXd A(20, 20);
        for (int i = 0; i < 20; ++i)
            for (int j = 0; j < 20; ++j)
                A(i, j) = gauss(rng);
        const Eigen::MatrixXd spd = A * A.transpose() + 20.0 * Eigen::MatrixXd::Identity(20, 20);
        const Eigen::VectorXd rhs = Eigen::VectorXd::Random(20);
        const Eigen::VectorXd direct = Eigen::PartialPivLU<Eigen::MatrixXd>(spd).solve(rhs);
        const Eigen::VectorXd iterative = solve_cgs(spd.sparseView(), rhs, {1e-12, 400}, nullptr);
        CHECK((direct - iterative).norm() <= 1e-8 * direct.norm());
    }
    SUBCASE("iteration overflow is reported")
    {
        std::mt19937 rng(7);
        std::normal_distribution<double> gauss;
        Eigen::MatrixXd A(12, 12);
        for (int i = 0; i < 12; ++i)
            for (int j = 0; j < 12; ++j)
                A(i, j) = gauss(rng);
        const Eigen::MatrixXd spd = A * A.transpose() + Eigen::MatrixXd::Identity(12, 12);
        const Eigen::VectorXd rhs = Eigen::VectorXd::Ones(12);
        CHECK_THROWS_AS(solve_cgs(spd.sparseView(), rhs, {1e-14, 2}, nullptr), std::runtime_error);
    }
    SUBCASE("dual-basis systems of the experiments converge quickly")
    {
        for (int level = 0; level <= 2; ++level) {
            auto [ci, cj] = test_pair(level);
            (void)ci;
            for (int r = 0; r <= 1; ++r) {
                const Eigen::SparseMatrix<double> M = assemble_own_bc(*cj, r);
                const Eigen::VectorXd rhs = Eigen::VectorXd::Random(M.rows());
                SolveStats stats;
                solve_cgs(M, rhs, {1e-6, 100}, &stats);
                CHECK(stats.iterations_to_1e6 > 0);
                CHECK(stats.iterations_to_1e6 <= 15);
            }
        }
    }
}

TEST_CASE("condition numbers")
{
    SUBCASE("identity and diagonal")
    {
        CHECK(condition_number(Eigen::MatrixXd::Identity(7, 7)) == doctest::Approx(1.0).epsilon(1e-12));
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
        d(0, 0) = 1.0;
        d(1, 1) = 10.0;
        CHECK(condition_number(d) == doctest::Approx(10.0).epsilon(1e-12));
    }
    SUBCASE("singular matrix reports infinity")
    {
        Eigen::MatrixXd s = Eigen::MatrixXd::Ones(3, 3);
        CHECK(std::isinf(condition_number(s)));
    }
    SUBCASE("dual-basis own matrices stay well conditioned under refinement")
    {
        double prev0 = 0.0, prev1 = 0.0;
        for (int level = 0; level <= 1; ++level) {
            auto [ci, cj] = test_pair(level);
            (void)ci;
            const double k0 = condition_number(assemble_own_bc(*cj, 0));
            const double k1 = condition_number(assemble_own_bc(*cj, 1));
            CHECK(k0 >= 2.0);
            CHECK(k0 <= 10.0);
            CHECK(k1 >= 2.0);
            CHECK(k1 <= 10.0);
            if (level > 0) {
                CHECK(k0 / prev0 <= 2.0);
                CHECK(prev0 / k0 <= 2.0);
                CHECK(k1 / prev1 <= 2.0);
                CHECK(prev1 / k1 <= 2.0);
            }
            prev0 = k0;
            prev1 = k1;
        }
    }
}

TEST_CASE("coupling operators reproduce constants")
{
    auto [ci, cj] = test_pair(0);
    const AnalyticForm one{0, [](const Vec2&) { return FormValue{1.0, 0.0}; }};
    const FormDoFs w = de_rham_map(ci->mesh, one);
    for (Method m : {Method::DeRham, Method::Galerkin, Method::BC}) {
        const CouplingOperator q = make_coupling_operator(m, 0, *cj, *ci);
        const FormDoFs out = apply_Q(q, w);
        CHECK((out.coeffs.array() - 1.0).abs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("projection returns the exact representation of nested data")
{
    // Source space is contained in the target space when the target mesh is
    // the uniform refinement of the source mesh.
    const SurfaceMesh coarse = grid_mesh(2, Diagonal::NE);
    auto src = make_complex(coarse);
    auto tgt = make_complex(refine_uniform(coarse));

    for (int r = 0; r <= 1; ++r) {
        FormDoFs w{r, &src->mesh, Eigen::VectorXd::Random(src->mesh.num_cells(r))};

        // Target-side representation via the de Rham map of the source interpolant.
        AnalyticForm interp{r, [&](const Vec2& p) {
                                const PointLocation loc = locate_point(src->mesh, p);
                                return eval_form(w, loc.facet, p);
                            }};
        const FormDoFs expect = de_rham_map(tgt->mesh, interp);

        for (Method m : {Method::Galerkin, Method::BC}) {
            const CouplingOperator q = make_coupling_operator(m, r, *tgt, *src);
            const FormDoFs out = apply_Q(q, w);
            CHECK((out.coeffs - expect.coeffs).cwiseAbs().maxCoeff() <= 1e-8);
        }
    }
}

TEST_CASE("defining relation holds after the projection solve")
{
    auto [ci, cj] = test_pair(1);
    const InitialData data = initial_data(1);
    const FormDoFs w = de_rham_map(ci->mesh, data.form);
    for (Method m : {Method::Galerkin, Method::BC}) {
        const CouplingOperator q = make_coupling_operator(m, 1, *cj, *ci);
        const FormDoFs out = apply_Q(q, w);
        const Eigen::VectorXd rhs = q.M_cross * w.coeffs;
        CHECK((q.M_own * out.coeffs - rhs).norm() <= 1e-6 * rhs.norm());
    }
}

TEST_CASE("commuting property of the operator families")
{
    auto [ci, cj] = test_pair(1);
    const InitialData data = initial_data(0);
    const FormDoFs w0 = de_rham_map(ci->mesh, data.form);
    const double scale0 = norm_L2(w0);

    const double r_derham = check_commuting(Method::DeRham, *ci, *cj, w0);
    CHECK(r_derham <= 1e-10 * scale0);
    const double r_bc = check_commuting(Method::BC, *ci, *cj, w0);
    CHECK(r_bc <= 1e-8 * scale0);
    const double r_galerkin = check_commuting(Method::Galerkin, *ci, *cj, w0);
    CHECK(r_galerkin > 1e-3 * scale0);

    SUBCASE("edge data as well")
    {
        const InitialData data1 = initial_data(1);
        const FormDoFs w1 = de_rham_map(ci->mesh, data1.form);
        const double scale1 = norm_L2(w1);
        CHECK(check_commuting(Method::DeRham, *ci, *cj, w1) <= 1e-10 * scale1);
        CHECK(check_commuting(Method::BC, *ci, *cj, w1) <= 1e-8 * scale1);
    }
}

TEST_CASE("operator coordinate export carries the metadata header")
{
    auto [ci, cj] = test_pair(0);
    const CouplingOperator q = make_coupling_operator(Method::BC, 0, *cj, *ci);
    std::stringstream ss;
    write_matrix_coord(ss, q);
    const std::string text = ss.str();
    CHECK(text.find("# method bc degree 0") != std::string::npos);
    CHECK(text.find("# M_own") != std::string::npos);
    CHECK(text.find("# M_cross") != std::string::npos);
}

TEST_CASE("degree and mesh mismatches are rejected")
{
    auto [ci, cj] = test_pair(0);
    const CouplingOperator q = make_coupling_operator(Method::Galerkin, 0, *cj, *ci);
    FormDoFs wrong_degree{1, &ci->mesh, Eigen::VectorXd::Zero(ci->mesh.num_edges())};
    CHECK_THROWS_AS(apply_Q(q, wrong_degree), std::runtime_error);
    FormDoFs wrong_mesh{0, &cj->mesh, Eigen::VectorXd::Zero(cj->mesh.num_nodes())};
    CHECK_THROWS_AS(apply_Q(q, wrong_mesh), std::runtime_error);
}
