#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <random>

#include "oracle.hpp"
#include "schwarzdd/assembly.hpp"
#include "schwarzdd/krylov.hpp"
#include "schwarzdd/mesh.hpp"
#include "schwarzdd/partition.hpp"
#include "schwarzdd/preconditioner.hpp"

using namespace schwarzdd;

namespace {

struct Problem {
    Mesh mesh;
    DofMap dofmap;
    ProblemSpec<double> spec;
    AssembledSystem<double> sys;
    OverlappingDecomposition decomp;
};

Problem poisson_problem(index_t nx, index_t ny, index_t px, index_t py, int k,
                        bool dirichlet = true) {
    Problem p;
    p.mesh = structured_quad_mesh(nx, ny, 1.0, 1.0);
    p.dofmap = q1_dof_map(p.mesh);
    p.spec.bc["boundary"] = {dirichlet ? BcType::dirichlet : BcType::neumann, nullptr};
    p.spec.source = [](Point pt) { return 1.0 + pt.x + pt.y; };
    p.sys = assemble_global(p.mesh, p.dofmap, p.spec);
    p.decomp = extend_overlap_elements(partition_geometric(p.mesh, px, py),
                                       dual_graph(p.mesh), k, p.dofmap, p.mesh);
    return p;
}

LocalMatrixBuilder<double> robin_builder(const Problem& p, double alpha) {
    return [&p, alpha](index_t i) {
        const LocalMesh lm =
            build_local_mesh(p.mesh, p.decomp.elements[static_cast<std::size_t>(i)]);
        REQUIRE(lm.global_dof_of_local_dof == p.decomp.dofs[static_cast<std::size_t>(i)]);
        return assemble_local_robin(lm, p.spec, alpha);
    };
}

Vector<double> random_vector(index_t n, std::mt19937& rng) {
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    Vector<double> x(static_cast<std::size_t>(n));
    for (auto& v : x) v = val(rng);
    return x;
}

oracle::DenseMatrix<double> dense_apply_matrix(const SchwarzPreconditioner<double>& M) {
    oracle::DenseMatrix<double> D(M.n, M.n);
    for (index_t j = 0; j < M.n; ++j) {
        Vector<double> e(static_cast<std::size_t>(M.n), 0.0);
        e[static_cast<std::size_t>(j)] = 1.0;
        const auto col = M.apply(e);
        for (index_t i = 0; i < M.n; ++i) D(i, j) = col[static_cast<std::size_t>(i)];
    }
    return D;
}

}  // namespace

TEST_CASE("local_dirichlet_matrices: single subdomain strips the Dirichlet dofs") {
    Problem p = poisson_problem(3, 3, 1, 1, 0);
    const auto As = local_dirichlet_matrices(p.sys.A, p.decomp, p.sys.dirichlet_dofs);
    REQUIRE(As.size() == 1);
    CHECK(As[0].n_rows == 4);  // the four interior dofs of a 3x3 mesh

    const auto ints = interior_dofs(p.decomp, 0, p.sys.dirichlet_dofs);
    const auto R = oracle::restriction_matrix<double>(ints, p.decomp.n_dofs);
    const oracle::DenseMatrix<double> expected =
        R * oracle::to_dense(p.sys.A) * R.transpose();
    CHECK(oracle::to_dense(As[0]) == expected);
}

TEST_CASE("local_dirichlet_matrices: 4x1 strip with end Dirichlet, k=1") {
    // Dirichlet on the two short sides only, Neumann along the strip.
    const Mesh m = structured_quad_mesh(4, 1, 4.0, 1.0,
                                        SideMarks{"wall", "end", "wall", "end"});
    const DofMap dm = q1_dof_map(m);
    ProblemSpec<double> spec;
    spec.bc["wall"] = {BcType::neumann, nullptr};
    spec.bc["end"] = {BcType::dirichlet, nullptr};
    const auto sys = assemble_global(m, dm, spec);
    REQUIRE(sys.dirichlet_dofs == std::vector<index_t>{0, 4, 5, 9});

    const auto d = extend_overlap_elements(partition_geometric(m, 2, 1),
                                           dual_graph(m), 1, dm, m);
    const auto ints0 = interior_dofs(d, 0, sys.dirichlet_dofs);
    CHECK(ints0 == std::vector<index_t>{1, 2, 3, 6, 7, 8});

    const auto As = local_dirichlet_matrices(sys.A, d, sys.dirichlet_dofs);
    const auto R = oracle::restriction_matrix<double>(ints0, d.n_dofs);
    CHECK(oracle::to_dense(As[0]) ==
          oracle::DenseMatrix<double>(R * oracle::to_dense(sys.A) * R.transpose()));

    // Principal submatrices of an SPD matrix stay SPD.
    for (const auto& Ai : As) {
        Eigen::SelfAdjointEigenSolver<oracle::DenseMatrix<double>> es(
            oracle::to_dense(Ai));
        CHECK(es.eigenvalues()(0) > 0.0);
    }
}

TEST_CASE("local_dirichlet_matrices: empty interior is a configuration error") {
    Problem p = poisson_problem(1, 1, 1, 1, 0);  // every dof is Dirichlet
    CHECK_THROWS_AS(local_dirichlet_matrices(p.sys.A, p.decomp, p.sys.dirichlet_dofs),
                    std::invalid_argument);
}

TEST_CASE("apply: single subdomain AS is the exact inverse") {
    Problem p = poisson_problem(3, 3, 1, 1, 0);
    const auto M =
        build_one_level(p.sys.A, p.decomp, Variant::AS, nullptr, p.sys.dirichlet_dofs);
    std::mt19937 rng(41);
    const auto r = random_vector(p.decomp.n_dofs, rng);
    const auto z = M.apply(r);
    const auto zd =
        oracle::to_dense(p.sys.A).fullPivLu().solve(oracle::to_eigen(r)).eval();
    for (index_t i = 0; i < M.n; ++i)
        CHECK(z[static_cast<std::size_t>(i)] == doctest::Approx(zd(i)).epsilon(1e-12));
}

TEST_CASE("apply: RAS with A = I is the identity (partition of unity)") {
    const Mesh m = structured_quad_mesh(4, 1, 4.0, 1.0);
    const DofMap dm = q1_dof_map(m);
    const auto d = extend_overlap_elements(partition_geometric(m, 2, 1),
                                           dual_graph(m), 1, dm, m);
    std::vector<Triplet<double>> trips;
    for (index_t i = 0; i < d.n_dofs; ++i) trips.emplace_back(i, i, 1.0);
    const auto I = csr_from_triplets(std::move(trips), d.n_dofs, d.n_dofs);

    const auto M = build_one_level(I, d, Variant::RAS);
    std::mt19937 rng(43);
    const auto r = random_vector(d.n_dofs, rng);
    const auto z = M.apply(r);
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(z[i] == doctest::Approx(r[i]));
}

TEST_CASE("apply: linearity") {
    Problem p = poisson_problem(4, 4, 2, 2, 1);
    const auto M =
        build_one_level(p.sys.A, p.decomp, Variant::RAS, nullptr, p.sys.dirichlet_dofs);
    std::mt19937 rng(47);
    const auto r1 = random_vector(p.decomp.n_dofs, rng);
    const auto r2 = random_vector(p.decomp.n_dofs, rng);
    const double a = 0.7, b = -1.3;
    Vector<double> combo(r1.size());
    for (std::size_t i = 0; i < combo.size(); ++i) combo[i] = a * r1[i] + b * r2[i];
    const auto lhs = M.apply(combo);
    const auto z1 = M.apply(r1);
    const auto z2 = M.apply(r2);
    for (std::size_t i = 0; i < lhs.size(); ++i)
        CHECK(std::abs(lhs[i] - (a * z1[i] + b * z2[i])) <= 1e-14);
}

TEST_CASE("dense form: AS symmetric positive definite, RAS unsymmetric") {
    Problem p = poisson_problem(6, 6, 2, 1, 1);
    const auto AS =
        build_one_level(p.sys.A, p.decomp, Variant::AS, nullptr, p.sys.dirichlet_dofs);
    const auto Das = dense_apply_matrix(AS);
    CHECK((Das - Das.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    Eigen::SelfAdjointEigenSolver<oracle::DenseMatrix<double>> es(
        0.5 * (Das + Das.transpose()));
    CHECK(es.eigenvalues()(0) > 0.0);

    const auto RAS =
        build_one_level(p.sys.A, p.decomp, Variant::RAS, nullptr, p.sys.dirichlet_dofs);
    const auto Dras = dense_apply_matrix(RAS);
    CHECK((Dras - Dras.transpose()).cwiseAbs().maxCoeff() > 1e-10);
}

TEST_CASE("every variant is exact on a single subdomain: one GMRES iteration") {
    Problem p = poisson_problem(4, 4, 1, 1, 0);
    for (Variant v : {Variant::AS, Variant::RAS, Variant::SAS, Variant::OAS,
                      Variant::ORAS}) {
        const bool optimized = v == Variant::OAS || v == Variant::ORAS;
        const auto M = build_one_level(p.sys.A, p.decomp, v,
                                       optimized ? robin_builder(p, 1.0) : nullptr,
                                       p.sys.dirichlet_dofs);
        const auto [x, stats] =
            gmres(as_operator(p.sys.A), p.sys.b, M.as_linear_operator(), 1e-8, 50);
        CHECK(stats.converged);
        CHECK(stats.iterations == 1);
    }
}

TEST_CASE("apply matches the dense oracle for all variants on a small mesh") {
    Problem p = poisson_problem(4, 4, 2, 2, 1);
    std::vector<SparseMatrix<double>> Bs;
    auto builder = robin_builder(p, 1.0);
    for (index_t i = 0; i < 4; ++i) Bs.push_back(builder(i));

    std::mt19937 rng(53);
    const auto r = random_vector(p.decomp.n_dofs, rng);
    for (Variant v : {Variant::AS, Variant::RAS, Variant::SAS, Variant::OAS,
                      Variant::ORAS}) {
        const bool optimized = v == Variant::OAS || v == Variant::ORAS;
        const auto M = build_one_level(p.sys.A, p.decomp, v,
                                       optimized ? builder : nullptr,
                                       p.sys.dirichlet_dofs);
        const auto Md = oracle::dense_schwarz_inverse(
            p.sys.A, p.decomp, v, p.sys.dirichlet_dofs, optimized ? &Bs : nullptr);
        const auto z = M.apply(r);
        const auto zd = (Md * oracle::to_eigen(r)).eval();
        const double scale = zd.cwiseAbs().maxCoeff();
        for (index_t i = 0; i < M.n; ++i)
            CHECK(std::abs(z[static_cast<std::size_t>(i)] - zd(i)) <= 1e-12 * scale);
    }
}

TEST_CASE("two-level: coarse supports partition the free dofs") {
    Problem p = poisson_problem(6, 6, 2, 2, 1);
    const auto M1 =
        build_one_level(p.sys.A, p.decomp, Variant::RAS, nullptr, p.sys.dirichlet_dofs);
    const auto M2 = build_two_level(M1, p.sys.A);
    REQUIRE(M2.two_level());
    REQUIRE(M2.coarse->n_columns() == 4);

    std::size_t total = 0;
    std::set<index_t> seen;
    for (const auto& s : M2.coarse->supports) {
        total += s.size();
        seen.insert(s.begin(), s.end());
        for (index_t dof : s)
            CHECK(!std::binary_search(p.sys.dirichlet_dofs.begin(),
                                      p.sys.dirichlet_dofs.end(), dof));
    }
    CHECK(seen.size() == total);  // disjoint
    CHECK(total == static_cast<std::size_t>(p.decomp.n_dofs) -
                       p.sys.dirichlet_dofs.size());
}

TEST_CASE("two-level: apply matches the dense oracle with the coarse term") {
    Problem p = poisson_problem(6, 6, 2, 2, 1);
    const auto M1 =
        build_one_level(p.sys.A, p.decomp, Variant::RAS, nullptr, p.sys.dirichlet_dofs);
    const auto M2 = build_two_level(M1, p.sys.A);

    const auto Md = oracle::dense_schwarz_inverse(p.sys.A, p.decomp, Variant::RAS,
                                                  p.sys.dirichlet_dofs, nullptr,
                                                  &M2.coarse->supports);
    std::mt19937 rng(59);
    const auto r = random_vector(p.decomp.n_dofs, rng);
    const auto z = M2.apply(r);
    const auto zd = (Md * oracle::to_eigen(r)).eval();
    const double scale = zd.cwiseAbs().maxCoeff();
    for (index_t i = 0; i < M2.n; ++i)
        CHECK(std::abs(z[static_cast<std::size_t>(i)] - zd(i)) <= 1e-12 * scale);
}

TEST_CASE("two-level with N=1: eigenvalues collapse, GMRES needs at most 2 steps") {
    Problem p = poisson_problem(4, 4, 1, 1, 0);
    const auto M1 =
        build_one_level(p.sys.A, p.decomp, Variant::AS, nullptr, p.sys.dirichlet_dofs);
    const auto M2 = build_two_level(M1, p.sys.A);
    const auto [x, stats] =
        gmres(as_operator(p.sys.A), p.sys.b, M2.as_linear_operator(), 1e-8, 50);
    CHECK(stats.converged);
    CHECK(stats.iterations <= 2);
}

TEST_CASE("schwarz_operator: zero preservation, identity at N=1, linearity") {
    Problem p = poisson_problem(4, 4, 1, 1, 0);
    const auto M =
        build_one_level(p.sys.A, p.decomp, Variant::AS, nullptr, p.sys.dirichlet_dofs);
    const auto Q = schwarz_operator(M, p.sys.A);

    const Vector<double> zero(static_cast<std::size_t>(M.n), 0.0);
    CHECK(Q(zero) == zero);

    std::mt19937 rng(61);
    const auto x = random_vector(M.n, rng);
    const auto qx = Q(x);
    for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(qx[i] == doctest::Approx(x[i]).epsilon(1e-10));
}

TEST_CASE("combine: single operator, telescoping identity, rank-1 sum") {
    const index_t n = 2;
    LinearOperator<double> ident{n, [](const Vector<double>& x) { return x; }};
    LinearOperator<double> proj0{n, [](const Vector<double>& x) {
                                     return Vector<double>{x[0], 0.0};
                                 }};
    LinearOperator<double> proj1{n, [](const Vector<double>& x) {
                                     return Vector<double>{0.0, x[1]};
                                 }};

    const Vector<double> v{0.3, -0.8};
    for (CombineMode mode : {CombineMode::additive, CombineMode::multiplicative})
        CHECK(combine<double>({proj0}, mode)(v) == proj0(v));

    // Any identity factor telescopes the multiplicative product to I.
    CHECK(combine<double>({proj0, ident}, CombineMode::multiplicative)(v) == v);

    // Additive sum of the two coordinate projections applied to [1, 1].
    CHECK(combine<double>({proj0, proj1}, CombineMode::additive)(
              Vector<double>{1.0, 1.0}) == Vector<double>{1.0, 1.0});

    CHECK_THROWS_AS(combine<double>({}, CombineMode::additive), std::invalid_argument);
}

TEST_CASE("build_one_level: OAS/ORAS require a builder; threads agree with serial") {
    Problem p = poisson_problem(6, 6, 2, 2, 1);
    CHECK_THROWS_AS(build_one_level(p.sys.A, p.decomp, Variant::ORAS, nullptr,
                                    p.sys.dirichlet_dofs),
                    std::invalid_argument);

    SchwarzOptions threaded;
    threaded.n_threads = 4;
    const auto Mserial = build_one_level(p.sys.A, p.decomp, Variant::ORAS,
                                         robin_builder(p, 1.0), p.sys.dirichlet_dofs);
    const auto Mpar = build_one_level(p.sys.A, p.decomp, Variant::ORAS,
                                      robin_builder(p, 1.0), p.sys.dirichlet_dofs,
                                      threaded);
    std::mt19937 rng(67);
    const auto r = random_vector(p.decomp.n_dofs, rng);
    CHECK(Mserial.apply(r) == Mpar.apply(r));
}
