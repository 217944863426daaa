#include "plod/coarse_space.hpp"
#include "plod/error.hpp"
#include "plod/linear_solvers.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <random>

using namespace plod;

namespace {

Vector random_vector(int n, unsigned seed)
{
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector v(n);
    for (int i = 0; i < n; ++i) {
        v[i] = u(rng);
    }
    return v;
}

SparseMatrix random_rows(int m, int n, int per_row, unsigned seed)
{
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> col(0, n - 1);
    std::uniform_real_distribution<double> val(0.5, 2.0);
    std::vector<Eigen::Triplet<double>> t;
    for (int i = 0; i < m; ++i) {
        for (int k = 0; k < per_row; ++k) {
            t.emplace_back(i, col(rng), val(rng));
        }
    }
    SparseMatrix c(m, n);
    c.setFromTriplets(t.begin(), t.end());
    return c;
}

} // namespace

TEST(SpdSolve, IdentityReturnsRhs)
{
    SparseMatrix eye(5, 5);
    eye.setIdentity();
    const Vector b = random_vector(5, 3);
    EXPECT_LT((solve_spd(eye, b) - b).norm(), 1e-15);
}

TEST(SpdSolve, ManufacturedSolution)
{
    const MeshHierarchy mesh(1, 4, 5);
    const FineSystem sys = assemble(mesh, checkerboard(mesh, 17, 1.0, 10.0));
    const Vector u = random_vector(sys.interior_count(), 5);
    const Vector b = sys.stiffness * u;
    for (SpdMethod method : {SpdMethod::direct, SpdMethod::conjugate_gradient}) {
        const SpdFactorization f(sys.stiffness, method);
        EXPECT_LT((f.solve(b) - u).norm() / u.norm(), 1e-9);
    }
}

TEST(SpdSolve, DensePathForFullMatrices)
{
    Eigen::MatrixXd a = Eigen::MatrixXd::Random(40, 40);
    a = a * a.transpose() + 40.0 * Eigen::MatrixXd::Identity(40, 40);
    const SpdFactorization f(a.sparseView());
    EXPECT_TRUE(f.is_dense());
    const Vector b = random_vector(40, 1);
    EXPECT_LT((a * f.solve(b) - b).norm(), 1e-11);
}

TEST(SpdSolve, GalerkinOrthogonality)
{
    const MeshHierarchy mesh(0, 0, 5);
    const FineSystem sys = assemble(mesh, analytic_smooth(mesh));
    const Vector f = random_vector(sys.interior_count(), 9);
    const Vector u = solve_spd(sys.stiffness, sys.mass * f);
    const Vector residual = sys.mass * f - sys.stiffness * u;
    for (unsigned s = 0; s < 5; ++s) {
        const Vector v = random_vector(sys.interior_count(), 100 + s);
        EXPECT_LT(std::abs(v.dot(residual)), 1e-12 * (sys.mass * f).norm() * v.norm());
    }
}

TEST(Kkt, ZeroDataGivesZero)
{
    const MeshHierarchy mesh(0, 0, 3);
    const FineSystem sys = assemble(mesh, constant_field(mesh, 1.0));
    const SparseMatrix c = random_rows(4, sys.interior_count(), 5, 2);
    const KktSolution s = solve_kkt(sys.stiffness, c, Vector::Zero(sys.interior_count()), Vector::Zero(4));
    EXPECT_EQ(s.primal.norm(), 0.0);
}

TEST(Kkt, UnconstrainedMatchesSpd)
{
    const MeshHierarchy mesh(0, 0, 4);
    const FineSystem sys = assemble(mesh, analytic_smooth(mesh));
    const Vector b = random_vector(sys.interior_count(), 4);
    const SparseMatrix none(0, sys.interior_count());
    const KktSolution s = solve_kkt(sys.stiffness, none, b, Vector(0));
    EXPECT_LT((s.primal - solve_spd(sys.stiffness, b)).norm(), 1e-12 * s.primal.norm());
}

TEST(Kkt, MatchesDenseSaddlePointSolve)
{
    const MeshHierarchy mesh(0, 0, 4);
    const FineSystem sys = assemble(mesh, checkerboard(mesh, 3, 1.0, 10.0));
    const int n = sys.interior_count();
    const int m = 12;
    const SparseMatrix c = random_rows(m, n, 8, 7);
    const Vector f = random_vector(n, 1);
    const Vector g = random_vector(m, 2);
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n + m, n + m);
    dense.topLeftCorner(n, n) = Eigen::MatrixXd(sys.stiffness);
    dense.bottomLeftCorner(m, n) = Eigen::MatrixXd(c);
    dense.topRightCorner(n, m) = Eigen::MatrixXd(c).transpose();
    Vector rhs(n + m);
    rhs << f, g;
    const Vector expected = dense.fullPivLu().solve(rhs);
    const KktSolution s = solve_kkt(sys.stiffness, c, f, g);
    EXPECT_LT((s.primal - expected.head(n)).norm(), 1e-10 * expected.head(n).norm());
    EXPECT_LT((s.multipliers - expected.tail(m)).norm(), 1e-9 * expected.tail(m).norm());
}

TEST(Kkt, PatchConstraintResidual)
{
    // 2x2 coarse elements, p = 0, four fine cells per coarse edge.
    const MeshHierarchy mesh(1, 1, 3);
    const FineSystem sys = assemble(mesh, checkerboard(mesh, 5, 1.0, 10.0));
    const MomentMap moments = build_moment_map(mesh, 0);
    const VertexBox box = mesh.interior_box(mesh.full_rect());
    const SparseMatrix c = moment_constraints(mesh, moments, mesh.full_rect(), box);
    ASSERT_EQ(c.rows(), 4);
    const Vector f = random_vector(box.size(), 8);
    const Vector g = random_vector(4, 9);
    const KktSolution s = solve_kkt(sys.stiffness, c, f, g);
    EXPECT_LE((c * s.primal - g).norm(), 1e-10);
    EXPECT_LE((sys.stiffness * s.primal + c.transpose() * s.multipliers - f).norm(), 1e-10 * f.norm());
}

TEST(Kkt, DetectsRankDeficiency)
{
    const MeshHierarchy mesh(0, 0, 3);
    const FineSystem sys = assemble(mesh, constant_field(mesh, 1.0));
    SparseMatrix c = random_rows(3, sys.interior_count(), 4, 1);
    std::vector<Eigen::Triplet<double>> t;
    for (int k = 0; k < c.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(c, k); it; ++it) {
            t.emplace_back(static_cast<int>(it.row()), k, it.value());
            if (it.row() == 0) {
                t.emplace_back(3, k, 2.0 * it.value());
            }
        }
    }
    SparseMatrix dependent(4, sys.interior_count());
    dependent.setFromTriplets(t.begin(), t.end());
    EXPECT_THROW(KktFactorization(sys.stiffness, dependent), SolverError);

    SparseMatrix zero_row(1, sys.interior_count());
    EXPECT_THROW(KktFactorization(sys.stiffness, zero_row), SolverError);
}

TEST(Kkt, OrderingKeepsFillLocal)
{
    // The saddle-point factor should cost about as much as a Cholesky factor of the stiffness
    // block under AMD plus the constraint rows; a wrong permutation multiplies the fill.
    const MeshHierarchy mesh(2, 2, 6);
    const FineSystem sys = assemble(mesh, constant_field(mesh, 1.0));
    const MomentMap moments = build_moment_map(mesh, 1);
    const VertexBox box = mesh.interior_box(mesh.full_rect());
    const SparseMatrix constraints = moment_constraints(mesh, moments, mesh.full_rect(), box);
    const KktFactorization f(sys.stiffness, constraints);
    const Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> cholesky(sys.stiffness);
    const double baseline =
        static_cast<double>(cholesky.matrixL().nestedExpression().nonZeros() + constraints.nonZeros());
    EXPECT_LT(static_cast<double>(f.factor_nonzeros()), 1.5 * baseline);
}
