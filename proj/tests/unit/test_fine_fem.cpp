#include "plod/fine_fem.hpp"
#include "plod/linear_solvers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace plod;

namespace {

constexpr double pi = std::numbers::pi;

// Element matrices by 2x2 Gauss quadrature of the bilinear shape functions.
ElementMatrices quadrature_matrices(double h, double a)
{
    const double g = 0.5 / std::sqrt(3.0);
    const double points[2] = {0.5 - g, 0.5 + g};
    auto shape = [](int i, double s, double t) {
        const double sx = (i & 1) ? s : 1.0 - s;
        const double sy = (i & 2) ? t : 1.0 - t;
        return sx * sy;
    };
    auto grad = [](int i, double s, double t) {
        const double sx = (i & 1) ? s : 1.0 - s;
        const double sy = (i & 2) ? t : 1.0 - t;
        const double dx = (i & 1) ? 1.0 : -1.0;
        const double dy = (i & 2) ? 1.0 : -1.0;
        return std::array<double, 2>{dx * sy, sx * dy};
    };
    ElementMatrices m;
    for (double s : points) {
        for (double t : points) {
            for (int i = 0; i < 4; ++i) {
                for (int j = 0; j < 4; ++j) {
                    const auto gi = grad(i, s, t);
                    const auto gj = grad(j, s, t);
                    // Gradients scale with 1/h, the area with h^2; weights 1/4.
                    m.stiffness[i][j] += 0.25 * a * (gi[0] * gj[0] + gi[1] * gj[1]);
                    m.mass[i][j] += 0.25 * h * h * shape(i, s, t) * shape(j, s, t);
                }
            }
        }
    }
    return m;
}

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

} // namespace

TEST(FineFem, ElementMatricesMatchQuadrature)
{
    for (double h : {1.0, 0.125}) {
        for (double a : {1.0, 3.5}) {
            const ElementMatrices exact = q1_element_matrices(h, a);
            const ElementMatrices quad = quadrature_matrices(h, a);
            for (int i = 0; i < 4; ++i) {
                for (int j = 0; j < 4; ++j) {
                    EXPECT_NEAR(exact.stiffness[i][j], quad.stiffness[i][j], 1e-14);
                    EXPECT_NEAR(exact.mass[i][j], quad.mass[i][j], 1e-16);
                }
            }
        }
    }
    const ElementMatrices unit = q1_element_matrices(1.0, 1.0);
    EXPECT_NEAR(unit.stiffness[0][0], 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(unit.stiffness[0][1], -1.0 / 6.0, 1e-15);
    EXPECT_NEAR(unit.stiffness[0][3], -1.0 / 3.0, 1e-15);
    EXPECT_NEAR(unit.mass[0][0], 4.0 / 36.0, 1e-15);
    EXPECT_NEAR(unit.mass[0][3], 1.0 / 36.0, 1e-15);
}

TEST(FineFem, ConstantsInKernelAndUnitMass)
{
    const MeshHierarchy mesh(1, 3, 4);
    const FineSystem sys = assemble(mesh, checkerboard(mesh, 3, 1.0, 10.0));
    const Vector ones = Vector::Ones(mesh.vertex_count());
    EXPECT_LT((sys.stiffness_full * ones).lpNorm<Eigen::Infinity>(), 1e-12);
    EXPECT_NEAR(ones.dot(sys.mass_full * ones), 1.0, 1e-14);
    EXPECT_EQ(sys.interior_count(), 15 * 15);
}

TEST(FineFem, LinearInCoefficient)
{
    const MeshHierarchy mesh(1, 2, 4);
    const FineSystem one = assemble(mesh, constant_field(mesh, 1.0));
    const FineSystem two = assemble(mesh, constant_field(mesh, 2.0));
    EXPECT_LT((SparseMatrix(two.stiffness_full - 2.0 * one.stiffness_full)).norm(), 1e-13);
}

TEST(FineFem, RayleighQuotientApproachesFirstEigenvalue)
{
    const MeshHierarchy mesh(0, 0, 6);
    const FineSystem sys = assemble(mesh, constant_field(mesh, 1.0));
    const Vector v = interpolate(mesh, [](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); });
    const double rq = v.dot(sys.stiffness_full * v) / v.dot(sys.mass_full * v);
    EXPECT_NEAR(rq / (2.0 * pi * pi), 1.0, 0.02);
}

TEST(FineFem, CoefficientSandwich)
{
    const MeshHierarchy mesh(1, 3, 5);
    const CoefficientField a = checkerboard(mesh, 11, 1.0, 10.0);
    const FineSystem sys = assemble(mesh, a);
    const FineSystem lap = assemble(mesh, constant_field(mesh, 1.0));
    for (unsigned s = 0; s < 100; ++s) {
        const Vector v = random_vector(sys.interior_count(), s);
        const double ratio = v.dot(sys.stiffness * v) / v.dot(lap.stiffness * v);
        EXPECT_GE(ratio, a.alpha * (1 - 1e-12));
        EXPECT_LE(ratio, a.beta * (1 + 1e-12));
    }
}

TEST(FineFem, AssemblyIndependentOfThreads)
{
    const MeshHierarchy mesh(2, 4, 6);
    const CoefficientField a = checkerboard(mesh, 4, 1.0, 10.0);
    const FineSystem one = assemble(mesh, a, 1);
    const FineSystem four = assemble(mesh, a, 4);
    ASSERT_EQ(one.stiffness_full.nonZeros(), four.stiffness_full.nonZeros());
    for (Eigen::Index k = 0; k < one.stiffness_full.nonZeros(); ++k) {
        EXPECT_EQ(one.stiffness_full.valuePtr()[k], four.stiffness_full.valuePtr()[k]);
    }
}

TEST(FineFem, PoissonCenterValueMatchesSeries)
{
    // -Laplace u = 1 on the unit square, u(1/2,1/2) from the double sine series.
    double series = 0.0;
    for (int m = 1; m < 400; m += 2) {
        for (int n = 1; n < 400; n += 2) {
            series += 16.0 / (std::pow(pi, 4) * m * n * (m * m + n * n)) * std::sin(m * pi / 2) * std::sin(n * pi / 2);
        }
    }
    const MeshHierarchy mesh(0, 0, 7);
    const FineSystem sys = assemble(mesh, constant_field(mesh, 1.0));
    const Vector load = sys.restrict_to_interior(sys.mass_full * Vector::Ones(mesh.vertex_count()));
    const Vector u = sys.extend_from_interior(solve_spd(sys.stiffness, load));
    EXPECT_NEAR(u.maxCoeff(), series, 1e-4);
    EXPECT_NEAR(u[mesh.vertex_index(64, 64)], 0.07367, 1e-4);
}

TEST(FineFem, BoxStiffnessMatchesGlobalOnFullBox)
{
    const MeshHierarchy mesh(2, 3, 4);
    const CoefficientField a = checkerboard(mesh, 2, 1.0, 5.0);
    const FineSystem sys = assemble(mesh, a);
    const VertexBox interior = mesh.interior_box(mesh.full_rect());
    const SparseMatrix box = assemble_box_stiffness(mesh, &a, mesh.full_rect(), interior);
    EXPECT_LT(SparseMatrix(box - sys.stiffness).norm(), 1e-12);
}

TEST(FineFem, ElementActionSumsToGlobalProduct)
{
    const MeshHierarchy mesh(2, 3, 4);
    const CoefficientField a = checkerboard(mesh, 8, 1.0, 5.0);
    const FineSystem sys = assemble(mesh, a);
    const Vector v = random_vector(mesh.vertex_count(), 1);
    const VertexBox all{0, 0, mesh.vertices_per_dim(), mesh.vertices_per_dim()};
    Vector out = Vector::Zero(all.size());
    for (int k = 0; k < mesh.element_count(); ++k) {
        add_element_stiffness_action(mesh, a, k, all, v, all, out);
    }
    EXPECT_LT((out - sys.stiffness_full * v).norm(), 1e-11);
}
