#include "plod/coarse_space.hpp"
#include "plod/error.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace plod;

namespace {

constexpr double pi = std::numbers::pi;

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

// ||v_h - sum_j c_j Lambda_j||_{L2} over the whole domain, with v_h the bilinear interpolant,
// by Gauss quadrature on each fine cell.
double projection_error(const MeshHierarchy& mesh, int p, const Vector& v, const Vector& c)
{
    const GaussRule rule = gauss_legendre(p + 3);
    const int n = mesh.fine_cells_per_dim();
    const double h = mesh.fine_size();
    double sum = 0.0;
    for (int cy = 0; cy < n; ++cy) {
        for (int cx = 0; cx < n; ++cx) {
            const int element = mesh.element_of_fine_cell(cy * n + cx);
            const double v00 = v[mesh.vertex_index(cx, cy)];
            const double v10 = v[mesh.vertex_index(cx + 1, cy)];
            const double v01 = v[mesh.vertex_index(cx, cy + 1)];
            const double v11 = v[mesh.vertex_index(cx + 1, cy + 1)];
            for (std::size_t a = 0; a < rule.nodes.size(); ++a) {
                for (std::size_t b = 0; b < rule.nodes.size(); ++b) {
                    const double s = 0.5 * (rule.nodes[a] + 1.0);
                    const double t = 0.5 * (rule.nodes[b] + 1.0);
                    const double vh = (1 - s) * (1 - t) * v00 + s * (1 - t) * v10 + (1 - s) * t * v01 + s * t * v11;
                    double poly = 0.0;
                    for (int j = 0; j < modes_per_element(p); ++j) {
                        poly += c[coarse_dof(p, element, j)] * lambda_eval(mesh, p, element, j, {(cx + s) * h, (cy + t) * h});
                    }
                    sum += 0.25 * h * h * rule.weights[a] * rule.weights[b] * (vh - poly) * (vh - poly);
                }
            }
        }
    }
    return std::sqrt(sum);
}

} // namespace

TEST(Legendre, EndpointsAndOrthogonality)
{
    for (double t : {-1.0, -0.3, 0.0, 0.7}) {
        EXPECT_EQ(legendre(0, t), 1.0);
    }
    for (int p = 0; p <= 6; ++p) {
        EXPECT_NEAR(legendre(p, 1.0), 1.0, 1e-15);
    }
    EXPECT_NEAR(legendre(2, 0.5), 0.5 * (3 * 0.25 - 1), 1e-16);
    const GaussRule rule = gauss_legendre(10);
    double inner = 0.0;
    double norm = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        inner += rule.weights[i] * legendre(2, rule.nodes[i]) * legendre(3, rule.nodes[i]);
        norm += rule.weights[i] * legendre(3, rule.nodes[i]) * legendre(3, rule.nodes[i]);
    }
    EXPECT_LE(std::abs(inner), 1e-14);
    EXPECT_NEAR(norm, 2.0 / 7.0, 1e-14);
}

TEST(Legendre, GaussRuleExactness)
{
    for (int n = 1; n <= 8; ++n) {
        const GaussRule rule = gauss_legendre(n);
        for (int k = 0; k <= 2 * n - 1; ++k) {
            double sum = 0.0;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                sum += rule.weights[i] * std::pow(rule.nodes[i], k);
            }
            const double exact = k % 2 == 1 ? 0.0 : 2.0 / (k + 1);
            EXPECT_NEAR(sum, exact, 1e-14) << "n=" << n << " k=" << k;
        }
    }
}

TEST(Lambda, NormalizationAndOrthonormality)
{
    const MeshHierarchy mesh(2, 2, 4);
    const double h_coarse = mesh.coarse_size();
    const int element = mesh.element_index(1, 2);
    const Point corner = mesh.element_corner(element);
    EXPECT_DOUBLE_EQ(lambda_eval(mesh, 2, element, 0, {corner.x + 0.1, corner.y + 0.2}), 1.0 / h_coarse);
    EXPECT_NEAR(lambda_eval(mesh, 1, element, 1, {corner.x + h_coarse / 2, corner.y + 0.05}), 0.0, 1e-14);
    EXPECT_THROW(lambda_eval(mesh, 1, element, 1, {corner.x - 0.1, corner.y}), InvalidArgument);

    const GaussRule rule = gauss_legendre(5);
    for (int p = 0; p <= 3; ++p) {
        const int modes = modes_per_element(p);
        for (int i = 0; i < modes; ++i) {
            for (int j = 0; j < modes; ++j) {
                double inner = 0.0;
                for (std::size_t a = 0; a < rule.nodes.size(); ++a) {
                    for (std::size_t b = 0; b < rule.nodes.size(); ++b) {
                        const Point x{corner.x + 0.5 * h_coarse * (rule.nodes[a] + 1),
                                      corner.y + 0.5 * h_coarse * (rule.nodes[b] + 1)};
                        inner += 0.25 * h_coarse * h_coarse * rule.weights[a] * rule.weights[b] *
                                 lambda_eval(mesh, p, element, i, x) * lambda_eval(mesh, p, element, j, x);
                    }
                }
                EXPECT_NEAR(inner, i == j ? 1.0 : 0.0, 1e-13);
            }
        }
    }
}

TEST(MomentMap, ConstantAndZero)
{
    const MeshHierarchy mesh(2, 3, 5);
    const MomentMap mm = build_moment_map(mesh, 2);
    EXPECT_EQ(project(mm, Vector::Zero(mesh.vertex_count())).norm(), 0.0);
    const Vector c = project(mm, Vector::Ones(mesh.vertex_count()));
    for (int k = 0; k < mesh.element_count(); ++k) {
        EXPECT_NEAR(c[coarse_dof(2, k, 0)], mesh.coarse_size(), 1e-15);
        for (int j = 1; j < mm.modes(); ++j) {
            EXPECT_NEAR(c[coarse_dof(2, k, j)], 0.0, 1e-15);
        }
    }
}

TEST(MomentMap, ReproducesBilinearModes)
{
    // Modes of degree <= 1 per direction are bilinear, hence exact in the fine space.
    const MeshHierarchy mesh(2, 2, 5);
    const MomentMap mm = build_moment_map(mesh, 1);
    const int element = mesh.element_index(2, 1);
    const Point corner = mesh.element_corner(element);
    const double h_coarse = mesh.coarse_size();
    for (int j = 0; j < 4; ++j) {
        const int px = j % 2;
        const int py = j / 2;
        const Vector v = interpolate(mesh, [&](double x, double y) {
            const double sx = 2 * (x - corner.x) / h_coarse - 1;
            const double sy = 2 * (y - corner.y) / h_coarse - 1;
            return std::sqrt(2.0 * px + 1) * std::pow(sx, px) * std::sqrt(2.0 * py + 1) * std::pow(sy, py) / h_coarse;
        });
        const Vector c = project(mm, v);
        for (int i = 0; i < 4; ++i) {
            EXPECT_NEAR(c[coarse_dof(1, element, i)], i == j ? 1.0 : 0.0, 1e-13);
        }
    }
}

TEST(MomentMap, ProjectionIsStable)
{
    const MeshHierarchy mesh(2, 3, 5);
    const FineSystem sys = assemble(mesh, constant_field(mesh, 1.0));
    for (int p = 0; p <= 2; ++p) {
        const MomentMap mm = build_moment_map(mesh, p);
        for (unsigned s = 0; s < 100; ++s) {
            const Vector v = random_vector(mesh.vertex_count(), s);
            const double l2 = std::sqrt(v.dot(sys.mass_full * v));
            EXPECT_LE(coarse_l2_norm(project(mm, v)), l2 * (1 + 1e-12));
        }
    }
}

TEST(MomentMap, RowsAreLocal)
{
    const MeshHierarchy mesh(2, 2, 4);
    const MomentMap mm = build_moment_map(mesh, 1);
    Vector v = random_vector(mesh.vertex_count(), 3);
    const Vector before = project(mm, v);
    const int element = mesh.element_index(1, 1);
    const VertexBox closure = mesh.closure_box(mesh.element_rect(element));
    for (int i = 0; i < mesh.vertex_count(); ++i) {
        const auto [vx, vy] = mesh.vertex_coords(i);
        if (!closure.contains(vx, vy)) {
            v[i] += 10.0;
        }
    }
    const Vector after = project(mm, v);
    for (int j = 0; j < 4; ++j) {
        EXPECT_EQ(before[coarse_dof(1, element, j)], after[coarse_dof(1, element, j)]);
    }
}

TEST(MomentMap, ApproximationOrder)
{
    for (int p = 0; p <= 2; ++p) {
        std::vector<double> errors;
        for (int coarse_exp = 1; coarse_exp <= 3; ++coarse_exp) {
            const MeshHierarchy mesh(coarse_exp, coarse_exp, 7);
            const Vector v = interpolate(mesh, [](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); });
            errors.push_back(projection_error(mesh, p, v, project(build_moment_map(mesh, p), v)));
        }
        const double rate = std::log2(errors[1] / errors[2]);
        EXPECT_NEAR(rate, p + 1.0, 0.2) << "p=" << p;
    }
}

TEST(MomentMap, PatchConstraintsMatchGlobalRows)
{
    const MeshHierarchy mesh(2, 2, 4);
    const MomentMap mm = build_moment_map(mesh, 1);
    const ElementRect rect{1, 0, 2, 1};
    const VertexBox box = mesh.interior_box(rect);
    const SparseMatrix local = moment_constraints(mesh, mm, rect, box);
    const Vector v = random_vector(box.size(), 4);
    Vector full = Vector::Zero(mesh.vertex_count());
    for (int vy = box.y0; vy < box.y0 + box.ny; ++vy) {
        for (int vx = box.x0; vx < box.x0 + box.nx; ++vx) {
            full[mesh.vertex_index(vx, vy)] = v[box.local(vx, vy)];
        }
    }
    const Vector global = project(mm, full);
    const Vector restricted = local * v;
    int row = 0;
    for (int ey = rect.y0; ey <= rect.y1; ++ey) {
        for (int ex = rect.x0; ex <= rect.x1; ++ex) {
            for (int j = 0; j < 4; ++j, ++row) {
                EXPECT_NEAR(restricted[row], global[coarse_dof(1, mesh.element_index(ex, ey), j)], 1e-15);
            }
        }
    }
}
