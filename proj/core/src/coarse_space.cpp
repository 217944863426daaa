#include "plod/coarse_space.hpp"

#include "plod/error.hpp"

#include <cmath>
#include <numbers>

namespace plod {

double legendre(int degree, double t)
{
    if (degree < 0) {
        throw InvalidArgument("Legendre degree must be non-negative");
    }
    if (degree == 0) {
        return 1.0;
    }
    double prev = 1.0;
    double curr = t;
    for (int n = 1; n < degree; ++n) {
        const double next = ((2.0 * n + 1.0) * t * curr - n * prev) / (n + 1.0);
        prev = curr;
        curr = next;
    }
    return curr;
}

GaussRule gauss_legendre(int n)
{
    if (n < 1) {
        throw InvalidArgument("Gauss rule needs at least one point");
    }
    GaussRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double derivative = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            const double pn = legendre(n, x);
            const double pn1 = legendre(n - 1, x);
            derivative = n * (x * pn - pn1) / (x * x - 1.0);
            const double dx = pn / derivative;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        const double pn1 = legendre(n - 1, x);
        derivative = n * (x * legendre(n, x) - pn1) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * derivative * derivative);
        rule.nodes[static_cast<std::size_t>(i)] = -x;
        rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        rule.weights[static_cast<std::size_t>(i)] = w;
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    return rule;
}

CoarseBasisIndex coarse_basis_index(int p, int element, int flat)
{
    if (flat < 0 || flat >= modes_per_element(p)) {
        throw InvalidArgument("mode index out of range");
    }
    return {element, flat % (p + 1), flat / (p + 1), flat};
}

double lambda_eval(const MeshHierarchy& mesh, int p, int element, int flat, Point x)
{
    const CoarseBasisIndex idx = coarse_basis_index(p, element, flat);
    const Point corner = mesh.element_corner(element);
    const double h_coarse = mesh.coarse_size();
    const double sx = (x.x - corner.x) / h_coarse;
    const double sy = (x.y - corner.y) / h_coarse;
    constexpr double slack = 1e-12;
    if (sx < -slack || sx > 1.0 + slack || sy < -slack || sy > 1.0 + slack) {
        throw InvalidArgument("point lies outside the element");
    }
    return std::sqrt(2.0 * idx.px + 1.0) * legendre(idx.px, 2.0 * sx - 1.0) * std::sqrt(2.0 * idx.py + 1.0) *
           legendre(idx.py, 2.0 * sy - 1.0) / h_coarse;
}

MomentMap build_moment_map(const MeshHierarchy& mesh, int p)
{
    if (p < 0) {
        throw InvalidArgument("polynomial degree must be non-negative");
    }
    MomentMap mm;
    mm.p = p;
    mm.ratio = mesh.ratio();
    mm.coarse_size = mesh.coarse_size();
    const int r = mm.ratio;
    const double h = mesh.fine_size();
    const double h_coarse = mesh.coarse_size();

    // Integrand is (piecewise linear hat) x (degree q), so ceil((p + 2) / 2) + 1 points are exact.
    const GaussRule rule = gauss_legendre((p + 3) / 2 + 1);
    mm.table_1d.assign(static_cast<std::size_t>(p + 1), std::vector<double>(static_cast<std::size_t>(r + 1), 0.0));
    for (int q = 0; q <= p; ++q) {
        const double norm = std::sqrt(2.0 * q + 1.0);
        auto& row = mm.table_1d[static_cast<std::size_t>(q)];
        for (int cell = 0; cell < r; ++cell) {
            for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
                const double s = 0.5 * (rule.nodes[g] + 1.0); // in [0, 1] within the fine cell
                const double x = (cell + s) * h;
                const double weight = 0.5 * h * rule.weights[g];
                const double poly = norm * legendre(q, 2.0 * x / h_coarse - 1.0);
                row[static_cast<std::size_t>(cell)] += weight * (1.0 - s) * poly;
                row[static_cast<std::size_t>(cell + 1)] += weight * s * poly;
            }
        }
    }

    const int modes = mm.modes();
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(mesh.element_count()) * static_cast<std::size_t>(modes) *
                     static_cast<std::size_t>((r + 1) * (r + 1)));
    for (int element = 0; element < mesh.element_count(); ++element) {
        const auto [ex, ey] = mesh.element_coords(element);
        for (int j = 0; j < modes; ++j) {
            const int px = j % (p + 1);
            const int py = j / (p + 1);
            for (int b = 0; b <= r; ++b) {
                for (int a = 0; a <= r; ++a) {
                    triplets.emplace_back(coarse_dof(p, element, j), mesh.vertex_index(ex * r + a, ey * r + b),
                                          mm.local_moment(px, py, a, b));
                }
            }
        }
    }
    mm.matrix.resize(mesh.element_count() * modes, mesh.vertex_count());
    mm.matrix.setFromTriplets(triplets.begin(), triplets.end());
    return mm;
}

Vector project(const MomentMap& moments, const Vector& v_fine)
{
    if (v_fine.size() != moments.matrix.cols()) {
        throw InvalidArgument("fine vector must be given on all fine vertices");
    }
    return moments.matrix * v_fine;
}

SparseMatrix moment_constraints(const MeshHierarchy& mesh, const MomentMap& moments, const ElementRect& rect,
                                const VertexBox& box)
{
    const int r = mesh.ratio();
    const int p = moments.p;
    const int modes = moments.modes();
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(rect.count() * modes * (r + 1) * (r + 1)));
    int element_slot = 0;
    for (int ey = rect.y0; ey <= rect.y1; ++ey) {
        for (int ex = rect.x0; ex <= rect.x1; ++ex, ++element_slot) {
            for (int j = 0; j < modes; ++j) {
                const int row = element_slot * modes + j;
                const int px = j % (p + 1);
                const int py = j / (p + 1);
                for (int b = 0; b <= r; ++b) {
                    for (int a = 0; a <= r; ++a) {
                        const int vx = ex * r + a;
                        const int vy = ey * r + b;
                        if (box.contains(vx, vy)) {
                            triplets.emplace_back(row, box.local(vx, vy), moments.local_moment(px, py, a, b));
                        }
                    }
                }
            }
        }
    }
    SparseMatrix out(rect.count() * modes, box.size());
    out.setFromTriplets(triplets.begin(), triplets.end());
    return out;
}

} // namespace plod
