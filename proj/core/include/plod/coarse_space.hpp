#pragma once

#include "plod/fine_fem.hpp"
#include "plod/mesh.hpp"

#include <vector>

namespace plod {

/// Legendre polynomial L_degree(t) on [-1, 1] via the three-term recurrence.
double legendre(int degree, double t);

struct GaussRule {
    std::vector<double> nodes;   // on [-1, 1]
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule, exact for polynomials of degree 2n - 1.
GaussRule gauss_legendre(int n);

/// Position (px, py) of a Legendre mode inside an element, and its flat index.
/// Flat index 0 is the constant mode; flat = py * (p + 1) + px.
struct CoarseBasisIndex {
    int element = 0;
    int px = 0;
    int py = 0;
    int flat = 0;
};

[[nodiscard]] inline int modes_per_element(int p) { return (p + 1) * (p + 1); }
CoarseBasisIndex coarse_basis_index(int p, int element, int flat);
[[nodiscard]] inline int coarse_dof(int p, int element, int flat) { return element * modes_per_element(p) + flat; }

/// L2(K)-orthonormal tensor Legendre function of mode `flat` on element K, evaluated at x in K.
double lambda_eval(const MeshHierarchy& mesh, int p, int element, int flat, Point x);

/// Realizes the elementwise L2 projection onto discontinuous polynomials of partial degree p.
///
/// Row (K, j) holds the moments (phi_v, Lambda_{K,j})_{L2(K)} of every fine hat function, so
/// with orthonormal Lambda the projection coefficients of a fine function are `matrix * v`.
/// The moments factor into one-dimensional tables, which are shared by all elements.
struct MomentMap {
    int p = 0;
    int ratio = 1;
    double coarse_size = 1.0;
    SparseMatrix matrix; // (elements * M) x fine vertices
    /// table_1d[q][a]: integral over [0, H] of the hat of local vertex a times sqrt(2q+1) L_q(2x/H - 1).
    std::vector<std::vector<double>> table_1d;

    [[nodiscard]] int modes() const { return modes_per_element(p); }
    /// Moment of the hat at local vertex (a, b) of an element against mode (px, py).
    [[nodiscard]] double local_moment(int px, int py, int a, int b) const
    {
        return table_1d[static_cast<std::size_t>(px)][static_cast<std::size_t>(a)] *
               table_1d[static_cast<std::size_t>(py)][static_cast<std::size_t>(b)] / coarse_size;
    }
};

MomentMap build_moment_map(const MeshHierarchy& mesh, int p);

/// Coarse coefficients c_{K,j} of the L2 projection of a fine function given on all vertices.
Vector project(const MomentMap& moments, const Vector& v_fine);

/// L2 norm of the coarse function with coefficients c (orthonormal basis).
inline double coarse_l2_norm(const Vector& c) { return c.norm(); }

/// Constraint rows of all modes of the elements in `rect`, restricted to the vertices of `box`.
/// Row order is element-major (row-major elements inside rect), then mode.
SparseMatrix moment_constraints(const MeshHierarchy& mesh, const MomentMap& moments, const ElementRect& rect,
                                const VertexBox& box);

} // namespace plod
