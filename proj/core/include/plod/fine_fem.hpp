#pragma once

#include "plod/coefficient.hpp"
#include "plod/mesh.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <vector>

namespace plod {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Vector = Eigen::VectorXd;
using Matrix4 = std::array<std::array<double, 4>, 4>;

/// Local vertex order of a fine cell: 0 = (0,0), 1 = (1,0), 2 = (0,1), 3 = (1,1).
struct ElementMatrices {
    Matrix4 stiffness{};
    Matrix4 mass{};
};

/// Exact bilinear (Q1) element matrices of a square cell for a constant coefficient.
ElementMatrices q1_element_matrices(double cell_size, double a_cell);

/// Fine Galerkin system. The *_full matrices act on all fine vertices (boundary included),
/// `stiffness` and `mass` on interior vertices only (homogeneous Dirichlet eliminated).
struct FineSystem {
    MeshHierarchy mesh;
    SparseMatrix stiffness_full;
    SparseMatrix mass_full;
    SparseMatrix stiffness;
    SparseMatrix mass;
    std::vector<int> interior_vertices;  // interior dof -> vertex
    std::vector<int> vertex_to_interior; // vertex -> interior dof or -1
    std::vector<unsigned char> boundary_mask; // per vertex

    [[nodiscard]] int interior_count() const { return static_cast<int>(interior_vertices.size()); }
    [[nodiscard]] Vector restrict_to_interior(const Vector& full) const;
    [[nodiscard]] Vector extend_from_interior(const Vector& interior) const;
};

/// Assembles stiffness and mass. Cells are processed in row-major order with a fixed
/// summation order so the result does not depend on `threads`.
FineSystem assemble(const MeshHierarchy& mesh, const CoefficientField& coefficient, int threads = 1);

/// Nodal interpolant of a function on all fine vertices.
template <class F>
Vector interpolate(const MeshHierarchy& mesh, F&& function)
{
    Vector v(mesh.vertex_count());
    for (int i = 0; i < mesh.vertex_count(); ++i) {
        const Point x = mesh.vertex_point(i);
        v[i] = function(x.x, x.y);
    }
    return v;
}

/// Stiffness on the fine cells of `cells`, restricted to the vertices of `box` (local numbering).
/// A null coefficient means A = 1.
SparseMatrix assemble_box_stiffness(const MeshHierarchy& mesh, const CoefficientField* coefficient,
                                    const ElementRect& cells, const VertexBox& box);

/// out[box] += a|_element(v, phi_i) for every vertex i of `box`; v is given on `v_box`.
void add_element_stiffness_action(const MeshHierarchy& mesh, const CoefficientField& coefficient,
                                  int element, const VertexBox& v_box, const Vector& v,
                                  const VertexBox& box, Vector& out);

} // namespace plod
