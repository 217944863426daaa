#include "plod/fine_fem.hpp"

#include "plod/error.hpp"
#include "plod/parallel.hpp"

#include <Eigen/SparseCore>

namespace plod {

ElementMatrices q1_element_matrices(double cell_size, double a_cell)
{
    // Reference integrals of bilinear shape functions on a square; stiffness is scale-free in 2D.
    static constexpr Matrix4 stiffness_ref = {{{4.0, -1.0, -1.0, -2.0},
                                               {-1.0, 4.0, -2.0, -1.0},
                                               {-1.0, -2.0, 4.0, -1.0},
                                               {-2.0, -1.0, -1.0, 4.0}}};
    static constexpr Matrix4 mass_ref = {{{4.0, 2.0, 2.0, 1.0},
                                          {2.0, 4.0, 1.0, 2.0},
                                          {2.0, 1.0, 4.0, 2.0},
                                          {1.0, 2.0, 2.0, 4.0}}};
    ElementMatrices m;
    const double mass_scale = cell_size * cell_size / 36.0;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            m.stiffness[i][j] = a_cell * stiffness_ref[i][j] / 6.0;
            m.mass[i][j] = mass_scale * mass_ref[i][j];
        }
    }
    return m;
}

namespace {

std::array<int, 4> cell_vertices(const MeshHierarchy& mesh, int cx, int cy)
{
    const int v0 = mesh.vertex_index(cx, cy);
    const int nv = mesh.vertices_per_dim();
    return {v0, v0 + 1, v0 + nv, v0 + nv + 1};
}

SparseMatrix restrict_square(const SparseMatrix& full, const std::vector<int>& vertex_to_interior, int n)
{
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(full.nonZeros()));
    for (int col = 0; col < full.outerSize(); ++col) {
        const int jc = vertex_to_interior[static_cast<std::size_t>(col)];
        if (jc < 0) {
            continue;
        }
        for (SparseMatrix::InnerIterator it(full, col); it; ++it) {
            const int ir = vertex_to_interior[static_cast<std::size_t>(it.row())];
            if (ir >= 0) {
                triplets.emplace_back(ir, jc, it.value());
            }
        }
    }
    SparseMatrix out(n, n);
    out.setFromTriplets(triplets.begin(), triplets.end());
    return out;
}

} // namespace

Vector FineSystem::restrict_to_interior(const Vector& full) const
{
    Vector out(interior_count());
    for (int i = 0; i < interior_count(); ++i) {
        out[i] = full[interior_vertices[static_cast<std::size_t>(i)]];
    }
    return out;
}

Vector FineSystem::extend_from_interior(const Vector& interior) const
{
    Vector out = Vector::Zero(mesh.vertex_count());
    for (int i = 0; i < interior_count(); ++i) {
        out[interior_vertices[static_cast<std::size_t>(i)]] = interior[i];
    }
    return out;
}

FineSystem assemble(const MeshHierarchy& mesh, const CoefficientField& coefficient, int threads)
{
    if (static_cast<int>(coefficient.values.size()) != mesh.fine_cell_count()) {
        throw InvalidArgument("coefficient does not match the fine mesh");
    }
    const int n = mesh.fine_cells_per_dim();
    const ElementMatrices unit = q1_element_matrices(mesh.fine_size(), 1.0);

    // One triplet block per cell row; concatenated in row order this fixes the summation order.
    std::vector<std::vector<Eigen::Triplet<double>>> stiff_rows(static_cast<std::size_t>(n));
    std::vector<std::vector<Eigen::Triplet<double>>> mass_rows(static_cast<std::size_t>(n));
    parallel_for(n, threads, [&](int cy) {
        auto& st = stiff_rows[static_cast<std::size_t>(cy)];
        auto& ma = mass_rows[static_cast<std::size_t>(cy)];
        st.reserve(static_cast<std::size_t>(16 * n));
        ma.reserve(static_cast<std::size_t>(16 * n));
        for (int cx = 0; cx < n; ++cx) {
            const double a = coefficient[cy * n + cx];
            const auto v = cell_vertices(mesh, cx, cy);
            for (int i = 0; i < 4; ++i) {
                for (int j = 0; j < 4; ++j) {
                    st.emplace_back(v[i], v[j], a * unit.stiffness[i][j]);
                    ma.emplace_back(v[i], v[j], unit.mass[i][j]);
                }
            }
        }
    });
    std::vector<Eigen::Triplet<double>> stiff;
    std::vector<Eigen::Triplet<double>> mass;
    stiff.reserve(static_cast<std::size_t>(16) * static_cast<std::size_t>(mesh.fine_cell_count()));
    mass.reserve(stiff.capacity());
    for (int cy = 0; cy < n; ++cy) {
        stiff.insert(stiff.end(), stiff_rows[static_cast<std::size_t>(cy)].begin(), stiff_rows[static_cast<std::size_t>(cy)].end());
        mass.insert(mass.end(), mass_rows[static_cast<std::size_t>(cy)].begin(), mass_rows[static_cast<std::size_t>(cy)].end());
    }

    FineSystem sys;
    sys.mesh = mesh;
    const int nv = mesh.vertex_count();
    sys.stiffness_full.resize(nv, nv);
    sys.stiffness_full.setFromTriplets(stiff.begin(), stiff.end());
    sys.mass_full.resize(nv, nv);
    sys.mass_full.setFromTriplets(mass.begin(), mass.end());

    sys.vertex_to_interior.assign(static_cast<std::size_t>(nv), -1);
    sys.boundary_mask.assign(static_cast<std::size_t>(nv), 0);
    for (int vy = 0; vy <= n; ++vy) {
        for (int vx = 0; vx <= n; ++vx) {
            const int v = mesh.vertex_index(vx, vy);
            if (mesh.is_boundary_vertex(vx, vy)) {
                sys.boundary_mask[static_cast<std::size_t>(v)] = 1;
            } else {
                sys.vertex_to_interior[static_cast<std::size_t>(v)] = static_cast<int>(sys.interior_vertices.size());
                sys.interior_vertices.push_back(v);
            }
        }
    }
    sys.stiffness = restrict_square(sys.stiffness_full, sys.vertex_to_interior, sys.interior_count());
    sys.mass = restrict_square(sys.mass_full, sys.vertex_to_interior, sys.interior_count());
    return sys;
}

SparseMatrix assemble_box_stiffness(const MeshHierarchy& mesh, const CoefficientField* coefficient,
                                    const ElementRect& cells, const VertexBox& box)
{
    const int r = mesh.ratio();
    const int n = mesh.fine_cells_per_dim();
    const ElementMatrices unit = q1_element_matrices(mesh.fine_size(), 1.0);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(16) * static_cast<std::size_t>(cells.count() * r * r));
    for (int cy = cells.y0 * r; cy < (cells.y1 + 1) * r; ++cy) {
        for (int cx = cells.x0 * r; cx < (cells.x1 + 1) * r; ++cx) {
            const double a = coefficient != nullptr ? (*coefficient)[cy * n + cx] : 1.0;
            const std::array<int, 4> lx = {cx, cx + 1, cx, cx + 1};
            const std::array<int, 4> ly = {cy, cy, cy + 1, cy + 1};
            std::array<int, 4> local{};
            for (int i = 0; i < 4; ++i) {
                local[i] = box.contains(lx[i], ly[i]) ? box.local(lx[i], ly[i]) : -1;
            }
            for (int i = 0; i < 4; ++i) {
                if (local[i] < 0) {
                    continue;
                }
                for (int j = 0; j < 4; ++j) {
                    if (local[j] >= 0) {
                        triplets.emplace_back(local[i], local[j], a * unit.stiffness[i][j]);
                    }
                }
            }
        }
    }
    SparseMatrix out(box.size(), box.size());
    out.setFromTriplets(triplets.begin(), triplets.end());
    return out;
}

void add_element_stiffness_action(const MeshHierarchy& mesh, const CoefficientField& coefficient, int element,
                                  const VertexBox& v_box, const Vector& v, const VertexBox& box, Vector& out)
{
    const int r = mesh.ratio();
    const int n = mesh.fine_cells_per_dim();
    const auto [ex, ey] = mesh.element_coords(element);
    const ElementMatrices unit = q1_element_matrices(mesh.fine_size(), 1.0);
    for (int cy = ey * r; cy < (ey + 1) * r; ++cy) {
        for (int cx = ex * r; cx < (ex + 1) * r; ++cx) {
            const double a = coefficient[cy * n + cx];
            const std::array<int, 4> lx = {cx, cx + 1, cx, cx + 1};
            const std::array<int, 4> ly = {cy, cy, cy + 1, cy + 1};
            std::array<double, 4> vals{};
            bool any = false;
            for (int j = 0; j < 4; ++j) {
                vals[j] = v_box.contains(lx[j], ly[j]) ? v[v_box.local(lx[j], ly[j])] : 0.0;
                any = any || vals[j] != 0.0;
            }
            if (!any) {
                continue;
            }
            for (int i = 0; i < 4; ++i) {
                if (!box.contains(lx[i], ly[i])) {
                    continue;
                }
                double s = 0.0;
                for (int j = 0; j < 4; ++j) {
                    s += unit.stiffness[i][j] * vals[j];
                }
                out[box.local(lx[i], ly[i])] += a * s;
            }
        }
    }
}

} // namespace plod
