#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <vector>

namespace plod {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Inclusive rectangle of coarse elements [x0, x1] x [y0, y1].
struct ElementRect {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;

    [[nodiscard]] int width() const { return x1 - x0 + 1; }
    [[nodiscard]] int height() const { return y1 - y0 + 1; }
    [[nodiscard]] int count() const { return width() * height(); }
    [[nodiscard]] bool contains(int ex, int ey) const { return ex >= x0 && ex <= x1 && ey >= y0 && ey <= y1; }

    auto operator<=>(const ElementRect&) const = default;
};

/// Rectangle of fine vertices [x0, x0 + nx) x [y0, y0 + ny) with a local row-major numbering.
struct VertexBox {
    int x0 = 0;
    int y0 = 0;
    int nx = 0;
    int ny = 0;

    [[nodiscard]] int size() const { return nx * ny; }
    [[nodiscard]] bool contains(int vx, int vy) const { return vx >= x0 && vx < x0 + nx && vy >= y0 && vy < y0 + ny; }
    [[nodiscard]] int local(int vx, int vy) const { return (vy - y0) * nx + (vx - x0); }
};

/// Nested dyadic meshes of the unit square: coarse (H), coefficient scale (eps) and fine (h).
///
/// Elements, cells and vertices are numbered row-major (x fastest). The fine mesh is the
/// finite-element mesh, the coarse mesh carries the multiscale space, and the eps-grid only
/// determines where rough coefficients may jump.
class MeshHierarchy {
public:
    MeshHierarchy() = default;
    MeshHierarchy(int coarse_exp, int eps_exp, int fine_exp);

    [[nodiscard]] int coarse_exp() const { return coarse_exp_; }
    [[nodiscard]] int eps_exp() const { return eps_exp_; }
    [[nodiscard]] int fine_exp() const { return fine_exp_; }
    [[nodiscard]] int coarse_cells_per_dim() const { return 1 << coarse_exp_; }
    [[nodiscard]] int eps_cells_per_dim() const { return 1 << eps_exp_; }
    [[nodiscard]] int fine_cells_per_dim() const { return 1 << fine_exp_; }
    static constexpr int dimension() { return 2; }

    [[nodiscard]] double coarse_size() const { return 1.0 / coarse_cells_per_dim(); }
    [[nodiscard]] double fine_size() const { return 1.0 / fine_cells_per_dim(); }
    /// Fine cells per coarse element edge.
    [[nodiscard]] int ratio() const { return 1 << (fine_exp_ - coarse_exp_); }

    [[nodiscard]] int element_count() const { return coarse_cells_per_dim() * coarse_cells_per_dim(); }
    [[nodiscard]] int fine_cell_count() const { return fine_cells_per_dim() * fine_cells_per_dim(); }
    [[nodiscard]] int vertices_per_dim() const { return fine_cells_per_dim() + 1; }
    [[nodiscard]] int vertex_count() const { return vertices_per_dim() * vertices_per_dim(); }

    [[nodiscard]] int element_index(int ex, int ey) const { return ey * coarse_cells_per_dim() + ex; }
    [[nodiscard]] std::array<int, 2> element_coords(int element) const
    {
        return {element % coarse_cells_per_dim(), element / coarse_cells_per_dim()};
    }
    [[nodiscard]] int vertex_index(int vx, int vy) const { return vy * vertices_per_dim() + vx; }
    [[nodiscard]] std::array<int, 2> vertex_coords(int vertex) const
    {
        return {vertex % vertices_per_dim(), vertex / vertices_per_dim()};
    }
    [[nodiscard]] Point vertex_point(int vertex) const;
    [[nodiscard]] bool is_boundary_vertex(int vx, int vy) const
    {
        return vx == 0 || vy == 0 || vx == fine_cells_per_dim() || vy == fine_cells_per_dim();
    }
    [[nodiscard]] Point fine_cell_center(int cell) const;
    /// Lower-left corner of a coarse element.
    [[nodiscard]] Point element_corner(int element) const;
    /// Coarse element containing a fine cell.
    [[nodiscard]] int element_of_fine_cell(int cell) const;
    /// Eps-cell containing a fine cell (row-major on the eps-grid).
    [[nodiscard]] int eps_cell_of_fine_cell(int cell) const;

    /// Closed vertex box covering a rectangle of coarse elements.
    [[nodiscard]] VertexBox closure_box(const ElementRect& rect) const;
    /// Vertices strictly inside a rectangle of coarse elements.
    [[nodiscard]] VertexBox interior_box(const ElementRect& rect) const;
    [[nodiscard]] ElementRect element_rect(int element) const;

    /// All elements, i.e. the patch every element grows into once the radius saturates.
    [[nodiscard]] ElementRect full_rect() const
    {
        return {0, 0, coarse_cells_per_dim() - 1, coarse_cells_per_dim() - 1};
    }

private:
    int coarse_exp_ = 0;
    int eps_exp_ = 0;
    int fine_exp_ = 0;
};

/// Validates exponents and constructs the hierarchy; rejects non-nested levels.
MeshHierarchy build_hierarchy(int coarse_exp, int eps_exp, int fine_exp);

/// Element patch N^radius(center), clipped at the domain boundary.
struct Patch {
    int center_element = 0;
    int radius = 0;
    ElementRect rect;
    std::vector<int> elements;           // ascending
    std::vector<int> fine_interior_dofs; // ascending fine vertex indices, excludes the patch rim
};

/// Rectangle of N^radius(element); cheap, no vertex lists.
ElementRect patch_rect(const MeshHierarchy& mesh, int element, int radius);

Patch patch(const MeshHierarchy& mesh, int element, int radius);

/// Smallest radius for which every patch covers the whole mesh.
int saturation_radius(const MeshHierarchy& mesh);

} // namespace plod
