#include "plod/mesh.hpp"

#include "plod/error.hpp"

#include <algorithm>
#include <string>

namespace plod {

MeshHierarchy::MeshHierarchy(int coarse_exp, int eps_exp, int fine_exp)
    : coarse_exp_(coarse_exp), eps_exp_(eps_exp), fine_exp_(fine_exp)
{
    if (coarse_exp < 0 || eps_exp < 0 || fine_exp < 0) {
        throw InvalidArgument("mesh exponents must be non-negative");
    }
    if (coarse_exp > eps_exp || eps_exp > fine_exp) {
        throw InvalidArgument("mesh exponents must be nested: coarse <= eps <= fine, got " +
                              std::to_string(coarse_exp) + ", " + std::to_string(eps_exp) + ", " +
                              std::to_string(fine_exp));
    }
    if (fine_exp > 14) {
        throw InvalidArgument("fine exponent " + std::to_string(fine_exp) + " is out of range");
    }
}

MeshHierarchy build_hierarchy(int coarse_exp, int eps_exp, int fine_exp)
{
    return MeshHierarchy(coarse_exp, eps_exp, fine_exp);
}

Point MeshHierarchy::vertex_point(int vertex) const
{
    const auto [vx, vy] = vertex_coords(vertex);
    return {vx * fine_size(), vy * fine_size()};
}

Point MeshHierarchy::fine_cell_center(int cell) const
{
    const int n = fine_cells_per_dim();
    return {(cell % n + 0.5) * fine_size(), (cell / n + 0.5) * fine_size()};
}

Point MeshHierarchy::element_corner(int element) const
{
    const auto [ex, ey] = element_coords(element);
    return {ex * coarse_size(), ey * coarse_size()};
}

int MeshHierarchy::element_of_fine_cell(int cell) const
{
    const int n = fine_cells_per_dim();
    return element_index((cell % n) / ratio(), (cell / n) / ratio());
}

int MeshHierarchy::eps_cell_of_fine_cell(int cell) const
{
    const int n = fine_cells_per_dim();
    const int r = 1 << (fine_exp_ - eps_exp_);
    return ((cell / n) / r) * eps_cells_per_dim() + (cell % n) / r;
}

VertexBox MeshHierarchy::closure_box(const ElementRect& rect) const
{
    const int r = ratio();
    return {rect.x0 * r, rect.y0 * r, rect.width() * r + 1, rect.height() * r + 1};
}

VertexBox MeshHierarchy::interior_box(const ElementRect& rect) const
{
    const int r = ratio();
    return {rect.x0 * r + 1, rect.y0 * r + 1, rect.width() * r - 1, rect.height() * r - 1};
}

ElementRect MeshHierarchy::element_rect(int element) const
{
    const auto [ex, ey] = element_coords(element);
    return {ex, ey, ex, ey};
}

ElementRect patch_rect(const MeshHierarchy& mesh, int element, int radius)
{
    if (radius < 0) {
        throw InvalidArgument("patch radius must be non-negative");
    }
    if (element < 0 || element >= mesh.element_count()) {
        throw InvalidArgument("element index out of range");
    }
    const int n = mesh.coarse_cells_per_dim();
    const auto [ex, ey] = mesh.element_coords(element);
    // N^1 of a rectangle of squares is the rectangle grown by one layer, so N^l grows by l.
    const int grow = std::min(radius, n);
    return {std::max(0, ex - grow), std::max(0, ey - grow), std::min(n - 1, ex + grow),
            std::min(n - 1, ey + grow)};
}

Patch patch(const MeshHierarchy& mesh, int element, int radius)
{
    Patch result;
    result.center_element = element;
    result.radius = radius;
    result.rect = patch_rect(mesh, element, radius);
    const ElementRect& rect = result.rect;
    result.elements.reserve(static_cast<std::size_t>(rect.count()));
    for (int ey = rect.y0; ey <= rect.y1; ++ey) {
        for (int ex = rect.x0; ex <= rect.x1; ++ex) {
            result.elements.push_back(mesh.element_index(ex, ey));
        }
    }
    const VertexBox box = mesh.interior_box(rect);
    result.fine_interior_dofs.reserve(static_cast<std::size_t>(std::max(0, box.size())));
    for (int vy = box.y0; vy < box.y0 + box.ny; ++vy) {
        for (int vx = box.x0; vx < box.x0 + box.nx; ++vx) {
            result.fine_interior_dofs.push_back(mesh.vertex_index(vx, vy));
        }
    }
    return result;
}

int saturation_radius(const MeshHierarchy& mesh)
{
    return std::max(0, mesh.coarse_cells_per_dim() - 1);
}

} // namespace plod
