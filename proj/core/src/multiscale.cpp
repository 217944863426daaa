#include "plod/multiscale.hpp"

#include "plod/error.hpp"
#include "plod/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace plod {

namespace {

VertexBox intersect(const VertexBox& a, const VertexBox& b)
{
    const int x0 = std::max(a.x0, b.x0);
    const int y0 = std::max(a.y0, b.y0);
    const int x1 = std::min(a.x0 + a.nx, b.x0 + b.nx);
    const int y1 = std::min(a.y0 + a.ny, b.y0 + b.ny);
    return {x0, y0, std::max(0, x1 - x0), std::max(0, y1 - y0)};
}

void check_ratio(const MeshHierarchy& mesh, int p)
{
    if (mesh.ratio() < p + 2) {
        throw InvalidArgument("fine mesh too coarse for degree " + std::to_string(p) + ": need at least " +
                              std::to_string(p + 2) + " fine cells per coarse edge, have " +
                              std::to_string(mesh.ratio()));
    }
}

Vector solve_bubble_problem(const MeshHierarchy& mesh, const MomentMap& moments, int element, int j)
{
    const ElementRect rect = mesh.element_rect(element);
    const VertexBox box = mesh.interior_box(rect);
    const SparseMatrix stiffness = assemble_box_stiffness(mesh, nullptr, rect, box);
    const SparseMatrix constraints = moment_constraints(mesh, moments, rect, box);
    Vector target = Vector::Zero(moments.modes());
    target[j] = 1.0;
    return KktFactorization(stiffness, constraints).solve(Vector::Zero(box.size()), target).primal;
}

} // namespace

Vector BoxFunction::to_full(const MeshHierarchy& mesh) const
{
    Vector full = Vector::Zero(mesh.vertex_count());
    for (int vy = box.y0; vy < box.y0 + box.ny; ++vy) {
        for (int vx = box.x0; vx < box.x0 + box.nx; ++vx) {
            full[mesh.vertex_index(vx, vy)] = values[box.local(vx, vy)];
        }
    }
    return full;
}

void BoxFunction::add(const BoxFunction& other, double scale)
{
    const VertexBox overlap = intersect(box, other.box);
    for (int vy = overlap.y0; vy < overlap.y0 + overlap.ny; ++vy) {
        for (int vx = overlap.x0; vx < overlap.x0 + overlap.nx; ++vx) {
            values[box.local(vx, vy)] += scale * other.values[other.box.local(vx, vy)];
        }
    }
}

BubbleSet::BubbleSet(const MeshHierarchy& mesh, const MomentMap& moments) : mesh_(mesh), p_(moments.p)
{
    check_ratio(mesh, p_);
    const int modes = moments.modes();
    const ElementRect rect = mesh.element_rect(0);
    const VertexBox box = mesh.interior_box(rect);
    const KktFactorization kkt(assemble_box_stiffness(mesh, nullptr, rect, box),
                               moment_constraints(mesh, moments, rect, box));
    reference_.resize(box.size(), modes);
    for (int j = 0; j < modes; ++j) {
        Vector target = Vector::Zero(modes);
        target[j] = 1.0;
        reference_.col(j) = kkt.solve(Vector::Zero(box.size()), target).primal;
    }
}

VertexBox BubbleSet::box(int element) const
{
    return mesh_.interior_box(mesh_.element_rect(element));
}

BoxFunction BubbleSet::local(int element, int j) const
{
    return {box(element), reference_.col(j)};
}

Vector BubbleSet::bubble(int element, int j) const
{
    return local(element, j).to_full(mesh_);
}

Vector compute_bubble(const MeshHierarchy& mesh, const MomentMap& moments, int element, int j)
{
    check_ratio(mesh, moments.p);
    const VertexBox box = mesh.interior_box(mesh.element_rect(element));
    return BoxFunction{box, solve_bubble_problem(mesh, moments, element, j)}.to_full(mesh);
}

namespace {

BoxFunction iota_on_box(const MeshHierarchy& mesh, int element)
{
    const int r = mesh.ratio();
    const int n = mesh.coarse_cells_per_dim();
    const VertexBox box = mesh.closure_box(patch_rect(mesh, element, 1));
    BoxFunction iota{box, Vector::Zero(box.size())};
    const auto [ex, ey] = mesh.element_coords(element);
    for (int cy = ey; cy <= ey + 1; ++cy) {
        for (int cx = ex; cx <= ex + 1; ++cx) {
            if (cx == 0 || cy == 0 || cx == n || cy == n) {
                continue;
            }
            // Coarse hat of vertex (cx, cy), supported on the four elements around it.
            for (int vy = (cy - 1) * r; vy <= (cy + 1) * r; ++vy) {
                const double wy = 1.0 - std::abs(vy - cy * r) / static_cast<double>(r);
                for (int vx = (cx - 1) * r; vx <= (cx + 1) * r; ++vx) {
                    const double wx = 1.0 - std::abs(vx - cx * r) / static_cast<double>(r);
                    iota.values[box.local(vx, vy)] += 0.25 * wx * wy;
                }
            }
        }
    }
    return iota;
}

struct NuParts {
    BoxFunction nu;
    std::vector<NuCoefficient> coefficients;
};

NuParts nu_parts(const MeshHierarchy& mesh, const MomentMap& moments, const BubbleSet& bubbles, int element,
                 const BoxFunction& iota)
{
    const int r = mesh.ratio();
    const int p = moments.p;
    const ElementRect rect = patch_rect(mesh, element, 1);
    NuParts parts{{iota.box, Vector::Zero(iota.box.size())}, {}};
    for (int gy = rect.y0; gy <= rect.y1; ++gy) {
        for (int gx = rect.x0; gx <= rect.x1; ++gx) {
            const int g = mesh.element_index(gx, gy);
            for (int j = 0; j < moments.modes(); ++j) {
                double moment = 0.0;
                for (int b = 0; b <= r; ++b) {
                    for (int a = 0; a <= r; ++a) {
                        moment += moments.local_moment(j % (p + 1), j / (p + 1), a, b) *
                                  iota.values[iota.box.local(gx * r + a, gy * r + b)];
                    }
                }
                const double c = (g == element && j == 0 ? 1.0 : 0.0) - moment;
                parts.coefficients.push_back({g, j, c});
                parts.nu.add(bubbles.local(g, j), c);
            }
        }
    }
    return parts;
}

} // namespace

Vector compute_iota(const MeshHierarchy& mesh, int element)
{
    return iota_on_box(mesh, element).to_full(mesh);
}

NuResult compute_nu(const MeshHierarchy& mesh, const MomentMap& moments, const BubbleSet& bubbles, int element)
{
    NuParts parts = nu_parts(mesh, moments, bubbles, element, iota_on_box(mesh, element));
    return {parts.nu.to_full(mesh), std::move(parts.coefficients)};
}

BoxFunction extended_bubble(const MeshHierarchy& mesh, const MomentMap& moments, const BubbleSet& bubbles,
                            int element)
{
    BoxFunction iota = iota_on_box(mesh, element);
    const NuParts parts = nu_parts(mesh, moments, bubbles, element, iota);
    iota.add(parts.nu);
    return iota;
}

PatchProblem::PatchProblem(const MeshHierarchy& mesh, const CoefficientField& coefficient, const MomentMap& moments,
                           const ElementRect& rect)
    : mesh_(&mesh), coefficient_(&coefficient), rect_(rect), box_(mesh.interior_box(rect)),
      kkt_(assemble_box_stiffness(mesh, &coefficient, rect, box_), moment_constraints(mesh, moments, rect, box_))
{
}

void PatchProblem::add_load(int element, const BoxFunction& v, Vector& load) const
{
    add_element_stiffness_action(*mesh_, *coefficient_, element, v.box, v.values, box_, load);
}

BoxFunction PatchProblem::solve(const Vector& load) const
{
    return {box_, kkt_.solve(load, Vector::Zero(kkt_.constraint_count())).primal};
}

Vector element_corrector(const MeshHierarchy& mesh, const CoefficientField& coefficient, const MomentMap& moments,
                         int element, const Vector& v, int ell)
{
    if (v.size() != mesh.vertex_count()) {
        throw InvalidArgument("corrector input must be given on all fine vertices");
    }
    const PatchProblem problem(mesh, coefficient, moments, patch_rect(mesh, element, ell));
    const BoxFunction full{{0, 0, mesh.vertices_per_dim(), mesh.vertices_per_dim()}, v};
    Vector load = Vector::Zero(problem.box().size());
    problem.add_load(element, full, load);
    return problem.solve(load).to_full(mesh);
}

std::vector<BoxFunction> compute_columns(const FineSystem& system, const CoefficientField& coefficient,
                                         const MomentMap& moments, const BubbleSet& bubbles, int ell,
                                         const std::vector<int>& columns, int threads)
{
    const MeshHierarchy& mesh = system.mesh;
    const int modes = moments.modes();
    if (ell < 0) {
        throw InvalidArgument("localization radius must be non-negative");
    }

    // Patch jobs keyed by rectangle: bubble columns (T, j >= 1) use C^l_T only; the column
    // (K, 0) needs C^l_T for every T in N^1(K), and T sharing a rectangle share one load.
    struct Job {
        std::vector<int> mode_columns;               // indices into `columns`
        std::map<int, std::vector<int>> extended;    // slot in `columns` -> elements T
    };
    std::map<ElementRect, Job> jobs;
    std::map<int, BoxFunction> extended_cache;
    std::vector<BoxFunction> result(columns.size());
    for (std::size_t slot = 0; slot < columns.size(); ++slot) {
        const int column = columns[slot];
        if (column < 0 || column >= mesh.element_count() * modes) {
            throw InvalidArgument("column index out of range");
        }
        const int element = column / modes;
        const int j = column % modes;
        if (j > 0) {
            jobs[patch_rect(mesh, element, ell)].mode_columns.push_back(static_cast<int>(slot));
            const VertexBox box = mesh.closure_box(patch_rect(mesh, element, ell));
            result[slot] = {box, Vector::Zero(box.size())};
            result[slot].add(bubbles.local(element, j));
            continue;
        }
        if (!extended_cache.contains(element)) {
            extended_cache.emplace(element, extended_bubble(mesh, moments, bubbles, element));
        }
        const ElementRect neighbors = patch_rect(mesh, element, 1);
        for (int ty = neighbors.y0; ty <= neighbors.y1; ++ty) {
            for (int tx = neighbors.x0; tx <= neighbors.x1; ++tx) {
                const int t = mesh.element_index(tx, ty);
                jobs[patch_rect(mesh, t, ell)].extended[static_cast<int>(slot)].push_back(t);
            }
        }
        const VertexBox box = mesh.closure_box(patch_rect(mesh, element, ell + 1));
        result[slot] = {box, Vector::Zero(box.size())};
        result[slot].add(extended_cache.at(element));
    }

    std::vector<std::pair<ElementRect, const Job*>> job_list;
    job_list.reserve(jobs.size());
    for (const auto& [rect, job] : jobs) {
        job_list.emplace_back(rect, &job);
    }
    std::vector<std::vector<std::pair<int, BoxFunction>>> corrections(job_list.size());
    parallel_for(static_cast<int>(job_list.size()), threads, [&](int index) {
        const auto& [rect, job] = job_list[static_cast<std::size_t>(index)];
        const PatchProblem problem(mesh, coefficient, moments, rect);
        auto& out = corrections[static_cast<std::size_t>(index)];
        for (const int slot : job->mode_columns) {
            const int column = columns[static_cast<std::size_t>(slot)];
            Vector load = Vector::Zero(problem.box().size());
            problem.add_load(column / modes, bubbles.local(column / modes, column % modes), load);
            out.emplace_back(slot, problem.solve(load));
        }
        for (const auto& [slot, elements] : job->extended) {
            const BoxFunction& v = extended_cache.at(columns[static_cast<std::size_t>(slot)] / modes);
            Vector load = Vector::Zero(problem.box().size());
            for (const int t : elements) {
                problem.add_load(t, v, load);
            }
            out.emplace_back(slot, problem.solve(load));
        }
    });

    // Merge in the fixed job order so the sums do not depend on scheduling.
    for (const auto& job_corrections : corrections) {
        for (const auto& [slot, correction] : job_corrections) {
            result[static_cast<std::size_t>(slot)].add(correction, -1.0);
        }
    }
    return result;
}

MultiscaleBasis::MultiscaleBasis(MultiscaleBasis&& other) noexcept
{
    *this = std::move(other);
}

MultiscaleBasis& MultiscaleBasis::operator=(MultiscaleBasis&& other) noexcept
{
    mesh = other.mesh;
    p = other.p;
    ell = other.ell;
    basis.swap(other.basis);
    stiffness.swap(other.stiffness);
    mass.swap(other.mass);
    support.swap(other.support);
    moment_residual = other.moment_residual;
    build_seconds = other.build_seconds;
    return *this;
}

namespace {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

/// Rows [r0, r1) of a column-major sparse matrix as a dense block.
Eigen::MatrixXd dense_rows(const SparseMatrix& m, Eigen::Index r0, Eigen::Index r1)
{
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(r1 - r0, m.cols());
    const int* outer = m.outerIndexPtr();
    const int* counts = m.innerNonZeroPtr();
    const int* inner = m.innerIndexPtr();
    const double* values = m.valuePtr();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const int* begin = inner + outer[j];
        const int* end = counts != nullptr ? begin + counts[j] : inner + outer[j + 1];
        for (const int* it = std::lower_bound(begin, end, static_cast<int>(r0)); it != end && *it < r1; ++it) {
            out(*it - r0, j) = values[it - inner];
        }
    }
    return out;
}

/// B^T F B summed over blocks of fine rows; neither F B nor a row-major copy of B is formed.
Eigen::MatrixXd dense_galerkin(const SparseMatrix& b, const SparseMatrix& fine)
{
    const SparseRowMatrix fine_rows(fine);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(b.cols(), b.cols());
    constexpr Eigen::Index block = 512;
    std::vector<Eigen::Triplet<double>> local;
    for (Eigen::Index r0 = 0; r0 < b.rows(); r0 += block) {
        const Eigen::Index r1 = std::min(b.rows(), r0 + block);
        Eigen::Index c0 = r0;
        Eigen::Index c1 = r1;
        for (Eigen::Index i = r0; i < r1; ++i) {
            for (SparseRowMatrix::InnerIterator it(fine_rows, i); it; ++it) {
                c0 = std::min(c0, it.col());
                c1 = std::max(c1, it.col() + 1);
            }
        }
        local.clear();
        for (Eigen::Index i = r0; i < r1; ++i) {
            for (SparseRowMatrix::InnerIterator it(fine_rows, i); it; ++it) {
                local.emplace_back(static_cast<int>(i - r0), static_cast<int>(it.col() - c0), it.value());
            }
        }
        SparseRowMatrix f(r1 - r0, c1 - c0);
        f.setFromTriplets(local.begin(), local.end());
        const Eigen::MatrixXd reach = dense_rows(b, c0, c1);
        const Eigen::MatrixXd product = f * reach;
        g.noalias() += reach.middleRows(r0 - c0, r1 - r0).transpose() * product;
    }
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
        for (Eigen::Index i = j + 1; i < g.rows(); ++i) {
            g(i, j) = g(j, i) = 0.5 * (g(i, j) + g(j, i));
        }
    }
    return g;
}

} // namespace

void assemble_coarse_matrices(const FineSystem& system, MultiscaleBasis& basis)
{
    const SparseMatrix& b = basis.basis;
    const double density = static_cast<double>(b.nonZeros()) / (static_cast<double>(b.rows()) * b.cols());
    auto galerkin = [&](const SparseMatrix& fine) -> SparseMatrix {
        SparseMatrix coarse;
        if (density > 0.1) {
            coarse = dense_galerkin(b, fine).sparseView(0.0, 0.0);
        } else {
            coarse = SparseMatrix(b.transpose()) * (fine * b);
            coarse = 0.5 * (coarse + SparseMatrix(coarse.transpose()));
        }
        coarse.makeCompressed();
        return coarse;
    };
    basis.stiffness = galerkin(system.stiffness_full);
    basis.mass = galerkin(system.mass_full);
}

MultiscaleBasis build_basis(const FineSystem& system, const CoefficientField& coefficient, int p, int ell,
                            int threads)
{
    const auto start = std::chrono::steady_clock::now();
    const MeshHierarchy& mesh = system.mesh;
    check_ratio(mesh, p);
    const MomentMap moments = build_moment_map(mesh, p);
    const BubbleSet bubbles(mesh, moments);
    const int count = mesh.element_count() * moments.modes();
    std::vector<int> columns(static_cast<std::size_t>(count));
    for (int c = 0; c < count; ++c) {
        columns[static_cast<std::size_t>(c)] = c;
    }
    std::vector<BoxFunction> data = compute_columns(system, coefficient, moments, bubbles, ell, columns, threads);

    MultiscaleBasis result;
    result.mesh = mesh;
    result.p = p;
    result.ell = ell;
    result.support.resize(static_cast<std::size_t>(count));
    long nonzeros = 0;
    for (int c = 0; c < count; ++c) {
        const int element = c / moments.modes();
        const bool constant_mode = c % moments.modes() == 0;
        result.support[static_cast<std::size_t>(c)] = patch_rect(mesh, element, constant_mode ? ell + 1 : ell);
        nonzeros += (data[static_cast<std::size_t>(c)].values.array() != 0.0).count();
    }
    result.basis.resize(mesh.vertex_count(), count);
    result.basis.reserve(nonzeros);
    for (int c = 0; c < count; ++c) {
        BoxFunction& column = data[static_cast<std::size_t>(c)];
        result.basis.startVec(c);
        for (int vy = column.box.y0; vy < column.box.y0 + column.box.ny; ++vy) {
            for (int vx = column.box.x0; vx < column.box.x0 + column.box.nx; ++vx) {
                const double value = column.values[column.box.local(vx, vy)];
                if (value != 0.0) {
                    result.basis.insertBack(mesh.vertex_index(vx, vy), c) = value;
                }
            }
        }
        column = BoxFunction{};
    }
    result.basis.finalize();

    const SparseMatrix identity_check = moments.matrix * result.basis;
    double residual = 0.0;
    for (int c = 0; c < identity_check.outerSize(); ++c) {
        bool diagonal_seen = false;
        for (SparseMatrix::InnerIterator it(identity_check, c); it; ++it) {
            const bool diagonal = it.row() == c;
            diagonal_seen = diagonal_seen || diagonal;
            residual = std::max(residual, std::abs(it.value() - (diagonal ? 1.0 : 0.0)));
        }
        if (!diagonal_seen) {
            residual = std::max(residual, 1.0);
        }
    }
    result.moment_residual = residual;
    if (residual > 1e-9) {
        throw InvariantViolation("multiscale basis violates the projection identity: max |PB - I| = " +
                                 std::to_string(residual));
    }

    assemble_coarse_matrices(system, result);
    result.build_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

std::vector<DecayEntry> localization_decay(const FineSystem& system, const CoefficientField& coefficient, int p,
                                           const std::vector<int>& ells, std::vector<int> probes, int threads)
{
    if (ells.empty()) {
        throw InvalidArgument("localization study needs at least one radius");
    }
    for (std::size_t i = 1; i < ells.size(); ++i) {
        if (ells[i] <= ells[i - 1]) {
            throw InvalidArgument("localization radii must be strictly ascending");
        }
    }
    const MeshHierarchy& mesh = system.mesh;
    check_ratio(mesh, p);
    const MomentMap moments = build_moment_map(mesh, p);
    const BubbleSet bubbles(mesh, moments);
    if (probes.empty()) {
        const int center = mesh.coarse_cells_per_dim() / 2;
        const int element = mesh.element_index(center, center);
        for (int j = 0; j < moments.modes(); ++j) {
            probes.push_back(coarse_dof(p, element, j));
        }
    }

    auto full_columns = [&](int ell) {
        std::vector<Vector> out;
        for (const BoxFunction& column : compute_columns(system, coefficient, moments, bubbles, ell, probes, threads)) {
            out.push_back(column.to_full(mesh));
        }
        return out;
    };
    const std::vector<Vector> limit = full_columns(ells.back());
    double limit_norm_sq = 0.0;
    for (const Vector& column : limit) {
        limit_norm_sq += column.dot(system.stiffness_full * column);
    }

    std::vector<DecayEntry> table;
    for (const int ell : ells) {
        const std::vector<Vector> columns = ell == ells.back() ? limit : full_columns(ell);
        double diff_sq = 0.0;
        for (std::size_t i = 0; i < columns.size(); ++i) {
            const Vector diff = columns[i] - limit[i];
            diff_sq += diff.dot(system.stiffness_full * diff);
        }
        table.push_back({ell, std::sqrt(std::max(0.0, diff_sq) / limit_norm_sq)});
    }
    return table;
}

} // namespace plod
