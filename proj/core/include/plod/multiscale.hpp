#pragma once

#include "plod/coarse_space.hpp"
#include "plod/fine_fem.hpp"
#include "plod/linear_solvers.hpp"

#include <vector>

namespace plod {

/// A fine function stored on a rectangular vertex box (row-major, box-local numbering).
struct BoxFunction {
    VertexBox box;
    Vector values;

    [[nodiscard]] Vector to_full(const MeshHierarchy& mesh) const;
    /// this += scale * other on the overlap of the two boxes.
    void add(const BoxFunction& other, double scale = 1.0);
};

/// Element bubbles b_{K,j}: minimizers of the Dirichlet energy (A = 1) in the open element K
/// with moments e_j. The moment tables are translation invariant, so all elements share one
/// reference solve and the set is independent of the coefficient.
class BubbleSet {
public:
    BubbleSet() = default;
    BubbleSet(const MeshHierarchy& mesh, const MomentMap& moments);

    [[nodiscard]] int p() const { return p_; }
    /// Interior vertices of element K, where its bubbles live.
    [[nodiscard]] VertexBox box(int element) const;
    [[nodiscard]] BoxFunction local(int element, int j) const;
    [[nodiscard]] Vector bubble(int element, int j) const;
    [[nodiscard]] const Eigen::MatrixXd& reference() const { return reference_; }

private:
    MeshHierarchy mesh_;
    int p_ = 0;
    Eigen::MatrixXd reference_; // (r-1)^2 x M
};

/// Solves the bubble problem directly on element K (no translation); used to cross-check BubbleSet.
Vector compute_bubble(const MeshHierarchy& mesh, const MomentMap& moments, int element, int j);

/// Coarse bilinear function with 1/4 at the vertices of K that are interior to N^1(K).
Vector compute_iota(const MeshHierarchy& mesh, int element);

struct NuCoefficient {
    int element = 0;
    int mode = 0;
    double value = 0.0;
};

struct NuResult {
    Vector nu;                               // all fine vertices
    std::vector<NuCoefficient> coefficients; // c_{K,G,j} for G in N^1(K), element-major
};

NuResult compute_nu(const MeshHierarchy& mesh, const MomentMap& moments, const BubbleSet& bubbles, int element);

/// iota_K + nu_K on the closure of N^1(K).
BoxFunction extended_bubble(const MeshHierarchy& mesh, const MomentMap& moments, const BubbleSet& bubbles,
                            int element);

/// Constrained corrector problem on one patch rectangle: A-weighted stiffness on the patch
/// interior with all moments of the patch elements pinned to zero. Factored once, then
/// reused for every right-hand side that shares the rectangle.
class PatchProblem {
public:
    PatchProblem(const MeshHierarchy& mesh, const CoefficientField& coefficient, const MomentMap& moments,
                 const ElementRect& rect);

    [[nodiscard]] const ElementRect& rect() const { return rect_; }
    [[nodiscard]] const VertexBox& box() const { return box_; }
    /// Adds a|_T(v, phi_i) for the patch-interior vertices i to `load`.
    void add_load(int element, const BoxFunction& v, Vector& load) const;
    [[nodiscard]] BoxFunction solve(const Vector& load) const;

private:
    const MeshHierarchy* mesh_;
    const CoefficientField* coefficient_;
    ElementRect rect_;
    VertexBox box_;
    KktFactorization kkt_;
};

/// C^l_T v on all fine vertices.
Vector element_corrector(const MeshHierarchy& mesh, const CoefficientField& coefficient, const MomentMap& moments,
                         int element, const Vector& v, int ell);

/// Corrected basis of the multiscale space and its Galerkin matrices.
struct MultiscaleBasis {
    MultiscaleBasis() = default;
    MultiscaleBasis(const MultiscaleBasis&) = default;
    MultiscaleBasis& operator=(const MultiscaleBasis&) = default;
    // Eigen 3.4 sparse matrices copy on move; these swap instead.
    MultiscaleBasis(MultiscaleBasis&& other) noexcept;
    MultiscaleBasis& operator=(MultiscaleBasis&& other) noexcept;
    ~MultiscaleBasis() = default;

    MeshHierarchy mesh;
    int p = 0;
    int ell = 0;
    SparseMatrix basis;     // fine vertices x coarse dofs
    SparseMatrix stiffness; // B^T S_h B
    SparseMatrix mass;      // B^T M_h B
    std::vector<ElementRect> support; // declared support of each column
    double moment_residual = 0.0;     // max |P B - I|
    double build_seconds = 0.0;

    [[nodiscard]] int size() const { return static_cast<int>(basis.cols()); }
    [[nodiscard]] Vector lift(const Vector& coarse) const { return basis * coarse; }
};

/// Computes the requested columns (coarse dof indices) of the corrected basis with radius ell.
/// Columns come back in the order requested.
std::vector<BoxFunction> compute_columns(const FineSystem& system, const CoefficientField& coefficient,
                                         const MomentMap& moments, const BubbleSet& bubbles, int ell,
                                         const std::vector<int>& columns, int threads = 1);

MultiscaleBasis build_basis(const FineSystem& system, const CoefficientField& coefficient, int p, int ell,
                            int threads = 1);

/// Galerkin matrices B^T S B and B^T M B, symmetrized.
void assemble_coarse_matrices(const FineSystem& system, MultiscaleBasis& basis);

struct DecayEntry {
    int ell = 0;
    double error = 0.0; // relative a-norm distance to the columns at the largest ell
};

/// Localization error of a probe set of columns; the last entry of `ells` serves as C^infinity.
/// With no probes given, all modes of the element nearest to the domain center are used.
std::vector<DecayEntry> localization_decay(const FineSystem& system, const CoefficientField& coefficient, int p,
                                           const std::vector<int>& ells, std::vector<int> probes = {},
                                           int threads = 1);

} // namespace plod
