#pragma once

#include "plod/fine_fem.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>

#include <memory>
#include <optional>

namespace plod {

enum class SpdMethod { direct, conjugate_gradient };

/// Reusable factorization of a symmetric positive definite matrix.
///
/// Sparse matrices use a simplicial Cholesky with AMD ordering; matrices whose pattern is
/// mostly full switch to a dense Cholesky. Each solve is followed by iterative refinement
/// and a residual check against `tolerance`. Solves are const and may run concurrently.
class SpdFactorization {
public:
    SpdFactorization() = default;
    explicit SpdFactorization(SparseMatrix matrix, SpdMethod method = SpdMethod::direct,
                              double tolerance = 1e-10);

    [[nodiscard]] Vector solve(const Vector& rhs) const;
    [[nodiscard]] int size() const { return static_cast<int>(matrix_.rows()); }
    [[nodiscard]] bool is_dense() const { return dense_ != nullptr; }

private:
    [[nodiscard]] Vector raw_solve(const Vector& rhs) const;

    SparseMatrix matrix_;
    SpdMethod method_ = SpdMethod::direct;
    double tolerance_ = 1e-10;
    std::shared_ptr<const Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>> sparse_;
    struct DenseFactor {
        explicit DenseFactor(const SparseMatrix& matrix) : storage(matrix), llt(storage) {}
        Eigen::MatrixXd storage; // overwritten by the factor
        Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt;
    };
    std::shared_ptr<const DenseFactor> dense_;
};

Vector solve_spd(const SparseMatrix& matrix, const Vector& rhs);

struct KktSolution {
    Vector primal;
    Vector multipliers;
};

/// Factorization of the saddle-point matrix [A C^T; C 0] with A SPD and C of full row rank.
///
/// The full symmetric indefinite matrix is factored as L D L^T without pivoting. The
/// elimination order is AMD on the whole KKT graph, post-processed so that every multiplier
/// is eliminated right after the last primal unknown it couples to; with that order the
/// pivots are positive on primal unknowns and negative on multipliers whenever C has full
/// row rank, so the inertia doubles as the rank check. Constraint rows are equilibrated to
/// unit Euclidean norm before factoring.
class KktFactorization {
public:
    KktFactorization(const SparseMatrix& stiffness, const SparseMatrix& constraints);

    [[nodiscard]] KktSolution solve(const Vector& rhs_primal, const Vector& rhs_multiplier) const;
    [[nodiscard]] int primal_size() const { return n_; }
    [[nodiscard]] int constraint_count() const { return m_; }
    [[nodiscard]] long factor_nonzeros() const { return factor_nonzeros_; }

private:
    int n_ = 0;
    int m_ = 0;
    long factor_nonzeros_ = 0;
    SparseMatrix kkt_; // full symmetric storage, scaled constraint rows
    Vector row_scale_;
    std::vector<int> position_; // original index -> elimination position
    std::unique_ptr<Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::NaturalOrdering<int>>> ldlt_;
    std::optional<SpdFactorization> unconstrained_;
};

KktSolution solve_kkt(const SparseMatrix& stiffness, const SparseMatrix& constraints, const Vector& rhs_primal,
                      const Vector& rhs_multiplier);

} // namespace plod
