#include "plod/linear_solvers.hpp"

#include "plod/error.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/OrderingMethods>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <tuple>
#include <utility>

namespace plod {

namespace {

constexpr int max_refinement_steps = 4;

double inf_norm(const Vector& v)
{
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

double matrix_inf_norm(const SparseMatrix& m)
{
    Vector row_sums = Vector::Zero(m.rows());
    for (int col = 0; col < m.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(m, col); it; ++it) {
            row_sums[it.row()] += std::abs(it.value());
        }
    }
    return inf_norm(row_sums);
}

} // namespace

SpdFactorization::SpdFactorization(SparseMatrix matrix, SpdMethod method, double tolerance)
    : method_(method), tolerance_(tolerance)
{
    matrix_.swap(matrix);
    if (matrix_.rows() != matrix_.cols()) {
        throw InvalidArgument("SPD solve needs a square matrix");
    }
    if (method_ == SpdMethod::conjugate_gradient) {
        return;
    }
    const double n = static_cast<double>(matrix_.rows());
    const double density = n > 0 ? static_cast<double>(matrix_.nonZeros()) / (n * n) : 0.0;
    if (matrix_.rows() <= 12000 && density > 0.2) {
        auto dense = std::make_shared<const DenseFactor>(matrix_);
        if (dense->llt.info() != Eigen::Success) {
            throw SolverError("Cholesky factorization hit a non-positive pivot: matrix is not SPD");
        }
        dense_ = std::move(dense);
        return;
    }
    auto sparse = std::make_shared<Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>>(matrix_);
    if (sparse->info() != Eigen::Success) {
        throw SolverError("Cholesky factorization hit a non-positive pivot: matrix is not SPD");
    }
    sparse_ = std::move(sparse);
}

Vector SpdFactorization::raw_solve(const Vector& rhs) const
{
    if (dense_) {
        return dense_->llt.solve(rhs);
    }
    return sparse_->solve(rhs);
}

Vector SpdFactorization::solve(const Vector& rhs) const
{
    if (rhs.size() != matrix_.rows()) {
        throw InvalidArgument("right-hand side has the wrong length");
    }
    const double rhs_norm = rhs.norm();
    if (rhs_norm == 0.0) {
        return Vector::Zero(rhs.size());
    }
    if (method_ == SpdMethod::conjugate_gradient) {
        Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
        cg.setTolerance(tolerance_ * 0.1);
        cg.setMaxIterations(std::max<Eigen::Index>(1000, 10 * matrix_.rows()));
        cg.compute(matrix_);
        Vector x = cg.solve(rhs);
        if ((rhs - matrix_ * x).norm() > tolerance_ * rhs_norm) {
            throw SolverError("conjugate gradients did not reach the residual tolerance");
        }
        return x;
    }
    Vector x = raw_solve(rhs);
    Vector residual = rhs - matrix_ * x;
    for (int step = 0; step < max_refinement_steps && residual.norm() > 1e-14 * rhs_norm; ++step) {
        x += raw_solve(residual);
        residual = rhs - matrix_ * x;
    }
    if (residual.norm() > tolerance_ * rhs_norm) {
        throw SolverError("SPD solve missed the residual tolerance: relative residual " +
                          std::to_string(residual.norm() / rhs_norm));
    }
    return x;
}

Vector solve_spd(const SparseMatrix& matrix, const Vector& rhs)
{
    return SpdFactorization(matrix).solve(rhs);
}

KktFactorization::KktFactorization(const SparseMatrix& stiffness, const SparseMatrix& constraints)
    : n_(static_cast<int>(stiffness.rows())), m_(static_cast<int>(constraints.rows()))
{
    if (stiffness.rows() != stiffness.cols()) {
        throw InvalidArgument("KKT stiffness block must be square");
    }
    if (m_ > 0 && constraints.cols() != stiffness.rows()) {
        throw InvalidArgument("constraint matrix has the wrong number of columns");
    }
    if (m_ == 0) {
        unconstrained_.emplace(stiffness);
        return;
    }
    if (m_ > n_) {
        throw SolverError("rank-deficient constraints: more constraints than unknowns");
    }

    // Equilibrate constraint rows.
    row_scale_ = Vector::Zero(m_);
    for (int col = 0; col < constraints.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(constraints, col); it; ++it) {
            row_scale_[it.row()] += it.value() * it.value();
        }
    }
    for (int k = 0; k < m_; ++k) {
        if (row_scale_[k] == 0.0) {
            throw SolverError("rank-deficient constraints: constraint row " + std::to_string(k) + " is zero");
        }
        row_scale_[k] = 1.0 / std::sqrt(row_scale_[k]);
    }

    const int total = n_ + m_;
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(stiffness.nonZeros() + 2 * constraints.nonZeros()));
    for (int col = 0; col < stiffness.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(stiffness, col); it; ++it) {
            triplets.emplace_back(static_cast<int>(it.row()), col, it.value());
        }
    }
    std::vector<int> last_primal_neighbor(static_cast<std::size_t>(m_), -1);
    for (int col = 0; col < constraints.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(constraints, col); it; ++it) {
            const int k = static_cast<int>(it.row());
            const double v = it.value() * row_scale_[k];
            triplets.emplace_back(n_ + k, col, v);
            triplets.emplace_back(col, n_ + k, v);
        }
    }
    kkt_.resize(total, total);
    kkt_.setFromTriplets(triplets.begin(), triplets.end());

    Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> amd_perm;
    Eigen::AMDOrdering<int> amd;
    amd(kkt_, amd_perm);
    // The ordering returns the inverse permutation: indices()[position] = unknown.
    std::vector<int> amd_rank(static_cast<std::size_t>(total));
    for (int t = 0; t < total; ++t) {
        amd_rank[static_cast<std::size_t>(amd_perm.indices()[t])] = t;
    }

    for (int col = 0; col < constraints.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(constraints, col); it; ++it) {
            auto& last = last_primal_neighbor[static_cast<std::size_t>(it.row())];
            last = std::max(last, amd_rank[static_cast<std::size_t>(col)]);
        }
    }
    using Key = std::tuple<int, int, int>;
    std::vector<Key> keys(static_cast<std::size_t>(total));
    for (int i = 0; i < n_; ++i) {
        keys[static_cast<std::size_t>(i)] = {amd_rank[static_cast<std::size_t>(i)], 0, amd_rank[static_cast<std::size_t>(i)]};
    }
    for (int k = 0; k < m_; ++k) {
        keys[static_cast<std::size_t>(n_ + k)] = {last_primal_neighbor[static_cast<std::size_t>(k)], 1, amd_rank[static_cast<std::size_t>(n_ + k)]};
    }
    std::vector<int> order(static_cast<std::size_t>(total));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return keys[static_cast<std::size_t>(a)] < keys[static_cast<std::size_t>(b)]; });
    position_.assign(static_cast<std::size_t>(total), 0);
    for (int t = 0; t < total; ++t) {
        position_[static_cast<std::size_t>(order[static_cast<std::size_t>(t)])] = t;
    }

    std::vector<Eigen::Triplet<double>> permuted;
    permuted.reserve(static_cast<std::size_t>(kkt_.nonZeros() / 2 + total));
    for (int col = 0; col < kkt_.outerSize(); ++col) {
        const int pc = position_[static_cast<std::size_t>(col)];
        for (SparseMatrix::InnerIterator it(kkt_, col); it; ++it) {
            const int pr = position_[static_cast<std::size_t>(it.row())];
            if (pr >= pc) {
                permuted.emplace_back(pr, pc, it.value());
            }
        }
    }
    SparseMatrix lower(total, total);
    lower.setFromTriplets(permuted.begin(), permuted.end());

    ldlt_ = std::make_unique<Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::NaturalOrdering<int>>>();
    ldlt_->compute(lower);
    if (ldlt_->info() != Eigen::Success) {
        throw SolverError("indefinite-factorization breakdown: zero pivot in KKT factorization");
    }
    factor_nonzeros_ = static_cast<long>(ldlt_->matrixL().nestedExpression().nonZeros());

    const Vector& d = ldlt_->vectorD();
    double max_multiplier_pivot = 0.0;
    double max_primal_pivot = 0.0;
    for (int i = 0; i < total; ++i) {
        const double pivot = d[position_[static_cast<std::size_t>(i)]];
        if (i < n_) {
            max_primal_pivot = std::max(max_primal_pivot, std::abs(pivot));
        } else {
            max_multiplier_pivot = std::max(max_multiplier_pivot, std::abs(pivot));
        }
    }
    for (int i = 0; i < total; ++i) {
        const double pivot = d[position_[static_cast<std::size_t>(i)]];
        if (i < n_ && !(pivot > 1e-14 * max_primal_pivot)) {
            throw SolverError("indefinite-factorization breakdown: stiffness block is not positive definite");
        }
        if (i >= n_ && !(pivot < -1e-11 * max_multiplier_pivot)) {
            throw SolverError("rank-deficient constraints: multiplier pivot " + std::to_string(pivot) +
                              " for constraint " + std::to_string(i - n_));
        }
    }
}

KktSolution KktFactorization::solve(const Vector& rhs_primal, const Vector& rhs_multiplier) const
{
    if (rhs_primal.size() != n_ || rhs_multiplier.size() != m_) {
        throw InvalidArgument("KKT right-hand side has the wrong length");
    }
    if (unconstrained_) {
        return {unconstrained_->solve(rhs_primal), Vector(0)};
    }
    const int total = n_ + m_;
    Vector b(total);
    b.head(n_) = rhs_primal;
    b.tail(m_) = rhs_multiplier.cwiseProduct(row_scale_);
    const double b_norm = inf_norm(b);
    if (b_norm == 0.0) {
        return {Vector::Zero(n_), Vector::Zero(m_)};
    }

    auto permuted_solve = [&](const Vector& rhs) {
        Vector bp(total);
        for (int i = 0; i < total; ++i) {
            bp[position_[static_cast<std::size_t>(i)]] = rhs[i];
        }
        const Vector xp = ldlt_->solve(bp);
        Vector x(total);
        for (int i = 0; i < total; ++i) {
            x[i] = xp[position_[static_cast<std::size_t>(i)]];
        }
        return x;
    };

    Vector x = permuted_solve(b);
    Vector residual = b - kkt_ * x;
    for (int step = 0; step < max_refinement_steps && inf_norm(residual) > 1e-15 * b_norm; ++step) {
        const Vector correction = permuted_solve(residual);
        const Vector candidate = x + correction;
        const Vector candidate_residual = b - kkt_ * candidate;
        if (inf_norm(candidate_residual) >= inf_norm(residual)) {
            break;
        }
        x = candidate;
        residual = candidate_residual;
    }

    KktSolution solution{x.head(n_), x.tail(m_).cwiseProduct(row_scale_)};

    // Tolerances are measured in the equilibrated system: unit constraint rows.
    const double x_norm = inf_norm(solution.primal);
    const double constraint_scale = std::max(inf_norm(b.tail(m_)), x_norm);
    if (inf_norm(residual.tail(m_)) > 1e-10 * std::max(constraint_scale, 1e-300)) {
        throw SolverError("KKT solve missed the constraint tolerance");
    }
    const double primal_scale = std::max(inf_norm(b.head(n_)), matrix_inf_norm(kkt_) * std::max(x_norm, inf_norm(x.tail(m_))));
    if (inf_norm(residual.head(n_)) > 1e-10 * primal_scale) {
        throw SolverError("KKT solve missed the primal residual tolerance");
    }
    return solution;
}

KktSolution solve_kkt(const SparseMatrix& stiffness, const SparseMatrix& constraints, const Vector& rhs_primal,
                      const Vector& rhs_multiplier)
{
    return KktFactorization(stiffness, constraints).solve(rhs_primal, rhs_multiplier);
}

} // namespace plod
