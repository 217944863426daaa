#include "plod/wave_solver.hpp"

#include "plod/coarse_space.hpp"
#include "plod/error.hpp"
#include "plod/io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <utility>

namespace plod {

GalerkinSpace multiscale_space(const MultiscaleBasis& basis)
{
    GalerkinSpace space;
    space.name = "plod";
    space.basis = basis.basis;
    space.stiffness = basis.stiffness;
    space.mass = basis.mass;
    space.restriction = build_moment_map(basis.mesh, basis.p).matrix;
    return space;
}

GalerkinSpace multiscale_space(MultiscaleBasis&& basis)
{
    GalerkinSpace space;
    space.name = "plod";
    // Eigen 3.4 sparse matrices have no move assignment.
    space.basis.swap(basis.basis);
    space.stiffness.swap(basis.stiffness);
    space.mass.swap(basis.mass);
    space.restriction = build_moment_map(basis.mesh, basis.p).matrix;
    return space;
}

GalerkinSpace fine_space(const FineSystem& system)
{
    GalerkinSpace space;
    space.name = "fine";
    const int n = system.interior_count();
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        triplets.emplace_back(system.interior_vertices[static_cast<std::size_t>(i)], i, 1.0);
    }
    space.basis.resize(system.mesh.vertex_count(), n);
    space.basis.setFromTriplets(triplets.begin(), triplets.end());
    space.restriction = space.basis.transpose();
    space.stiffness = system.stiffness;
    space.mass = system.mass;
    return space;
}

GalerkinSpace coarse_fem_space(const FineSystem& system)
{
    const MeshHierarchy& mesh = system.mesh;
    const int n = mesh.coarse_cells_per_dim();
    const int r = mesh.ratio();
    const int interior = (n - 1) * (n - 1);
    GalerkinSpace space;
    space.name = "fem";
    std::vector<Eigen::Triplet<double>> prolongation;
    std::vector<Eigen::Triplet<double>> injection;
    for (int cy = 1; cy < n; ++cy) {
        for (int cx = 1; cx < n; ++cx) {
            const int dof = (cy - 1) * (n - 1) + (cx - 1);
            for (int vy = (cy - 1) * r + 1; vy < (cy + 1) * r; ++vy) {
                const double wy = 1.0 - std::abs(vy - cy * r) / static_cast<double>(r);
                for (int vx = (cx - 1) * r + 1; vx < (cx + 1) * r; ++vx) {
                    const double wx = 1.0 - std::abs(vx - cx * r) / static_cast<double>(r);
                    prolongation.emplace_back(mesh.vertex_index(vx, vy), dof, wx * wy);
                }
            }
            injection.emplace_back(dof, mesh.vertex_index(cx * r, cy * r), 1.0);
        }
    }
    space.basis.resize(mesh.vertex_count(), interior);
    space.basis.setFromTriplets(prolongation.begin(), prolongation.end());
    space.restriction.resize(interior, mesh.vertex_count());
    space.restriction.setFromTriplets(injection.begin(), injection.end());
    const SparseMatrix basis_t = space.basis.transpose();
    space.stiffness = basis_t * (system.stiffness_full * space.basis);
    space.mass = basis_t * (system.mass_full * space.basis);
    return space;
}

void ThetaSchemeConfig::validate() const
{
    if (!(theta >= 0.0 && theta <= 0.5)) {
        throw InvalidArgument("theta must lie in [0, 1/2]");
    }
    if (!(tau > 0.0)) {
        throw InvalidArgument("time step must be positive");
    }
    if (steps < 2) {
        throw InvalidArgument("the two-step scheme needs at least two steps");
    }
}

Vector theta_combine(const Vector& prev, const Vector& now, const Vector& next, double theta)
{
    if (prev.size() != now.size() || next.size() != now.size()) {
        throw InvalidArgument("theta_combine needs vectors of equal length");
    }
    return theta * next + (1.0 - 2.0 * theta) * now + theta * prev;
}

RhsSampler::RhsSampler(const GalerkinSpace& space, const FineSystem& system, const WaveProblem& problem)
    : size_(space.size()), components_(problem.source), derivatives_(problem.has_time_derivatives())
{
    const SparseMatrix basis_t = space.basis.transpose();
    for (const SourceComponent& component : components_) {
        const Vector g = interpolate(system.mesh, component.space);
        loads_.push_back(basis_t * (system.mass_full * g));
    }
}

Vector RhsSampler::combine(double t, int derivative) const
{
    Vector out = Vector::Zero(size_);
    for (std::size_t k = 0; k < loads_.size(); ++k) {
        const SourceComponent& c = components_[k];
        const TemporalFunction& s = derivative == 0 ? c.value : (derivative == 1 ? c.d1 : c.d2);
        if (!s) {
            throw InvalidArgument("source lacks the time derivatives required by the fourth-order initial step");
        }
        out += s(t) * loads_[k];
    }
    return out;
}

Vector RhsSampler::value(double t) const
{
    return combine(t, 0);
}

Vector RhsSampler::d1(double t) const
{
    return combine(t, 1);
}

Vector RhsSampler::d2(double t) const
{
    return combine(t, 2);
}

Vector RhsSampler::theta_value(int n, double tau, double theta) const
{
    if (is_zero()) {
        return Vector::Zero(size_);
    }
    return theta_combine(value((n - 1) * tau), value(n * tau), value((n + 1) * tau), theta);
}

namespace {

SparseMatrix shifted_matrix(const GalerkinSpace& space, const ThetaSchemeConfig& config)
{
    if (config.theta == 0.0) {
        return space.mass;
    }
    SparseMatrix lhs = space.mass + (config.tau * config.tau * config.theta) * space.stiffness;
    lhs.makeCompressed();
    return lhs;
}

} // namespace

WaveSolver::WaveSolver(const GalerkinSpace& space, const ThetaSchemeConfig& config)
    : space_(&space), config_(config), lhs_((config.validate(), shifted_matrix(space, config)))
{
}

Vector WaveSolver::initial_step(const Vector& u0, const Vector& w0, const Vector& f0, const Vector& f_d1,
                                const Vector& f_d2) const
{
    const double tau = config_.tau;
    const SparseMatrix& s = space_->stiffness;
    const SparseMatrix& m = space_->mass;
    Vector rhs = tau * (m * w0) - 0.5 * tau * tau * (s * u0) + 0.5 * tau * tau * f0;
    if (config_.initial == InitialStep::fourth_order) {
        rhs += -(tau * tau * tau / 12.0) * (s * w0) + (tau * tau * tau / 6.0) * f_d1 +
               (tau * tau * tau * tau / 24.0) * f_d2;
    }
    return u0 + lhs_.solve(rhs);
}

Vector WaveSolver::step(const Vector& prev, const Vector& now, const Vector& f_theta) const
{
    const double tau2 = config_.tau * config_.tau;
    const double theta = config_.theta;
    const Vector rhs = tau2 * f_theta + space_->mass * (2.0 * now - prev) -
                       tau2 * (space_->stiffness * ((1.0 - 2.0 * theta) * now + theta * prev));
    return lhs_.solve(rhs);
}

double WaveSolver::energy(const Vector& now, const Vector& next) const
{
    const Vector d = (next - now) / config_.tau;
    const Vector mean = 0.5 * (next + now);
    const Vector sd = space_->stiffness * d;
    return 0.5 * (d.dot(space_->mass * d) + mean.dot(space_->stiffness * mean) +
                  config_.tau * config_.tau * (config_.theta - 0.25) * d.dot(sd));
}

double WaveSolver::energy_norm(const Vector& now, const Vector& next) const
{
    const Vector d = (next - now) / config_.tau;
    const Vector mean = 0.5 * (next + now);
    return 0.5 * (d.dot(space_->mass * d) + mean.dot(space_->stiffness * mean));
}

double max_eigenvalue(const GalerkinSpace& space, double tolerance, int max_iterations)
{
    const SpdFactorization mass(space.mass);
    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    Vector x(space.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        x[i] = uniform(rng);
    }
    x /= std::sqrt(x.dot(space.mass * x));
    double lambda = 0.0;
    for (int iter = 0; iter < max_iterations; ++iter) {
        const Vector sx = space.stiffness * x;
        const double next_lambda = x.dot(sx); // x is M-normalized
        if (!(next_lambda > 0.0)) {
            throw SolverError("power iteration found a non-positive Rayleigh quotient; S or M is indefinite");
        }
        if (iter > 0 && std::abs(next_lambda - lambda) <= tolerance * next_lambda) {
            return next_lambda;
        }
        lambda = next_lambda;
        x = mass.solve(sx);
        x /= std::sqrt(x.dot(space.mass * x));
    }
    throw SolverError("power iteration did not converge within " + std::to_string(max_iterations) + " steps");
}

double cfl_bound(double lambda_max, double theta, double delta)
{
    if (theta >= 0.25) {
        return std::numeric_limits<double>::infinity();
    }
    return (1.0 - delta) / std::sqrt((0.25 - theta) * lambda_max);
}

CflResult cfl_check(const GalerkinSpace& space, const ThetaSchemeConfig& config, double delta)
{
    config.validate();
    CflResult result;
    if (config.theta >= 0.25) {
        result.tau_bound = std::numeric_limits<double>::infinity();
        return result;
    }
    result.lambda_max = max_eigenvalue(space);
    result.tau_bound = cfl_bound(result.lambda_max, config.theta, delta);
    result.stable = config.tau * config.tau * (0.25 - config.theta) * result.lambda_max <= (1.0 - delta) * (1.0 - delta);
    return result;
}

const Vector& WaveTrajectory::state_at(int step) const
{
    const auto it = std::find(steps.begin(), steps.end(), step);
    if (it == steps.end()) {
        throw InvalidArgument("state " + std::to_string(step) + " was not stored");
    }
    return states[static_cast<std::size_t>(it - steps.begin())];
}

WaveTrajectory run(const GalerkinSpace& space, const ThetaSchemeConfig& config, const RhsSampler& rhs,
                   const Vector& u0, const Vector& w0, const RunOptions& options)
{
    const auto start = std::chrono::steady_clock::now();
    config.validate();
    if (u0.size() != space.size() || w0.size() != space.size() || rhs.size() != space.size()) {
        throw InvalidArgument("initial data and loads must match the space dimension");
    }
    if (options.enforce_cfl) {
        const CflResult cfl = cfl_check(space, config);
        if (!cfl.stable) {
            throw InvalidArgument("time step " + format_double(config.tau) + " violates the CFL bound " +
                                  format_double(cfl.tau_bound));
        }
    }
    if (config.initial == InitialStep::fourth_order && !rhs.is_zero() && !rhs.has_time_derivatives()) {
        throw InvalidArgument("fourth-order initial step needs the source's first two time derivatives");
    }

    const WaveSolver solver(space, config);
    WaveTrajectory trajectory;
    trajectory.tau = config.tau;
    std::vector<int> keep = options.store_steps;
    std::sort(keep.begin(), keep.end());
    auto store = [&](int n, const Vector& u) {
        if (keep.empty() || std::binary_search(keep.begin(), keep.end(), n)) {
            trajectory.steps.push_back(n);
            trajectory.states.push_back(u);
        }
    };

    const Vector zero = Vector::Zero(space.size());
    const bool fourth = config.initial == InitialStep::fourth_order && !rhs.is_zero();
    Vector prev = u0;
    Vector now = solver.initial_step(u0, w0, rhs.value(0.0), fourth ? rhs.d1(0.0) : zero,
                                     fourth ? rhs.d2(0.0) : zero);
    store(0, prev);
    store(1, now);
    if (options.record_energy) {
        trajectory.energies.push_back(solver.energy(prev, now));
    }

    const double initial_norm = solver.energy_norm(prev, now);
    double work = 0.0;
    for (int n = 1; n < config.steps; ++n) {
        const Vector f_theta = rhs.theta_value(n, config.tau, config.theta);
        Vector next = solver.step(prev, now, f_theta);
        work += 0.5 * std::abs(f_theta.dot(next - prev));
        const double norm = solver.energy_norm(now, next);
        const double scale = std::max(initial_norm, work);
        if (!std::isfinite(norm) || (scale > 0.0 && norm > options.guard_factor * scale)) {
            throw DivergenceError("energy exceeded " + format_double(options.guard_factor) +
                                      " times its reference scale at step " + std::to_string(n + 1),
                                  n + 1);
        }
        if (options.record_energy) {
            trajectory.energies.push_back(solver.energy(now, next));
        }
        prev = std::move(now);
        now = std::move(next);
        store(n + 1, now);
    }
    trajectory.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return trajectory;
}

WaveTrajectory run(const GalerkinSpace& space, const FineSystem& system, const ThetaSchemeConfig& config,
                   const WaveProblem& problem, const RunOptions& options)
{
    const RhsSampler rhs(space, system, problem);
    auto coefficients = [&](const SpatialFunction& f) -> Vector {
        if (!f) {
            return Vector::Zero(space.size());
        }
        return space.restriction * interpolate(system.mesh, f);
    };
    return run(space, config, rhs, coefficients(problem.u0), coefficients(problem.v0), options);
}

void write_trajectory_csv(std::ostream& out, const WaveTrajectory& trajectory, const GalerkinSpace& space)
{
    out << "n,t,energy,state_norm\n";
    const int count = static_cast<int>(std::max<std::size_t>(trajectory.energies.size(),
                                                             trajectory.steps.empty() ? 0 : trajectory.steps.back() + 1));
    for (int n = 0; n < count; ++n) {
        out << n << ',' << format_double(n * trajectory.tau) << ',';
        if (static_cast<std::size_t>(n) < trajectory.energies.size()) {
            out << format_double(trajectory.energies[static_cast<std::size_t>(n)]);
        }
        out << ',';
        const auto it = std::find(trajectory.steps.begin(), trajectory.steps.end(), n);
        if (it != trajectory.steps.end()) {
            const Vector& u = trajectory.states[static_cast<std::size_t>(it - trajectory.steps.begin())];
            out << format_double(std::sqrt(u.dot(space.mass * u)));
        }
        out << '\n';
    }
}

} // namespace plod
