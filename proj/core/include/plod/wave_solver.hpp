#pragma once

#include "plod/fine_fem.hpp"
#include "plod/linear_solvers.hpp"
#include "plod/multiscale.hpp"
#include "plod/problems.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace plod {

/// A Galerkin subspace of the fine space, described by its basis in fine vertex values.
/// `restriction` maps a fine function to coefficients in this space; the time stepper only
/// needs it for initial data.
struct GalerkinSpace {
    std::string name;
    SparseMatrix basis;       // fine vertices x n
    SparseMatrix stiffness;   // n x n
    SparseMatrix mass;        // n x n
    SparseMatrix restriction; // n x fine vertices

    [[nodiscard]] int size() const { return static_cast<int>(stiffness.rows()); }
    [[nodiscard]] Vector lift(const Vector& coefficients) const { return basis * coefficients; }
};

/// Corrected multiscale space; initial data enter through their L2 projection.
GalerkinSpace multiscale_space(const MultiscaleBasis& basis);
/// Takes over the basis matrices instead of copying them.
GalerkinSpace multiscale_space(MultiscaleBasis&& basis);
/// The fine space itself (interior vertices); initial data enter by nodal injection.
GalerkinSpace fine_space(const FineSystem& system);
/// Standard Q1 finite elements on the coarse mesh, assembled with the fine coefficient.
GalerkinSpace coarse_fem_space(const FineSystem& system);

enum class InitialStep { fourth_order, reduced };

struct ThetaSchemeConfig {
    double theta = 0.25;
    double tau = 0.0;
    int steps = 0;
    InitialStep initial = InitialStep::fourth_order;

    void validate() const;
    [[nodiscard]] double final_time() const { return tau * steps; }
};

/// theta * next + (1 - 2 theta) * now + theta * prev.
Vector theta_combine(const Vector& prev, const Vector& now, const Vector& next, double theta);

/// Coarse loads (f(t), v) for the basis functions of a space, from separable source terms.
class RhsSampler {
public:
    RhsSampler(const GalerkinSpace& space, const FineSystem& system, const WaveProblem& problem);

    [[nodiscard]] Vector value(double t) const;
    [[nodiscard]] Vector d1(double t) const;
    [[nodiscard]] Vector d2(double t) const;
    /// f^{n;theta} from the samples at t_{n-1}, t_n, t_{n+1}.
    [[nodiscard]] Vector theta_value(int n, double tau, double theta) const;
    [[nodiscard]] bool has_time_derivatives() const { return derivatives_; }
    [[nodiscard]] bool is_zero() const { return loads_.empty(); }
    [[nodiscard]] int size() const { return size_; }

private:
    [[nodiscard]] Vector combine(double t, int derivative) const;

    int size_ = 0;
    std::vector<Vector> loads_;
    std::vector<SourceComponent> components_;
    bool derivatives_ = true;
};

/// One theta-scheme integrator on a fixed space; the matrix M + tau^2 theta S is factored once.
class WaveSolver {
public:
    WaveSolver(const GalerkinSpace& space, const ThetaSchemeConfig& config);

    /// Returns u^1 from u^0, the initial velocity w^0 and the source data at t = 0.
    /// f_d1 and f_d2 are only read by the fourth-order variant.
    [[nodiscard]] Vector initial_step(const Vector& u0, const Vector& w0, const Vector& f0, const Vector& f_d1,
                                      const Vector& f_d2) const;
    [[nodiscard]] Vector step(const Vector& prev, const Vector& now, const Vector& f_theta) const;
    /// Discrete energy E^{n+1/2} of the pair (u^n, u^{n+1}).
    [[nodiscard]] double energy(const Vector& now, const Vector& next) const;
    /// Positive definite part 1/2 (|D u|_M^2 + |mean u|_S^2), used by the divergence guard.
    [[nodiscard]] double energy_norm(const Vector& now, const Vector& next) const;
    [[nodiscard]] const ThetaSchemeConfig& config() const { return config_; }

private:
    const GalerkinSpace* space_;
    ThetaSchemeConfig config_;
    SpdFactorization lhs_;
};

/// Largest eigenvalue of S x = lambda M x by power iteration on M^{-1} S.
double max_eigenvalue(const GalerkinSpace& space, double tolerance = 1e-6, int max_iterations = 20000);

struct CflResult {
    bool stable = true;
    double lambda_max = 0.0;
    double tau_bound = 0.0; // +inf when unconditionally stable
};

/// Stable iff theta >= 1/4 or tau^2 (1/4 - theta) lambda_max <= (1 - delta)^2.
CflResult cfl_check(const GalerkinSpace& space, const ThetaSchemeConfig& config, double delta = 0.05);
/// The admissible step for theta < 1/4, (1 - delta) / sqrt((1/4 - theta) lambda_max).
double cfl_bound(double lambda_max, double theta, double delta = 0.05);

struct RunOptions {
    bool record_energy = true;
    /// Steps whose states are kept; empty keeps every state.
    std::vector<int> store_steps;
    bool enforce_cfl = true;
    double guard_factor = 1e6;
};

struct WaveTrajectory {
    double tau = 0.0;
    std::vector<int> steps;     // step index of each stored state
    std::vector<Vector> states; // coefficient vectors
    std::vector<double> energies; // E^{n+1/2} for n = 0 .. N-1
    double seconds = 0.0;

    [[nodiscard]] const Vector& final_state() const { return states.back(); }
    [[nodiscard]] const Vector& state_at(int step) const;
};

/// Runs the scheme from given coarse initial coefficients (u0, initial velocity w0).
/// Throws DivergenceError when the energy norm exceeds guard_factor times its reference
/// scale (initial energy and accumulated source work).
WaveTrajectory run(const GalerkinSpace& space, const ThetaSchemeConfig& config, const RhsSampler& rhs,
                   const Vector& u0, const Vector& w0, const RunOptions& options = {});

/// Samples the problem's initial data and source on the fine mesh, then runs.
WaveTrajectory run(const GalerkinSpace& space, const FineSystem& system, const ThetaSchemeConfig& config,
                   const WaveProblem& problem, const RunOptions& options = {});

/// Columns n, t, energy, state_norm (mass norm of u^n, empty unless stored).
void write_trajectory_csv(std::ostream& out, const WaveTrajectory& trajectory, const GalerkinSpace& space);

} // namespace plod
