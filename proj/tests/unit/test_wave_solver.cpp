#include "plod/error.hpp"
#include "plod/experiments.hpp"
#include "plod/multiscale.hpp"
#include "plod/wave_solver.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace plod;

namespace {

Vector random_vector(int n, unsigned seed)
{
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector v(n);
    for (int i = 0; i < n; ++i) {
        v[i] = u(rng);
    }
    return v;
}

SparseMatrix diagonal(std::initializer_list<double> values)
{
    SparseMatrix m(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(values.size()));
    int i = 0;
    for (const double v : values) {
        m.insert(i, i) = v;
        ++i;
    }
    m.makeCompressed();
    return m;
}

GalerkinSpace scalar_space(double s, double m)
{
    GalerkinSpace space;
    space.stiffness = diagonal({s});
    space.mass = diagonal({m});
    space.basis = diagonal({1.0});
    space.restriction = diagonal({1.0});
    return space;
}

struct Fixture {
    MeshHierarchy mesh{2, 3, 5};
    CoefficientField coefficient = checkerboard(mesh, 7, 1.0, 10.0);
    FineSystem system = assemble(mesh, coefficient);
    MultiscaleBasis basis = build_basis(system, coefficient, 1, 3);
    GalerkinSpace space = multiscale_space(basis);
};

const Fixture& fixture()
{
    static const Fixture f;
    return f;
}

ThetaSchemeConfig scheme(double theta, double tau, int steps, InitialStep initial = InitialStep::fourth_order)
{
    ThetaSchemeConfig c;
    c.theta = theta;
    c.tau = tau;
    c.steps = steps;
    c.initial = initial;
    return c;
}

} // namespace

TEST(ThetaCombine, Weightings)
{
    const Vector a = random_vector(5, 1);
    const Vector b = random_vector(5, 2);
    const Vector c = random_vector(5, 3);
    EXPECT_LE((theta_combine(a, b, c, 0.0) - b).norm(), 1e-15);
    EXPECT_LE((theta_combine(a, a, a, 0.25) - a).norm(), 1e-15);
    EXPECT_LE((theta_combine(a, b, c, 0.25) - (a + 2.0 * b + c) / 4.0).norm(), 1e-15);
    EXPECT_THROW(theta_combine(a, b, Vector::Zero(3), 0.25), InvalidArgument);
}

TEST(ThetaScheme, ConfigValidation)
{
    EXPECT_THROW(scheme(-0.1, 0.1, 10).validate(), InvalidArgument);
    EXPECT_THROW(scheme(0.6, 0.1, 10).validate(), InvalidArgument);
    EXPECT_THROW(scheme(0.25, 0.0, 10).validate(), InvalidArgument);
    EXPECT_THROW(scheme(0.25, 0.1, 1).validate(), InvalidArgument);
    EXPECT_DOUBLE_EQ(scheme(0.25, 0.125, 8).final_time(), 1.0);
}

TEST(WaveSolver, ZeroDataStaysZero)
{
    const auto& f = fixture();
    const WaveSolver solver(f.space, scheme(0.25, 0.1, 10));
    const Vector z = Vector::Zero(f.space.size());
    const Vector u1 = solver.initial_step(z, z, z, z, z);
    EXPECT_EQ(u1.norm(), 0.0);
    EXPECT_EQ(solver.step(z, u1, z).norm(), 0.0);
    EXPECT_EQ(solver.energy(z, z), 0.0);

    const WaveTrajectory traj = run(f.space, f.system, scheme(0.25, 0x1.0p-4, 16), make_problem("zero"));
    ASSERT_EQ(traj.states.size(), 17u);
    for (const Vector& u : traj.states) {
        EXPECT_EQ(u.norm(), 0.0);
    }
}

TEST(WaveSolver, StepSolvesTheSchemeEquation)
{
    const auto& f = fixture();
    const double tau = 0.05;
    for (const double theta : {0.0, 1.0 / 12.0, 0.25, 0.5}) {
        const WaveSolver solver(f.space, scheme(theta, tau, 10));
        const Vector prev = random_vector(f.space.size(), 4);
        const Vector now = random_vector(f.space.size(), 5);
        const Vector load = random_vector(f.space.size(), 6);
        const Vector next = solver.step(prev, now, load);
        const Vector lhs = f.space.mass * (next - 2.0 * now + prev) / (tau * tau) +
                           f.space.stiffness * theta_combine(prev, now, next, theta);
        EXPECT_LE((lhs - load).norm(), 1e-10 * (f.space.stiffness * now).norm()) << "theta " << theta;
    }
}

TEST(WaveSolver, ExplicitLeapfrogUpdate)
{
    const GalerkinSpace space = scalar_space(3.0, 2.0);
    const double tau = 0.1;
    const WaveSolver solver(space, scheme(0.0, tau, 10));
    Vector prev(1), now(1), load(1);
    prev << 0.3;
    now << 0.7;
    load << 1.5;
    const double expected = (tau * tau * 1.5 + 2.0 * (2.0 * 0.7 - 0.3) - tau * tau * 3.0 * 0.7) / 2.0;
    EXPECT_NEAR(solver.step(prev, now, load)[0], expected, 1e-15);
}

TEST(WaveSolver, ReducedInitialStepWithoutCoupling)
{
    const GalerkinSpace space = scalar_space(3.0, 2.0);
    const double tau = 0.1;
    const WaveSolver solver(space, scheme(0.0, tau, 10, InitialStep::reduced));
    Vector u0(1), w0(1), f0(1), d(1);
    u0 << 0.4;
    w0 << -1.2;
    f0 << 0.9;
    d << 100.0;
    const double expected = (2.0 * 0.4 + tau * 2.0 * -1.2 - 0.5 * tau * tau * 3.0 * 0.4 + 0.5 * tau * tau * 0.9) / 2.0;
    EXPECT_NEAR(solver.initial_step(u0, w0, f0, d, d)[0], expected, 1e-15);
}

TEST(WaveSolver, FourthOrderAndReducedDifferByCubicTerms)
{
    const auto& f = fixture();
    const Vector u0 = random_vector(f.space.size(), 8);
    const Vector w0 = random_vector(f.space.size(), 9);
    const Vector f0 = random_vector(f.space.size(), 10);
    const Vector f1 = random_vector(f.space.size(), 11);
    const Vector f2 = random_vector(f.space.size(), 12);
    std::vector<double> gaps;
    for (const double tau : {0x1.0p-9, 0x1.0p-10, 0x1.0p-11}) {
        const WaveSolver four(f.space, scheme(1.0 / 12.0, tau, 10, InitialStep::fourth_order));
        const WaveSolver reduced(f.space, scheme(1.0 / 12.0, tau, 10, InitialStep::reduced));
        gaps.push_back((four.initial_step(u0, w0, f0, f1, f2) - reduced.initial_step(u0, w0, f0, f1, f2)).norm());
    }
    EXPECT_NEAR(gaps[0] / gaps[1], 8.0, 0.4);
    EXPECT_NEAR(gaps[1] / gaps[2], 8.0, 0.4);
}

TEST(WaveSolver, ScalarAmplificationHasUnitSpectralRadius)
{
    const GalerkinSpace space = scalar_space(1.0, 1.0);
    for (const double tau : {0.01, 0.5, 1.9, 10.0, 1000.0}) {
        const WaveSolver solver(space, scheme(0.25, tau, 10));
        Eigen::Matrix2d amplification;
        const Vector zero = Vector::Zero(1);
        const Vector one = Vector::Ones(1);
        amplification(0, 0) = solver.step(zero, one, zero)[0];
        amplification(0, 1) = solver.step(one, zero, zero)[0];
        amplification(1, 0) = 1.0;
        amplification(1, 1) = 0.0;
        const auto eigenvalues = amplification.eigenvalues();
        for (int i = 0; i < 2; ++i) {
            EXPECT_NEAR(std::abs(eigenvalues[i]), 1.0, 1e-12) << "tau " << tau;
        }
    }
}

TEST(WaveSolver, EnergyConservedWithoutSource)
{
    const auto& f = fixture();
    const Vector u0 = random_vector(f.space.size(), 13);
    const Vector w0 = random_vector(f.space.size(), 14);
    const Vector zero = Vector::Zero(f.space.size());
    const RhsSampler rhs(f.space, f.system, make_problem("zero"));
    for (const double theta : {1.0 / 12.0, 0.25, 0.5}) {
        const ThetaSchemeConfig c = scheme(theta, 0x1.0p-6, 200);
        const WaveTrajectory traj = run(f.space, c, rhs, u0, w0);
        ASSERT_EQ(traj.energies.size(), 200u);
        for (const double e : traj.energies) {
            EXPECT_LE(std::abs(e - traj.energies.front()), 1e-10 * traj.energies.front()) << "theta " << theta;
        }
    }
}

TEST(WaveSolver, CrankNicolsonEnergyHasNoCorrection)
{
    const auto& f = fixture();
    const WaveSolver solver(f.space, scheme(0.25, 0.3, 10));
    const Vector a = random_vector(f.space.size(), 15);
    const Vector b = random_vector(f.space.size(), 16);
    EXPECT_NEAR(solver.energy(a, b), solver.energy_norm(a, b), 1e-12 * solver.energy_norm(a, b));
}

TEST(WaveSolver, EnergyIdentityWithSource)
{
    const auto& f = fixture();
    const WaveProblem problem = make_problem("smooth_initial");
    const RhsSampler rhs(f.space, f.system, problem);
    for (const double theta : {1.0 / 12.0, 0.25}) {
        const ThetaSchemeConfig c = scheme(theta, 0x1.0p-6, 128);
        const WaveTrajectory traj = run(f.space, f.system, c, problem);
        const EnergyAudit audit = audit_energy(traj, rhs, c);
        EXPECT_LE(audit.max_identity_residual, 1e-10);
        EXPECT_GT(audit.max_drift, 1e-4);
    }
}

TEST(WaveSolver, ReversibleWithoutSource)
{
    const auto& f = fixture();
    const WaveSolver solver(f.space, scheme(0.25, 0.01, 10));
    const Vector zero = Vector::Zero(f.space.size());
    const Vector u0 = random_vector(f.space.size(), 17);
    const Vector u1 = random_vector(f.space.size(), 18);
    Vector prev = u0;
    Vector now = u1;
    for (int n = 0; n < 100; ++n) {
        Vector next = solver.step(prev, now, zero);
        prev = std::move(now);
        now = std::move(next);
    }
    // Swap the roles of the newest and previous state and march back.
    std::swap(prev, now);
    for (int n = 0; n < 100; ++n) {
        Vector next = solver.step(prev, now, zero);
        prev = std::move(now);
        now = std::move(next);
    }
    EXPECT_LE((now - u0).norm(), 1e-8 * u0.norm());
    EXPECT_LE((prev - u1).norm(), 1e-8 * u1.norm());
}

TEST(WaveSolver, LinearInTheData)
{
    const auto& f = fixture();
    const ThetaSchemeConfig c = scheme(0.25, 0x1.0p-5, 32);
    const RhsSampler forced(f.space, f.system, make_problem("sine_source"));
    const RhsSampler free(f.space, f.system, make_problem("zero"));
    const Vector u0 = random_vector(f.space.size(), 19);
    const Vector w0 = random_vector(f.space.size(), 20);
    const Vector zero = Vector::Zero(f.space.size());
    const WaveTrajectory a = run(f.space, c, forced, zero, zero);
    const WaveTrajectory b = run(f.space, c, free, u0, w0);
    const WaveTrajectory sum = run(f.space, c, forced, u0, w0);
    EXPECT_LE((a.final_state() + b.final_state() - sum.final_state()).norm(), 1e-10 * sum.final_state().norm());
}

TEST(WaveSolver, CrankNicolsonBoundedForLargeSteps)
{
    const auto& f = fixture();
    const Vector u0 = random_vector(f.space.size(), 21);
    const Vector zero = Vector::Zero(f.space.size());
    const RhsSampler rhs(f.space, f.system, make_problem("zero"));
    const ThetaSchemeConfig c = scheme(0.25, 0.5, 400);
    const WaveTrajectory traj = run(f.space, c, rhs, u0, zero);
    const WaveSolver solver(f.space, c);
    const double e0 = solver.energy_norm(traj.states[0], traj.states[1]);
    for (std::size_t n = 0; n + 1 < traj.states.size(); ++n) {
        EXPECT_LE(solver.energy_norm(traj.states[n], traj.states[n + 1]), e0 * (1.0 + 1e-9));
    }
}

TEST(Cfl, ScalarPencil)
{
    const GalerkinSpace space = scalar_space(2.0, 1.0);
    EXPECT_NEAR(max_eigenvalue(space), 2.0, 1e-14);
    EXPECT_NEAR(cfl_bound(2.0, 0.0, 0.05), 0.95 * 2.0 / std::sqrt(2.0), 1e-15);
    EXPECT_TRUE(std::isinf(cfl_bound(2.0, 0.25)));
}

TEST(Cfl, PowerIterationMatchesDenseEigenvalues)
{
    const auto& f = fixture();
    const Eigen::MatrixXd s(f.space.stiffness);
    const Eigen::MatrixXd m(f.space.mass);
    const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(s, m);
    const double exact = eig.eigenvalues().maxCoeff();
    EXPECT_NEAR(max_eigenvalue(f.space, 1e-10, 100000), exact, 1e-6 * exact);
}

TEST(Cfl, UnconditionalForLargeTheta)
{
    const auto& f = fixture();
    for (const double theta : {0.25, 0.5}) {
        const CflResult r = cfl_check(f.space, scheme(theta, 100.0, 10));
        EXPECT_TRUE(r.stable);
        EXPECT_TRUE(std::isinf(r.tau_bound));
    }
    const CflResult r = cfl_check(f.space, scheme(0.0, 100.0, 10));
    EXPECT_FALSE(r.stable);
    EXPECT_NEAR(r.tau_bound, 0.95 * 2.0 / std::sqrt(r.lambda_max), 1e-14);
}

TEST(Cfl, BoundIsSharp)
{
    const auto& f = fixture();
    const Vector u0 = random_vector(f.space.size(), 22);
    const Vector zero = Vector::Zero(f.space.size());
    const RhsSampler rhs(f.space, f.system, make_problem("zero"));
    const double bound = cfl_bound(max_eigenvalue(f.space), 0.0);

    ThetaSchemeConfig stable = scheme(0.0, bound, 2000);
    const WaveTrajectory traj = run(f.space, stable, rhs, u0, zero);
    EXPECT_LE(std::abs(traj.energies.back() - traj.energies.front()), 1e-9 * traj.energies.front());

    ThetaSchemeConfig unstable = scheme(0.0, 1.5 * bound, 2000);
    RunOptions options;
    options.enforce_cfl = false;
    EXPECT_THROW(run(f.space, unstable, rhs, u0, zero, options), DivergenceError);
    options.enforce_cfl = true;
    EXPECT_THROW(run(f.space, unstable, rhs, u0, zero, options), InvalidArgument);
}

TEST(WaveSolver, FourthOrderNeedsTimeDerivatives)
{
    const auto& f = fixture();
    WaveProblem problem = make_problem("sine_source");
    problem.source.front().d2 = nullptr;
    EXPECT_THROW(run(f.space, f.system, scheme(0.25, 0x1.0p-4, 16), problem), InvalidArgument);
    EXPECT_NO_THROW(run(f.space, f.system, scheme(0.25, 0x1.0p-4, 16, InitialStep::reduced), problem));
}

TEST(RhsSampler, LoadsAreMassWeightedInterpolants)
{
    const auto& f = fixture();
    const RhsSampler rhs(f.space, f.system, make_problem("sine_source"));
    const Vector g = interpolate(f.mesh, [](double x, double y) { return std::sin(M_PI * x) * std::sin(M_PI * y); });
    const Vector expected = f.space.basis.transpose() * (f.system.mass_full * g);
    const double t = 0.7;
    EXPECT_LE((rhs.value(t) - std::pow(std::sin(t), 4) * expected).norm(), 1e-13 * expected.norm());
    const double h = 1e-4;
    const Vector fd = (rhs.value(t + h) - rhs.value(t - h)) / (2.0 * h);
    EXPECT_LE((rhs.d1(t) - fd).norm(), 1e-6 * expected.norm());
    EXPECT_TRUE(RhsSampler(f.space, f.system, make_problem("zero")).is_zero());
}

TEST(Trajectory, StoresRequestedStepsAndWritesCsv)
{
    const auto& f = fixture();
    RunOptions options;
    options.store_steps = {0, 8, 16};
    const WaveTrajectory traj = run(f.space, f.system, scheme(0.25, 0x1.0p-4, 16), make_problem("sine_source"), options);
    EXPECT_EQ(traj.steps, (std::vector<int>{0, 8, 16}));
    EXPECT_EQ(traj.energies.size(), 16u);
    EXPECT_THROW(static_cast<void>(traj.state_at(3)), InvalidArgument);
    std::ostringstream out;
    write_trajectory_csv(out, traj, f.space);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "n,t,energy,state_norm");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
    }
    EXPECT_EQ(rows, 17);
}
