#include "plod/error.hpp"
#include "plod/reference.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace plod;

namespace {

ThetaSchemeConfig scheme(double theta, double tau, int steps)
{
    ThetaSchemeConfig c;
    c.theta = theta;
    c.tau = tau;
    c.steps = steps;
    return c;
}

struct Small {
    MeshHierarchy mesh{1, 2, 5};
    CoefficientField coefficient = analytic_smooth(mesh);
    FineSystem system = assemble(mesh, coefficient);
};

} // namespace

TEST(Reference, ZeroDataGivesZero)
{
    const Small s;
    const WaveTrajectory traj = reference_solve(s.system, make_problem("zero"), scheme(0.25, 0.125, 8));
    ASSERT_EQ(traj.steps, std::vector<int>{8});
    EXPECT_EQ(traj.final_state().norm(), 0.0);
}

TEST(Reference, SecondOrderInTimeForCrankNicolson)
{
    const Small s;
    const WaveProblem problem = make_problem("smooth_initial");
    std::vector<Vector> finals;
    for (const int steps : {8, 16, 32}) {
        finals.push_back(reference_solve(s.system, problem, scheme(0.25, 1.0 / steps, steps)).final_state());
    }
    const double d1 = (finals[0] - finals[1]).norm();
    const double d2 = (finals[1] - finals[2]).norm();
    EXPECT_NEAR(d1 / d2, 4.0, 0.5);
}

TEST(Reference, StoresRequestedSteps)
{
    const Small s;
    const WaveTrajectory traj =
        reference_solve(s.system, make_problem("sine_source"), scheme(0.25, 0.125, 8), {2, 4, 8});
    EXPECT_EQ(traj.steps, (std::vector<int>{2, 4, 8}));
    EXPECT_TRUE(traj.energies.empty());
    EXPECT_EQ(traj.final_state().size(), s.system.interior_count());
}

TEST(ErrorNorms, ScalingAndDegenerateReference)
{
    const Small s;
    const Vector ref = s.system.extend_from_interior(Vector::LinSpaced(s.system.interior_count(), 0.1, 2.0));
    const ErrorNorms same = error_norms(s.system, ref, ref);
    EXPECT_EQ(same.a_norm, 0.0);
    EXPECT_EQ(same.l2_rel, 0.0);
    EXPECT_TRUE(same.relative);

    const ErrorNorms doubled = error_norms(s.system, Vector(2.0 * ref), ref);
    EXPECT_NEAR(doubled.a_rel, 1.0, 1e-14);
    EXPECT_NEAR(doubled.l2_rel, 1.0, 1e-14);
    EXPECT_NEAR(doubled.a_norm * doubled.a_norm, ref.dot(s.system.stiffness_full * ref), 1e-10);

    const Vector zero = Vector::Zero(ref.size());
    const ErrorNorms absolute = error_norms(s.system, ref, zero);
    EXPECT_FALSE(absolute.relative);
    EXPECT_EQ(absolute.a_rel, absolute.a_norm);
    EXPECT_THROW(error_norms(s.system, Vector::Zero(3), ref), InvalidArgument);
}

TEST(EllipticProjection, ReproducesSpaceMembersAndIsOrthogonal)
{
    const Small s;
    const GalerkinSpace fem = coarse_fem_space(s.system);
    Vector c(fem.size());
    c << 0.7;
    EXPECT_NEAR(elliptic_projection(s.system, fem, fem.lift(c))[0], 0.7, 1e-13);

    const Vector f = interpolate(s.mesh, [](double x, double y) { return x * (1 - x) * std::sin(3 * y); });
    const Vector proj = fem.lift(elliptic_projection(s.system, fem, f));
    const Vector orth = fem.basis.transpose() * (s.system.stiffness_full * (f - proj));
    EXPECT_LE(orth.norm(), 1e-12);
}

TEST(Eoc, RatesFromErrors)
{
    const std::vector<double> h{0.5, 0.25, 0.125};
    const auto rates = eoc({0.25, 0.0625, 0.015625}, h);
    ASSERT_EQ(rates.size(), 2u);
    EXPECT_NEAR(rates[0], 2.0, 1e-14);
    EXPECT_NEAR(rates[1], 2.0, 1e-14);
    EXPECT_THROW(eoc({1.0}, {1.0}), InvalidArgument);
    EXPECT_THROW(eoc({1.0, 0.0}, {1.0, 0.5}), InvalidArgument);
}
