#include "plod/reference.hpp"

#include "plod/error.hpp"

#include <cmath>

namespace plod {

WaveTrajectory reference_solve(const FineSystem& system, const WaveProblem& problem, const ThetaSchemeConfig& config,
                               std::vector<int> store_steps)
{
    if (store_steps.empty()) {
        store_steps.push_back(config.steps);
    }
    const GalerkinSpace space = fine_space(system);
    RunOptions options;
    options.record_energy = false;
    options.store_steps = std::move(store_steps);
    return run(space, system, config, problem, options);
}

ErrorNorms error_norms(const FineSystem& system, const Vector& approximation, const Vector& reference)
{
    if (approximation.size() != reference.size() || reference.size() != system.mesh.vertex_count()) {
        throw InvalidArgument("error norms need two vectors on all fine vertices");
    }
    const Vector e = approximation - reference;
    ErrorNorms out;
    out.a_norm = std::sqrt(std::max(0.0, e.dot(system.stiffness_full * e)));
    out.l2_norm = std::sqrt(std::max(0.0, e.dot(system.mass_full * e)));
    const double ref_a = std::sqrt(std::max(0.0, reference.dot(system.stiffness_full * reference)));
    const double ref_l2 = std::sqrt(std::max(0.0, reference.dot(system.mass_full * reference)));
    if (ref_a < 1e-14 || ref_l2 < 1e-14) {
        out.relative = false;
        out.a_rel = out.a_norm;
        out.l2_rel = out.l2_norm;
    } else {
        out.a_rel = out.a_norm / ref_a;
        out.l2_rel = out.l2_norm / ref_l2;
    }
    return out;
}

ErrorNorms error_norms(const FineSystem& system, const GalerkinSpace& space, const Vector& coefficients,
                       const Vector& reference)
{
    return error_norms(system, space.lift(coefficients), reference);
}

Vector elliptic_projection(const FineSystem& system, const GalerkinSpace& space, const Vector& fine)
{
    const Vector rhs = space.basis.transpose() * (system.stiffness_full * fine);
    return SpdFactorization(space.stiffness).solve(rhs);
}

std::vector<double> eoc(const std::vector<double>& errors, const std::vector<double>& step_sizes)
{
    if (errors.size() != step_sizes.size() || errors.size() < 2) {
        throw InvalidArgument("eoc needs at least two errors and matching step sizes");
    }
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!(errors[i] > 0.0) || !(step_sizes[i] > 0.0)) {
            throw InvalidArgument("eoc needs positive errors and step sizes");
        }
    }
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
        out.push_back(std::log(errors[i] / errors[i + 1]) / std::log(step_sizes[i] / step_sizes[i + 1]));
    }
    return out;
}

} // namespace plod
