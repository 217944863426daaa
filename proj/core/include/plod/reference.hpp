#pragma once

#include "plod/fine_fem.hpp"
#include "plod/problems.hpp"
#include "plod/wave_solver.hpp"

#include <vector>

namespace plod {

/// Fine Galerkin trajectory on the interior fine dofs; only `store_steps` are kept
/// (the final step when empty).
WaveTrajectory reference_solve(const FineSystem& system, const WaveProblem& problem, const ThetaSchemeConfig& config,
                               std::vector<int> store_steps = {});

struct ErrorNorms {
    double a_norm = 0.0;  // absolute
    double l2_norm = 0.0; // absolute
    double a_rel = 0.0;
    double l2_rel = 0.0;
    bool relative = true; // false if the reference norm fell below 1e-14 (rel fields then hold absolute norms)
};

/// Errors of a fine function against a reference, both given on all fine vertices.
ErrorNorms error_norms(const FineSystem& system, const Vector& approximation, const Vector& reference);

/// Errors of a state of `space` (coefficients) against a reference on all fine vertices.
ErrorNorms error_norms(const FineSystem& system, const GalerkinSpace& space, const Vector& coefficients,
                       const Vector& reference);

/// Coefficients of the S_h-orthogonal projection of a fine function onto the space.
Vector elliptic_projection(const FineSystem& system, const GalerkinSpace& space, const Vector& fine);

/// eoc_i = log(e_i / e_{i+1}) / log(s_i / s_{i+1}); one entry fewer than the inputs.
std::vector<double> eoc(const std::vector<double>& errors, const std::vector<double>& step_sizes);

} // namespace plod
