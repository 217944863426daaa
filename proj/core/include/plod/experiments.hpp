#pragma once

#include "plod/config.hpp"
#include "plod/multiscale.hpp"
#include "plod/reference.hpp"
#include "plod/wave_solver.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace plod {

inline constexpr int csv_schema_version = 1;

/// A study result. Cells are preformatted text so the CSV bytes are fixed by the table.
struct Table {
    std::string study;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    /// Wall-clock columns, excluded from determinism comparisons.
    std::vector<std::string> timing_columns;

    [[nodiscard]] int column(const std::string& name) const;
    [[nodiscard]] const std::string& cell(std::size_t row, const std::string& name) const;
    [[nodiscard]] double number(std::size_t row, const std::string& name) const;
    /// Copy with the timing columns removed.
    [[nodiscard]] Table without_timing() const;
};

/// "# plod-csv v1 study=<name>", the column line, then one line per row.
void write_csv(std::ostream& out, const Table& table);
void write_csv(const std::filesystem::path& file, const Table& table);
Table read_csv(std::istream& in);

/// Shortest round-trip text; NaN becomes an empty cell.
std::string csv_number(double value);
/// Replaces characters that would break a CSV cell.
std::string csv_text(std::string text);

/// Everything built once per (H, coefficient) and shared by all runs on that mesh.
struct Discretization {
    MeshHierarchy mesh;
    CoefficientField coefficient;
    FineSystem system;
};
Discretization discretize(const ExperimentConfig& config, int coarse_exp);

/// Basis for degree p and radius ell, through the cache when config.cache_dir is set.
MultiscaleBasis study_basis(const ExperimentConfig& config, const Discretization& d, int p, int ell, int threads,
                            bool* cache_hit = nullptr);

/// Fine reference at the final time on all fine vertices.
Vector reference_final_state(const ExperimentConfig& config, const Discretization& d);

struct EnergyAudit {
    double max_drift = 0.0;             // max |E^{n+1/2} - E^{1/2}| / max E
    double max_identity_residual = 0.0; // max |2 dE - f^T (u^{n+1} - u^{n-1})| / max E
    double initial_energy = 0.0;
    double final_energy = 0.0;
    double max_energy = 0.0;
};
/// Checks the discrete energy balance of a trajectory that stored every state.
EnergyAudit audit_energy(const WaveTrajectory& trajectory, const RhsSampler& rhs, const ThetaSchemeConfig& config);

/// Rows: coefficient, p, ell, H, dofs, tau, a_err_rel, l2_err_rel, eoc_a, eoc_l2,
/// build_seconds, solve_seconds, status.
Table run_convergence_study(const ExperimentConfig& config);
/// Solution errors for every radius in localization.ells (plus saturated) at every H.
Table run_localization_study(const ExperimentConfig& config);
/// Column decay e(ell) against the saturated basis for the first H.
Table run_decay_study(const ExperimentConfig& config);
/// One basis (first H and p), every theta, initial step and tau against a small-step reference.
Table run_temporal_study(const ExperimentConfig& config);
/// Q1 FEM on the coarse mesh next to the multiscale method at the same H.
Table run_fem_comparison(const ExperimentConfig& config);
/// Energy drift and per-step identity residual for every (H, p).
Table run_energy_audit(const ExperimentConfig& config);
/// Builds (or loads) every basis of the grid and reports its size.
Table run_build_basis(const ExperimentConfig& config);
/// Single trajectory for the first (H, p); rows n, t, energy, state_norm.
Table run_solve(const ExperimentConfig& config);

struct ManifestEntry {
    std::string file;
    double seconds = 0.0;
};
/// JSON run manifest: configuration echo, library versions, output files and wall times.
void write_manifest(const std::filesystem::path& file, const ExperimentConfig& config, const std::string& command,
                    const std::vector<ManifestEntry>& outputs, double total_seconds);

std::string version_string();

} // namespace plod
