#pragma once

#include "plod/coefficient.hpp"
#include "plod/wave_solver.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace plod {

enum class EllRule { rule, saturated, list };
enum class TauRule { fixed, proportional };

/// Time discretization of one family of runs. With TauRule::proportional the step is
/// `tau` times the relevant mesh size (H for the multiscale runs, h for the reference).
struct TimeSettings {
    double theta = 0.25;
    TauRule tau_rule = TauRule::fixed;
    double tau = 0x1.0p-8;
    InitialStep initial = InitialStep::fourth_order;
};

/// Everything a study needs. See configs/README.md for the file format and every key.
struct ExperimentConfig {
    // [mesh]
    std::vector<int> coarse_exps{1, 2, 3, 4, 5};
    int eps_exp = 5;
    int fine_exp = 7;
    // [coefficient]
    CoefficientDescriptor coefficient{CoefficientKind::checkerboard, 1, 5, 1.0, 10.0};
    // [method]
    std::vector<int> degrees{0, 1, 2};
    EllRule ell_rule = EllRule::rule;
    std::vector<int> ells;
    double ell_factor = 1.0;
    TimeSettings time;
    double final_time = 1.0;
    // [reference]
    TimeSettings reference{0.25, TauRule::fixed, 0x1.0p-8, InitialStep::fourth_order};
    // [problem]
    std::string problem = "sine_source";
    // [temporal]
    std::vector<double> temporal_taus{0x1.0p-3, 0x1.0p-4, 0x1.0p-5, 0x1.0p-6};
    std::vector<double> temporal_thetas{0.25, 1.0 / 12.0};
    std::vector<InitialStep> temporal_initial{InitialStep::fourth_order};
    int temporal_reference_divisor = 16;
    double temporal_reference_theta = 1.0 / 12.0;
    // [localization]
    std::vector<int> localization_ells{1, 2, 3, 4};
    // [output]
    std::string output_dir = "results";
    std::string output_name = "study";
    // [run]
    int threads = 1;
    std::string cache_dir;

    /// Canonical "section.key=value" lines, in a fixed order.
    [[nodiscard]] std::vector<std::pair<std::string, std::string>> entries() const;
    /// Checks cross-field invariants (nesting, fine/coarse ratio, step counts).
    void validate() const;
};

/// Parses "[section]" headers and "key = value" lines; '#' starts a comment. Unknown or
/// repeated keys are errors.
ExperimentConfig parse_config(std::istream& in, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& file);
/// Applies one "section.key=value" assignment.
void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Numbers may be written as decimals, fractions "1/12" or powers "2^-8".
double parse_number(const std::string& text);
std::string to_string(InitialStep step);
InitialStep initial_step_from_string(const std::string& text);

/// Localization radius for degree p on the mesh with H = 2^-coarse_exp.
int ell_for(const ExperimentConfig& config, int p, int coarse_exp, std::size_t index_in_list = 0);
/// max(1, ceil(factor * (p + 2) * log2(1/H) / 3)).
int ell_rule(double factor, int p, int coarse_exp);
/// Time step of the multiscale runs on H = 2^-coarse_exp.
double method_tau(const ExperimentConfig& config, int coarse_exp);
double reference_tau(const ExperimentConfig& config);
/// Number of steps reaching final_time exactly; throws ConfigError otherwise.
int step_count(double final_time, double tau);

/// Overrides for desk runs at the original resolution: h = 2^-8, eps = 2^-6, fixed steps 2^-9.
void apply_paper_scale(ExperimentConfig& config);

} // namespace plod
