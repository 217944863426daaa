#include "plod/config.hpp"
#include "plod/error.hpp"
#include "plod/experiments.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <functional>
#include <iostream>
#include <map>

namespace {

struct Options {
    std::string config;
    std::string out;
    int threads = 0;
    std::string cache;
    std::uint64_t seed = 0;
    bool seed_given = false;
    bool paper_scale = false;
    std::vector<std::string> sets;
};

plod::ExperimentConfig resolve(const Options& o)
{
    plod::ExperimentConfig config = o.config.empty() ? plod::ExperimentConfig{} : plod::load_config(o.config);
    if (o.paper_scale) {
        plod::apply_paper_scale(config);
    }
    for (const std::string& assignment : o.sets) {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos) {
            throw plod::ConfigError("--set expects section.key=value, got '" + assignment + "'");
        }
        plod::set_config_value(config, assignment.substr(0, eq), assignment.substr(eq + 1));
    }
    if (!o.out.empty()) {
        config.output_dir = o.out;
    }
    if (o.threads > 0) {
        config.threads = o.threads;
    }
    if (!o.cache.empty()) {
        config.cache_dir = o.cache;
    }
    if (o.seed_given) {
        config.coefficient.seed = o.seed;
    }
    config.validate();
    return config;
}

using Study = std::function<std::vector<plod::Table>(const plod::ExperimentConfig&)>;

int run_study(const std::string& command, const Options& options, const Study& study)
{
    const auto start = std::chrono::steady_clock::now();
    const plod::ExperimentConfig config = resolve(options);
    const std::filesystem::path dir = config.output_dir;
    std::vector<plod::ManifestEntry> outputs;
    for (const plod::Table& table : study(config)) {
        const std::string name = config.output_name + "_" + table.study + ".csv";
        plod::write_csv(dir / name, table);
        outputs.push_back({name, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()});
        std::cout << "wrote " << (dir / name).string() << " (" << table.rows.size() << " rows)\n";
        const int status = table.column("status");
        for (const auto& row : table.rows) {
            if (status >= 0 && row[static_cast<std::size_t>(status)] != "ok") {
                std::cerr << "warning: " << row[static_cast<std::size_t>(status)] << '\n';
            }
        }
    }
    const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    plod::write_manifest(dir / (config.output_name + "_" + command + "_manifest.json"), config, command, outputs,
                         total);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multiscale theta-scheme solver for the acoustic wave equation"};
    app.set_version_flag("--version", plod::version_string());
    app.require_subcommand(1);

    Options options;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", options.config, "Configuration file")->check(CLI::ExistingFile);
        sub->add_option("--out", options.out, "Output directory (overrides output.dir)");
        sub->add_option("--threads", options.threads, "Worker threads (overrides run.threads)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--cache", options.cache, "Basis cache directory (overrides run.cache)");
        sub->add_option_function<std::uint64_t>(
            "--seed",
            [&](std::uint64_t s) {
                options.seed = s;
                options.seed_given = true;
            },
            "Coefficient seed (overrides coefficient.seed)");
        sub->add_flag("--paper-scale", options.paper_scale, "h = 2^-8, eps = 2^-6, fixed steps 2^-9");
        sub->add_option("--set", options.sets, "Extra section.key=value assignments, applied last");
    };

    const std::map<std::string, std::pair<std::string, Study>> commands = {
        {"build-basis",
         {"Build or load every basis of the grid",
          [](const plod::ExperimentConfig& c) { return std::vector{plod::run_build_basis(c)}; }}},
        {"solve",
         {"Single trajectory with energy log for the first H and p",
          [](const plod::ExperimentConfig& c) { return std::vector{plod::run_solve(c)}; }}},
        {"convergence",
         {"Spatial convergence against the fine reference",
          [](const plod::ExperimentConfig& c) { return std::vector{plod::run_convergence_study(c)}; }}},
        {"localization",
         {"Errors over localization radii and basis decay",
          [](const plod::ExperimentConfig& c) {
              return std::vector{plod::run_localization_study(c), plod::run_decay_study(c)};
          }}},
        {"temporal",
         {"Temporal convergence in a fixed multiscale space",
          [](const plod::ExperimentConfig& c) { return std::vector{plod::run_temporal_study(c)}; }}},
        {"fem-compare",
         {"Coarse Q1 FEM next to the multiscale method",
          [](const plod::ExperimentConfig& c) { return std::vector{plod::run_fem_comparison(c)}; }}},
        {"energy-audit",
         {"Energy drift and per-step energy identity",
          [](const plod::ExperimentConfig& c) { return std::vector{plod::run_energy_audit(c)}; }}},
    };
    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, entry] : commands) {
        subs[name] = app.add_subcommand(name, entry.first);
        add_common(subs[name]);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        for (const auto& [name, sub] : subs) {
            if (sub->parsed()) {
                return run_study(name, options, commands.at(name).second);
            }
        }
    } catch (const plod::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
