#include "plod/experiments.hpp"

#include "plod/basis_cache.hpp"
#include "plod/error.hpp"
#include "plod/io.hpp"
#include "plod/parallel.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#ifndef PLOD_VERSION
#define PLOD_VERSION "unknown"
#endif

namespace plod {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

std::string failure_status(const std::exception& e)
{
    const char* kind = "error";
    if (dynamic_cast<const DivergenceError*>(&e)) {
        kind = "diverged";
    } else if (dynamic_cast<const SolverError*>(&e)) {
        kind = "solver";
    } else if (dynamic_cast<const InvariantViolation*>(&e)) {
        kind = "invariant";
    } else if (dynamic_cast<const InvalidArgument*>(&e)) {
        kind = "invalid";
    }
    return csv_text(std::string(kind) + ": " + e.what());
}

double coarse_size(int coarse_exp)
{
    return std::ldexp(1.0, -coarse_exp);
}

ThetaSchemeConfig method_scheme(const ExperimentConfig& config, int coarse_exp)
{
    ThetaSchemeConfig s;
    s.theta = config.time.theta;
    s.tau = method_tau(config, coarse_exp);
    s.steps = step_count(config.final_time, s.tau);
    s.initial = config.time.initial;
    return s;
}

/// Threads for the inner work of one grid point when `points` run side by side.
int inner_threads(const ExperimentConfig& config, std::size_t points)
{
    return points > 1 ? 1 : config.threads;
}

struct PointResult {
    ErrorNorms errors;
    int ell = 0;
    int dofs = 0;
    double tau = 0.0;
    double build_seconds = nan;
    double solve_seconds = nan;
    std::string status = "ok";
};

PointResult solve_point(const ExperimentConfig& config, const Discretization& d, const WaveProblem& problem,
                        const Vector& reference, int p, int ell, int threads)
{
    PointResult r;
    r.ell = ell;
    r.dofs = (p + 1) * (p + 1) * d.mesh.element_count();
    const ThetaSchemeConfig scheme = method_scheme(config, d.mesh.coarse_exp());
    r.tau = scheme.tau;
    try {
        MultiscaleBasis basis = study_basis(config, d, p, ell, threads);
        r.build_seconds = basis.build_seconds;
        const GalerkinSpace space = multiscale_space(std::move(basis));
        RunOptions options;
        options.record_energy = false;
        options.store_steps = {scheme.steps};
        const WaveTrajectory traj = run(space, d.system, scheme, problem, options);
        r.solve_seconds = traj.seconds;
        r.errors = error_norms(d.system, space, traj.final_state(), reference);
    } catch (const Error& e) {
        r.status = failure_status(e);
    }
    return r;
}

std::string eoc_cell(const PointResult& coarse, const PointResult& fine, double h_coarse, double h_fine, bool l2)
{
    if (coarse.status != "ok" || fine.status != "ok") {
        return {};
    }
    const double a = l2 ? coarse.errors.l2_rel : coarse.errors.a_rel;
    const double b = l2 ? fine.errors.l2_rel : fine.errors.a_rel;
    if (!(a > 0.0) || !(b > 0.0)) {
        return {};
    }
    return csv_number(std::log(a / b) / std::log(h_coarse / h_fine));
}

std::vector<Discretization> all_discretizations(const ExperimentConfig& config)
{
    std::vector<Discretization> out;
    out.reserve(config.coarse_exps.size());
    for (const int k : config.coarse_exps) {
        out.push_back(discretize(config, k));
    }
    return out;
}

std::string error_cell(const PointResult& r, bool l2)
{
    if (r.status != "ok") {
        return {};
    }
    return csv_number(l2 ? r.errors.l2_rel : r.errors.a_rel);
}

} // namespace

int Table::column(const std::string& name) const
{
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) {
        throw InvalidArgument("table " + study + " has no column '" + name + "'");
    }
    return static_cast<int>(it - columns.begin());
}

const std::string& Table::cell(std::size_t row, const std::string& name) const
{
    return rows.at(row).at(static_cast<std::size_t>(column(name)));
}

double Table::number(std::size_t row, const std::string& name) const
{
    const std::string& text = cell(row, name);
    return text.empty() ? nan : std::stod(text);
}

Table Table::without_timing() const
{
    Table out;
    out.study = study;
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (std::find(timing_columns.begin(), timing_columns.end(), columns[c]) == timing_columns.end()) {
            keep.push_back(c);
            out.columns.push_back(columns[c]);
        }
    }
    for (const auto& row : rows) {
        std::vector<std::string> r;
        for (const std::size_t c : keep) {
            r.push_back(row[c]);
        }
        out.rows.push_back(std::move(r));
    }
    return out;
}

std::string csv_number(double value)
{
    return std::isnan(value) ? std::string() : format_double(value);
}

std::string csv_text(std::string text)
{
    for (char& c : text) {
        if (c == ',' || c == '\n' || c == '\r' || c == '"') {
            c = c == ',' ? ';' : ' ';
        }
    }
    return text;
}

void write_csv(std::ostream& out, const Table& table)
{
    out << "# plod-csv v" << csv_schema_version << " study=" << table.study << '\n';
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        out << (c ? "," : "") << table.columns[c];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.columns.size()) {
            throw InvariantViolation("row width does not match the header of " + table.study);
        }
        for (std::size_t c = 0; c < row.size(); ++c) {
            out << (c ? "," : "") << row[c];
        }
        out << '\n';
    }
}

void write_csv(const std::filesystem::path& file, const Table& table)
{
    if (file.has_parent_path()) {
        std::filesystem::create_directories(file.parent_path());
    }
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot write " + file.string());
    }
    write_csv(out, table);
}

Table read_csv(std::istream& in)
{
    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::string cell;
        std::stringstream s(line);
        while (std::getline(s, cell, ',')) {
            cells.push_back(cell);
        }
        if (!line.empty() && line.back() == ',') {
            cells.emplace_back();
        }
        return cells;
    };
    Table table;
    std::string line;
    const std::string magic = "# plod-csv v" + std::to_string(csv_schema_version) + " study=";
    if (!std::getline(in, line) || line.rfind(magic, 0) != 0) {
        throw ConfigError("not a plod CSV file of schema version " + std::to_string(csv_schema_version));
    }
    table.study = line.substr(magic.size());
    if (!std::getline(in, line)) {
        throw ConfigError("CSV file has no column line");
    }
    table.columns = split(line);
    while (std::getline(in, line)) {
        auto row = split(line);
        if (row.size() != table.columns.size()) {
            throw ConfigError("CSV row has " + std::to_string(row.size()) + " cells, expected " +
                              std::to_string(table.columns.size()));
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

Discretization discretize(const ExperimentConfig& config, int coarse_exp)
{
    Discretization d;
    d.mesh = build_hierarchy(coarse_exp, config.eps_exp, config.fine_exp);
    CoefficientDescriptor descriptor = config.coefficient;
    descriptor.eps_exp = config.eps_exp;
    d.coefficient = make_coefficient(d.mesh, descriptor);
    d.system = assemble(d.mesh, d.coefficient, config.threads);
    return d;
}

MultiscaleBasis study_basis(const ExperimentConfig& config, const Discretization& d, int p, int ell, int threads,
                            bool* cache_hit)
{
    if (config.cache_dir.empty()) {
        if (cache_hit) {
            *cache_hit = false;
        }
        return build_basis(d.system, d.coefficient, p, ell, threads);
    }
    return cached_basis(config.cache_dir, d.system, d.coefficient, p, ell, threads, cache_hit);
}

Vector reference_final_state(const ExperimentConfig& config, const Discretization& d)
{
    ThetaSchemeConfig s;
    s.theta = config.reference.theta;
    s.tau = reference_tau(config);
    s.steps = step_count(config.final_time, s.tau);
    s.initial = config.reference.initial;
    const WaveTrajectory traj = reference_solve(d.system, make_problem(config.problem), s);
    return d.system.extend_from_interior(traj.final_state());
}

EnergyAudit audit_energy(const WaveTrajectory& trajectory, const RhsSampler& rhs, const ThetaSchemeConfig& config)
{
    const auto& e = trajectory.energies;
    if (e.empty() || trajectory.states.size() != e.size() + 1) {
        throw InvalidArgument("energy audit needs the energy log and every state");
    }
    EnergyAudit a;
    a.initial_energy = e.front();
    a.final_energy = e.back();
    for (const double v : e) {
        a.max_energy = std::max(a.max_energy, std::abs(v));
    }
    const double scale = a.max_energy > 0.0 ? a.max_energy : 1.0;
    for (const double v : e) {
        a.max_drift = std::max(a.max_drift, std::abs(v - e.front()) / scale);
    }
    for (std::size_t n = 1; n < e.size(); ++n) {
        const Vector f = rhs.is_zero() ? Vector::Zero(rhs.size())
                                       : rhs.theta_value(static_cast<int>(n), config.tau, config.theta);
        const double work = f.dot(trajectory.states[n + 1] - trajectory.states[n - 1]);
        a.max_identity_residual = std::max(a.max_identity_residual, std::abs(2.0 * (e[n] - e[n - 1]) - work) / scale);
    }
    return a;
}

Table run_convergence_study(const ExperimentConfig& config)
{
    config.validate();
    const auto discs = all_discretizations(config);
    const WaveProblem problem = make_problem(config.problem);
    const Vector reference = reference_final_state(config, discs.front());

    const std::size_t nk = config.coarse_exps.size();
    const std::size_t points = config.degrees.size() * nk;
    std::vector<PointResult> results(points);
    parallel_for(static_cast<int>(points), config.threads, [&](int i) {
        const std::size_t pi = static_cast<std::size_t>(i) / nk;
        const std::size_t ki = static_cast<std::size_t>(i) % nk;
        const int p = config.degrees[pi];
        const int ell = ell_for(config, p, config.coarse_exps[ki], ki);
        results[static_cast<std::size_t>(i)] =
            solve_point(config, discs[ki], problem, reference, p, ell, inner_threads(config, points));
    });

    Table t;
    t.study = "convergence";
    t.columns = {"coefficient", "p", "ell", "H", "dofs", "tau", "a_err_rel", "l2_err_rel", "eoc_a", "eoc_l2",
                 "build_seconds", "solve_seconds", "status"};
    t.timing_columns = {"build_seconds", "solve_seconds"};
    for (std::size_t pi = 0; pi < config.degrees.size(); ++pi) {
        for (std::size_t ki = 0; ki < nk; ++ki) {
            const PointResult& r = results[pi * nk + ki];
            const double h = coarse_size(config.coarse_exps[ki]);
            std::string eoc_a;
            std::string eoc_l2;
            if (ki > 0) {
                const PointResult& prev = results[pi * nk + ki - 1];
                const double h_prev = coarse_size(config.coarse_exps[ki - 1]);
                eoc_a = eoc_cell(prev, r, h_prev, h, false);
                eoc_l2 = eoc_cell(prev, r, h_prev, h, true);
            }
            t.rows.push_back({config.coefficient.canonical(), std::to_string(config.degrees[pi]), std::to_string(r.ell),
                              csv_number(h), std::to_string(r.dofs), csv_number(r.tau), error_cell(r, false),
                              error_cell(r, true), eoc_a, eoc_l2, csv_number(r.build_seconds),
                              csv_number(r.solve_seconds), r.status});
        }
    }
    return t;
}

Table run_localization_study(const ExperimentConfig& config)
{
    config.validate();
    const auto discs = all_discretizations(config);
    const WaveProblem problem = make_problem(config.problem);
    const Vector reference = reference_final_state(config, discs.front());

    struct Point {
        std::size_t ki;
        int p;
        int ell;
    };
    std::vector<Point> grid;
    for (const int p : config.degrees) {
        for (std::size_t ki = 0; ki < discs.size(); ++ki) {
            for (const int ell : config.localization_ells) {
                grid.push_back({ki, p, ell});
            }
        }
    }
    std::vector<PointResult> results(grid.size());
    parallel_for(static_cast<int>(grid.size()), config.threads, [&](int i) {
        const Point& g = grid[static_cast<std::size_t>(i)];
        results[static_cast<std::size_t>(i)] =
            solve_point(config, discs[g.ki], problem, reference, g.p, g.ell, inner_threads(config, grid.size()));
    });

    Table t;
    t.study = "localization";
    t.columns = {"coefficient", "p", "ell", "saturated", "H", "dofs", "tau", "a_err_rel", "l2_err_rel",
                 "build_seconds", "solve_seconds", "status"};
    t.timing_columns = {"build_seconds", "solve_seconds"};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Point& g = grid[i];
        const PointResult& r = results[i];
        const bool saturated = g.ell >= saturation_radius(discs[g.ki].mesh);
        t.rows.push_back({config.coefficient.canonical(), std::to_string(g.p), std::to_string(g.ell),
                          saturated ? "1" : "0", csv_number(discs[g.ki].mesh.coarse_size()), std::to_string(r.dofs),
                          csv_number(r.tau), error_cell(r, false), error_cell(r, true), csv_number(r.build_seconds),
                          csv_number(r.solve_seconds), r.status});
    }
    return t;
}

Table run_decay_study(const ExperimentConfig& config)
{
    config.validate();
    const Discretization d = discretize(config, config.coarse_exps.front());
    const int saturated = saturation_radius(d.mesh);
    std::vector<int> ells;
    for (const int ell : config.localization_ells) {
        if (ell < saturated) {
            ells.push_back(ell);
        }
    }
    std::sort(ells.begin(), ells.end());
    ells.erase(std::unique(ells.begin(), ells.end()), ells.end());
    ells.push_back(saturated);

    Table t;
    t.study = "decay";
    t.columns = {"coefficient", "p", "H", "ell", "decay_error", "ratio", "status"};
    for (const int p : config.degrees) {
        try {
            const auto decay = localization_decay(d.system, d.coefficient, p, ells, {}, config.threads);
            for (std::size_t i = 0; i < decay.size(); ++i) {
                std::string ratio;
                if (i > 0 && decay[i - 1].error > 0.0 && i + 1 < decay.size()) {
                    ratio = csv_number(decay[i].error / decay[i - 1].error);
                }
                t.rows.push_back({config.coefficient.canonical(), std::to_string(p),
                                  csv_number(d.mesh.coarse_size()), std::to_string(decay[i].ell),
                                  csv_number(decay[i].error), ratio, "ok"});
            }
        } catch (const Error& e) {
            t.rows.push_back({config.coefficient.canonical(), std::to_string(p), csv_number(d.mesh.coarse_size()), "",
                              "", "", failure_status(e)});
        }
    }
    return t;
}

Table run_temporal_study(const ExperimentConfig& config)
{
    config.validate();
    const int k = config.coarse_exps.front();
    const int p = config.degrees.front();
    const int ell = ell_for(config, p, k, 0);
    const Discretization d = discretize(config, k);
    const WaveProblem problem = make_problem(config.problem);
    MultiscaleBasis basis = study_basis(config, d, p, ell, config.threads);
    const GalerkinSpace space = multiscale_space(std::move(basis));

    ThetaSchemeConfig ref;
    ref.theta = config.temporal_reference_theta;
    ref.tau = *std::min_element(config.temporal_taus.begin(), config.temporal_taus.end()) /
              config.temporal_reference_divisor;
    ref.steps = step_count(config.final_time, ref.tau);
    ref.initial = InitialStep::fourth_order;
    RunOptions ref_options;
    ref_options.record_energy = false;
    ref_options.store_steps = {ref.steps};
    const Vector reference = space.lift(run(space, d.system, ref, problem, ref_options).final_state());

    struct Point {
        double theta;
        InitialStep initial;
        double tau;
    };
    std::vector<Point> grid;
    for (const double theta : config.temporal_thetas) {
        for (const InitialStep initial : config.temporal_initial) {
            for (const double tau : config.temporal_taus) {
                grid.push_back({theta, initial, tau});
            }
        }
    }
    std::vector<PointResult> results(grid.size());
    parallel_for(static_cast<int>(grid.size()), config.threads, [&](int i) {
        const Point& g = grid[static_cast<std::size_t>(i)];
        PointResult& r = results[static_cast<std::size_t>(i)];
        r.tau = g.tau;
        try {
            ThetaSchemeConfig s;
            s.theta = g.theta;
            s.tau = g.tau;
            s.steps = step_count(config.final_time, g.tau);
            s.initial = g.initial;
            RunOptions options;
            options.record_energy = false;
            options.store_steps = {s.steps};
            const WaveTrajectory traj = run(space, d.system, s, problem, options);
            r.solve_seconds = traj.seconds;
            r.errors = error_norms(d.system, space, traj.final_state(), reference);
        } catch (const Error& e) {
            r.status = failure_status(e);
        }
    });

    Table t;
    t.study = "temporal";
    t.columns = {"coefficient", "p", "ell", "H", "theta", "initial_step", "tau", "steps", "reference_tau",
                 "a_err_rel", "l2_err_rel", "eoc_a", "eoc_l2", "solve_seconds", "status"};
    t.timing_columns = {"solve_seconds"};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Point& g = grid[i];
        const PointResult& r = results[i];
        std::string eoc_a;
        std::string eoc_l2;
        if (i > 0 && grid[i - 1].theta == g.theta && grid[i - 1].initial == g.initial) {
            eoc_a = eoc_cell(results[i - 1], r, grid[i - 1].tau, g.tau, false);
            eoc_l2 = eoc_cell(results[i - 1], r, grid[i - 1].tau, g.tau, true);
        }
        t.rows.push_back({config.coefficient.canonical(), std::to_string(p), std::to_string(ell),
                          csv_number(d.mesh.coarse_size()), csv_number(g.theta), to_string(g.initial),
                          csv_number(g.tau), std::to_string(step_count(config.final_time, g.tau)), csv_number(ref.tau),
                          error_cell(r, false), error_cell(r, true), eoc_a, eoc_l2, csv_number(r.solve_seconds),
                          r.status});
    }
    return t;
}

Table run_fem_comparison(const ExperimentConfig& config)
{
    config.validate();
    const auto discs = all_discretizations(config);
    const WaveProblem problem = make_problem(config.problem);
    const Vector reference = reference_final_state(config, discs.front());
    const std::size_t nk = discs.size();
    const std::size_t series = config.degrees.size() + 1; // FEM first, then each degree

    std::vector<PointResult> results(series * nk);
    parallel_for(static_cast<int>(results.size()), config.threads, [&](int i) {
        const std::size_t si = static_cast<std::size_t>(i) / nk;
        const std::size_t ki = static_cast<std::size_t>(i) % nk;
        const Discretization& d = discs[ki];
        if (si > 0) {
            const int p = config.degrees[si - 1];
            results[static_cast<std::size_t>(i)] = solve_point(config, d, problem, reference, p,
                                                               ell_for(config, p, config.coarse_exps[ki], ki),
                                                               inner_threads(config, results.size()));
            return;
        }
        PointResult& r = results[static_cast<std::size_t>(i)];
        const ThetaSchemeConfig scheme = method_scheme(config, d.mesh.coarse_exp());
        r.tau = scheme.tau;
        try {
            const GalerkinSpace space = coarse_fem_space(d.system);
            r.dofs = space.size();
            RunOptions options;
            options.record_energy = false;
            options.store_steps = {scheme.steps};
            const WaveTrajectory traj = run(space, d.system, scheme, problem, options);
            r.solve_seconds = traj.seconds;
            r.errors = error_norms(d.system, space, traj.final_state(), reference);
        } catch (const Error& e) {
            r.status = failure_status(e);
        }
    });

    Table t;
    t.study = "fem_compare";
    t.columns = {"coefficient", "method", "p", "ell", "H", "dofs", "tau", "a_err_rel", "l2_err_rel", "eoc_a",
                 "eoc_l2", "build_seconds", "solve_seconds", "status"};
    t.timing_columns = {"build_seconds", "solve_seconds"};
    for (std::size_t si = 0; si < series; ++si) {
        for (std::size_t ki = 0; ki < nk; ++ki) {
            const PointResult& r = results[si * nk + ki];
            const double h = coarse_size(config.coarse_exps[ki]);
            std::string eoc_a;
            std::string eoc_l2;
            if (ki > 0) {
                const double h_prev = coarse_size(config.coarse_exps[ki - 1]);
                eoc_a = eoc_cell(results[si * nk + ki - 1], r, h_prev, h, false);
                eoc_l2 = eoc_cell(results[si * nk + ki - 1], r, h_prev, h, true);
            }
            const bool fem = si == 0;
            t.rows.push_back({config.coefficient.canonical(), fem ? "fem" : "plod",
                              fem ? "1" : std::to_string(config.degrees[si - 1]), fem ? "" : std::to_string(r.ell),
                              csv_number(h), std::to_string(r.dofs), csv_number(r.tau), error_cell(r, false),
                              error_cell(r, true), eoc_a, eoc_l2, csv_number(r.build_seconds),
                              csv_number(r.solve_seconds), r.status});
        }
    }
    return t;
}

Table run_energy_audit(const ExperimentConfig& config)
{
    config.validate();
    const auto discs = all_discretizations(config);
    const WaveProblem problem = make_problem(config.problem);
    const std::size_t nk = discs.size();
    const std::size_t points = config.degrees.size() * nk;

    struct AuditResult {
        EnergyAudit audit;
        int ell = 0;
        int dofs = 0;
        ThetaSchemeConfig scheme;
        double seconds = nan;
        std::string status = "ok";
    };
    std::vector<AuditResult> results(points);
    parallel_for(static_cast<int>(points), config.threads, [&](int i) {
        const std::size_t pi = static_cast<std::size_t>(i) / nk;
        const std::size_t ki = static_cast<std::size_t>(i) % nk;
        const Discretization& d = discs[ki];
        const int p = config.degrees[pi];
        AuditResult& r = results[static_cast<std::size_t>(i)];
        r.ell = ell_for(config, p, config.coarse_exps[ki], ki);
        r.dofs = (p + 1) * (p + 1) * d.mesh.element_count();
        r.scheme = method_scheme(config, d.mesh.coarse_exp());
        try {
            MultiscaleBasis basis = study_basis(config, d, p, r.ell, inner_threads(config, points));
            const GalerkinSpace space = multiscale_space(std::move(basis));
            const RhsSampler rhs(space, d.system, problem);
            auto coefficients = [&](const SpatialFunction& f) -> Vector {
                return f ? Vector(space.restriction * interpolate(d.mesh, f)) : Vector(Vector::Zero(space.size()));
            };
            const WaveTrajectory traj = run(space, r.scheme, rhs, coefficients(problem.u0), coefficients(problem.v0));
            r.seconds = traj.seconds;
            r.audit = audit_energy(traj, rhs, r.scheme);
        } catch (const Error& e) {
            r.status = failure_status(e);
        }
    });

    Table t;
    t.study = "energy_audit";
    t.columns = {"coefficient", "p", "ell", "H", "dofs", "theta", "tau", "steps", "initial_energy", "final_energy",
                 "max_drift", "max_identity_residual", "solve_seconds", "status"};
    t.timing_columns = {"solve_seconds"};
    for (std::size_t i = 0; i < points; ++i) {
        const AuditResult& r = results[i];
        const bool ok = r.status == "ok";
        t.rows.push_back({config.coefficient.canonical(), std::to_string(config.degrees[i / nk]), std::to_string(r.ell),
                          csv_number(coarse_size(config.coarse_exps[i % nk])), std::to_string(r.dofs),
                          csv_number(r.scheme.theta), csv_number(r.scheme.tau), std::to_string(r.scheme.steps),
                          ok ? csv_number(r.audit.initial_energy) : "", ok ? csv_number(r.audit.final_energy) : "",
                          ok ? csv_number(r.audit.max_drift) : "", ok ? csv_number(r.audit.max_identity_residual) : "",
                          csv_number(r.seconds), r.status});
    }
    return t;
}

Table run_build_basis(const ExperimentConfig& config)
{
    config.validate();
    Table t;
    t.study = "build_basis";
    t.columns = {"coefficient", "p", "ell", "H", "dofs", "basis_nnz", "stiffness_nnz", "moment_residual",
                 "cache_hit", "build_seconds", "status"};
    t.timing_columns = {"cache_hit", "build_seconds"};
    for (const int p : config.degrees) {
        for (std::size_t ki = 0; ki < config.coarse_exps.size(); ++ki) {
            const int k = config.coarse_exps[ki];
            const int ell = ell_for(config, p, k, ki);
            std::vector<std::string> row{config.coefficient.canonical(), std::to_string(p), std::to_string(ell),
                                         csv_number(coarse_size(k))};
            try {
                const Discretization d = discretize(config, k);
                bool hit = false;
                const MultiscaleBasis b = study_basis(config, d, p, ell, config.threads, &hit);
                row.insert(row.end(), {std::to_string(b.size()), std::to_string(b.basis.nonZeros()),
                                       std::to_string(b.stiffness.nonZeros()), csv_number(b.moment_residual),
                                       hit ? "1" : "0", csv_number(b.build_seconds), "ok"});
            } catch (const Error& e) {
                row.insert(row.end(), {"", "", "", "", "", "", failure_status(e)});
            }
            t.rows.push_back(std::move(row));
        }
    }
    return t;
}

Table run_solve(const ExperimentConfig& config)
{
    config.validate();
    const int k = config.coarse_exps.front();
    const int p = config.degrees.front();
    const Discretization d = discretize(config, k);
    MultiscaleBasis basis = study_basis(config, d, p, ell_for(config, p, k, 0), config.threads);
    const GalerkinSpace space = multiscale_space(std::move(basis));
    const ThetaSchemeConfig scheme = method_scheme(config, k);
    const WaveTrajectory traj = run(space, d.system, scheme, make_problem(config.problem));

    Table t;
    t.study = "solve";
    t.columns = {"n", "t", "energy", "state_norm"};
    for (std::size_t n = 0; n < traj.states.size(); ++n) {
        const Vector& u = traj.states[n];
        t.rows.push_back({std::to_string(traj.steps[n]), csv_number(traj.steps[n] * scheme.tau),
                          n < traj.energies.size() ? csv_number(traj.energies[n]) : "",
                          csv_number(std::sqrt(u.dot(space.mass * u)))});
    }
    return t;
}

std::string version_string()
{
    return PLOD_VERSION;
}

void write_manifest(const std::filesystem::path& file, const ExperimentConfig& config, const std::string& command,
                    const std::vector<ManifestEntry>& outputs, double total_seconds)
{
    nlohmann::ordered_json j;
    j["command"] = command;
    j["plod_version"] = version_string();
    j["csv_schema"] = csv_schema_version;
    j["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                         std::to_string(EIGEN_MINOR_VERSION);
#if defined(__VERSION__)
    j["compiler"] = __VERSION__;
#endif
    nlohmann::ordered_json echo;
    for (const auto& [key, value] : config.entries()) {
        echo[key] = value;
    }
    j["config"] = echo;
    j["outputs"] = nlohmann::ordered_json::array();
    for (const ManifestEntry& o : outputs) {
        j["outputs"].push_back({{"file", o.file}, {"seconds", o.seconds}});
    }
    j["total_seconds"] = total_seconds;
    if (file.has_parent_path()) {
        std::filesystem::create_directories(file.parent_path());
    }
    std::ofstream out(file);
    if (!out) {
        throw ConfigError("cannot write " + file.string());
    }
    out << j.dump(2) << '\n';
}

} // namespace plod
