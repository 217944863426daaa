#include "plod/config.hpp"

#include "plod/error.hpp"
#include "plod/io.hpp"
#include "plod/mesh.hpp"
#include "plod/problems.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace plod {

namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& text)
{
    std::vector<std::string> items;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) {
            throw ConfigError("empty entry in list '" + text + "'");
        }
        items.push_back(item);
    }
    if (items.empty()) {
        throw ConfigError("empty list");
    }
    return items;
}

double parse_plain(const std::string& text)
{
    double value = 0.0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError("not a number: '" + text + "'");
    }
    return value;
}

int parse_int(const std::string& text)
{
    int value = 0;
    const std::string t = trim(text);
    const char* end = t.data() + t.size();
    const auto [ptr, ec] = std::from_chars(t.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError("not an integer: '" + text + "'");
    }
    return value;
}

std::uint64_t parse_u64(const std::string& text)
{
    std::uint64_t value = 0;
    const std::string t = trim(text);
    const char* end = t.data() + t.size();
    const auto [ptr, ec] = std::from_chars(t.data(), end, value);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError("not an unsigned integer: '" + text + "'");
    }
    return value;
}

std::vector<int> parse_int_list(const std::string& text)
{
    std::vector<int> out;
    for (const std::string& item : split_list(text)) {
        out.push_back(parse_int(item));
    }
    return out;
}

std::vector<double> parse_number_list(const std::string& text)
{
    std::vector<double> out;
    for (const std::string& item : split_list(text)) {
        out.push_back(parse_number(item));
    }
    return out;
}

template <class T, class F>
std::string join(const std::vector<T>& items, F&& format)
{
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        out += (i ? "," : "") + format(items[i]);
    }
    return out;
}

std::string join_ints(const std::vector<int>& items)
{
    return join(items, [](int v) { return std::to_string(v); });
}

std::string join_numbers(const std::vector<double>& items)
{
    return join(items, [](double v) { return format_double(v); });
}

TauRule tau_rule_from_string(const std::string& text)
{
    if (text == "fixed") {
        return TauRule::fixed;
    }
    if (text == "proportional") {
        return TauRule::proportional;
    }
    throw ConfigError("unknown tau rule '" + text + "' (expected fixed or proportional)");
}

std::string to_string(TauRule rule)
{
    return rule == TauRule::fixed ? "fixed" : "proportional";
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters()
{
    static const std::map<std::string, Setter> table = {
        {"mesh.coarse_exps", [](ExperimentConfig& c, const std::string& v) { c.coarse_exps = parse_int_list(v); }},
        {"mesh.eps_exp",
         [](ExperimentConfig& c, const std::string& v) {
             c.eps_exp = parse_int(v);
             c.coefficient.eps_exp = c.eps_exp;
         }},
        {"mesh.fine_exp", [](ExperimentConfig& c, const std::string& v) { c.fine_exp = parse_int(v); }},
        {"coefficient.kind",
         [](ExperimentConfig& c, const std::string& v) { c.coefficient.kind = coefficient_kind_from_string(v); }},
        {"coefficient.seed", [](ExperimentConfig& c, const std::string& v) { c.coefficient.seed = parse_u64(v); }},
        {"coefficient.lo", [](ExperimentConfig& c, const std::string& v) { c.coefficient.lo = parse_number(v); }},
        {"coefficient.hi", [](ExperimentConfig& c, const std::string& v) { c.coefficient.hi = parse_number(v); }},
        {"method.p", [](ExperimentConfig& c, const std::string& v) { c.degrees = parse_int_list(v); }},
        {"method.ell",
         [](ExperimentConfig& c, const std::string& v) {
             if (v == "rule") {
                 c.ell_rule = EllRule::rule;
             } else if (v == "saturated") {
                 c.ell_rule = EllRule::saturated;
             } else {
                 c.ell_rule = EllRule::list;
                 c.ells = parse_int_list(v);
             }
         }},
        {"method.ell_factor", [](ExperimentConfig& c, const std::string& v) { c.ell_factor = parse_number(v); }},
        {"method.theta", [](ExperimentConfig& c, const std::string& v) { c.time.theta = parse_number(v); }},
        {"method.tau_rule", [](ExperimentConfig& c, const std::string& v) { c.time.tau_rule = tau_rule_from_string(v); }},
        {"method.tau", [](ExperimentConfig& c, const std::string& v) { c.time.tau = parse_number(v); }},
        {"method.initial_step",
         [](ExperimentConfig& c, const std::string& v) { c.time.initial = initial_step_from_string(v); }},
        {"method.final_time", [](ExperimentConfig& c, const std::string& v) { c.final_time = parse_number(v); }},
        {"reference.theta", [](ExperimentConfig& c, const std::string& v) { c.reference.theta = parse_number(v); }},
        {"reference.tau_rule",
         [](ExperimentConfig& c, const std::string& v) { c.reference.tau_rule = tau_rule_from_string(v); }},
        {"reference.tau", [](ExperimentConfig& c, const std::string& v) { c.reference.tau = parse_number(v); }},
        {"reference.initial_step",
         [](ExperimentConfig& c, const std::string& v) { c.reference.initial = initial_step_from_string(v); }},
        {"problem.name", [](ExperimentConfig& c, const std::string& v) { c.problem = v; }},
        {"temporal.taus", [](ExperimentConfig& c, const std::string& v) { c.temporal_taus = parse_number_list(v); }},
        {"temporal.thetas",
         [](ExperimentConfig& c, const std::string& v) { c.temporal_thetas = parse_number_list(v); }},
        {"temporal.initial_steps",
         [](ExperimentConfig& c, const std::string& v) {
             c.temporal_initial.clear();
             for (const std::string& item : split_list(v)) {
                 c.temporal_initial.push_back(initial_step_from_string(item));
             }
         }},
        {"temporal.reference_divisor",
         [](ExperimentConfig& c, const std::string& v) { c.temporal_reference_divisor = parse_int(v); }},
        {"temporal.reference_theta",
         [](ExperimentConfig& c, const std::string& v) { c.temporal_reference_theta = parse_number(v); }},
        {"localization.ells",
         [](ExperimentConfig& c, const std::string& v) { c.localization_ells = parse_int_list(v); }},
        {"output.dir", [](ExperimentConfig& c, const std::string& v) { c.output_dir = v; }},
        {"output.name", [](ExperimentConfig& c, const std::string& v) { c.output_name = v; }},
        {"run.threads", [](ExperimentConfig& c, const std::string& v) { c.threads = parse_int(v); }},
        {"run.cache", [](ExperimentConfig& c, const std::string& v) { c.cache_dir = v; }},
    };
    return table;
}

} // namespace

double parse_number(const std::string& raw)
{
    const std::string text = trim(raw);
    if (text.empty()) {
        throw ConfigError("empty number");
    }
    if (const auto caret = text.find('^'); caret != std::string::npos) {
        const double base = parse_plain(trim(text.substr(0, caret)));
        const double exponent = parse_plain(trim(text.substr(caret + 1)));
        return std::pow(base, exponent);
    }
    if (const auto slash = text.find('/'); slash != std::string::npos) {
        const double den = parse_plain(trim(text.substr(slash + 1)));
        if (den == 0.0) {
            throw ConfigError("division by zero in '" + text + "'");
        }
        return parse_plain(trim(text.substr(0, slash))) / den;
    }
    return parse_plain(text);
}

std::string to_string(InitialStep step)
{
    return step == InitialStep::fourth_order ? "fourth_order" : "reduced";
}

InitialStep initial_step_from_string(const std::string& text)
{
    if (text == "fourth_order") {
        return InitialStep::fourth_order;
    }
    if (text == "reduced") {
        return InitialStep::reduced;
    }
    throw ConfigError("unknown initial step '" + text + "' (expected fourth_order or reduced)");
}

void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value)
{
    const auto it = setters().find(key);
    if (it == setters().end()) {
        throw ConfigError("unknown configuration key '" + key + "'");
    }
    try {
        it->second(config, trim(value));
    } catch (const ConfigError& e) {
        throw ConfigError(key + ": " + e.what());
    } catch (const InvalidArgument& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

ExperimentConfig parse_config(std::istream& in, const std::string& source)
{
    ExperimentConfig config;
    std::string section;
    std::set<std::string> seen;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string where = source + ":" + std::to_string(number) + ": ";
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError(where + "malformed section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(where + "expected key = value");
        }
        const std::string name = trim(line.substr(0, eq));
        const std::string key = section.empty() ? name : section + "." + name;
        if (!seen.insert(key).second) {
            throw ConfigError(where + "repeated key '" + key + "'");
        }
        try {
            set_config_value(config, key, line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
    config.validate();
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in) {
        throw ConfigError("cannot open configuration " + file.string());
    }
    return parse_config(in, file.string());
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::entries() const
{
    std::string ell_text = ell_rule == EllRule::rule ? "rule" : ell_rule == EllRule::saturated ? "saturated" : join_ints(ells);
    return {
        {"mesh.coarse_exps", join_ints(coarse_exps)},
        {"mesh.eps_exp", std::to_string(eps_exp)},
        {"mesh.fine_exp", std::to_string(fine_exp)},
        {"coefficient.kind", to_string(coefficient.kind)},
        {"coefficient.seed", std::to_string(coefficient.seed)},
        {"coefficient.lo", format_double(coefficient.lo)},
        {"coefficient.hi", format_double(coefficient.hi)},
        {"method.p", join_ints(degrees)},
        {"method.ell", ell_text},
        {"method.ell_factor", format_double(ell_factor)},
        {"method.theta", format_double(time.theta)},
        {"method.tau_rule", to_string(time.tau_rule)},
        {"method.tau", format_double(time.tau)},
        {"method.initial_step", to_string(time.initial)},
        {"method.final_time", format_double(final_time)},
        {"reference.theta", format_double(reference.theta)},
        {"reference.tau_rule", to_string(reference.tau_rule)},
        {"reference.tau", format_double(reference.tau)},
        {"reference.initial_step", to_string(reference.initial)},
        {"problem.name", problem},
        {"temporal.taus", join_numbers(temporal_taus)},
        {"temporal.thetas", join_numbers(temporal_thetas)},
        {"temporal.initial_steps",
         join(temporal_initial, [](InitialStep s) { return to_string(s); })},
        {"temporal.reference_divisor", std::to_string(temporal_reference_divisor)},
        {"temporal.reference_theta", format_double(temporal_reference_theta)},
        {"localization.ells", join_ints(localization_ells)},
        {"output.dir", output_dir},
        {"output.name", output_name},
        {"run.threads", std::to_string(threads)},
        {"run.cache", cache_dir},
    };
}

void ExperimentConfig::validate() const
{
    if (coarse_exps.empty() || degrees.empty()) {
        throw ConfigError("mesh.coarse_exps and method.p must not be empty");
    }
    for (const int k : coarse_exps) {
        try {
            MeshHierarchy(k, eps_exp, fine_exp);
        } catch (const InvalidArgument& e) {
            throw ConfigError(std::string("mesh: ") + e.what());
        }
        for (const int p : degrees) {
            if (p < 0) {
                throw ConfigError("method.p: degrees must be non-negative");
            }
            if ((1 << (fine_exp - k)) < p + 2) {
                throw ConfigError("mesh: h = 2^-" + std::to_string(fine_exp) + " is too coarse for p = " +
                                  std::to_string(p) + " on H = 2^-" + std::to_string(k) + " (need h <= H/(p+2))");
            }
        }
    }
    if (coefficient.kind == CoefficientKind::checkerboard && !(coefficient.lo > 0.0 && coefficient.hi >= coefficient.lo)) {
        throw ConfigError("coefficient: need 0 < lo <= hi");
    }
    if (ell_rule == EllRule::list && ells.size() != 1 && ells.size() != coarse_exps.size()) {
        throw ConfigError("method.ell: give one radius or one per entry of mesh.coarse_exps");
    }
    if (ell_rule == EllRule::list && std::any_of(ells.begin(), ells.end(), [](int l) { return l < 0; })) {
        throw ConfigError("method.ell: radii must be non-negative");
    }
    for (const TimeSettings* t : {&time, &reference}) {
        if (!(t->theta >= 0.0 && t->theta <= 0.5)) {
            throw ConfigError("theta must lie in [0, 1/2]");
        }
        if (!(t->tau > 0.0)) {
            throw ConfigError("tau must be positive");
        }
    }
    if (!(final_time > 0.0)) {
        throw ConfigError("method.final_time must be positive");
    }
    for (const int k : coarse_exps) {
        step_count(final_time, method_tau(*this, k));
    }
    step_count(final_time, reference_tau(*this));
    for (const double tau : temporal_taus) {
        step_count(final_time, tau);
        step_count(final_time, tau / temporal_reference_divisor);
    }
    if (temporal_reference_divisor < 1) {
        throw ConfigError("temporal.reference_divisor must be positive");
    }
    for (const double theta : temporal_thetas) {
        if (!(theta >= 0.0 && theta <= 0.5)) {
            throw ConfigError("temporal.thetas must lie in [0, 1/2]");
        }
    }
    if (threads < 1) {
        throw ConfigError("run.threads must be at least 1");
    }
    const auto names = problem_names();
    if (std::find(names.begin(), names.end(), problem) == names.end()) {
        throw ConfigError("problem.name: unknown problem '" + problem + "'");
    }
}

int ell_rule(double factor, int p, int coarse_exp)
{
    return std::max(1, static_cast<int>(std::ceil(factor * (p + 2) * coarse_exp / 3.0 - 1e-12)));
}

int ell_for(const ExperimentConfig& config, int p, int coarse_exp, std::size_t index_in_list)
{
    switch (config.ell_rule) {
    case EllRule::rule:
        return ell_rule(config.ell_factor, p, coarse_exp);
    case EllRule::saturated:
        return std::max(0, (1 << coarse_exp) - 1);
    case EllRule::list:
        return config.ells.size() == 1 ? config.ells.front() : config.ells.at(index_in_list);
    }
    return 1;
}

double method_tau(const ExperimentConfig& config, int coarse_exp)
{
    return config.time.tau_rule == TauRule::fixed ? config.time.tau : config.time.tau * std::ldexp(1.0, -coarse_exp);
}

double reference_tau(const ExperimentConfig& config)
{
    return config.reference.tau_rule == TauRule::fixed ? config.reference.tau
                                                       : config.reference.tau * std::ldexp(1.0, -config.fine_exp);
}

int step_count(double final_time, double tau)
{
    const double n = final_time / tau;
    const double rounded = std::round(n);
    if (rounded < 2 || std::abs(n - rounded) > 1e-9 * n) {
        throw ConfigError("time step " + format_double(tau) + " does not divide the final time " +
                          format_double(final_time) + " into at least two steps");
    }
    return static_cast<int>(rounded);
}

void apply_paper_scale(ExperimentConfig& config)
{
    config.fine_exp = 8;
    config.eps_exp = 6;
    config.coefficient.eps_exp = 6;
    if (config.time.tau_rule == TauRule::fixed) {
        config.time.tau = 0x1.0p-9;
    }
    if (config.reference.tau_rule == TauRule::fixed) {
        config.reference.tau = 0x1.0p-9;
    }
}

} // namespace plod
