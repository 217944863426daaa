#include "plod/problems.hpp"

#include "plod/error.hpp"

#include <cmath>
#include <numbers>

namespace plod {

namespace {

constexpr double pi = std::numbers::pi;

double pow4(double s)
{
    return s * s * s * s;
}

// sin^4(t) and its first two derivatives.
SourceComponent sin4_in_time(SpatialFunction space)
{
    return {std::move(space), [](double t) { return pow4(std::sin(t)); },
            [](double t) { return 4.0 * std::pow(std::sin(t), 3) * std::cos(t); },
            [](double t) {
                const double s = std::sin(t);
                const double c = std::cos(t);
                return 12.0 * s * s * c * c - 4.0 * s * s * s * s;
            }};
}

} // namespace

bool WaveProblem::has_time_derivatives() const
{
    for (const SourceComponent& component : source) {
        if (!component.d1 || !component.d2) {
            return false;
        }
    }
    return true;
}

WaveProblem make_problem(const std::string& name)
{
    WaveProblem problem;
    problem.name = name;
    if (name == "zero") {
        return problem;
    }
    if (name == "sine_source") {
        problem.source.push_back(sin4_in_time([](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); }));
        return problem;
    }
    if (name == "bump_source") {
        problem.source.push_back(
            sin4_in_time([](double x, double y) { return pow4(std::sin(pi * x)) * pow4(std::sin(pi * y)); }));
        return problem;
    }
    if (name == "smooth_initial") {
        problem.u0 = [](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); };
        problem.v0 = [](double x, double y) { return x * (1.0 - x) * y * (1.0 - y); };
        problem.source.push_back({[](double x, double y) { return std::sin(2.0 * pi * x) * std::sin(pi * y); },
                                  [](double t) { return std::cos(t); }, [](double t) { return -std::sin(t); },
                                  [](double t) { return -std::cos(t); }});
        return problem;
    }
    throw InvalidArgument("unknown problem '" + name + "'");
}

std::vector<std::string> problem_names()
{
    return {"zero", "sine_source", "bump_source", "smooth_initial"};
}

} // namespace plod
