#pragma once

#include <functional>
#include <string>
#include <vector>

namespace plod {

using SpatialFunction = std::function<double(double, double)>;
using TemporalFunction = std::function<double(double)>;

/// One separable source term g(x) s(t). The derivatives s', s'' are needed by the
/// fourth-order initial step; leave them empty if unknown.
struct SourceComponent {
    SpatialFunction space;
    TemporalFunction value;
    TemporalFunction d1;
    TemporalFunction d2;
};

struct WaveProblem {
    std::string name;
    SpatialFunction u0; // empty means zero
    SpatialFunction v0; // empty means zero
    std::vector<SourceComponent> source;

    [[nodiscard]] bool has_time_derivatives() const;
};

/// Built-in catalog:
///   zero                 u0 = v0 = 0, f = 0
///   sine_source          u0 = v0 = 0, f = sin(pi x) sin(pi y) sin^4(t)
///   bump_source          u0 = v0 = 0, f = sin^4(pi x) sin^4(pi y) sin^4(t)
///   smooth_initial       u0 = sin(pi x) sin(pi y), v0 = x(1-x) y(1-y),
///                        f = sin(2 pi x) sin(pi y) cos(t)
WaveProblem make_problem(const std::string& name);
std::vector<std::string> problem_names();

} // namespace plod
