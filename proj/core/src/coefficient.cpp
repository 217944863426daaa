#include "plod/coefficient.hpp"

#include "plod/error.hpp"
#include "plod/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace plod {

std::string to_string(CoefficientKind kind)
{
    switch (kind) {
    case CoefficientKind::checkerboard:
        return "checkerboard";
    case CoefficientKind::analytic:
        return "analytic";
    case CoefficientKind::constant:
        return "constant";
    }
    return "unknown";
}

CoefficientKind coefficient_kind_from_string(const std::string& text)
{
    if (text == "checkerboard") {
        return CoefficientKind::checkerboard;
    }
    if (text == "analytic") {
        return CoefficientKind::analytic;
    }
    if (text == "constant") {
        return CoefficientKind::constant;
    }
    throw ConfigError("unknown coefficient kind '" + text + "'");
}

std::string CoefficientDescriptor::to_config_lines() const
{
    std::ostringstream out;
    out << "coefficient.kind=" << to_string(kind) << '\n';
    out << "coefficient.seed=" << seed << '\n';
    out << "coefficient.eps_exp=" << eps_exp << '\n';
    out << "coefficient.lo=" << format_double(lo) << '\n';
    out << "coefficient.hi=" << format_double(hi) << '\n';
    return out.str();
}

std::string CoefficientDescriptor::canonical() const
{
    std::ostringstream out;
    out << to_string(kind);
    switch (kind) {
    case CoefficientKind::checkerboard:
        out << ":seed=" << seed << ":eps=" << eps_exp << ":lo=" << format_double(lo)
            << ":hi=" << format_double(hi);
        break;
    case CoefficientKind::analytic:
        out << ":A3";
        break;
    case CoefficientKind::constant:
        out << ":value=" << format_double(lo);
        break;
    }
    return out.str();
}

std::uint64_t CoefficientDescriptor::hash() const
{
    return fnv1a64(canonical());
}

CoefficientField checkerboard(const MeshHierarchy& mesh, std::uint64_t seed, double lo, double hi)
{
    if (!(lo > 0.0)) {
        throw InvalidArgument("checkerboard lower bound must be positive");
    }
    if (hi < lo) {
        throw InvalidArgument("checkerboard range is empty");
    }
    const int n_eps = mesh.eps_cells_per_dim();
    std::vector<double> eps_values(static_cast<std::size_t>(n_eps) * static_cast<std::size_t>(n_eps));
    std::mt19937_64 engine(seed);
    for (double& v : eps_values) {
        const double unit = static_cast<double>(engine() >> 11) * 0x1.0p-53;
        v = lo == hi ? lo : lo + (hi - lo) * unit;
    }

    CoefficientField field;
    field.values.resize(static_cast<std::size_t>(mesh.fine_cell_count()));
    for (int c = 0; c < mesh.fine_cell_count(); ++c) {
        field.values[static_cast<std::size_t>(c)] = eps_values[static_cast<std::size_t>(mesh.eps_cell_of_fine_cell(c))];
    }
    field.alpha = lo;
    field.beta = hi;
    field.descriptor = {CoefficientKind::checkerboard, seed, mesh.eps_exp(), lo, hi};
    return field;
}

double analytic_smooth_value(Point x)
{
    return 1.0 + 0.5 * std::sin(x.x) * std::sin(2.0 * x.y);
}

CoefficientField analytic_smooth(const MeshHierarchy& mesh)
{
    CoefficientField field;
    field.values.resize(static_cast<std::size_t>(mesh.fine_cell_count()));
    for (int c = 0; c < mesh.fine_cell_count(); ++c) {
        field.values[static_cast<std::size_t>(c)] = analytic_smooth_value(mesh.fine_cell_center(c));
    }
    field.alpha = 0.5;
    field.beta = 1.5;
    field.descriptor = {CoefficientKind::analytic, 0, mesh.eps_exp(), 0.5, 1.5};
    return field;
}

CoefficientField constant_field(const MeshHierarchy& mesh, double value)
{
    if (!(value > 0.0)) {
        throw InvalidArgument("constant coefficient must be positive");
    }
    CoefficientField field;
    field.values.assign(static_cast<std::size_t>(mesh.fine_cell_count()), value);
    field.alpha = value;
    field.beta = value;
    field.descriptor = {CoefficientKind::constant, 0, mesh.eps_exp(), value, value};
    return field;
}

CoefficientField make_coefficient(const MeshHierarchy& mesh, const CoefficientDescriptor& descriptor)
{
    switch (descriptor.kind) {
    case CoefficientKind::checkerboard:
        if (descriptor.eps_exp != mesh.eps_exp()) {
            throw InvalidArgument("coefficient eps exponent does not match the mesh");
        }
        return checkerboard(mesh, descriptor.seed, descriptor.lo, descriptor.hi);
    case CoefficientKind::analytic:
        return analytic_smooth(mesh);
    case CoefficientKind::constant:
        return constant_field(mesh, descriptor.lo);
    }
    throw InvalidArgument("unknown coefficient kind");
}

void write_coefficient_raw(const CoefficientField& field, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot open " + path.string() + " for writing");
    }
    for (double v : field.values) {
        write_f64_le(out, v);
    }
}

std::vector<double> read_coefficient_raw(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    const auto bytes = static_cast<std::size_t>(in.tellg());
    if (bytes % 8 != 0) {
        throw ConfigError("raw coefficient file size is not a multiple of 8");
    }
    in.seekg(0);
    std::vector<double> values(bytes / 8);
    for (double& v : values) {
        v = read_f64_le(in);
    }
    return values;
}

} // namespace plod
