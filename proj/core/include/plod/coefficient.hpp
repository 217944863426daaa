#pragma once

#include "plod/mesh.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace plod {

enum class CoefficientKind { checkerboard, analytic, constant };

/// Reproducible recipe of a coefficient field; everything needed to rebuild the values.
struct CoefficientDescriptor {
    CoefficientKind kind = CoefficientKind::constant;
    std::uint64_t seed = 0;
    int eps_exp = 0;
    double lo = 1.0;
    double hi = 1.0;

    /// key=value lines, one per field, prefixed with "coefficient.".
    [[nodiscard]] std::string to_config_lines() const;
    /// Canonical one-line form used for hashing and CSV labels.
    [[nodiscard]] std::string canonical() const;
    /// 64-bit FNV-1a hash of canonical().
    [[nodiscard]] std::uint64_t hash() const;
};

std::string to_string(CoefficientKind kind);
CoefficientKind coefficient_kind_from_string(const std::string& text);

/// Scalar diffusion coefficient, piecewise constant on fine cells (row-major).
struct CoefficientField {
    std::vector<double> values;
    double alpha = 1.0;
    double beta = 1.0;
    CoefficientDescriptor descriptor;

    [[nodiscard]] double operator[](int cell) const { return values[static_cast<std::size_t>(cell)]; }
};

/// Uniform-random value per eps-cell, drawn from std::mt19937_64 seeded with `seed`.
///
/// The draw order is row-major over eps-cells and each value is
/// lo + (hi - lo) * (word >> 11) * 2^-53 for consecutive 64-bit output words, so the field is
/// bit-identical on every platform with a conforming standard library. lo == hi yields a
/// constant field.
CoefficientField checkerboard(const MeshHierarchy& mesh, std::uint64_t seed, double lo, double hi);

/// 1 + sin(x1) sin(2 x2) / 2 sampled at fine-cell centers.
CoefficientField analytic_smooth(const MeshHierarchy& mesh);
double analytic_smooth_value(Point x);

CoefficientField constant_field(const MeshHierarchy& mesh, double value);

/// Rebuilds a field from its descriptor on the given mesh.
CoefficientField make_coefficient(const MeshHierarchy& mesh, const CoefficientDescriptor& descriptor);

/// Raw cell values, row-major, little-endian IEEE-754 binary64, no header.
void write_coefficient_raw(const CoefficientField& field, const std::filesystem::path& path);
std::vector<double> read_coefficient_raw(const std::filesystem::path& path);

} // namespace plod
