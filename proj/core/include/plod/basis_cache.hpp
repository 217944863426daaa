#pragma once

#include "plod/coefficient.hpp"
#include "plod/multiscale.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace plod {

/// Identifies a basis: mesh exponents, coefficient recipe, degree and localization.
struct BasisKey {
    int coarse_exp = 0;
    int eps_exp = 0;
    int fine_exp = 0;
    std::uint64_t coefficient_hash = 0;
    int p = 0;
    int ell = 0;

    [[nodiscard]] std::string file_name() const;
    bool operator==(const BasisKey&) const = default;
};

BasisKey basis_key(const MeshHierarchy& mesh, const CoefficientDescriptor& coefficient, int p, int ell);

/// Binary layout (all integers u64, reals f64, little-endian):
///   "PLODBASE" magic, format version, the six key fields, moment residual, then the basis,
///   stiffness and mass as compressed sparse columns (rows, cols, nnz, column pointers,
///   row indices, values).
void save_basis(const std::filesystem::path& file, const MultiscaleBasis& basis, const BasisKey& key);

/// Returns nothing if the file is absent or was written for another key; throws ConfigError
/// on a damaged file.
std::optional<MultiscaleBasis> load_basis(const std::filesystem::path& file, const BasisKey& key);

/// Loads from `cache_dir` if possible, else builds and (with a non-empty cache_dir) stores.
MultiscaleBasis cached_basis(const std::filesystem::path& cache_dir, const FineSystem& system,
                             const CoefficientField& coefficient, int p, int ell, int threads = 1,
                             bool* hit = nullptr);

} // namespace plod
