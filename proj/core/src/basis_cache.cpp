#include "plod/basis_cache.hpp"

#include "plod/error.hpp"
#include "plod/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace plod {

namespace {

constexpr char magic[8] = {'P', 'L', 'O', 'D', 'B', 'A', 'S', 'E'};
constexpr std::uint64_t format_version = 1;

void write_sparse(std::ostream& out, const SparseMatrix& m)
{
    SparseMatrix c = m;
    c.makeCompressed();
    write_u64_le(out, static_cast<std::uint64_t>(c.rows()));
    write_u64_le(out, static_cast<std::uint64_t>(c.cols()));
    write_u64_le(out, static_cast<std::uint64_t>(c.nonZeros()));
    for (Eigen::Index j = 0; j <= c.cols(); ++j) {
        write_u64_le(out, static_cast<std::uint64_t>(c.outerIndexPtr()[j]));
    }
    for (Eigen::Index k = 0; k < c.nonZeros(); ++k) {
        write_u64_le(out, static_cast<std::uint64_t>(c.innerIndexPtr()[k]));
    }
    for (Eigen::Index k = 0; k < c.nonZeros(); ++k) {
        write_f64_le(out, c.valuePtr()[k]);
    }
}

SparseMatrix read_sparse(std::istream& in)
{
    const auto rows = read_u64_le(in);
    const auto cols = read_u64_le(in);
    const auto nnz = read_u64_le(in);
    constexpr std::uint64_t limit = 1ULL << 31;
    if (rows >= limit || cols >= limit || nnz >= limit) {
        throw ConfigError("basis cache: matrix dimensions out of range");
    }
    std::vector<int> outer(static_cast<std::size_t>(cols + 1));
    for (auto& v : outer) {
        v = static_cast<int>(read_u64_le(in));
    }
    if (outer.front() != 0 || static_cast<std::uint64_t>(outer.back()) != nnz) {
        throw ConfigError("basis cache: inconsistent column pointers");
    }
    SparseMatrix m(static_cast<int>(rows), static_cast<int>(cols));
    m.reserve(static_cast<Eigen::Index>(nnz));
    std::vector<int> inner(static_cast<std::size_t>(nnz));
    for (auto& v : inner) {
        v = static_cast<int>(read_u64_le(in));
        if (v < 0 || static_cast<std::uint64_t>(v) >= rows) {
            throw ConfigError("basis cache: row index out of range");
        }
    }
    for (std::uint64_t j = 0; j < cols; ++j) {
        m.startVec(static_cast<Eigen::Index>(j));
        if (outer[j + 1] < outer[j]) {
            throw ConfigError("basis cache: column pointers decrease");
        }
        for (int k = outer[j]; k < outer[j + 1]; ++k) {
            m.insertBack(inner[static_cast<std::size_t>(k)], static_cast<Eigen::Index>(j)) = 0.0;
        }
    }
    m.finalize();
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(nnz); ++k) {
        m.valuePtr()[k] = read_f64_le(in);
    }
    return m;
}

} // namespace

std::string BasisKey::file_name() const
{
    std::ostringstream name;
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(coefficient_hash));
    name << "basis_H" << coarse_exp << "_e" << eps_exp << "_h" << fine_exp << "_p" << p << "_l" << ell << '_' << hash
         << ".bin";
    return name.str();
}

BasisKey basis_key(const MeshHierarchy& mesh, const CoefficientDescriptor& coefficient, int p, int ell)
{
    return {mesh.coarse_exp(), mesh.eps_exp(), mesh.fine_exp(), coefficient.hash(), p, ell};
}

void save_basis(const std::filesystem::path& file, const MultiscaleBasis& basis, const BasisKey& key)
{
    const std::filesystem::path partial = file.string() + ".tmp";
    {
        std::ofstream out(partial, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw ConfigError("cannot write basis cache " + partial.string());
        }
        out.write(magic, sizeof magic);
        write_u64_le(out, format_version);
        for (const int v : {key.coarse_exp, key.eps_exp, key.fine_exp}) {
            write_u64_le(out, static_cast<std::uint64_t>(v));
        }
        write_u64_le(out, key.coefficient_hash);
        write_u64_le(out, static_cast<std::uint64_t>(key.p));
        write_u64_le(out, static_cast<std::uint64_t>(key.ell));
        write_f64_le(out, basis.moment_residual);
        write_sparse(out, basis.basis);
        write_sparse(out, basis.stiffness);
        write_sparse(out, basis.mass);
        if (!out) {
            throw ConfigError("failed writing basis cache " + partial.string());
        }
    }
    std::filesystem::rename(partial, file);
}

std::optional<MultiscaleBasis> load_basis(const std::filesystem::path& file, const BasisKey& key)
{
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        return std::nullopt;
    }
    char head[8];
    in.read(head, sizeof head);
    if (in.gcount() != 8 || !std::equal(head, head + 8, magic)) {
        throw ConfigError("basis cache " + file.string() + " has a bad magic number");
    }
    if (read_u64_le(in) != format_version) {
        return std::nullopt;
    }
    BasisKey stored;
    stored.coarse_exp = static_cast<int>(read_u64_le(in));
    stored.eps_exp = static_cast<int>(read_u64_le(in));
    stored.fine_exp = static_cast<int>(read_u64_le(in));
    stored.coefficient_hash = read_u64_le(in);
    stored.p = static_cast<int>(read_u64_le(in));
    stored.ell = static_cast<int>(read_u64_le(in));
    if (!(stored == key)) {
        return std::nullopt;
    }
    MultiscaleBasis basis;
    basis.mesh = MeshHierarchy(key.coarse_exp, key.eps_exp, key.fine_exp);
    basis.p = key.p;
    basis.ell = key.ell;
    basis.moment_residual = read_f64_le(in);
    basis.basis = read_sparse(in);
    basis.stiffness = read_sparse(in);
    basis.mass = read_sparse(in);
    const int modes = (key.p + 1) * (key.p + 1);
    if (basis.basis.rows() != basis.mesh.vertex_count() || basis.basis.cols() != basis.mesh.element_count() * modes ||
        basis.stiffness.rows() != basis.basis.cols() || basis.mass.rows() != basis.basis.cols()) {
        throw ConfigError("basis cache " + file.string() + " does not match its key");
    }
    basis.support.resize(static_cast<std::size_t>(basis.basis.cols()));
    for (int c = 0; c < basis.basis.cols(); ++c) {
        basis.support[static_cast<std::size_t>(c)] =
            patch_rect(basis.mesh, c / modes, c % modes == 0 ? key.ell + 1 : key.ell);
    }
    return basis;
}

MultiscaleBasis cached_basis(const std::filesystem::path& cache_dir, const FineSystem& system,
                             const CoefficientField& coefficient, int p, int ell, int threads, bool* hit)
{
    const BasisKey key = basis_key(system.mesh, coefficient.descriptor, p, ell);
    if (hit != nullptr) {
        *hit = false;
    }
    if (!cache_dir.empty()) {
        if (auto loaded = load_basis(cache_dir / key.file_name(), key)) {
            if (hit != nullptr) {
                *hit = true;
            }
            return std::move(*loaded);
        }
    }
    MultiscaleBasis basis = build_basis(system, coefficient, p, ell, threads);
    if (!cache_dir.empty()) {
        std::filesystem::create_directories(cache_dir);
        save_basis(cache_dir / key.file_name(), basis, key);
    }
    return basis;
}

} // namespace plod
