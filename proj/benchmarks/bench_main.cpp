#include "plod/coefficient.hpp"
#include "plod/coarse_space.hpp"
#include "plod/fine_fem.hpp"
#include "plod/mesh.hpp"
#include "plod/multiscale.hpp"
#include "plod/problems.hpp"
#include "plod/wave_solver.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace plod;

CoefficientField rough(const MeshHierarchy& mesh) { return checkerboard(mesh, 1, 1.0, 10.0); }

void BM_FineAssembly(benchmark::State& state)
{
    const auto fine = static_cast<int>(state.range(0));
    const MeshHierarchy mesh = build_hierarchy(1, 5, fine);
    const CoefficientField a = rough(mesh);
    for (auto _ : state) {
        benchmark::DoNotOptimize(assemble(mesh, a));
    }
    state.counters["vertices"] = mesh.vertex_count();
}
BENCHMARK(BM_FineAssembly)->Arg(6)->Arg(7)->Unit(benchmark::kMillisecond);

// One patch saddle point solve: args are ell and p.
void BM_ElementCorrector(benchmark::State& state)
{
    const auto ell = static_cast<int>(state.range(0));
    const auto p = static_cast<int>(state.range(1));
    const MeshHierarchy mesh = build_hierarchy(4, 5, 7);
    const CoefficientField a = rough(mesh);
    const MomentMap moments = build_moment_map(mesh, p);
    const int element = mesh.element_index(8, 8);
    const Vector v = interpolate(mesh, [](double x, double y) { return x * (1 - x) * y * (1 - y); });
    for (auto _ : state) {
        benchmark::DoNotOptimize(element_corrector(mesh, a, moments, element, v, ell));
    }
}
BENCHMARK(BM_ElementCorrector)->ArgsProduct({{1, 2, 4}, {0, 1, 2}})->Unit(benchmark::kMillisecond);

// Full basis: args are p and ell on a 16 x 16 coarse mesh.
void BM_BuildBasis(benchmark::State& state)
{
    const auto p = static_cast<int>(state.range(0));
    const auto ell = static_cast<int>(state.range(1));
    const MeshHierarchy mesh = build_hierarchy(4, 5, 7);
    const CoefficientField a = rough(mesh);
    const FineSystem system = assemble(mesh, a);
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_basis(system, a, p, ell));
    }
}
BENCHMARK(BM_BuildBasis)->ArgsProduct({{0, 1}, {2, 3}})->Unit(benchmark::kSecond)->Iterations(1);

void BM_ThetaStep(benchmark::State& state)
{
    const double theta = state.range(0) == 0 ? 0.25 : 1.0 / 12.0;
    const MeshHierarchy mesh = build_hierarchy(3, 5, 6);
    const CoefficientField a = rough(mesh);
    const FineSystem system = assemble(mesh, a);
    const GalerkinSpace space = multiscale_space(build_basis(system, a, 1, 3));
    const WaveSolver solver(space, ThetaSchemeConfig{theta, 0x1.0p-8, 2, InitialStep::fourth_order});
    Vector prev = Vector::Zero(space.size());
    Vector now = Vector::Ones(space.size());
    const Vector load = Vector::Zero(space.size());
    for (auto _ : state) {
        Vector next = solver.step(prev, now, load);
        prev = std::move(now);
        now = std::move(next);
    }
    state.counters["dofs"] = space.size();
}
BENCHMARK(BM_ThetaStep)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_MaxEigenvalue(benchmark::State& state)
{
    const MeshHierarchy mesh = build_hierarchy(3, 5, 6);
    const CoefficientField a = rough(mesh);
    const FineSystem system = assemble(mesh, a);
    const GalerkinSpace space = multiscale_space(build_basis(system, a, 1, 3));
    for (auto _ : state) {
        benchmark::DoNotOptimize(max_eigenvalue(space));
    }
}
BENCHMARK(BM_MaxEigenvalue)->Unit(benchmark::kMillisecond);

} // namespace
BENCHMARK_MAIN();
