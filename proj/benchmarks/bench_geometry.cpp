#include <benchmark/benchmark.h>

#include <metvol/ambient.hpp>

using namespace metvol;

namespace {

Subspace fixture_subspace(int d, int q, std::uint64_t seed) {
    RngStream rng(seed, 0);
    return random_subspace(d, q, rng);
}

void BM_OperatorNormEuclid(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    RngStream rng(1, 0);
    Matrix A(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) A(r, c) = rng.gaussian();
    AmbientSpace space(d, NormSpec::euclidean());
    for (auto _ : state) benchmark::DoNotOptimize(operator_norm(space, A).value);
}
BENCHMARK(BM_OperatorNormEuclid)->Arg(4)->Arg(8);

void BM_OperatorNormLp(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    RngStream rng(1, 0);
    Matrix A(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) A(r, c) = rng.gaussian();
    AmbientSpace space(d, NormSpec::lp(1.5));
    for (auto _ : state) benchmark::DoNotOptimize(operator_norm(space, A).value);
}
BENCHMARK(BM_OperatorNormLp)->Arg(4)->Arg(6);

void BM_DistToSubspaceL1(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    AmbientSpace space(d, NormSpec::l1());
    Subspace F = fixture_subspace(d, d / 2, 3);
    RngStream rng(5, 0);
    Vector v = rng.gaussian_vector(d);
    for (auto _ : state) benchmark::DoNotOptimize(dist_to_subspace(space, v, F));
}
BENCHMARK(BM_DistToSubspaceL1)->Arg(4)->Arg(8);

void BM_GapLinf(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    AmbientSpace space(d, NormSpec::linf());
    Subspace U = fixture_subspace(d, 2, 7);
    Subspace V = fixture_subspace(d, 2, 8);
    for (auto _ : state) benchmark::DoNotOptimize(gap(space, U, V, sweep_budget(), 1));
}
BENCHMARK(BM_GapLinf)->Arg(4)->Arg(6);

void BM_AuerbachComplement(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    AmbientSpace space(d, NormSpec::linf());
    Subspace E = fixture_subspace(d, 2, 9);
    for (auto _ : state)
        benchmark::DoNotOptimize(auerbach_complement(space, E, inner_budget(), 1).proj_norm);
}
BENCHMARK(BM_AuerbachComplement)->Arg(4)->Arg(6);

}  // namespace
