#include <benchmark/benchmark.h>

#include <metvol/volume.hpp>

using namespace metvol;

namespace {

void BM_JohnForm(benchmark::State& state) {
    const int q = static_cast<int>(state.range(0));
    const int d = q + 2;
    AmbientSpace space(d, NormSpec::linf());
    RngStream rng(11, 0);
    Subspace E = random_subspace(d, q, rng);
    for (auto _ : state) benchmark::DoNotOptimize(john_form(space, E, {}, 1).mvee_epsilon);
}
BENCHMARK(BM_JohnForm)->Arg(2)->Arg(3)->Arg(4);

void BM_UnitBallVolumeHull(benchmark::State& state) {
    const int q = static_cast<int>(state.range(0));
    const int d = q + 2;
    AmbientSpace space(d, NormSpec::lp(1.5));
    RngStream rng(13, 0);
    Subspace E = random_subspace(d, q, rng);
    for (auto _ : state) benchmark::DoNotOptimize(unit_ball_volume(space, E, {}, 1).value);
}
BENCHMARK(BM_UnitBallVolumeHull)->Arg(2)->Arg(3);

void BM_DeterminantLinf(benchmark::State& state) {
    const int q = static_cast<int>(state.range(0));
    const int d = q + 2;
    AmbientSpace space(d, NormSpec::linf());
    RngStream rng(17, 0);
    Matrix A(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) A(r, c) = rng.gaussian();
    Subspace E = random_subspace(d, q, rng);
    for (auto _ : state) benchmark::DoNotOptimize(determinant(space, A, E, {}, 1).value);
}
BENCHMARK(BM_DeterminantLinf)->Arg(2)->Arg(3);

}  // namespace
